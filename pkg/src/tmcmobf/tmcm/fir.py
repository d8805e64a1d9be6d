"""Folded FIR filter wrapped around one (obfuscated) TMCM block.

Every input sample takes ``N`` clock cycles.  A ``ceil(log2 N)``-bit
counter drives the TMCM select input; on count ``t`` the block multiplies
``h_t`` by tap ``x(k - t)``, taken from a cascade of ``N - 1`` registers.
The accumulator restarts when the counter wraps to 0 and the output
register captures the finished sum on count ``N - 1``.
"""
from __future__ import annotations

from ..core import clog2
from ..decoy import DecoyPlan
from ..netlist.word import WordBuilder, WordNetlist
from .arch import emit_tmcm_mul, emit_tmcm_sa, global_order, output_width


def build_folded_fir(plan: DecoyPlan, taps: int, arch: str = "tmcm-mul") -> WordNetlist:
    N = taps
    if plan.n != N:
        raise ValueError(f"plan has {plan.n} coefficients but the filter has {N} taps")
    ibw = plan.base.ibw
    b = WordBuilder("fir")
    x = b.x(ibw)
    keys = [b.key(t) for t in range(plan.p)]
    cw = max(1, clog2(N))
    cnt = b.counter(N, cw)
    cbits = [b.bit(cnt, t) for t in range(cw)]
    first = b.eqc(cnt, 0)
    last = b.eqc(cnt, N - 1)

    delay = []
    for t in range(1, N):
        delay.append(b.reg(ibw, f"x_d{t}"))
    for t, r in enumerate(delay):
        b.connect(r, x if t == 0 else delay[t - 1], last)
    tap = b.mux(cbits, [x] + delay, ibw)

    prod_w = output_width(global_order(plan), ibw)
    sel_bits = cbits[:plan.base.m]
    if arch == "tmcm-mul":
        prod = emit_tmcm_mul(b, plan, tap, sel_bits, keys, prod_w)
    elif arch == "tmcm-sa":
        prod = emit_tmcm_sa(b, plan, tap, sel_bits, keys, prod_w)[0]
    else:
        raise ValueError(f"unknown architecture {arch!r}")

    acc_w = prod_w + clog2(N)
    acc = b.reg(acc_w, "acc")
    y = b.reg(acc_w, "y")
    zero = b.const(0, acc_w)
    acc_in = b.mux([first], [acc, zero], acc_w)
    total = b.add(acc_in, prod, acc_w)
    b.connect(acc, total)
    b.connect(y, total, last)
    b.output(y, acc_w, "y")
    return b.build(arch=arch, taps=N, ibw=ibw, p=plan.p, folded=True)
