"""Obfuscated TMCM datapaths: multiplier-based and multiplierless.

``tmcm-mul``: one key-driven constant multiplexor per target, an ``n``-input
multiplexor on the primary select ``i`` and a signed multiplier.

``tmcm-sa``: an encoder maps ``(k, i)`` to the index ``g`` of a constant in
the global order, a select table maps ``g`` to datapath controls, and a
cascade of adder/subtractors sums multiplexed shifts of ``x``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from ..core import clog2, signed_width
from ..decoy import DecoyPlan
from ..netlist.word import TruthTable, WordBuilder, WordNetlist
from .shiftadd import digits

ARCHITECTURES = ("tmcm-mul", "tmcm-sa")


def global_order(plan: DecoyPlan) -> list[int]:
    """All target and decoy constants, group by group, slot by slot."""
    return [c for group in plan.slots for c in group]


def group_offsets(plan: DecoyPlan) -> list[int]:
    off, acc = [], 0
    for group in plan.slots:
        off.append(acc)
        acc += len(group)
    return off


def output_width(constants: Sequence[int], ibw: int) -> int:
    """Narrowest signed width holding every ``c * x`` for ``ibw``-bit ``x``."""
    xlo, xhi = -(1 << (ibw - 1)), (1 << (ibw - 1)) - 1
    prods = [c * v for c in constants for v in (xlo, xhi)]
    return signed_width(min(prods), max(prods))


@dataclass
class EncoderTable:
    """``(key pattern, i) -> g`` rows; key patterns use ``X`` for don't-care."""

    order: list[int]
    p: int
    m: int
    g_width: int
    rows: list[tuple[str, int, int]]

    def truth(self) -> TruthTable:
        rows = []
        for kpat, i, g in self.rows:
            lits = {t: int(ch) for t, ch in enumerate(kpat) if ch != "X"}
            for b in range(self.m):
                lits[self.p + b] = (i >> b) & 1
            rows.append((lits, g))
        names = [f"k{t}" for t in range(self.p)] + [f"i{b}" for b in range(self.m)]
        return TruthTable(self.p + self.m, self.g_width, rows, names)

    def lookup(self, key_bits: Sequence[int], i: int) -> int | None:
        for kpat, ri, g in self.rows:
            if ri == i and all(ch == "X" or int(ch) == b for ch, b in zip(kpat, key_bits)):
                return g
        return None

    def to_dict(self) -> dict:
        return {"order": self.order, "p": self.p, "m": self.m, "g_width": self.g_width,
                "rows": [{"k": k, "i": i, "g": g} for k, i, g in self.rows]}

    def to_text(self) -> str:
        head = "".join(f"k{t}" for t in range(self.p)) + " " + (
            "".join(f"i{b}" for b in reversed(range(self.m))) or "-")
        lines = ["Encoder table", f"{head} | g"]
        for k, i, g in self.rows:
            ibits = format(i, f"0{self.m}b") if self.m else "-"
            lines.append(f"{k} {ibits} | {format(g, f'0{self.g_width}b')} ({self.order[g]}x)")
        return "\n".join(lines) + "\n"


@dataclass
class SelectTable:
    """``g -> control word`` rows for the shift-add datapath."""

    fields: list[tuple[str, int]]
    rows: list[tuple[int, dict[str, int]]]
    order: list[int]
    g_width: int

    @property
    def width(self) -> int:
        return max(1, sum(w for _, w in self.fields))

    def pack(self, values: dict[str, int]) -> int:
        word, pos = 0, 0
        for name, w in self.fields:
            word |= values.get(name, 0) << pos
            pos += w
        return word

    def field_pos(self, name: str) -> int:
        pos = 0
        for nm, w in self.fields:
            if nm == name:
                return pos
            pos += w
        raise KeyError(name)

    def truth(self) -> TruthTable:
        rows = []
        for g, vals in self.rows:
            lits = {b: (g >> b) & 1 for b in range(self.g_width)}
            rows.append((lits, self.pack(vals)))
        return TruthTable(self.g_width, self.width, rows, [f"g{b}" for b in range(self.g_width)])

    def to_dict(self) -> dict:
        return {"fields": [{"name": n, "width": w} for n, w in self.fields],
                "rows": [{"g": g, "constant": self.order[g], "controls": vals} for g, vals in self.rows]}

    def to_text(self) -> str:
        names = [n for n, _ in self.fields]
        lines = ["Select table", "g | " + " ".join(names) + " | f"]
        for g, vals in self.rows:
            cells = " ".join(str(vals.get(n, 0)).rjust(len(n)) for n in names)
            lines.append(f"{format(g, f'0{self.g_width}b')} | {cells} | {self.order[g]}x")
        return "\n".join(lines) + "\n"


def build_encoder_table(plan: DecoyPlan) -> EncoderTable:
    order = global_order(plan)
    offs = group_offsets(plan)
    gw = max(1, clog2(len(order)))
    rows = []
    for j, ((lo, hi), off) in enumerate(zip(plan.grouping, offs)):
        q = hi - lo
        for v in range(1 << q):
            kpat = ["X"] * plan.p
            for t in range(q):
                kpat[lo + t] = str((v >> (q - 1 - t)) & 1)
            rows.append(("".join(kpat), j, off + v))
    return EncoderTable(order, plan.p, plan.base.m, gw, rows)


def _signed_terms(c: int, representation: str) -> list[tuple[int, int]]:
    """``(sign, shift)`` terms, a positive term first when one exists."""
    ts = sorted(((d, t) for t, d in digits(c, representation)), key=lambda st: -st[1])
    pos = [k for k, (s, _) in enumerate(ts) if s > 0]
    if pos:
        ts.insert(0, ts.pop(pos[0]))
    return ts


def plan_datapath(order: Sequence[int], representation: str = "csd") -> tuple[list, SelectTable]:
    """Stage options and per-constant controls for the mux-add cascade.

    Returns ``(stages, table)`` where ``stages[t]`` is
    ``(shift options, has_zero, signs used)``.
    """
    terms = [_signed_terms(c, representation) for c in order]
    depth = max(len(t) for t in terms)
    stages = []
    fields: list[tuple[str, int]] = []
    for t in range(depth):
        shifts = sorted({ts[t][1] for ts in terms if len(ts) > t})
        zero = any(len(ts) <= t for ts in terms)
        signs = {ts[t][0] for ts in terms if len(ts) > t}
        nopt = len(shifts) + zero
        stages.append((shifts, zero, signs))
        if nopt > 1:
            fields.append((f"m{t}", clog2(nopt)))
        if (t == 0 and -1 in signs) or (t > 0 and len(signs) > 1):
            fields.append((f"s{t}", 1))
    gw = max(1, clog2(len(order)))
    rows = []
    for g, ts in enumerate(terms):
        vals = {}
        for t, (shifts, zero, signs) in enumerate(stages):
            if len(ts) > t:
                sgn, sh = ts[t]
                vals[f"m{t}"] = shifts.index(sh)
                vals[f"s{t}"] = int(sgn < 0)
            else:
                vals[f"m{t}"] = len(shifts)
                vals[f"s{t}"] = 0
        names = {n for n, _ in fields}
        rows.append((g, {k: v for k, v in vals.items() if k in names}))
    return stages, SelectTable(fields, rows, list(order), gw)


def emit_tmcm_mul(b: WordBuilder, plan: DecoyPlan, x: int, sel_bits: Sequence[int],
                  key_ids: Sequence[int], out_w: int) -> int:
    cw = plan.base.mbw + 1
    groups = []
    for (lo, hi), slots in zip(plan.grouping, plan.slots):
        if hi == lo:
            groups.append(b.const(slots[0], cw))
        else:
            groups.append(b.constmux(list(reversed(key_ids[lo:hi])), slots, cw))
    c = b.mux(list(sel_bits), groups, cw)
    return b.mul(c, x, out_w)


def emit_tmcm_sa(b: WordBuilder, plan: DecoyPlan, x: int, sel_bits: Sequence[int],
                 key_ids: Sequence[int], out_w: int, representation: str = "csd"):
    enc = build_encoder_table(plan)
    order = enc.order
    stages, st = plan_datapath(order, representation)
    if len(order) > 1:
        g = b.table(enc.truth(), list(key_ids) + list(sel_bits), "encoder")
        g_bits = [b.bit(g, t) for t in range(enc.g_width)]
        ctrl = b.table(st.truth(), g_bits, "select") if st.fields else None
    elif st.fields:
        ctrl = b.const(st.pack(st.rows[0][1]), st.width + 1)
    else:
        ctrl = None

    def field_bits(name, width):
        pos = st.field_pos(name)
        return [b.bit(ctrl, pos + t) for t in range(width)]

    widths = dict(st.fields)
    shifted: dict[int, int] = {}

    def sh(k):
        if k not in shifted:
            shifted[k] = b.shl(x, k, out_w)
        return shifted[k]

    zero = None
    acc = None
    for t, (shifts, has_zero, signs) in enumerate(stages):
        opts = [sh(k) for k in shifts]
        if has_zero:
            if zero is None:
                zero = b.const(0, out_w)
            opts.append(zero)
        sel = field_bits(f"m{t}", widths[f"m{t}"]) if f"m{t}" in widths else []
        operand = b.mux(sel, opts, out_w)
        if t == 0:
            if "s0" in widths:
                acc = b.addsub(b.const(0, out_w), operand, field_bits("s0", 1)[0], out_w)
            else:
                acc = operand
        elif f"s{t}" in widths:
            acc = b.addsub(acc, operand, field_bits(f"s{t}", 1)[0], out_w)
        elif signs == {-1}:
            acc = b.sub(acc, operand, out_w)
        else:
            acc = b.add(acc, operand, out_w)
    if acc is not None and b.width(acc) != out_w:
        acc = b.shl(acc, 0, out_w)
    return acc, enc, st


def _front(plan: DecoyPlan, name: str):
    b = WordBuilder(name)
    x = b.x(plan.base.ibw)
    sel_bits = [b.sel(t) for t in range(plan.base.m)]
    key_ids = [b.key(t) for t in range(plan.p)]
    return b, x, sel_bits, key_ids


def _meta(plan: DecoyPlan, arch: str) -> dict:
    # plan digest is deliberately omitted: it hashes the secret slot placement
    return {"arch": arch, "ibw": plan.base.ibw, "n": plan.n, "m": plan.base.m, "p": plan.p,
            "r": plan.r}


def build_tmcm_mul(plan: DecoyPlan, name: str = "tmcm") -> WordNetlist:
    b, x, sel_bits, key_ids = _front(plan, name)
    out_w = output_width(global_order(plan), plan.base.ibw)
    f = emit_tmcm_mul(b, plan, x, sel_bits, key_ids, out_w)
    b.output(f, out_w)
    return b.build(**_meta(plan, "tmcm-mul"))


def build_tmcm_sa(plan: DecoyPlan, representation: str = "csd",
                  name: str = "tmcm") -> tuple[WordNetlist, EncoderTable, SelectTable]:
    b, x, sel_bits, key_ids = _front(plan, name)
    out_w = output_width(global_order(plan), plan.base.ibw)
    f, enc, st = emit_tmcm_sa(b, plan, x, sel_bits, key_ids, out_w, representation)
    b.output(f, out_w)
    return b.build(**_meta(plan, "tmcm-sa"), representation=representation), enc, st


def build(plan: DecoyPlan, arch: str, name: str = "tmcm") -> WordNetlist:
    if arch == "tmcm-mul":
        return build_tmcm_mul(plan, name)
    if arch == "tmcm-sa":
        return build_tmcm_sa(plan, name=name)[0]
    raise ValueError(f"unknown architecture {arch!r}")


def tables_json(enc: EncoderTable, st: SelectTable) -> str:
    return json.dumps({"encoder": enc.to_dict(), "select": st.to_dict()}, indent=2, sort_keys=True) + "\n"
