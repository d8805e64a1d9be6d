"""Bit-blasting of combinational word netlists."""
from __future__ import annotations

from .gates import GateBuilder, GateNetlist
from .word import WordNetlist


class LoweringError(ValueError):
    pass


def _fit(bits: list, width: int, signed: bool) -> list:
    if len(bits) >= width:
        return bits[:width]
    fill = bits[-1] if (signed and bits) else 0
    return bits + [fill] * (width - len(bits))


def _const_bits(v: int, width: int) -> list[int]:
    u = v & ((1 << width) - 1)
    return [(u >> t) & 1 for t in range(width)]


def _mux_tree(gb: GateBuilder, select: list, leaves: list) -> object:
    size = 1 << len(select)
    level = list(leaves) + [leaves[-1]] * (size - len(leaves))
    for s in select:
        level = [gb.MUX(s, level[t], level[t + 1]) for t in range(0, len(level), 2)]
    return level[0]


def _multiply(gb: GateBuilder, a: list, b: list, width: int) -> list:
    """Signed shift-add array: one AND row per multiplier bit of ``a``."""
    if len(a) > len(b):
        a, b = b, a
    bb = _fit(b, width, True)
    acc = [0] * width
    top = len(a) - 1
    for t, at in enumerate(a):
        if t >= width:
            break
        row = [0] * t + [gb.AND(at, bb[u]) for u in range(width - t)]
        if t == top:
            acc = gb.add(acc, [gb.NOT(r) for r in row], 1)
        else:
            acc = gb.add(acc, row)
    return acc


def lower_to_gates(w: WordNetlist, name: str | None = None) -> GateNetlist:
    """Lower to AND/OR/XOR/NOT gates with ripple-carry arithmetic.

    Input nets are ``x_<b>``, ``i_<b>`` and ``k_<b>``; output bits are
    ``f_<b>``, all LSB first.
    """
    if w.is_sequential:
        raise LoweringError("sequential netlists cannot be lowered to combinational gates")
    gb = GateBuilder()
    bits: list[list] = [[] for _ in w.nodes]
    data, sels, keys = [], [], []
    outputs: list = []
    for k, nd in enumerate(w.nodes):
        op, a, wd = nd.op, nd.args, nd.width

        def arg(t, width=wd):
            src = w.nodes[a[t]]
            return _fit(bits[a[t]], width, src.signed)

        if op == "x":
            names = [f"x_{t}" for t in range(wd)]
            data.extend(names)
            v = list(names)
        elif op == "key":
            net = f"k_{nd.attrs['index']}"
            keys.append(net)
            v = [net]
        elif op == "sel":
            net = f"i_{nd.attrs['index']}"
            sels.append(net)
            v = [net]
        elif op == "const":
            v = _const_bits(nd.attrs["value"], wd)
        elif op == "shl":
            s = nd.attrs["amount"]
            v = ([0] * s + arg(0, wd))[:wd]
        elif op == "add":
            v = gb.add(arg(0), arg(1))
        elif op == "sub":
            v = gb.add(arg(0), [gb.NOT(b) for b in arg(1)], 1)
        elif op == "addsub":
            s = bits[a[2]][0]
            v = gb.add(arg(0), [gb.XOR(b, s) for b in arg(1)], s)
        elif op == "mux":
            ns = nd.attrs["nsel"]
            select = [bits[a[t]][0] for t in range(ns)]
            ins = [_fit(bits[d], wd, w.nodes[d].signed) for d in a[ns:]]
            v = [_mux_tree(gb, select, [col[t] for col in ins]) for t in range(wd)]
        elif op == "constmux":
            select = [bits[s][0] for s in a]
            cols = [_const_bits(c, wd) for c in nd.attrs["values"]]
            v = [_mux_tree(gb, select, [col[t] for col in cols]) for t in range(wd)]
        elif op == "mul":
            v = _multiply(gb, bits[a[0]], bits[a[1]], wd)
        elif op == "table":
            tbl = nd.attrs["table"]
            ins = [bits[t][0] for t in a]
            terms = []
            for lits, out in tbl.rows:
                if out:
                    term = gb.and_tree([ins[pos] if b else gb.NOT(ins[pos]) for pos, b in lits.items()])
                    terms.append((term, out))
            v = [gb.or_tree([term for term, out in terms if (out >> b) & 1]) for b in range(wd)]
        elif op == "bit":
            src = bits[a[0]]
            idx = nd.attrs["index"]
            v = [src[idx] if idx < len(src) else (src[-1] if w.nodes[a[0]].signed else 0)]
        elif op == "output":
            v = arg(0)
            outputs.extend(v)
        else:
            raise LoweringError(f"cannot lower node {k} of type {op!r}")
        bits[k] = v
    data.sort(key=lambda s: int(s.split("_")[1]))
    sels.sort(key=lambda s: int(s.split("_")[1]))
    keys.sort(key=lambda s: int(s.split("_")[1]))
    out_names = [f"f_{t}" for t in range(len(outputs))]
    return gb.finish(data, sels, keys, outputs, out_names, name or w.name)
