"""Word-level dataflow IR.

A :class:`WordNetlist` is a list of :class:`Node` objects in topological
order (register inputs excepted: they may point forward, closing the
sequential loop).  Node ids are list indices.

Datapath values are signed two's-complement words; ``key``, ``sel`` and
``bit`` nodes are 1-bit unsigned.  Operations are defined modulo
``2**width`` of the consuming node, which is exact whenever the final
output fits its declared width.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

COMBINATIONAL_OPS = {
    "x", "key", "sel", "const", "shl", "add", "sub", "addsub", "mux",
    "constmux", "mul", "table", "bit", "output",
}
SEQUENTIAL_OPS = {"counter", "reg", "eqc"}


@dataclass
class Node:
    op: str
    args: tuple[int, ...]
    width: int
    signed: bool = True
    attrs: dict[str, Any] = field(default_factory=dict)


class TruthTable:
    """Rows of ``(literals, output)``; ``literals`` maps input position to bit.

    Unlisted input positions are don't-cares.  Rows must be disjoint, so
    the output is the single matching row's value, or 0 when none match.
    """

    def __init__(self, n_inputs: int, out_width: int, rows: Sequence[tuple[dict[int, int], int]],
                 input_names: Sequence[str] | None = None):
        self.n_inputs = n_inputs
        self.out_width = out_width
        self.rows = [(dict(sorted(lits.items())), int(out)) for lits, out in rows]
        self.input_names = list(input_names) if input_names else [f"in{t}" for t in range(n_inputs)]

    def lookup(self, bits: Sequence[Any]) -> Any:
        """Evaluate on scalar bits or on equal-shape integer arrays."""
        out = 0
        for lits, val in self.rows:
            if not val:
                continue
            match = 1
            for pos, b in lits.items():
                match = match * (bits[pos] if b else 1 - bits[pos])
            out = out + val * match
        return out

    def pattern(self, lits: dict[int, int]) -> str:
        return "".join(str(lits[t]) if t in lits else "X" for t in range(self.n_inputs))


@dataclass
class WordNetlist:
    nodes: list[Node]
    name: str = "tmcm"
    meta: dict[str, Any] = field(default_factory=dict)

    def ids(self, op: str) -> list[int]:
        return [k for k, nd in enumerate(self.nodes) if nd.op == op]

    @property
    def ibw(self) -> int:
        return self.nodes[self.ids("x")[0]].width

    @property
    def p(self) -> int:
        return len(self.ids("key"))

    @property
    def m(self) -> int:
        return len(self.ids("sel"))

    @property
    def out_width(self) -> int:
        return self.nodes[self.ids("output")[0]].width

    @property
    def is_sequential(self) -> bool:
        return any(nd.op in SEQUENTIAL_OPS for nd in self.nodes)

    def validate(self) -> None:
        keys = sorted(self.nodes[k].attrs["index"] for k in self.ids("key"))
        sels = sorted(self.nodes[k].attrs["index"] for k in self.ids("sel"))
        if keys != list(range(len(keys))) or sels != list(range(len(sels))):
            raise ValueError("key/select inputs must be numbered densely from 0")
        for k, nd in enumerate(self.nodes):
            if nd.width < 1:
                raise ValueError(f"node {k} ({nd.op}) has width {nd.width}")
            for a in nd.args:
                if not 0 <= a < len(self.nodes):
                    raise ValueError(f"node {k} references missing node {a}")
                if a >= k and nd.op != "reg":
                    raise ValueError(f"node {k} ({nd.op}) is not in topological order")


class WordBuilder:
    """Appends nodes to a netlist and hands back their ids."""

    def __init__(self, name: str = "tmcm"):
        self.nodes: list[Node] = []
        self.name = name
        self._keys: dict[int, int] = {}
        self._sels: dict[int, int] = {}
        self._x: int | None = None

    def _add(self, op, args, width, signed=True, **attrs) -> int:
        self.nodes.append(Node(op, tuple(args), int(width), signed, attrs))
        return len(self.nodes) - 1

    def width(self, a: int) -> int:
        return self.nodes[a].width

    def x(self, width: int) -> int:
        if self._x is None:
            self._x = self._add("x", (), width, name="x")
        return self._x

    def key(self, index: int) -> int:
        if index not in self._keys:
            self._keys[index] = self._add("key", (), 1, False, index=index)
        return self._keys[index]

    def sel(self, index: int) -> int:
        if index not in self._sels:
            self._sels[index] = self._add("sel", (), 1, False, index=index)
        return self._sels[index]

    def const(self, value: int, width: int) -> int:
        return self._add("const", (), width, value=int(value))

    def shl(self, a: int, amount: int, width: int) -> int:
        if amount == 0 and width == self.width(a):
            return a
        return self._add("shl", (a,), width, amount=amount)

    def add(self, a: int, b: int, width: int) -> int:
        return self._add("add", (a, b), width)

    def sub(self, a: int, b: int, width: int) -> int:
        return self._add("sub", (a, b), width)

    def addsub(self, a: int, b: int, s: int, width: int) -> int:
        """``a + b`` when ``s`` is 0, ``a - b`` when 1."""
        return self._add("addsub", (a, b, s), width)

    def mux(self, select: Sequence[int], inputs: Sequence[int], width: int) -> int:
        """Select bits LSB first; an index past the last input picks the last."""
        if len(inputs) == 1:
            return inputs[0]
        return self._add("mux", tuple(select) + tuple(inputs), width, nsel=len(select))

    def constmux(self, select: Sequence[int], values: Sequence[int], width: int) -> int:
        return self._add("constmux", tuple(select), width, values=tuple(int(v) for v in values))

    def mul(self, a: int, b: int, width: int) -> int:
        return self._add("mul", (a, b), width)

    def table(self, tbl: TruthTable, inputs: Sequence[int], kind: str) -> int:
        return self._add("table", tuple(inputs), tbl.out_width, False, table=tbl, kind=kind)

    def bit(self, a: int, index: int) -> int:
        return self._add("bit", (a,), 1, False, index=index)

    def eqc(self, a: int, value: int) -> int:
        return self._add("eqc", (a,), 1, False, value=value)

    def counter(self, modulo: int, width: int) -> int:
        return self._add("counter", (), width, False, modulo=modulo)

    def reg(self, width: int, name: str) -> int:
        """Register placeholder; wire its input later with :meth:`connect`."""
        return self._add("reg", (), width, name=name)

    def connect(self, reg: int, d: int, enable: int | None = None) -> None:
        nd = self.nodes[reg]
        nd.args = (d,) if enable is None else (d, enable)

    def output(self, a: int, width: int, name: str = "f") -> int:
        return self._add("output", (a,), width, name=name)

    def build(self, **meta) -> WordNetlist:
        w = WordNetlist(self.nodes, self.name, dict(meta))
        w.validate()
        return w


def _is_array(v) -> bool:
    return isinstance(v, np.ndarray)


def _mux_pick(idx, data):
    last = len(data) - 1
    if not _is_array(idx) and not any(_is_array(d) for d in data):
        return data[min(int(idx), last)]
    parts = np.broadcast_arrays(np.asarray(idx, dtype=np.int64),
                                *[np.asarray(d, dtype=np.int64) for d in data])
    idx = np.minimum(parts[0], last)
    arrs = np.stack(parts[1:])
    return np.take_along_axis(arrs, idx[None, ...], 0)[0]


def _wrap(v, width: int, signed: bool):
    """Reduce ``v`` modulo ``2**width`` into the signed or unsigned range."""
    mask = (1 << width) - 1
    if _is_array(v):
        if width >= 63:
            return v
        u = v & mask
        return np.where(u >> (width - 1), u - (1 << width), u) if signed else u
    u = v & mask
    if signed and u >> (width - 1):
        return u - (1 << width)
    return u


def evaluate(w: WordNetlist, x, i, key_bits: Sequence[Any], state: dict[int, Any] | None = None,
             check: bool = True) -> tuple[Any, list]:
    """Combinational evaluation of every node.

    ``x`` and ``i`` may be Python ints or integer arrays; ``key_bits`` is a
    sequence of 0/1 scalars or arrays.  Internal arithmetic is exact and
    each node result is reduced to its declared width only where the
    lowering would reduce it too.  With ``check`` the output node must hold
    its exact unwrapped value, so a too-narrow output is reported instead of
    wrapping silently.

    Returns ``(output, values)``.
    """
    vals: list[Any] = [None] * len(w.nodes)
    out = None
    for k, nd in enumerate(w.nodes):
        op, a = nd.op, nd.args
        if op == "x":
            v = x
        elif op == "key":
            v = key_bits[nd.attrs["index"]]
        elif op == "sel":
            v = (i >> nd.attrs["index"]) & 1
        elif op == "const":
            v = nd.attrs["value"]
        elif op == "shl":
            v = vals[a[0]] << nd.attrs["amount"]
        elif op == "add":
            v = vals[a[0]] + vals[a[1]]
        elif op == "sub":
            v = vals[a[0]] - vals[a[1]]
        elif op == "addsub":
            v = vals[a[0]] + vals[a[1]] * (1 - 2 * vals[a[2]])
        elif op in ("mux", "constmux"):
            ns = nd.attrs["nsel"] if op == "mux" else len(a)
            idx = 0
            for t in range(ns):
                idx = idx + (vals[a[t]] << t)
            if op == "mux":
                v = _mux_pick(idx, [vals[d] for d in a[ns:]])
            else:
                table = nd.attrs["values"]
                v = np.asarray(table, dtype=np.int64)[np.minimum(idx, len(table) - 1)] \
                    if _is_array(idx) else table[min(idx, len(table) - 1)]
        elif op == "mul":
            v = vals[a[0]] * vals[a[1]]
        elif op == "table":
            v = nd.attrs["table"].lookup([vals[t] for t in a])
        elif op == "bit":
            v = (vals[a[0]] >> nd.attrs["index"]) & 1
        elif op == "eqc":
            c = vals[a[0]] == nd.attrs["value"]
            v = c.astype(np.int64) if _is_array(c) else int(c)
        elif op in ("counter", "reg"):
            v = (state or {}).get(k, 0)
        elif op == "output":
            v = vals[a[0]]
            if check:
                lo, hi = -(1 << (nd.width - 1)), (1 << (nd.width - 1)) - 1
                bad = (v < lo) | (v > hi)
                if np.any(bad):
                    raise OverflowError(f"output exceeds its {nd.width}-bit width")
            out = v
        else:
            raise ValueError(f"unknown op {op!r}")
        if op in ("shl", "add", "sub", "addsub", "mul") and not check:
            v = _wrap(v, nd.width, True)
        vals[k] = v
    return out, vals


def step(w: WordNetlist, x, key_bits: Sequence[int], state: dict[int, Any]) -> tuple[Any, dict[int, Any], list]:
    """One clock cycle of a sequential netlist: returns ``(output, next_state, values)``."""
    out, vals = evaluate(w, x, 0, key_bits, state)
    nxt = dict(state)
    for k, nd in enumerate(w.nodes):
        if nd.op == "counter":
            nxt[k] = (state.get(k, 0) + 1) % nd.attrs["modulo"]
        elif nd.op == "reg":
            if len(nd.args) == 1 or vals[nd.args[1]]:
                nxt[k] = vals[nd.args[0]]
    return out, nxt, vals
