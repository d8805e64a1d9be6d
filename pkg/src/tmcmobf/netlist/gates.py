"""Bit-level combinational netlists.

Gates are stored in topological order as ``net -> (type, fanins)``.  Every
net is driven once; primary inputs are partitioned into data, select and
key bits.  Simulation is bit-parallel: each net carries a Python integer
whose bit ``t`` is the net's value under input vector ``t``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

GATE_TYPES = ("AND", "OR", "NAND", "NOR", "XOR", "XNOR", "NOT", "BUF", "CONST0", "CONST1")


@dataclass
class GateNetlist:
    data_inputs: list[str]
    select_inputs: list[str]
    key_inputs: list[str]
    gates: dict[str, tuple[str, tuple[str, ...]]]
    outputs: list[str]
    name: str = "tmcm"
    meta: dict = field(default_factory=dict)
    _compiled: object = field(default=None, repr=False, compare=False)

    @property
    def inputs(self) -> list[str]:
        return self.data_inputs + self.select_inputs + self.key_inputs

    @property
    def primary_inputs(self) -> list[str]:
        return self.data_inputs + self.select_inputs

    @property
    def p(self) -> int:
        return len(self.key_inputs)

    def validate(self) -> None:
        known = set(self.inputs)
        if len(known) != len(self.inputs):
            raise ValueError("duplicate primary input names")
        for net, (typ, fanins) in self.gates.items():
            if typ not in GATE_TYPES:
                raise ValueError(f"{net}: unknown gate type {typ}")
            if net in known:
                raise ValueError(f"net {net} driven twice")
            for f in fanins:
                if f not in known:
                    raise ValueError(f"{net}: fanin {f} undriven or not topologically earlier")
            known.add(net)
        for o in self.outputs:
            if o not in known:
                raise ValueError(f"output {o} is not driven")

    def copy(self, **changes) -> "GateNetlist":
        d = dict(data_inputs=list(self.data_inputs), select_inputs=list(self.select_inputs),
                 key_inputs=list(self.key_inputs), gates=dict(self.gates),
                 outputs=list(self.outputs), name=self.name, meta=dict(self.meta))
        d.update(changes)
        return GateNetlist(**d)

    def fanout_counts(self) -> dict[str, int]:
        cnt = {n: 0 for n in self.inputs}
        for net, (_, fanins) in self.gates.items():
            cnt.setdefault(net, 0)
            for f in fanins:
                cnt[f] += 1
        for o in self.outputs:
            cnt[o] += 1
        return cnt

    # -- simulation -------------------------------------------------------

    def _compile(self):
        if self._compiled is not None:
            return self._compiled
        names = {n: f"v{t}" for t, n in enumerate(list(self.inputs) + list(self.gates))}
        lines = ["def _sim(inp, M):"]
        for n in self.inputs:
            lines.append(f"    {names[n]} = inp[{n!r}]")
        for net, (typ, fi) in self.gates.items():
            a = [names[f] for f in fi]
            if typ == "AND":
                e = " & ".join(a)
            elif typ == "OR":
                e = " | ".join(a)
            elif typ == "XOR":
                e = " ^ ".join(a)
            elif typ == "NAND":
                e = f"~({' & '.join(a)}) & M"
            elif typ == "NOR":
                e = f"~({' | '.join(a)}) & M"
            elif typ == "XNOR":
                e = f"~({' ^ '.join(a)}) & M"
            elif typ == "NOT":
                e = f"~{a[0]} & M"
            elif typ == "BUF":
                e = a[0]
            elif typ == "CONST0":
                e = "0"
            else:
                e = "M"
            lines.append(f"    {names[net]} = {e}")
        lines.append(f"    return [{', '.join(names[o] for o in self.outputs)}]")
        ns: dict = {}
        exec("\n".join(lines), ns)
        self._compiled = ns["_sim"]
        return self._compiled

    def simulate(self, assignment: Mapping[str, int], n_vectors: int = 1) -> list[int]:
        """Evaluate all outputs; each input value packs ``n_vectors`` bits."""
        missing = [n for n in self.inputs if n not in assignment]
        if missing:
            raise KeyError(f"missing input bits: {missing[:5]}")
        return self._compile()(assignment, (1 << n_vectors) - 1)

    # -- structure --------------------------------------------------------

    def depth(self) -> int:
        lvl = {n: 0 for n in self.inputs}
        best = 0
        for net, (typ, fi) in self.gates.items():
            if typ in ("CONST0", "CONST1"):
                lvl[net] = 0
                continue
            lvl[net] = 1 + max((lvl[f] for f in fi), default=0) if typ != "BUF" else lvl[fi[0]]
        for o in self.outputs:
            best = max(best, lvl[o])
        return best

    def transitive_fanout(self, sources: Iterable[str]) -> set[str]:
        dep = set(sources)
        for net, (_, fi) in self.gates.items():
            if any(f in dep for f in fi):
                dep.add(net)
        return dep


def stats(g: GateNetlist) -> dict[str, int]:
    """Gate count (logic gates only), longest path in gates, key-input count."""
    count = sum(1 for typ, _ in g.gates.values() if typ not in ("BUF", "CONST0", "CONST1"))
    return {"gate_count": count, "depth": g.depth(), "key_count": g.p,
            "inputs": len(g.inputs), "outputs": len(g.outputs)}


Lit = "str | int"  # a net name, or the constant 0 / 1


class GateBuilder:
    """Emits 2-input gates with constant folding and structural hashing."""

    def __init__(self):
        self.gates: dict[str, tuple[str, tuple[str, ...]]] = {}
        self._hash: dict[tuple, str] = {}
        self._neg: dict[str, str] = {}
        self._count = 0

    def _new(self, typ: str, fanins: tuple) -> str:
        key = (typ, fanins if typ in ("NOT",) else tuple(sorted(fanins)))
        hit = self._hash.get(key)
        if hit is not None:
            return hit
        net = f"n{self._count}"
        self._count += 1
        self.gates[net] = (typ, tuple(fanins))
        self._hash[key] = net
        return net

    def NOT(self, a):
        if isinstance(a, int):
            return 1 - a
        if a in self._neg:
            return self._neg[a]
        n = self._new("NOT", (a,))
        self._neg[a] = n
        self._neg[n] = a
        return n

    def AND(self, a, b):
        if a == 0 or b == 0:
            return 0
        if a == 1:
            return b
        if b == 1 or a == b:
            return a
        if self._neg.get(a) == b:
            return 0
        return self._new("AND", (a, b))

    def OR(self, a, b):
        if a == 1 or b == 1:
            return 1
        if a == 0:
            return b
        if b == 0 or a == b:
            return a
        if self._neg.get(a) == b:
            return 1
        return self._new("OR", (a, b))

    def XOR(self, a, b):
        if isinstance(a, int) and isinstance(b, int):
            return a ^ b
        if isinstance(a, int):
            a, b = b, a
        if b == 0:
            return a
        if b == 1:
            return self.NOT(a)
        if a == b:
            return 0
        if self._neg.get(a) == b:
            return 1
        return self._new("XOR", (a, b))

    def MUX(self, s, a, b):
        """``b`` when ``s`` is 1 else ``a``; four gates in the general case."""
        if s == 0 or a == b:
            return a
        if s == 1:
            return b
        if a == 0 and b == 1:
            return s
        if a == 1 and b == 0:
            return self.NOT(s)
        return self.OR(self.AND(self.NOT(s), a), self.AND(s, b))

    def full_add(self, a, b, c):
        t = self.XOR(a, b)
        s = self.XOR(t, c)
        co = self.OR(self.AND(a, b), self.AND(c, t))
        return s, co

    def add(self, a: Sequence, b: Sequence, cin=0) -> list:
        out = []
        for x, y in zip(a, b):
            s, cin = self.full_add(x, y, cin)
            out.append(s)
        return out

    def and_tree(self, lits: Sequence):
        lits = list(lits)
        if not lits:
            return 1
        while len(lits) > 1:
            lits = [self.AND(lits[t], lits[t + 1]) if t + 1 < len(lits) else lits[t]
                    for t in range(0, len(lits), 2)]
        return lits[0]

    def or_tree(self, lits: Sequence):
        lits = list(lits)
        if not lits:
            return 0
        while len(lits) > 1:
            lits = [self.OR(lits[t], lits[t + 1]) if t + 1 < len(lits) else lits[t]
                    for t in range(0, len(lits), 2)]
        return lits[0]

    def finish(self, data_inputs, select_inputs, key_inputs, outputs: Sequence, out_names: Sequence[str],
               name: str = "tmcm") -> GateNetlist:
        """Freeze into a netlist whose output nets carry ``out_names``.

        Unused gates are swept; an output bit that is a constant, an input,
        or shared with another output gets its own BUF/CONST gate.
        """
        inputs = set(data_inputs) | set(select_inputs) | set(key_inputs)
        live = set(o for o in outputs if isinstance(o, str))
        for net in reversed(list(self.gates)):
            if net in live:
                live.update(f for f in self.gates[net][1])
        rename: dict[str, str] = {}
        extra: list[tuple[str, tuple[str, tuple[str, ...]]]] = []
        for o, nm in zip(outputs, out_names):
            if isinstance(o, int):
                extra.append((nm, ("CONST1" if o else "CONST0", ())))
            elif o in inputs or o in rename:
                extra.append((nm, ("BUF", (rename.get(o, o),))))
            else:
                rename[o] = nm
        gates: dict[str, tuple[str, tuple[str, ...]]] = {}
        for net, (typ, fi) in self.gates.items():
            if net not in live:
                continue
            gates[rename.get(net, net)] = (typ, tuple(rename.get(f, f) for f in fi))
        for nm, gate in extra:
            gates[nm] = (gate[0], tuple(rename.get(f, f) for f in gate[1]))
        g = GateNetlist(list(data_inputs), list(select_inputs), list(key_inputs), gates,
                        list(out_names), name)
        g.validate()
        return g
