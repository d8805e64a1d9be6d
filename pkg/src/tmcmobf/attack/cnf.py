"""Clause store and Tseitin encoding of gate netlists.

Literals follow DIMACS: variable ``v`` is ``v`` (true) or ``-v`` (false).
The encoder propagates Python booleans through gates, so a netlist copy
whose inputs are fixed shrinks to the logic that still depends on the
remaining variables.  Gates are hashed across the whole clause store: two
copies of key-independent logic get the same variables.
"""
from __future__ import annotations

from typing import Mapping, Sequence, Union

from ..netlist.gates import GateNetlist

Lit = Union[int, bool]


class CNF:
    def __init__(self):
        self.nvars = 0
        self.clauses: list[list[int]] = []
        self.maps: dict[str, dict[str, Lit]] = {}
        self._hash: dict[tuple, int] = {}

    def new_var(self) -> int:
        self.nvars += 1
        return self.nvars

    def add(self, lits: Sequence[int]) -> None:
        if not lits:
            raise ValueError("empty clause")
        for l in lits:
            if l == 0 or abs(l) > self.nvars:
                raise ValueError(f"literal {l} outside 1..{self.nvars}")
        self.clauses.append(list(lits))

    def to_dimacs(self, comments: Sequence[str] = ()) -> str:
        out = [f"c {c}" for c in comments]
        out.append(f"p cnf {self.nvars} {len(self.clauses)}")
        out += [" ".join(map(str, c)) + " 0" for c in self.clauses]
        return "\n".join(out) + "\n"

    # -- gate templates ----------------------------------------------------

    def AND(self, lits: Sequence[Lit]) -> Lit:
        rest = set()
        for l in lits:
            if l is False:
                return False
            if l is True:
                continue
            if -l in rest:
                return False
            rest.add(l)
        if not rest:
            return True
        if len(rest) == 1:
            return rest.pop()
        key = ("and",) + tuple(sorted(rest))
        hit = self._hash.get(key)
        if hit is not None:
            return hit
        out = self.new_var()
        for l in key[1:]:
            self.clauses.append([-out, l])
        self.clauses.append([out] + [-l for l in key[1:]])
        self._hash[key] = out
        return out

    def OR(self, lits: Sequence[Lit]) -> Lit:
        return _neg(self.AND([_neg(l) for l in lits]))

    def XOR(self, lits: Sequence[Lit]) -> Lit:
        parity = False
        vs: list[int] = []
        for l in lits:
            if isinstance(l, bool):
                parity ^= l
                continue
            if l < 0:
                parity = not parity
                l = -l
            if l in vs:
                vs.remove(l)
            else:
                vs.append(l)
        acc: Lit = False
        for v in vs:
            acc = v if acc is False else self._xor2(acc, v)
        return _neg(acc) if parity else acc

    def _xor2(self, a: int, b: int) -> int:
        flip = (a < 0) != (b < 0)
        a, b = sorted((abs(a), abs(b)))
        key = ("xor", a, b)
        out = self._hash.get(key)
        if out is None:
            out = self.new_var()
            self.clauses += [[-out, a, b], [-out, -a, -b], [out, -a, b], [out, a, -b]]
            self._hash[key] = out
        return -out if flip else out


def _neg(l: Lit) -> Lit:
    return (not l) if isinstance(l, bool) else -l


def encode_gates(cnf: CNF, g: GateNetlist, assign: Mapping[str, Lit],
                 skip: Mapping[str, Lit] | None = None) -> dict[str, Lit]:
    """Encode ``g`` with inputs bound by ``assign``; returns net -> literal.

    Nets present in ``skip`` reuse the given literal instead of being
    re-encoded (used to share logic between miter copies).
    """
    val: dict[str, Lit] = dict(assign)
    if skip:
        val.update(skip)
    for net, (typ, fi) in g.gates.items():
        if net in val:
            continue
        a = [val[f] for f in fi]
        if typ == "AND":
            v = cnf.AND(a)
        elif typ == "OR":
            v = cnf.OR(a)
        elif typ == "XOR":
            v = cnf.XOR(a)
        elif typ == "NAND":
            v = _neg(cnf.AND(a))
        elif typ == "NOR":
            v = _neg(cnf.OR(a))
        elif typ == "XNOR":
            v = _neg(cnf.XOR(a))
        elif typ == "NOT":
            v = _neg(a[0])
        elif typ == "BUF":
            v = a[0]
        elif typ == "CONST0":
            v = False
        elif typ == "CONST1":
            v = True
        else:
            raise ValueError(f"cannot encode gate type {typ}")
        val[net] = v
    return val


def pin(cnf: CNF, l: Lit) -> int:
    """A variable equal to ``l``; constants get a fresh variable and a unit clause."""
    if isinstance(l, bool):
        v = cnf.new_var()
        cnf.add([v if l else -v])
        return v
    return l


def tseitin_cnf(g: GateNetlist) -> CNF:
    """Equisatisfiable clause set of ``g``; ``maps['net']`` gives every net's literal."""
    g.validate()
    cnf = CNF()
    assign = {n: cnf.new_var() for n in g.inputs}
    val = encode_gates(cnf, g, assign)
    for o in g.outputs:
        val[o] = pin(cnf, val[o])
    cnf.maps["net"] = val
    return cnf
