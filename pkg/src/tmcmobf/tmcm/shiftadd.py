"""Shift-add realisations of constant multiplications."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from ..core import to_binary_digits, to_csd

REPRESENTATIONS = ("binary", "csd")


@dataclass(frozen=True)
class ShiftAddExpr:
    """``constant * x`` as a signed sum of left-shifted copies of ``x``."""

    constant: int
    terms: tuple[tuple[int, int], ...]  # (sign, shift), highest shift first

    @property
    def ops(self) -> int:
        return len(self.terms) - 1

    def value(self, x: int = 1) -> int:
        return sum(s * (x << k) for s, k in self.terms)

    def __str__(self) -> str:
        parts = []
        for s, k in self.terms:
            t = f"x<<{k}" if k else "x"
            parts.append(("- " if s < 0 else "+ ") + t)
        return f"{self.constant}x = " + " ".join(parts).lstrip("+ ")


def digits(c: int, representation: str = "csd") -> list[tuple[int, int]]:
    """Nonzero ``(position, digit)`` pairs, sign folded into the digit."""
    if representation == "binary":
        dv = to_binary_digits(c, max(1, abs(c).bit_length()))
        sgn = -1 if dv.negative else 1
        return [(t, sgn * d) for t, d in dv.nonzero()]
    if representation == "csd":
        return to_csd(c).nonzero()
    raise ValueError(f"unknown representation {representation!r}")


def dbr_decompose(c: int, representation: str = "binary") -> ShiftAddExpr:
    if c == 0:
        raise ValueError("zero has no shift-add decomposition")
    terms = sorted(((d, t) for t, d in digits(c, representation)), key=lambda st: -st[1])
    return ShiftAddExpr(c, tuple(terms))


@dataclass
class SharedGraph:
    """Adder DAG shared by several constants.

    ``nodes[k]`` (``k >= 1``) is ``(hi, shift, rel, lo)`` meaning
    ``node_hi << shift + rel * node_lo``; node 0 is ``x`` itself.  Each
    output is a signed sum of ``(sign, shift, node)`` terms.
    """

    nodes: list[tuple[int, int, int, int]] = field(default_factory=list)
    outputs: dict[int, list[tuple[int, int, int]]] = field(default_factory=dict)

    @property
    def ops(self) -> int:
        return len(self.nodes) + sum(max(0, len(t) - 1) for t in self.outputs.values())

    def node_values(self, x: int = 1) -> list[int]:
        vals = [x]
        for hi, sh, rel, lo in self.nodes:
            vals.append((vals[hi] << sh) + rel * vals[lo])
        return vals

    def evaluate(self, x: int = 1) -> dict[int, int]:
        vals = self.node_values(x)
        return {c: sum(s * (vals[b] << k) for s, k, b in terms) for c, terms in self.outputs.items()}


def _pattern(t1, t2):
    """Normalised pattern of two terms plus the occurrence's (sign, shift)."""
    (s1, k1, b1), (s2, k2, b2) = t1, t2
    if (k1, b1) > (k2, b2):
        (s1, k1, b1), (s2, k2, b2) = (s2, k2, b2), (s1, k1, b1)
    # lo term (k1) at lower shift; node = hi << d + rel * lo, with hi positive
    return (b2, k2 - k1, s1 * s2, b1), (s2, k1)


def greedy_cse(exprs: list[ShiftAddExpr] | list[int], representation: str = "csd") -> SharedGraph:
    """Greedy two-term common subexpression elimination.

    Repeatedly extracts the two-term pattern with the most non-overlapping
    occurrences (ties: smallest shift distance, then lexicographic) until no
    pattern occurs twice.
    """
    if not exprs:
        raise ValueError("empty expression list")
    consts = [e.constant if isinstance(e, ShiftAddExpr) else int(e) for e in exprs]
    g = SharedGraph()
    terms: dict[int, list[tuple[int, int, int]]] = {}
    for c in consts:
        if isinstance(exprs[0], ShiftAddExpr):
            e = next(e for e in exprs if e.constant == c)
            terms[c] = [(s, k, 0) for s, k in e.terms]
        else:
            terms[c] = [(d, t, 0) for t, d in digits(c, representation)]

    def occurrences(ts, pat):
        found, used = [], set()
        order = sorted(range(len(ts)), key=lambda a: (ts[a][1], ts[a][2]))
        for ia in order:
            for ib in order:
                if ia == ib or ia in used or ib in used:
                    continue
                p, occ = _pattern(ts[ia], ts[ib])
                if p == pat and (ts[ia][1], ts[ia][2]) <= (ts[ib][1], ts[ib][2]):
                    found.append((ia, ib, occ))
                    used.update((ia, ib))
                    break
        return found

    while True:
        cand = Counter()
        for ts in terms.values():
            pats = set()
            for a in range(len(ts)):
                for b in range(a + 1, len(ts)):
                    pats.add(_pattern(ts[a], ts[b])[0])
            for pat in pats:
                cand[pat] += len(occurrences(ts, pat))
        if not cand:
            break
        best = max(cand.items(), key=lambda kv: (kv[1], -kv[0][1], tuple(-v for v in kv[0])))
        pat, count = best
        if count < 2:
            break
        g.nodes.append(pat)
        nid = len(g.nodes)
        for c, ts in terms.items():
            occ = occurrences(ts, pat)
            if not occ:
                continue
            drop = {ia for ia, ib, _ in occ} | {ib for ia, ib, _ in occ}
            new = [t for k, t in enumerate(ts) if k not in drop]
            new += [(s, k, nid) for _, _, (s, k) in occ]
            terms[c] = new
    for c in consts:
        g.outputs[c] = sorted(terms[c], key=lambda t: (-t[1], t[2]))
    return g
