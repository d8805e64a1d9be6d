"""Iterative decoy assignment and key derivation.

Each round doubles every target's key-selected multiplexor: round ``noi``
hands ``2**noi`` fresh decoys to each target in index order and spends one
key bit per target, stopping as soon as ``p`` key bits are used.
"""
from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator, Sequence

from .core import ConstantSet, to_twos, from_twos

POLICIES = ("hamming-lsb", "random")


class DecoySpaceExhausted(ValueError):
    def __init__(self, target: int, msg: str | None = None):
        self.target = target
        super().__init__(msg or f"no unused decoy left for target {target}")


@dataclass(frozen=True)
class KeyAssignment:
    """Key bits ``k_0 .. k_{p-1}`` and the contiguous range owned by each target."""

    bits: tuple[int, ...]
    grouping: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(int(b) & 1 for b in self.bits))
        pos = 0
        for lo, hi in self.grouping:
            if lo != pos or hi < lo:
                raise ValueError(f"grouping {self.grouping} does not partition the key")
            pos = hi
        if pos != len(self.bits):
            raise ValueError(f"grouping covers {pos} bits, key has {len(self.bits)}")

    @property
    def p(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)

    def to_int(self) -> int:
        """Integer whose MSB is ``k_0`` (so ``"1000"`` is 8)."""
        return int(str(self), 2) if self.bits else 0

    def group_value(self, j: int) -> int:
        lo, hi = self.grouping[j]
        v = 0
        for b in self.bits[lo:hi]:
            v = (v << 1) | b
        return v

    def with_bits(self, bits: Sequence[int]) -> "KeyAssignment":
        return KeyAssignment(tuple(bits), self.grouping)

    def with_int(self, v: int) -> "KeyAssignment":
        if not 0 <= v < (1 << self.p) or (self.p == 0 and v):
            raise ValueError(f"key value {v:#x} does not fit {self.p} bits")
        return self.with_bits([(v >> (self.p - 1 - t)) & 1 for t in range(self.p)])


def hamming_candidates(target: int, mbw: int) -> Iterator[int]:
    """Decoy candidates for ``target`` in policy order.

    Flips over the ``mbw`` magnitude bits come first, by increasing number of
    flipped bits and, within a distance, lexicographically by bit positions
    (bit 0 first).  Only after that space is used up does the sign bit of
    the ``mbw + 1``-bit field get flipped too.
    """
    width = mbw + 1
    base = to_twos(target, width)
    for sign_flip in (0, 1 << mbw):
        for d in range(0 if sign_flip else 1, mbw + 1):
            for pos in combinations(range(mbw), d):
                mask = sign_flip
                for t in pos:
                    mask |= 1 << t
                yield from_twos(base ^ mask, width)


def next_decoy_hamming(target: int, used: set[int] | frozenset[int], mbw: int) -> int:
    for cand in hamming_candidates(target, mbw):
        if cand not in used:
            return cand
    raise DecoySpaceExhausted(target)


def next_decoy_random(target: int, used: set[int] | frozenset[int], mbw: int,
                      rng: random.Random) -> int:
    lo, hi = -(1 << mbw), (1 << mbw) - 1
    span = hi - lo + 1
    free = span - sum(1 for u in used if lo <= u <= hi)
    if free <= 0:
        raise DecoySpaceExhausted(target)
    if free * 4 >= span:
        while True:
            v = rng.randint(lo, hi)
            if v not in used:
                return v
    pool = [v for v in range(lo, hi + 1) if v not in used]
    return pool[rng.randrange(len(pool))]


def allocate_key_bits(n: int, p: int) -> list[int]:
    """Per-target key-bit counts produced by the round-robin loop."""
    q = [0] * n
    nok = 0
    while nok != p:
        for j in range(n):
            q[j] += 1
            nok += 1
            if nok == p:
                break
    return q


@dataclass(frozen=True)
class DecoyPlan:
    """Targets, their decoys and the multiplexor slot each one occupies.

    ``slots[j]`` lists the constants on the ``2**key_bits[j]`` inputs of
    target ``j``'s key multiplexor; slot ``s`` is chosen when the group's key
    bits (``k`` of lowest index as MSB) read ``s``.
    """

    base: ConstantSet
    decoys: tuple[tuple[int, ...], ...]
    key_bits: tuple[int, ...]
    slots: tuple[tuple[int, ...], ...]
    policy: str = "hamming-lsb"
    seed: int | None = None
    grouping: tuple[tuple[int, int], ...] = field(init=False)

    def __post_init__(self):
        g, pos = [], 0
        for q in self.key_bits:
            g.append((pos, pos + q))
            pos += q
        object.__setattr__(self, "grouping", tuple(g))
        self.validate()

    @property
    def targets(self) -> tuple[int, ...]:
        return self.base.targets

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def p(self) -> int:
        return sum(self.key_bits)

    @property
    def r(self) -> int:
        return sum(len(d) for d in self.decoys)

    @property
    def positions(self) -> tuple[int, ...]:
        """Slot index holding each target."""
        return tuple(s.index(c) for s, c in zip(self.slots, self.targets))

    def validate(self) -> None:
        b = self.base
        if not (len(self.decoys) == len(self.key_bits) == len(self.slots) == b.n):
            raise ValueError("plan arrays do not match the number of targets")
        seen = set(b.targets)
        for j, (c, ds, q, sl) in enumerate(zip(b.targets, self.decoys, self.key_bits, self.slots)):
            if len(ds) != (1 << q) - 1:
                raise ValueError(f"target {c}: {len(ds)} decoys for {q} key bits")
            if sorted(sl) != sorted((c,) + tuple(ds)):
                raise ValueError(f"target {c}: slots {sl} are not target + decoys")
            for d in ds:
                if d in seen:
                    raise ValueError(f"decoy {d} is not unique")
                if d == 0:
                    raise ValueError("zero cannot be a decoy")
                if not b.lo <= d <= b.hi:
                    raise ValueError(f"decoy {d} outside [{b.lo}, {b.hi}]")
                seen.add(d)

    def decode(self, key: KeyAssignment) -> list[int]:
        """Constant each select value multiplies by under ``key``."""
        return [self.slots[j][key.group_value(j)] for j in range(self.n)]

    def key_from_int(self, v: int) -> KeyAssignment:
        return KeyAssignment((0,) * self.p, self.grouping).with_int(v)

    def to_dict(self) -> dict:
        return {
            "targets": list(self.targets),
            "ibw": self.base.ibw,
            "mbw": self.base.mbw,
            "p": self.p,
            "r": self.r,
            "policy": self.policy,
            "seed": self.seed,
            "key_bits": list(self.key_bits),
            "decoys": [list(d) for d in self.decoys],
            "slots": [list(s) for s in self.slots],
            "correct_key": str(correct_key(self)),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "DecoyPlan":
        plan = cls(
            base=ConstantSet(tuple(d["targets"]), d["ibw"]),
            decoys=tuple(tuple(x) for x in d["decoys"]),
            key_bits=tuple(d["key_bits"]),
            slots=tuple(tuple(s) for s in d["slots"]),
            policy=d.get("policy", "hamming-lsb"),
            seed=d.get("seed"),
        )
        if "correct_key" in d and d["correct_key"] != str(correct_key(plan)):
            raise ValueError("stored correct key disagrees with slot placement")
        return plan

    @classmethod
    def from_json(cls, text: str) -> "DecoyPlan":
        return cls.from_dict(json.loads(text))

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


def plain_plan(base: ConstantSet) -> DecoyPlan:
    """Key-free plan; builds the unobfuscated TMCM block."""
    n = base.n
    return DecoyPlan(base, ((),) * n, (0,) * n, tuple((c,) for c in base.targets),
                     policy="none")


def assign_decoys(targets: ConstantSet, p: int, policy: str = "hamming-lsb",
                  seed: int | None = 0,
                  slots: Sequence[Sequence[int]] | None = None) -> DecoyPlan:
    """Assign ``2**q_j - 1`` unique decoys to each target using ``p`` key bits.

    ``slots`` pins the multiplexor placement (each entry must be a
    permutation of the target and its decoys); otherwise placements are
    shuffled with the seeded generator.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if policy not in POLICIES:
        raise ValueError(f"unknown decoy policy {policy!r}")
    q = allocate_key_bits(targets.n, p)
    need = targets.n + sum((1 << qj) - 1 for qj in q)
    space = (1 << (targets.mbw + 1)) - 1  # zero is never a decoy
    if need > space:
        raise DecoySpaceExhausted(
            targets.targets[-1],
            f"{need} distinct constants needed but only {space} exist in "
            f"[{targets.lo}, {targets.hi}]")

    rng = random.Random(seed)
    used = set(targets.targets) | {0}
    decoys: list[list[int]] = [[] for _ in range(targets.n)]
    assigned = [0] * targets.n
    noi = 0
    nok = 0
    while nok != p:
        nod = 1 << noi
        for j, c in enumerate(targets.targets):
            for _ in range(nod):
                if policy == "hamming-lsb":
                    d = next_decoy_hamming(c, used, targets.mbw)
                else:
                    d = next_decoy_random(c, used, targets.mbw, rng)
                used.add(d)
                decoys[j].append(d)
            assigned[j] += 1
            nok += 1
            if nok == p:
                break
        noi += 1
    assert assigned == q

    if slots is None:
        placed = []
        for c, ds in zip(targets.targets, decoys):
            s = [c] + ds
            rng.shuffle(s)
            placed.append(tuple(s))
    else:
        placed = [tuple(s) for s in slots]
    return DecoyPlan(targets, tuple(tuple(d) for d in decoys), tuple(q), tuple(placed),
                     policy=policy, seed=seed)


def correct_key(plan: DecoyPlan) -> KeyAssignment:
    bits: list[int] = []
    for q, pos in zip(plan.key_bits, plan.positions):
        bits.extend((pos >> (q - 1 - t)) & 1 for t in range(q))
    return KeyAssignment(tuple(bits), plan.grouping)


def all_keys(plan: DecoyPlan) -> Iterator[KeyAssignment]:
    blank = KeyAssignment((0,) * plan.p, plan.grouping)
    for v in range(1 << plan.p):
        yield blank.with_int(v)
