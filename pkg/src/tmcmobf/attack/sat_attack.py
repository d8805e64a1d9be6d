"""Oracle-guided SAT attack (distinguishing-input-pattern loop)."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..core import int_of
from ..netlist.gates import GateNetlist
from ..sim import Oracle, simulate_vectors
from .cnf import CNF, Lit, encode_gates
from .solver import Solver

KEY_FOUND, TIMEOUT, ITERATION_LIMIT = "KeyFound", "Timeout", "IterationLimit"
EXHAUSTIVE_BITS = 20
VERIFY_VECTORS = 100_000


@dataclass
class AttackLimits:
    time_limit: float = 600.0
    dip_limit: int = 10_000


@dataclass
class Miter:
    cnf: CNF
    inputs: dict[str, int]  # primary input net -> variable
    k1: list[int]
    k2: list[int]
    out1: list[Lit]
    out2: list[Lit]
    act: int  # the difference clause only binds while this is assumed true


def build_miter(g: GateNetlist, cnf: CNF | None = None) -> Miter:
    """Two copies of ``g`` sharing primary inputs, with separate key variables."""
    if g.p == 0:
        raise ValueError("netlist has no key inputs")
    cnf = cnf or CNF()
    inputs = {n: cnf.new_var() for n in g.primary_inputs}
    k1 = [cnf.new_var() for _ in g.key_inputs]
    k2 = [cnf.new_var() for _ in g.key_inputs]
    v1 = encode_gates(cnf, g, dict(inputs, **dict(zip(g.key_inputs, k1))))
    # logic outside the key cone is identical in both copies
    shared = {n: v1[n] for n in g.gates if n not in g.transitive_fanout(g.key_inputs)}
    v2 = encode_gates(cnf, g, dict(inputs, **dict(zip(g.key_inputs, k2))), shared)
    out1 = [v1[o] for o in g.outputs]
    out2 = [v2[o] for o in g.outputs]
    diffs = [cnf.XOR([a, b]) for a, b in zip(out1, out2)]
    act = cnf.new_var()
    cnf.add([-act] + [d for d in diffs if not isinstance(d, bool)])
    cnf.maps["copy1"] = v1
    cnf.maps["copy2"] = v2
    return Miter(cnf, inputs, k1, k2, out1, out2, act)


@dataclass
class AttackResult:
    status: str
    key: list[int] | None
    dip_count: int
    wall_time: float
    stats: dict = field(default_factory=dict)
    log: list[dict] = field(default_factory=list)

    @property
    def key_string(self) -> str | None:
        return None if self.key is None else "".join(map(str, self.key))

    def to_dict(self) -> dict:
        return {"status": self.status, "key": self.key_string, "dip_count": self.dip_count,
                "wall_time": round(self.wall_time, 6), "stats": self.stats}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def log_jsonl(self) -> str:
        return "".join(json.dumps(e, sort_keys=True) + "\n" for e in self.log)


def _word(bits: Sequence[int]) -> int:
    return int_of(list(bits)) if bits else 0


def sat_attack(g: GateNetlist, oracle: Oracle, limits: AttackLimits | None = None) -> AttackResult:
    """Find a key functionally equivalent to the oracle's.

    Each round asks the miter for an input on which two keys still
    disagree, queries the oracle there, and constrains both key copies to
    reproduce the answer.  When no such input is left, any key consistent
    with the collected answers is correct.
    """
    limits = limits or AttackLimits()
    t0 = time.monotonic()
    deadline = t0 + limits.time_limit
    m = build_miter(g)
    cnf = m.cnf
    solver = Solver()
    fed = solver.add_cnf(cnf)
    log: list[dict] = []
    dips = 0

    def finish(status, key=None):
        st = dict(solver.stats, vars=cnf.nvars, clauses=len(cnf.clauses),
                  queries=oracle.queries)
        return AttackResult(status, key, dips, time.monotonic() - t0, st, log)

    while True:
        if dips >= limits.dip_limit:
            return finish(ITERATION_LIMIT)
        r = solver.solve([m.act], deadline)
        if r is None:
            return finish(TIMEOUT)
        if r is False:
            break
        dip = {n: int(solver.value(v)) for n, v in m.inputs.items()}
        resp = oracle.query_bits(dip)
        for keys in (m.k1, m.k2):
            fixed = {n: bool(b) for n, b in dip.items()}
            val = encode_gates(cnf, g, dict(fixed, **dict(zip(g.key_inputs, keys))))
            for o, want in zip(g.outputs, resp):
                l = val[o]
                if isinstance(l, bool):
                    if l != bool(want):
                        raise RuntimeError("oracle disagrees with a key-independent output")
                    continue
                cnf.add([l if want else -l])
        fed = solver.add_cnf(cnf, fed)
        dips += 1
        log.append({
            "iteration": dips,
            "dip": {"x": _word([dip[n] for n in g.data_inputs]),
                    "i": sum(dip[n] << t for t, n in enumerate(g.select_inputs))},
            "response": _word(resp),
            "time": round(time.monotonic() - t0, 6),
        })
        if time.monotonic() > deadline:
            return finish(TIMEOUT)
    r = solver.solve([], deadline)
    if r is None:
        return finish(TIMEOUT)
    if r is False:
        raise RuntimeError("no key reproduces the oracle responses")
    return finish(KEY_FOUND, [int(solver.value(v)) for v in m.k1])


@dataclass
class KeyCheck:
    ok: bool
    checked: int
    mode: str
    witness: dict | None = None

    def __bool__(self) -> bool:
        return self.ok


def _key_int(key: Sequence[int]) -> int:
    return int("".join(str(int(b)) for b in key), 2) if len(key) else 0


def verify_recovered_key(g: GateNetlist, oracle: Oracle, key: Sequence[int],
                         vectors: int = VERIFY_VECTORS, seed: int = 0) -> KeyCheck:
    """Compare ``g`` under ``key`` with the oracle on every input when the
    input space is small, otherwise on ``vectors`` random inputs."""
    if len(key) != g.p:
        raise ValueError(f"key has {len(key)} bits, netlist expects {g.p}")
    dw, sw = len(g.data_inputs), len(g.select_inputs)
    if dw + sw <= EXHAUSTIVE_BITS:
        xs = np.arange(-(1 << (dw - 1)), 1 << (dw - 1), dtype=np.int64)
        X, I = np.meshgrid(xs, np.arange(1 << sw, dtype=np.int64), indexing="ij")
        X, I, mode = X.ravel(), I.ravel(), "exhaustive"
    else:
        rng = np.random.default_rng(seed)
        X = rng.integers(-(1 << (dw - 1)), 1 << (dw - 1), size=vectors, dtype=np.int64)
        I = rng.integers(0, 1 << sw, size=vectors, dtype=np.int64)
        mode = f"random({vectors})"
    kint = _key_int(key)
    chunk = 1 << 16
    for s in range(0, len(X), chunk):
        xs, iss = X[s:s + chunk], I[s:s + chunk]
        ks = np.full(len(xs), kint, dtype=object if g.p > 62 else np.int64)
        got = simulate_vectors(g, xs, iss, ks)
        want = oracle.query_many(xs, iss)
        bad = np.nonzero(got != want)[0]
        if len(bad):
            t = int(bad[0])
            return KeyCheck(False, s + t + 1, mode,
                            {"x": int(xs[t]), "i": int(iss[t]), "got": int(got[t]), "expected": int(want[t])})
    return KeyCheck(True, len(X), mode)
