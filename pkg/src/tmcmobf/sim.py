"""Functional simulation, oracles and key verdicts."""
from __future__ import annotations

import csv
import io
import random
import threading
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import bits_of, int_of
from .decoy import DecoyPlan, KeyAssignment, correct_key
from .netlist.gates import GateNetlist
from .netlist.word import WordNetlist, evaluate, step

EXHAUSTIVE_IBW = 10
RANDOM_VECTORS = 10_000


def _key_bits(key) -> list[int]:
    if isinstance(key, KeyAssignment):
        return list(key.bits)
    return [int(b) for b in key]


def eval_word(design: WordNetlist, x: int, i: int, key) -> int:
    """Exact output of a combinational word netlist."""
    ibw = design.ibw
    if not -(1 << (ibw - 1)) <= x < (1 << (ibw - 1)):
        raise ValueError(f"x={x} does not fit {ibw} signed bits")
    n = design.meta.get("n")
    if i < 0 or (n is not None and i >= n):
        raise ValueError(f"select {i} out of range")
    kb = _key_bits(key)
    if len(kb) != design.p:
        raise ValueError(f"key has {len(kb)} bits, design expects {design.p}")
    out, _ = evaluate(design, int(x), int(i), kb)
    return int(out)


def eval_word_many(design: WordNetlist, x, i, key_bits: Sequence) -> np.ndarray:
    """Vectorised :func:`eval_word`; arguments broadcast as numpy arrays."""
    out, _ = evaluate(design, np.asarray(x, dtype=np.int64), np.asarray(i, dtype=np.int64),
                      [np.asarray(b, dtype=np.int64) for b in key_bits])
    return np.asarray(out)


def pack_inputs(g: GateNetlist, x: int, i: int, key) -> dict[str, int]:
    a = {}
    xb = bits_of(x, len(g.data_inputs))
    for net, b in zip(g.data_inputs, xb):
        a[net] = b
    for t, net in enumerate(g.select_inputs):
        a[net] = (i >> t) & 1
    for net, b in zip(g.key_inputs, _key_bits(key)):
        a[net] = b
    return a


def eval_gates(g: GateNetlist, bits: dict[str, int]) -> list[int]:
    """Single-vector gate evaluation; ``bits`` must cover every input."""
    return g.simulate(bits, 1)


def eval_gates_word(g: GateNetlist, x: int, i: int, key) -> int:
    return int_of(eval_gates(g, pack_inputs(g, x, i, key)))


def _pack_column(values: np.ndarray) -> int:
    """Pack a 0/1 vector into an integer, element ``t`` at bit ``t``."""
    return int.from_bytes(np.packbits(values.astype(np.uint8), bitorder="little").tobytes(), "little")


def _unpack_column(v: int, n: int) -> np.ndarray:
    raw = np.frombuffer(v.to_bytes((n + 7) // 8, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:n]


SIM_CHUNK = 1 << 18


def simulate_vectors(g: GateNetlist, xs: np.ndarray, iss: np.ndarray, keys: np.ndarray) -> np.ndarray:
    """Bit-parallel gate simulation of many ``(x, i, key)`` vectors.

    ``keys`` holds key integers (``k_0`` as MSB).  Returns signed outputs.
    """
    if len(xs) > SIM_CHUNK:
        return np.concatenate([
            _simulate_chunk(g, xs[s:s + SIM_CHUNK], iss[s:s + SIM_CHUNK], keys[s:s + SIM_CHUNK])
            for s in range(0, len(xs), SIM_CHUNK)])
    return _simulate_chunk(g, xs, iss, keys)


def _simulate_chunk(g: GateNetlist, xs, iss, keys) -> np.ndarray:
    n = len(xs)
    xs = np.asarray(xs, dtype=np.int64)
    iss = np.asarray(iss, dtype=np.int64)
    keys = np.asarray(keys, dtype=object if g.p > 62 else np.int64)
    assign = {}
    for t, net in enumerate(g.data_inputs):
        assign[net] = _pack_column((xs >> t) & 1)
    for t, net in enumerate(g.select_inputs):
        assign[net] = _pack_column((iss >> t) & 1)
    p = g.p
    for t, net in enumerate(g.key_inputs):
        col = (keys >> (p - 1 - t)) & 1
        assign[net] = _pack_column(np.asarray(col, dtype=np.int64))
    outs = g.simulate(assign, n)
    w = len(outs)
    acc = np.zeros(n, dtype=np.int64)
    for t, v in enumerate(outs):
        col = _unpack_column(v, n).astype(np.int64)
        acc |= col << t
    if w < 64:
        acc = np.where((acc >> (w - 1)) & 1, acc - (1 << w), acc)
    return acc


def cross_product(ibw: int, n: int, key_ints: Iterable[int]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All ``(x, i, key)`` combinations, key-major."""
    xs = np.arange(-(1 << (ibw - 1)), 1 << (ibw - 1), dtype=np.int64)
    ks = np.asarray(list(key_ints), dtype=np.int64)
    K, I, X = np.meshgrid(ks, np.arange(n, dtype=np.int64), xs, indexing="ij")
    return X.ravel(), I.ravel(), K.ravel()


def key_columns(key_ints: np.ndarray, p: int) -> list[np.ndarray]:
    return [(key_ints >> (p - 1 - t)) & 1 for t in range(p)]


class Oracle:
    """Activated chip: answers queries under a hidden key, counting them."""

    def __init__(self, design: WordNetlist | GateNetlist, key):
        self._design = design
        self._key = _key_bits(key)
        self._lock = threading.Lock()
        self.queries = 0
        if isinstance(design, GateNetlist):
            self.out_width = len(design.outputs)
            self.data_width = len(design.data_inputs)
            self.select_width = len(design.select_inputs)
        else:
            self.out_width = design.out_width
            self.data_width = design.ibw
            self.select_width = design.m

    def query(self, x: int, i: int) -> int:
        with self._lock:
            self.queries += 1
        if isinstance(self._design, GateNetlist):
            return eval_gates_word(self._design, x, i, self._key)
        out, _ = evaluate(self._design, int(x), int(i), self._key)
        return int(out)

    def query_bits(self, assignment: dict[str, int]) -> list[int]:
        """Answer on primary-input bits named as in a lowered netlist."""
        if isinstance(self._design, GateNetlist):
            with self._lock:
                self.queries += 1
            a = dict(assignment)
            for net, b in zip(self._design.key_inputs, self._key):
                a[net] = b
            return self._design.simulate(a, 1)
        x = int_of([assignment[f"x_{t}"] for t in range(self.data_width)])
        i = sum(assignment[f"i_{t}"] << t for t in range(self.select_width))
        return bits_of(self.query(x, i), self.out_width)

    def query_many(self, xs: np.ndarray, iss: np.ndarray) -> np.ndarray:
        with self._lock:
            self.queries += len(xs)
        if isinstance(self._design, GateNetlist):
            p = self._design.p
            kint = int("".join(map(str, self._key)), 2) if p else 0
            return simulate_vectors(self._design, xs, iss, np.full(len(xs), kint, dtype=object if p > 62 else np.int64))
        return eval_word_many(self._design, xs, iss, self._key)


@dataclass
class Report:
    passed: bool
    checked: int
    mode: str
    witness: dict | None = None
    notes: list[str] = field(default_factory=list)

    def __str__(self) -> str:
        s = f"{'PASS' if self.passed else 'FAIL'} ({self.checked} vectors, {self.mode})"
        if self.witness:
            s += " witness " + ", ".join(f"{k}={v}" for k, v in self.witness.items())
        return s


def sample_inputs(ibw: int, n: int, vectors: int | str = "auto", seed: int = 0):
    """Exhaustive ``(x, i)`` grid when small enough, else seeded random vectors."""
    if vectors == "exhaustive" or (vectors == "auto" and ibw <= EXHAUSTIVE_IBW):
        X, I, _ = cross_product(ibw, n, [0])
        return X, I, "exhaustive"
    count = RANDOM_VECTORS if vectors in ("auto", "exhaustive") else int(vectors)
    rng = np.random.default_rng(seed)
    X = rng.integers(-(1 << (ibw - 1)), 1 << (ibw - 1), size=count, dtype=np.int64)
    I = rng.integers(0, n, size=count, dtype=np.int64)
    return X, I, f"random({count})"


def check_against_targets(outs: np.ndarray, X: np.ndarray, I: np.ndarray, targets: Sequence[int],
                          mode: str) -> Report:
    expected = np.asarray(targets, dtype=np.int64)[I] * X
    bad = np.nonzero(outs != expected)[0]
    if len(bad):
        t = int(bad[0])
        x, i = int(X[t]), int(I[t])
        got = int(outs[t])
        wit = {"x": x, "i": i, "expected": targets[i] * x, "got": got}
        if x:
            wit["constant"] = got // x if got % x == 0 else got / x
        return Report(False, len(X), mode, wit)
    return Report(True, len(X), mode)


def verify_correct_key(design: WordNetlist | GateNetlist, plan: DecoyPlan,
                       vectors: int | str = "auto", seed: int = 0, key=None) -> Report:
    """PASS iff every sampled ``(x, i)`` gives ``c_i * x`` under the key."""
    key = correct_key(plan) if key is None else key
    X, I, mode = sample_inputs(plan.base.ibw, plan.n, vectors, seed)
    kb = _key_bits(key)
    if isinstance(design, GateNetlist):
        kint = int("".join(map(str, kb)), 2) if kb else 0
        outs = simulate_vectors(design, X, I, np.full(len(X), kint, dtype=object if len(kb) > 62 else np.int64))
    else:
        outs = eval_word_many(design, X, I, kb)
    return check_against_targets(outs, X, I, plan.targets, mode)


@dataclass
class Corruption:
    clean: bool
    witness: dict | None = None


def corruption_check(design: WordNetlist, plan: DecoyPlan, key) -> Corruption:
    """Find ``(i, x)`` where ``key`` makes the block multiply by a wrong constant."""
    kb = _key_bits(key)
    lo, hi = plan.base.x_range
    for x in (1, -1, hi, lo):
        for i in range(plan.n):
            out, _ = evaluate(design, x, i, kb)
            if out != plan.targets[i] * x:
                c = out // x if out % x == 0 else out / x
                return Corruption(False, {"i": i, "x": x, "constant": c, "expected": plan.targets[i]})
    return Corruption(True)


def corruption_scan(design: WordNetlist, plan: DecoyPlan) -> np.ndarray:
    """Vectorised :func:`corruption_check` over every key.

    Returns a boolean array indexed by key integer (``k_0`` as MSB): True
    where the key is clean, i.e. multiplies every select value by its target
    on the probe inputs.
    """
    p = plan.p
    lo, hi = plan.base.x_range
    keys = np.arange(1 << p, dtype=np.int64)
    clean = np.ones(1 << p, dtype=bool)
    cols = key_columns(keys, p)
    for x in (1, -1, hi, lo):
        for i in range(plan.n):
            out = eval_word_many(design, np.full(len(keys), x), np.full(len(keys), i), cols)
            clean &= out == plan.targets[i] * x
    return clean


def simulate_folded_fir(design: WordNetlist, x_stream: Sequence[int], key) -> list[int]:
    """Cycle-accurate run of a folded filter; one output per input sample."""
    N = design.meta["taps"]
    kb = _key_bits(key)
    state: dict[int, int] = {}
    ys = []
    y_reg = next(k for k, nd in enumerate(design.nodes) if nd.op == "reg" and nd.attrs.get("name") == "y")
    for xv in x_stream:
        for _ in range(N):
            _, state, _ = step(design, int(xv), kb, state)
        ys.append(int(state[y_reg]))
    return ys


def direct_convolution(h: Sequence[int], xs: Sequence[int]) -> list[int]:
    return [sum(h[j] * xs[k - j] for j in range(len(h)) if k - j >= 0) for k in range(len(xs))]


def fir_trace_csv(design: WordNetlist, x_stream: Sequence[int], key) -> str:
    """Per-cycle CSV trace: cycle, sample, count, x, y."""
    N = design.meta["taps"]
    kb = _key_bits(key)
    cnt = design.ids("counter")[0]
    y_reg = next(k for k, nd in enumerate(design.nodes) if nd.op == "reg" and nd.attrs.get("name") == "y")
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["cycle", "sample", "count", "x", "y"])
    state: dict[int, int] = {}
    cycle = 0
    for k, xv in enumerate(x_stream):
        for _ in range(N):
            wr.writerow([cycle, k, state.get(cnt, 0), int(xv), state.get(y_reg, 0)])
            _, state, _ = step(design, int(xv), kb, state)
            cycle += 1
    return buf.getvalue()


def comb_trace_csv(design: WordNetlist, X: Sequence[int], I: Sequence[int], key) -> str:
    """CSV trace of a combinational block: cycle, x, i, key, f."""
    kb = _key_bits(key)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["cycle", "x", "i", "key", "f"])
    kstr = "".join(map(str, kb))
    for t, (x, i) in enumerate(zip(X, I)):
        out, _ = evaluate(design, int(x), int(i), kb)
        wr.writerow([t, int(x), int(i), kstr, int(out)])
    return buf.getvalue()


def random_stream(length: int, ibw: int, seed: int) -> list[int]:
    rng = random.Random(seed)
    lo, hi = -(1 << (ibw - 1)), (1 << (ibw - 1)) - 1
    return [rng.randint(lo, hi) for _ in range(length)]
