"""Filter behaviour under correct and wrong keys."""
from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .decoy import DecoyPlan, KeyAssignment, correct_key

GRID_POINTS = 512


def default_grid(points: int = GRID_POINTS) -> np.ndarray:
    return np.linspace(0.0, np.pi, points)


@dataclass
class FrequencyResponse:
    omega: np.ndarray
    amplitude: np.ndarray
    coefficients: tuple[int, ...]
    key: str | None = None

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float)
        self.amplitude = np.asarray(self.amplitude, dtype=float)
        if len(self.omega) < 2 or np.any(np.diff(self.omega) <= 0):
            raise ValueError("frequency grid needs at least two strictly increasing points")


def zero_phase_response(h: Sequence[float], grid: Sequence[float] | None = None) -> FrequencyResponse:
    """``Re[exp(j w (N-1)/2) H(w)]``, the amplitude of a linear-phase filter.

    For non-symmetric coefficient vectors the same expression is used as is.
    It equals ``sum_j h_j cos(w (j - (N-1)/2))``, which only sees the pair
    sums ``h_j + h_{N-1-j}``; those are formed first (exactly, for integer
    taps) so two vectors with equal pair sums give bit-identical responses.
    """
    N = len(h)
    if N < 1:
        raise ValueError("filter needs at least one coefficient")
    w = default_grid() if grid is None else np.asarray(grid, dtype=float)
    half = N // 2
    pair = [h[j] + h[N - 1 - j] for j in range(half)]
    amp = np.zeros_like(w)
    for j, s in enumerate(pair):
        amp += float(s) * np.cos(w * ((N - 1) / 2 - j))
    if N % 2:
        amp += float(h[half])
    return FrequencyResponse(w, amp, tuple(int(c) for c in h))


def response_under_key(plan: DecoyPlan, key: KeyAssignment, grid=None) -> FrequencyResponse:
    r = zero_phase_response(plan.decode(key), grid)
    r.key = str(key)
    return r


def deviation_metrics(ref: FrequencyResponse, other: FrequencyResponse) -> dict[str, float]:
    if ref.omega.shape != other.omega.shape or np.any(ref.omega != other.omega):
        raise ValueError("responses are sampled on different grids")
    d = np.abs(ref.amplitude - other.amplitude)
    return {"max_abs_dev": float(d.max()), "rms_dev": float(np.sqrt(np.mean(d ** 2)))}


def sample_wrong_keys(plan: DecoyPlan, count: int, seed: int) -> list[KeyAssignment]:
    """``count`` distinct wrong keys drawn uniformly without replacement."""
    pop = (1 << plan.p) - 1
    if count < 0 or count > pop:
        raise ValueError(f"cannot draw {count} wrong keys from {pop}")
    good = correct_key(plan).to_int()
    rng = random.Random(seed)
    if pop <= 1 << 20:
        vals = rng.sample([v for v in range(1 << plan.p) if v != good], count)
    else:
        picked: dict[int, None] = {}
        while len(picked) < count:
            v = rng.getrandbits(plan.p)
            if v != good:
                picked.setdefault(v)
        vals = list(picked)
    return [plan.key_from_int(v) for v in vals]


@dataclass
class Sweep:
    reference: FrequencyResponse
    keys: list[KeyAssignment]
    responses: list[FrequencyResponse]
    metrics: list[dict[str, float]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["key_id", "omega", "amplitude"])
        for kid, r in enumerate([self.reference] + self.responses):
            for w, a in zip(r.omega, r.amplitude):
                wr.writerow([kid, repr(float(w)), repr(float(a))])
        return buf.getvalue()

    def metrics_dict(self) -> dict:
        return {
            "reference": {"key_id": 0, "key": self.reference.key,
                          "coefficients": list(self.reference.coefficients)},
            "wrong_keys": [
                {"key_id": t + 1, "key": str(k), "coefficients": list(r.coefficients), **m}
                for t, (k, r, m) in enumerate(zip(self.keys, self.responses, self.metrics))
            ],
        }


def wrong_key_sweep(plan: DecoyPlan, count: int, seed: int = 0, grid=None) -> Sweep:
    """Reference (key id 0, the correct key) plus ``count`` sampled wrong keys."""
    ref = response_under_key(plan, correct_key(plan), grid)
    keys = sample_wrong_keys(plan, count, seed)
    resp = [response_under_key(plan, k, grid) for k in keys]
    return Sweep(ref, keys, resp, [deviation_metrics(ref, r) for r in resp])
