import random

import pytest
from hypothesis import strategies as st

from tmcmobf.core import ConstantSet
from tmcmobf.decoy import DecoySpaceExhausted, assign_decoys

PINNED_SLOTS = ((15, 12, 13, 9), (19, 22, 21, 23))


@pytest.fixture
def pinned():
    """The {13, 23}, p=4 worked example with a fixed mux placement."""
    return assign_decoys(ConstantSet((13, 23), 8), 4, slots=PINNED_SLOTS)


def random_plan(rng: random.Random, n=(2, 8), p=(2, 12), ibws=(4, 6, 8), max_mbw=8):
    while True:
        nn, pp = rng.randint(*n), rng.randint(*p)
        mbw = rng.randint(2, max_mbw)
        vals = rng.sample([v for v in range(-(1 << mbw) + 1, 1 << mbw) if v], nn)
        try:
            plan = assign_decoys(ConstantSet(tuple(vals), rng.choice(ibws)), pp,
                                 rng.choice(["hamming-lsb", "random"]), seed=rng.randint(0, 999))
        except DecoySpaceExhausted:
            continue
        if plan.base.mbw <= max_mbw:
            return plan


@st.composite
def plans(draw, n=(1, 5), p=(1, 6), ibws=(3, 4, 5, 6)):
    """Small random plans for property tests."""
    seed = draw(st.integers(0, 2**32 - 1))
    return random_plan(random.Random(seed), n, p, ibws, max_mbw=6)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
