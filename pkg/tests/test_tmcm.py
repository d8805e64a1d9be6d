import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import plans
from tmcmobf.core import ConstantSet
from tmcmobf.decoy import all_keys, assign_decoys, correct_key, plain_plan
from tmcmobf.sim import (cross_product, direct_convolution, eval_word, eval_word_many,
                         key_columns, random_stream, simulate_folded_fir)
from tmcmobf.tmcm.arch import (build_encoder_table, build_tmcm_mul, build_tmcm_sa, global_order,
                               output_width, plan_datapath)
from tmcmobf.tmcm.fir import build_folded_fir
from tmcmobf.tmcm.shiftadd import dbr_decompose, greedy_cse


def test_dbr_binary_examples():
    e13 = dbr_decompose(13)
    assert e13.terms == ((1, 3), (1, 2), (1, 0)) and e13.ops == 2
    e23 = dbr_decompose(23)
    assert len(e23.terms) == 4 and e23.ops == 3
    assert e13.ops + e23.ops == 5
    assert dbr_decompose(1).terms == ((1, 0),) and dbr_decompose(1).ops == 0


def test_dbr_rejects_zero():
    with pytest.raises(ValueError):
        dbr_decompose(0)


@given(st.integers(-4096, 4096).filter(bool), st.sampled_from(["binary", "csd"]))
def test_dbr_value(c, rep):
    e = dbr_decompose(c, rep)
    assert e.value(1) == c and e.value(-7) == -7 * c


def test_cse_shares_on_example():
    g = greedy_cse([13, 23], "binary")
    assert g.ops <= 4
    assert g.evaluate(1) == {13: 13, 23: 23}


def test_cse_singleton():
    # nothing repeats inside 13, so the graph is plain digit recoding
    assert greedy_cse([dbr_decompose(13)]).ops == dbr_decompose(13).ops
    # 45 = 101101b repeats the pattern 101 and may reuse it
    g = greedy_cse([45], "binary")
    assert g.ops <= dbr_decompose(45).ops and g.evaluate(1) == {45: 45}


def test_cse_12_13():
    g = greedy_cse([12, 13])
    assert g.ops <= 5 and g.evaluate(3) == {12: 36, 13: 39}


@given(st.lists(st.integers(-2000, 2000).filter(bool), min_size=1, max_size=6, unique=True),
       st.integers(-300, 300))
def test_cse_correct_and_no_worse(cs, x):
    g = greedy_cse(cs)
    assert g.evaluate(x) == {c: c * x for c in cs}
    assert g.ops <= sum(dbr_decompose(c, "csd").ops for c in cs)


def test_global_order_and_encoder(pinned):
    order = global_order(pinned)
    assert order == [15, 12, 13, 9, 19, 22, 21, 23]
    enc = build_encoder_table(pinned)
    assert enc.g_width == 3
    assert enc.lookup([1, 0, 0, 0], 0) == 2 and order[2] == 13
    assert enc.lookup([0, 0, 1, 1], 1) == 7 and order[7] == 23
    assert enc.lookup([0, 0, 1, 1], 0) == 0 and order[0] == 15


def test_global_order_single_target():
    plan = assign_decoys(ConstantSet((5,), 8), 1, slots=[(5, 4)])
    assert global_order(plan) == [5, 4]


@settings(max_examples=40, deadline=None)
@given(plans())
def test_encoder_total_and_select_exact(plan):
    enc = build_encoder_table(plan)
    order = global_order(plan)
    assert sorted(order) == sorted(list(plan.targets) + [d for ds in plan.decoys for d in ds])
    ck = correct_key(plan)
    for key in list(all_keys(plan))[:64]:
        for i in range(plan.n):
            hits = [g for k, ri, g in enc.rows
                    if ri == i and all(ch == "X" or int(ch) == b for ch, b in zip(k, key.bits))]
            assert len(hits) == 1 and hits[0] < len(order)
    assert [order[enc.lookup(ck.bits, i)] for i in range(plan.n)] == list(plan.targets)
    stages, st_ = plan_datapath(order)
    assert len(st_.rows) == len(order)


def test_pinned_mul_behaviour(pinned):
    w = build_tmcm_mul(pinned)
    assert len(w.ids("constmux")) == 2 and len(w.ids("mul")) == 1
    assert [sorted(w.nodes[k].attrs["values"]) for k in w.ids("constmux")] == [[9, 12, 13, 15],
                                                                              [19, 21, 22, 23]]
    assert eval_word(w, 5, 0, correct_key(pinned)) == 65
    k = pinned.key_from_int(0b1000)
    assert eval_word(w, 5, 0, k) == 65 and eval_word(w, 5, 1, k) == 95


def test_single_target_wrong_bit_gives_decoy():
    plan = assign_decoys(ConstantSet((5,), 8), 1, slots=[(5, 4)])
    for build in (build_tmcm_mul, lambda p: build_tmcm_sa(p)[0]):
        w = build(plan)
        assert eval_word(w, 3, 0, [1]) == 12 and eval_word(w, 3, 0, [0]) == 15


def test_sa_stage_count(pinned):
    w, enc, st_ = build_tmcm_sa(pinned)
    assert len(w.ids("addsub")) + len(w.ids("add")) + len(w.ids("sub")) <= 4
    X = np.arange(-128, 128)
    out = eval_word_many(w, X, np.zeros_like(X), [np.full_like(X, b) for b in correct_key(pinned).bits])
    assert (out == 13 * X).all()


def test_sa_unobfuscated_pair():
    plan = plain_plan(ConstantSet((13, 23), 8))
    w, enc, st_ = build_tmcm_sa(plan)
    assert eval_word(w, 7, 0, []) == 91 and eval_word(w, 7, 1, []) == 161


def test_sa_identity_constant():
    w, _, _ = build_tmcm_sa(plain_plan(ConstantSet((1,), 8)))
    assert all(eval_word(w, x, 0, []) == x for x in range(-128, 128))
    assert not w.ids("addsub") and not w.ids("mul")


def test_output_width_tight():
    assert output_width([13, 23], 8) == signed_width_oracle([13, 23], 8)
    assert output_width([-32], 8) == signed_width_oracle([-32], 8) == 14


def signed_width_oracle(cs, ibw):
    vals = [c * x for c in cs for x in range(-(1 << (ibw - 1)), 1 << (ibw - 1))]
    w = 1
    while not all(-(1 << (w - 1)) <= v < (1 << (w - 1)) for v in vals):
        w += 1
    return w


@settings(max_examples=25, deadline=None)
@given(plans())
def test_architectures_equivalent(plan):
    wm, (ws, _, _) = build_tmcm_mul(plan), build_tmcm_sa(plan)
    keys = range(min(1 << plan.p, 64))
    X, I, K = cross_product(plan.base.ibw, plan.n, keys)
    cols = key_columns(K, plan.p)
    assert (eval_word_many(wm, X, I, cols) == eval_word_many(ws, X, I, cols)).all()


def test_fir_impulse_and_dc():
    plan = assign_decoys(ConstantSet((1, 2, 3), 8), 3, seed=2)
    for arch in ("tmcm-mul", "tmcm-sa"):
        w = build_folded_fir(plan, 3, arch)
        assert simulate_folded_fir(w, [1, 0, 0, 0, 0], correct_key(plan)) == [1, 2, 3, 0, 0]
        assert simulate_folded_fir(w, [1] * 6, correct_key(plan))[2:] == [6] * 4


def test_fir_rejects_tap_mismatch():
    plan = assign_decoys(ConstantSet((1, 2, 3), 8), 3)
    with pytest.raises(ValueError):
        build_folded_fir(plan, 4)


def test_fir_thirty_taps():
    rng = random.Random(30)
    h = rng.sample([v for v in range(-500, 500) if v], 30)
    plan = assign_decoys(ConstantSet(tuple(h), 12), 30, seed=1)
    w = build_folded_fir(plan, 30)
    xs = random_stream(64, 12, 5)
    assert simulate_folded_fir(w, xs, correct_key(plan)) == direct_convolution(h, xs)
