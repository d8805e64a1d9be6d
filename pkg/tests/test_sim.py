import random
import threading

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import plans
from tmcmobf.core import ConstantSet
from tmcmobf.decoy import all_keys, assign_decoys, correct_key
from tmcmobf.netlist.gates import GateNetlist
from tmcmobf.netlist.lower import lower_to_gates
from tmcmobf.sim import (Oracle, comb_trace_csv, corruption_check, corruption_scan,
                         direct_convolution, eval_gates, eval_gates_word, eval_word, fir_trace_csv,
                         pack_inputs, random_stream, simulate_folded_fir, verify_correct_key)
from tmcmobf.core import bits_of
from tmcmobf.tmcm.arch import build, build_tmcm_mul, build_tmcm_sa
from tmcmobf.tmcm.fir import build_folded_fir


def test_eval_word_examples(pinned):
    w = build_tmcm_mul(pinned)
    assert eval_word(w, 5, 0, correct_key(pinned)) == 65
    assert eval_word(w, 5, 1, pinned.key_from_int(8)) == 95
    assert all(eval_word(w, 0, i, k) == 0 for i in range(2) for k in all_keys(pinned))


def test_eval_word_range_checks(pinned):
    w = build_tmcm_mul(pinned)
    with pytest.raises(ValueError):
        eval_word(w, 128, 0, correct_key(pinned))
    with pytest.raises(ValueError):
        eval_word(w, 1, 2, correct_key(pinned))
    with pytest.raises(ValueError):
        eval_word(w, 1, 0, [1, 0])


def test_eval_gates_examples(pinned):
    g = GateNetlist(["a", "b"], [], [], {"f_0": ("XOR", ("a", "b"))}, ["f_0"])
    assert eval_gates(g, {"a": 1, "b": 0}) == [1]
    gm = lower_to_gates(build_tmcm_mul(pinned))
    assert eval_gates(gm, pack_inputs(gm, 5, 0, correct_key(pinned))) == bits_of(65, 13)
    zero = {n: 0 for n in gm.inputs}
    assert eval_gates(gm, zero) == [0] * 13
    with pytest.raises(KeyError):
        eval_gates(gm, {"x_0": 1})


def test_verify_pass_both_archs(pinned):
    for w in (build_tmcm_mul(pinned), build_tmcm_sa(pinned)[0]):
        rep = verify_correct_key(w, pinned)
        assert rep.passed and rep.mode == "exhaustive" and rep.checked == 512


def test_verify_mutation_localised(pinned):
    w = build_tmcm_mul(pinned)
    k = w.ids("constmux")[0]
    vals = list(w.nodes[k].attrs["values"])
    vals[2] = 11  # the slot holding target 13
    w.nodes[k].attrs["values"] = tuple(vals)
    rep = verify_correct_key(w, pinned)
    assert not rep.passed and rep.witness["i"] == 0 and rep.witness["constant"] == 11


def test_verify_random_mode():
    plan = assign_decoys(ConstantSet((13, 23), 16), 4)
    rep = verify_correct_key(build_tmcm_sa(plan)[0], plan)
    assert rep.passed and rep.checked == 10_000 and rep.mode.startswith("random")


def test_corruption_worked_example(pinned):
    w = build_tmcm_mul(pinned)
    c = corruption_check(w, pinned, pinned.key_from_int(0b1000))
    assert not c.clean and c.witness["i"] == 1 and c.witness["x"] == 1 and c.witness["constant"] == 19
    assert corruption_check(w, pinned, correct_key(pinned)).clean


def test_corruption_all_keys_of_example(pinned):
    w = build_tmcm_sa(pinned)[0]
    ck = correct_key(pinned)
    clean = 0
    for key in all_keys(pinned):
        c = corruption_check(w, pinned, key)
        clean += c.clean
        bad_groups = [j for j in range(2) if key.group_value(j) != ck.group_value(j)]
        if bad_groups:
            assert c.witness["i"] == bad_groups[0]
    assert clean == 1
    assert list(np.nonzero(corruption_scan(w, pinned))[0]) == [ck.to_int()]


@settings(max_examples=20, deadline=None)
@given(plans(p=(1, 8)))
def test_scan_agrees_with_check(plan):
    w = build(plan, "tmcm-mul")
    scan = corruption_scan(w, plan)
    for key in all_keys(plan):
        assert scan[key.to_int()] == corruption_check(w, plan, key).clean


def test_oracle_matches_eval_and_counts(pinned):
    w = build_tmcm_sa(pinned)[0]
    o = Oracle(w, correct_key(pinned))
    g = lower_to_gates(w)
    og = Oracle(g, correct_key(pinned))
    for x in (-128, -3, 0, 7, 127):
        for i in range(2):
            assert o.query(x, i) == eval_word(w, x, i, correct_key(pinned)) == og.query(x, i)
    assert o.queries == 10
    assert not hasattr(o, "key")


def test_oracle_thread_safe_counter(pinned):
    o = Oracle(build_tmcm_mul(pinned), correct_key(pinned))

    def work():
        for x in range(50):
            o.query(x, 0)

    ts = [threading.Thread(target=work) for _ in range(4)]
    for t in ts:
        t.start()
    for t in ts:
        t.join()
    assert o.queries == 200


def test_fir_impulse_dc_and_wrong_key():
    plan = assign_decoys(ConstantSet((1, 2, 3), 8), 3, seed=4)
    w = build_folded_fir(plan, 3)
    ck = correct_key(plan)
    assert simulate_folded_fir(w, [1, 0, 0], ck) == [1, 2, 3]
    assert simulate_folded_fir(w, [1] * 5, ck)[-2:] == [6, 6]
    xs = random_stream(32, 8, 1)
    ref = direct_convolution([1, 2, 3], xs)
    for key in all_keys(plan):
        if key != ck:
            assert simulate_folded_fir(w, xs, key) != ref


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 2**31))
def test_folded_equals_direct(seed):
    rng = random.Random(seed)
    N = rng.randint(1, 32)
    h = rng.sample([v for v in range(-200, 200) if v], N)
    plan = assign_decoys(ConstantSet(tuple(h), 10), max(1, N), seed=seed)
    w = build_folded_fir(plan, N, rng.choice(["tmcm-mul", "tmcm-sa"]))
    xs = random_stream(40, 10, seed)
    assert simulate_folded_fir(w, xs, correct_key(plan)) == direct_convolution(h, xs)


def test_trace_csv(pinned):
    w = build_tmcm_mul(pinned)
    txt = comb_trace_csv(w, [5, 5], [0, 1], correct_key(pinned))
    assert txt.splitlines() == ["cycle,x,i,key,f", "0,5,0,1011,65", "1,5,1,1011,115"]
    plan = assign_decoys(ConstantSet((1, 2), 8), 2, seed=0)
    t = fir_trace_csv(build_folded_fir(plan, 2), [1, 0], correct_key(plan))
    assert t.splitlines()[0] == "cycle,sample,count,x,y" and len(t.splitlines()) == 5


def test_gate_word_agree_on_example(pinned):
    g = lower_to_gates(build_tmcm_mul(pinned))
    assert eval_gates_word(g, -7, 1, pinned.key_from_int(0)) == -7 * 19
