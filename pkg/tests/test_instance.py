import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from persuasion import (
    Additive,
    Anonymous,
    Coverage,
    DimensionMismatchError,
    ExplicitTable,
    InvalidInstanceError,
    InvalidSubsetError,
    PersuasionInstance,
    SupermodularQuadratic,
    UnknownStateError,
    classify_states,
    gen_gap_example,
    load_instance,
    validate_instance,
)
from persuasion.instance import eval_objective
from persuasion.setfunctions import setfunction_from_dict

from gen import random_coverage, random_table, rng_for


# evaluation oracle


def test_anonymous_min_one():
    assert eval_objective(Anonymous.at_least_one(2), {0, 1}) == 1.0


def test_additive_sum():
    assert eval_objective(Additive([0.2, 0.3, 0.5]), [0, 2]) == pytest.approx(0.7)


def test_coverage_covered_weight():
    f = Coverage([0.5, 0.5], [[0], [0, 1]])
    assert eval_objective(f, [0]) == 0.5
    assert f([1]) == 1.0
    assert f([]) == 0.0


def test_quadratic_value():
    f = SupermodularQuadratic([0.1, 0.1], [(0, 1, 0.3)])
    assert f([0, 1]) == pytest.approx(0.5)
    assert f.is_supermodular()


@pytest.mark.parametrize("S", [[3], [-1], [0, 0.5]])
def test_out_of_range_subset(S):
    with pytest.raises(InvalidSubsetError):
        Additive([0.2, 0.3, 0.5])(S)


def test_coverage_matches_its_table():
    rng = rng_for(1)
    for n in range(1, 11):
        f = random_coverage(rng, n)
        g = ExplicitTable(f.table())
        subsets = [tuple(np.flatnonzero(rng.random(n) < 0.5)) for _ in range(50)]
        assert np.array_equal(f.evaluate_many(subsets), g.evaluate_many(subsets))


# validation


def test_gap_instance_is_valid():
    assert validate_instance(gen_gap_example(3)).ok


def test_prior_sum_reported():
    inst = PersuasionInstance([0.5, 0.6], [[1.0, -1.0]], [Additive([0.5])] * 2)
    rep = validate_instance(inst)
    assert rep.violations == ["prior sums to 1.1"]


def test_monotonicity_violation_names_pair():
    f = ExplicitTable([0.0, 0.5, 0.0, 0.4])
    msgs = f.violations()
    assert any("{0}" in m and "{0, 1}" in m and "monoton" in m for m in msgs)
    inst = PersuasionInstance([1.0], [[1.0], [1.0]], [f])
    assert any(v.startswith("state ") for v in validate_instance(inst).violations)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 10**6), perturb=st.booleans())
def test_monotonicity_check_is_exact(n, seed, perturb):
    rng = np.random.default_rng(seed)
    f = random_table(rng, n)
    vals = f.values.copy()
    if perturb:
        # push some nonempty S strictly below one of its subsets
        m = int(rng.integers(1, 1 << n))
        i = int(rng.choice(np.flatnonzero([(m >> j) & 1 for j in range(n)])))
        vals[m] = vals[m ^ (1 << i)] - 0.01
        if m ^ (1 << i) == 0:
            vals[m] = -0.01
    table = ExplicitTable(vals)
    is_monotone = all(vals[m] <= vals[m | (1 << i)] for m in range(1 << n) for i in range(n))
    has_mono_msg = any("monoton" in v for v in table.violations())
    assert has_mono_msg != is_monotone


def test_rescale_flag_records_scale():
    inst = PersuasionInstance([1.0], [[1.0]], [Additive([2.0])], rescale=True)
    assert inst.scale == 2.0
    assert inst.objectives[0]([0]) == 1.0
    assert validate_instance(inst).scale == 2.0


def test_zero_prior_states_dropped():
    inst = PersuasionInstance([0.0, 1.0], [[1.0, -1.0]], [Additive([1.0])] * 2, states=["a", "b"])
    assert inst.states == ("b",)
    assert inst.utilities.tolist() == [[-1.0]]


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        PersuasionInstance([0.5, 0.5], [[1.0]], [Additive([1.0])] * 2)


def test_immutable_arrays():
    inst = gen_gap_example(2)
    with pytest.raises(ValueError):
        inst.prior[0] = 0.3


# state classification


def test_classify_single_receiver():
    inst = PersuasionInstance([0.5, 0.5], [[1.0, -1.0]], [Additive([1.0])] * 2)
    assert classify_states(inst).by_receiver[0] == (0,)


def test_classify_zero_goes_to_action_one():
    inst = PersuasionInstance([0.5, 0.5], [[0.0, 0.0]], [Additive([1.0])] * 2)
    assert classify_states(inst).by_receiver[0] == (0, 1)


def test_classify_gap_example():
    cls = classify_states(gen_gap_example(4))
    assert cls.by_state == ((0, 1, 2, 3), ())


def test_classify_partitions_agree():
    rng = rng_for(2)
    inst = PersuasionInstance(rng.dirichlet(np.ones(4)), rng.choice([-1.0, 0.0, 1.0], size=(5, 4)),
                              [Additive(np.full(5, 0.2))] * 4)
    cls = classify_states(inst)
    for i in range(5):
        for t in range(4):
            assert (i in cls.by_state[t]) == (t in cls.by_receiver[i])
        assert set(cls.by_receiver[i]) | set(cls.negative_states(i)) == set(range(4))


# file format


def test_roundtrip_json():
    inst = gen_gap_example(3)
    back = load_instance(inst.to_json())
    assert back.states == ("H", "L")
    assert np.allclose(back.prior, [0.25, 0.75])
    assert back.objectives[1]([2]) == 1.0


def test_per_action_utilities_are_differenced():
    d = {"n": 1, "prior": [0.5, 0.5],
         "utilities": {"action1": [[3.0, 1.0]], "action0": [[1.0, 2.0]]},
         "objectives": {"type": "additive", "weights": [1.0], "shared": True}}
    inst = load_instance(json.dumps(d))
    assert inst.utilities.tolist() == [[2.0, -1.0]]


@pytest.mark.parametrize("bad", [
    {"n": 1, "prior": [1.0], "utilities": [[1.0]], "objectives": [{"type": "additive", "weights": [1.0]}], "extra": 1},
    {"n": 1, "prior": [1.0], "utilities": [[1.0]]},
    {"n": 1, "prior": [1.0], "utilities": [[1.0]], "objectives": [{"type": "additive", "weights": [1.0], "x": 2}]},
    {"n": 1, "prior": [1.0], "utilities": [[1.0]], "objectives": {"type": "additive", "weights": [1.0]}},
])
def test_parser_rejects(bad):
    with pytest.raises(InvalidInstanceError):
        load_instance(json.dumps(bad))


def test_not_json():
    with pytest.raises(InvalidInstanceError):
        load_instance("{nope")


def test_setfunction_descriptors_roundtrip():
    fs = [Additive([0.1, 0.2]), Anonymous([0, 0.5, 1]), Coverage([0.5, 0.5], [[0], [1]]),
          SupermodularQuadratic([0.1, 0.1], [(0, 1, 0.3)]), ExplicitTable([0, 0.2, 0.3, 1.0])]
    for f in fs:
        g = setfunction_from_dict(f.to_dict())
        assert type(g) is type(f)
        assert np.array_equal(g.table(), f.table())


def test_unknown_state_lookup():
    with pytest.raises(UnknownStateError):
        gen_gap_example(2).state_index("M")
