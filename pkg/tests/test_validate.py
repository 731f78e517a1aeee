import json

import numpy as np
import pytest

from oracles import prob_first_greater
from sprcause.model import instantiate, parse_model
from sprcause.sampling import parse_dist
from sprcause.validate import (
    CapExceededError,
    estimate_cause_probability,
    estimate_recall_probability,
    interventional_difference,
    interventional_differences_by_policy,
    mean_point_baseline,
    subset_recall_gap,
    vertex_baseline,
)


def test_never_a_cause_estimates_zero(appendix_model, appendix_dist):
    s0 = appendix_model.state_index("s0")
    est = estimate_cause_probability(appendix_model, appendix_dist, {s0}, 200, seed=1)
    assert est.value == 0.0 and est.half_width == 0.0


def test_appendix_cause_probability_matches_quadrature(appendix_model, appendix_dist):
    s1 = appendix_model.state_index("s1")
    est = estimate_cause_probability(appendix_model, appendix_dist, {s1}, 4000, seed=2)
    truth = prob_first_greater((0.45, 0.85), (0.1, 0.5))
    assert abs(est.value - truth) <= max(est.half_width, 3 * np.sqrt(truth * (1 - truth) / 4000))


def test_example_always_cause_estimates_one(example_model, example_dist):
    s3 = example_model.state_index("s3")
    est = estimate_cause_probability(example_model, example_dist, {s3}, 2000, seed=12)
    assert est.value == 1.0  # raises the probability on the whole support


def test_example_recall_of_s3_is_one(example_model, example_dist):
    m = example_model
    s_n = frozenset(m.state_index(s) for s in ("s1", "s2", "s3"))
    est = estimate_recall_probability(
        m, example_dist, [{m.state_index("s3")}], s_n, 500, seed=3
    )
    assert est.value == 1.0


def test_recall_empty_collection_is_zero(example_model, example_dist):
    est = estimate_recall_probability(example_model, example_dist, [], {1, 2, 3}, 100, seed=4)
    assert est.value == 0.0


def test_recall_collection_from_grid_of_canonicals(example_model, example_dist):
    # canonical causes collected across the regimes cover every fresh sample
    from sprcause.sprcheck import canonical_cause

    m = example_model
    collection = []
    for point in ([0.3, 0.6], [0.5, 0.3], [0.5, 0.5]):
        c = canonical_cause(instantiate(m, point))
        if c and c not in collection:
            collection.append(c)
    s_n = frozenset(m.state_index(s) for s in ("s1", "s2", "s3"))
    est = estimate_recall_probability(m, example_dist, collection, s_n, 400, seed=5)
    assert est.value == 1.0


def test_subset_gap_singleton(example_model, example_dist):
    m = example_model
    s_n = frozenset(m.state_index(s) for s in ("s1", "s2", "s3"))
    gap = subset_recall_gap(m, example_dist, [frozenset({m.state_index("s3")})], s_n, 300, seed=6)
    assert len(gap.subsets) == 1  # only the empty set
    assert gap.max_subset_value == 0.0
    assert gap.gap == gap.full.value


def test_single_sample_half_width_is_defined(appendix_model, appendix_dist):
    s1 = appendix_model.state_index("s1")
    est = estimate_cause_probability(appendix_model, appendix_dist, {s1}, 1, seed=8)
    assert est.value in (0.0, 1.0)
    assert est.half_width == 0.0


def test_subset_cap():
    from sprcause import fixtures

    m = fixtures.builtin_model("example")
    d = fixtures.builtin_dist("example")
    members = [frozenset({i}) for i in range(13)]
    with pytest.raises(CapExceededError):
        subset_recall_gap(m, d, members, frozenset(range(13)), 10, seed=7)


def test_baselines_on_appendix(appendix_model, appendix_dist):
    # the shipped distribution's mean has p > q, so both baselines find {s1}
    s1 = appendix_model.state_index("s1")
    assert mean_point_baseline(appendix_model, appendix_dist) == frozenset({s1})
    na2 = vertex_baseline(appendix_model, appendix_dist)
    assert frozenset({s1}) in na2
    assert frozenset() in na2  # the p < q corner has no cause


def test_point_mass_baseline_matches_canonical(example_model):
    from sprcause.sprcheck import canonical_cause

    dist = parse_dist(json.dumps({"p": {"point": 0.5}, "q": {"point": 0.3}}))
    got = mean_point_baseline(example_model, dist)
    assert got == canonical_cause(instantiate(example_model, [0.5, 0.3]))


# --- interventional diagnostics -------------------------------------------

def test_interventional_convention_when_avoidance_impossible():
    doc = {
        "states": ["s0", "mid", "e"],
        "actions": ["a"],
        "initial": "s0",
        "terminal_effect": ["e"],
        "params": ["p"],
        "transitions": [
            {"from": "s0", "action": "a", "to": "mid", "prob": "p"},
            {"from": "s0", "action": "a", "to": "e", "prob": "1-p"},
            {"from": "mid", "action": "a", "to": "e", "prob": "1"},
        ],
    }
    c = instantiate(parse_model(json.dumps(doc)), [0.5])
    # C = S \ E and the effect is reached almost surely: conditioning on
    # avoiding C is impossible, so that conditional contributes 0
    diffs = interventional_differences_by_policy(c, {0, 1})
    assert len(diffs) == 1
    assert diffs[0][1] == pytest.approx(1.0)  # Pr(E | visited) - 0


def test_interventional_disconnected_cause(appendix_model):
    c = instantiate(appendix_model, [0.5, 0.3])
    s2 = c.state_index("s2")  # the safe sink: never on an effect path
    max_diff, _ = interventional_difference(c, {s2})
    assert max_diff <= 0.0


def test_interventional_appendix_policies(appendix_model):
    p, q = 0.5, 0.3
    c = instantiate(appendix_model, [p, q])
    s1 = c.state_index("s1")
    diffs = dict()
    for policy, d in interventional_differences_by_policy(c, {s1}):
        diffs[c.actions[policy[c.initial]]] = d
    # action b: Pr(E | via s1) = p, avoidance never reaches E; action a
    # never visits s1, so the visited conditional contributes 0
    assert diffs["b"] == pytest.approx(p - 0.0)
    assert diffs["a"] == pytest.approx(0.0 - q)
    max_diff, min_diff = interventional_difference(c, {s1})
    assert max_diff == pytest.approx(p)
    assert min_diff == pytest.approx(-q)


def test_interventional_caps(grid_model_a):
    c = instantiate(grid_model_a, [0.875, 0.5, 0.6])
    with pytest.raises(CapExceededError):
        interventional_difference(c, {0})
