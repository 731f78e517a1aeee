import json
from fractions import Fraction

import numpy as np
import pytest

from oracles import random_layered_mdp, random_rational_mdp
from sprcause.model import instantiate, parse_model, support_graph
from sprcause.sprcheck import (
    BRANCH_GREATER,
    build_modified,
    canonical_cause,
    cause_front,
    check_m,
    is_spr_cause,
    recall_covers,
    single_state_verdict,
    single_state_verdict_exact,
    singleton_cause_set,
)


def _names(model, indices):
    return sorted(model.states[s] for s in indices)


# --- modified model -------------------------------------------------------

def test_modified_rows_split_on_commit_probability(example_model):
    c = instantiate(example_model, [0.3, 0.6])
    s3 = c.state_index("s3")
    mod = build_modified(c, s3)
    assert mod.commit_prob == pytest.approx(1.0)
    assert mod.model.trans[s3, -1, mod.eff] == pytest.approx(1.0)
    assert mod.model.trans[s3, -1, mod.noeff] == pytest.approx(0.0)
    assert not mod.model.enabled[s3, :-1].any()
    assert not mod.model.enabled[mod.noeff].any()  # fresh terminal
    assert mod.noeff not in mod.model.effect


def test_modified_zero_commit(example_model):
    c = instantiate(example_model, [0.3, 0.6])
    s4 = c.state_index("s4")
    mod = build_modified(c, s4)
    assert mod.commit_prob == 0.0
    assert mod.model.trans[s4, -1, mod.noeff] == pytest.approx(1.0)


def test_modified_rejects_effect_pivot(example_model):
    c = instantiate(example_model, [0.3, 0.6])
    with pytest.raises(ValueError):
        build_modified(c, c.state_index("s5"))


# --- single-state verdicts ------------------------------------------------

def test_example_members_raise(example_model):
    c = instantiate(example_model, [0.3, 0.6])
    for name in ("s2", "s3"):
        v = single_state_verdict(c, c.state_index(name))
        assert v.sign == 1


def test_appendix_regimes(appendix_model):
    up = instantiate(appendix_model, [0.5, 0.3])
    down = instantiate(appendix_model, [0.2, 0.6])
    assert single_state_verdict(up, up.state_index("s1")).sign == 1
    assert single_state_verdict(down, down.state_index("s1")).sign == -1


def test_unreachable_state_with_high_commit_is_strict():
    doc = {
        "states": ["s0", "island", "e", "safe"],
        "actions": ["a"],
        "initial": "s0",
        "terminal_effect": ["e"],
        "params": ["p"],
        "transitions": [
            {"from": "s0", "action": "a", "to": "e", "prob": "p"},
            {"from": "s0", "action": "a", "to": "safe", "prob": "1-p"},
            {"from": "island", "action": "a", "to": "e", "prob": "1"},
            {"from": "safe", "action": "a", "to": "safe", "prob": "1"},
        ],
    }
    c = instantiate(parse_model(json.dumps(doc)), [0.3])
    v = single_state_verdict(c, c.state_index("island"))
    assert v.sign == 1 and v.branch == BRANCH_GREATER


def test_verdict_determinism(example_model):
    c = instantiate(example_model, [0.42, 0.42])
    first = single_state_verdict(c, 1)
    second = single_state_verdict(c, 1)
    assert first == second


# --- singleton cause sets -------------------------------------------------

def test_empty_restriction(example_model):
    c = instantiate(example_model, [0.3, 0.6])
    assert singleton_cause_set(c, restrict=()) == frozenset()


def test_example_restricted_set(example_model):
    c = instantiate(example_model, [0.3, 0.6])  # p < q
    full = singleton_cause_set(c)
    assert _names(c, full) == ["s2", "s3"]
    assert singleton_cause_set(c, restrict=full) == full


def test_random_models_match_exact_oracle():
    rng = np.random.default_rng(11)
    disagreements = 0
    total = 0
    for _ in range(40):
        mdp, effect = random_rational_mdp(rng)
        c = mdp.to_concrete(effect=effect)
        for s in range(mdp.n_states):
            if s in effect:
                continue
            total += 1
            want = single_state_verdict_exact(mdp, s, effect)
            got = single_state_verdict(c, s)
            gap = abs(
                Fraction(want.commit_prob).limit_denominator(10**15)
                - Fraction(want.bypass_prob).limit_denominator(10**15)
            )
            if gap > Fraction(1, 10**6):
                assert got.sign == want.sign
            elif got.sign != want.sign:
                disagreements += 1
    assert disagreements <= max(1, total // 100)


# --- minimality and set-level checks --------------------------------------

def test_minimality_initial_state(example_model):
    c = instantiate(example_model, [0.3, 0.6])
    assert check_m(c, [c.initial])  # empty prefix


def test_minimality_example_pair(example_model):
    c = instantiate(example_model, [0.3, 0.6])
    assert check_m(c, [c.state_index("s2"), c.state_index("s3")])


def test_minimality_fails_on_chained_states():
    doc = {
        "states": ["s0", "x", "y", "e", "safe"],
        "actions": ["a"],
        "initial": "s0",
        "terminal_effect": ["e"],
        "params": ["p"],
        "transitions": [
            {"from": "s0", "action": "a", "to": "x", "prob": "p"},
            {"from": "s0", "action": "a", "to": "safe", "prob": "1-p"},
            {"from": "x", "action": "a", "to": "y", "prob": "1"},
            {"from": "y", "action": "a", "to": "e", "prob": "1"},
            {"from": "safe", "action": "a", "to": "safe", "prob": "1"},
        ],
    }
    c = instantiate(parse_model(json.dumps(doc)), [0.5])
    # every path to y passes x
    assert not check_m(c, [c.state_index("x"), c.state_index("y")])


def test_is_spr_cause_examples(example_model, appendix_model):
    c = instantiate(example_model, [0.3, 0.6])
    assert is_spr_cause(c, [c.state_index("s2"), c.state_index("s3")])
    down = instantiate(appendix_model, [0.2, 0.6])
    assert not is_spr_cause(down, [down.state_index("s1")])
    with pytest.raises(ValueError):
        is_spr_cause(c, [c.state_index("s5")])
    with pytest.raises(ValueError):
        is_spr_cause(c, [])


# --- canonical cause and recall coverage ----------------------------------

def test_canonical_empty_when_no_causes(appendix_model):
    c = instantiate(appendix_model, [0.2, 0.6])
    assert canonical_cause(c) == frozenset()


def test_canonical_example_regimes(example_model):
    for point, want in [
        ([0.3, 0.6], ["s2", "s3"]),
        ([0.5, 0.3], ["s1", "s3"]),
        ([0.5, 0.5], ["s3"]),
    ]:
        c = instantiate(example_model, point)
        assert _names(c, canonical_cause(c)) == want


def test_canonical_appendix_up(appendix_model):
    c = instantiate(appendix_model, [0.5, 0.3])
    assert _names(c, canonical_cause(c)) == ["s1"]


def test_recall_covers_examples(example_model):
    c = instantiate(example_model, [0.3, 0.6])
    s2, s3 = c.state_index("s2"), c.state_index("s3")
    assert recall_covers(c, [s2, s3], [s2, s3])  # reflexive
    assert recall_covers(c, [s3], [s2, s3])
    assert not recall_covers(c, [s2], [s2, s3])
    assert recall_covers(c, [s2], [])  # unreachable/empty reference: vacuous


def test_set_check_agrees_with_member_verdicts(example_model, appendix_model):
    # wherever the set-level check says yes, the member verdicts and (M) agree
    for model, point, cause in [
        (example_model, [0.3, 0.6], ("s2", "s3")),
        (example_model, [0.5, 0.3], ("s1", "s3")),
        (appendix_model, [0.5, 0.3], ("s1",)),
    ]:
        c = instantiate(model, point)
        idx = [c.state_index(s) for s in cause]
        assert is_spr_cause(c, idx)
        assert all(single_state_verdict(c, s).sign == 1 for s in idx)
        assert check_m(c, idx)


def test_canonical_recall_dominance_exhaustive():
    # every SPR cause found by subset enumeration is covered by the canonical
    rng = np.random.default_rng(23)
    import itertools

    checked = 0
    for _ in range(400):
        if checked >= 25:
            break
        mdp, effect = random_layered_mdp(rng, max_states=6, max_actions=2)
        c = mdp.to_concrete(effect=effect)
        graph = support_graph(c)
        causes = singleton_cause_set(c)
        canonical = cause_front(causes, graph, c.initial)
        candidates = sorted(causes)  # set-level causes are made of singleton causes
        for r in range(1, len(candidates) + 1):
            for combo in itertools.combinations(candidates, r):
                if is_spr_cause(c, combo):
                    checked += 1
                    assert recall_covers(c, canonical, combo)
    assert checked >= 25
