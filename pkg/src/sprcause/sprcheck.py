"""Deciding strict-probability-raising (SPR) cause-hood.

The single-state check follows the standard modified-model construction:
all actions at the pivot state c are replaced by one action that jumps to
a fixed effect state with probability w_c (the worst-case probability of
reaching the effect from c) and to a fresh terminal non-effect state
otherwise.  c raises the probability strictly iff w_c exceeds the
best-case reachability q of the effect from the initial state in that
modified model; ties fall back to a reachability check inside the
sub-model of value-optimal actions.

Set-level cause-hood reduces to the singleton verdicts plus the
minimality condition (M): every member must be reachable without first
crossing the other members.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from . import exact as exact_mod
from .model import ConcreteModel, Graph, support_graph
from .reach import KAPPA_ACT, VI_TOL, max_reach, min_reach, reachable_avoiding, exists_path_via

KAPPA = 1e-7

BRANCH_GREATER = "strict-greater"
BRANCH_LESS = "strict-less"
BRANCH_CORNER_REACHABLE = "corner-reachable"
BRANCH_CORNER_UNREACHABLE = "corner-unreachable"


@dataclass(frozen=True)
class ModifiedModel:
    base: ConcreteModel
    pivot: int
    eff: int  # fixed member of the effect set
    noeff: int  # fresh terminal state outside the effect set
    commit_prob: float  # worst-case reach probability from the pivot
    model: ConcreteModel


@dataclass(frozen=True)
class CauseVerdict:
    state: int
    sign: int  # +1: singleton SPR cause, -1: not
    branch: str
    commit_prob: float  # w_c
    bypass_prob: float  # q at the initial state of the modified model

    def __post_init__(self):
        expected = 1 if self.branch in (BRANCH_GREATER, BRANCH_CORNER_UNREACHABLE) else -1
        if self.sign != expected:
            raise ValueError(f"sign {self.sign} inconsistent with branch {self.branch}")


def build_modified(
    model: ConcreteModel, pivot: int, commit_prob: float | None = None, tol: float = VI_TOL
) -> ModifiedModel:
    """Replace the pivot's actions by a single effect/no-effect coin flip."""
    if pivot in model.effect:
        raise ValueError(f"pivot {model.states[pivot]!r} is an effect state")
    if commit_prob is None:
        commit_prob = float(min_reach(model, model.effect, tol=tol).values[pivot])
    n, m = model.n_states, len(model.actions)
    eff = min(model.effect)
    noeff = n
    trans = np.zeros((n + 1, m + 1, n + 1))
    trans[:n, :m, :n] = model.trans
    enabled = np.zeros((n + 1, m + 1), dtype=bool)
    enabled[:n, :m] = model.enabled
    trans[pivot, :, :] = 0.0
    enabled[pivot, :] = False
    enabled[pivot, m] = True
    trans[pivot, m, eff] = commit_prob
    trans[pivot, m, noeff] = 1.0 - commit_prob
    modified = ConcreteModel(
        states=model.states + ("noeff",),
        actions=model.actions + ("gamma",),
        initial=model.initial,
        effect=model.effect,
        point=model.point,
        trans=trans,
        enabled=enabled,
    )
    return ModifiedModel(
        base=model, pivot=pivot, eff=eff, noeff=noeff,
        commit_prob=float(commit_prob), model=modified,
    )


def single_state_verdict(
    model: ConcreteModel,
    state: int,
    kappa: float = KAPPA,
    kappa_act: float = KAPPA_ACT,
    commit_prob: float | None = None,
    tol: float = VI_TOL,
) -> CauseVerdict:
    """Decide whether {state} is an SPR cause for the model's effect set."""
    if state == model.initial:
        # the modified initial state keeps only the coin-flip action, so its
        # best-case value equals the commit probability and the corner
        # reachability check is reflexively true
        if commit_prob is None:
            commit_prob = float(min_reach(model, model.effect, tol=tol).values[state])
        return CauseVerdict(state, -1, BRANCH_CORNER_REACHABLE, commit_prob, commit_prob)
    modified = build_modified(model, state, commit_prob, tol)
    mod = modified.model
    mx = max_reach(mod, mod.effect, tol=tol, kappa_act=kappa_act)
    w, q0 = modified.commit_prob, float(mx.values[model.initial])
    if w - q0 > kappa:
        return CauseVerdict(state, 1, BRANCH_GREATER, w, q0)
    if w - q0 < -kappa:
        return CauseVerdict(state, -1, BRANCH_LESS, w, q0)
    # corner: is the pivot reachable from the initial state when only
    # value-optimal actions remain?
    succ = []
    for s in range(mod.n_states):
        targets: set[int] = set()
        for a in mx.optimal_actions[s]:
            targets |= {int(t) for t in np.flatnonzero(mod.trans[s, a] > 0.0)}
        succ.append(frozenset(targets))
    sub = Graph(n=mod.n_states, succ=tuple(succ), edges=())
    if state in reachable_avoiding(sub, mod.initial, ()):
        return CauseVerdict(state, -1, BRANCH_CORNER_REACHABLE, w, q0)
    return CauseVerdict(state, 1, BRANCH_CORNER_UNREACHABLE, w, q0)


def singleton_causes(
    model: ConcreteModel,
    restrict: Iterable[int] | None = None,
    kappa: float = KAPPA,
    kappa_act: float = KAPPA_ACT,
    tol: float = VI_TOL,
) -> dict[int, CauseVerdict]:
    """Verdicts for every candidate state (or a restriction of them).

    Shares one worst-case reachability pass across all pivots.
    """
    base_min = min_reach(model, model.effect, tol=tol)
    candidates = sorted(set(restrict) if restrict is not None else range(model.n_states))
    out: dict[int, CauseVerdict] = {}
    for c in candidates:
        if c in model.effect:
            continue
        out[c] = single_state_verdict(
            model, c, kappa, kappa_act, commit_prob=float(base_min.values[c]), tol=tol
        )
    return out


def singleton_cause_set(
    model: ConcreteModel,
    restrict: Iterable[int] | None = None,
    kappa: float = KAPPA,
    kappa_act: float = KAPPA_ACT,
) -> frozenset[int]:
    """States whose singletons are SPR causes, intersected with `restrict`."""
    verdicts = singleton_causes(model, restrict, kappa, kappa_act)
    return frozenset(c for c, v in verdicts.items() if v.sign == 1)


def satisfies_minimality(graph: Graph, initial: int, cause: Iterable[int]) -> bool:
    """Condition (M): each member reachable while avoiding the others."""
    cause = set(cause)
    return all(c in reachable_avoiding(graph, initial, cause - {c}) for c in cause)


def check_m(model: ConcreteModel, cause: Iterable[int]) -> bool:
    return satisfies_minimality(support_graph(model), model.initial, cause)


def is_spr_cause(
    model: ConcreteModel,
    cause: Iterable[int],
    kappa: float = KAPPA,
    kappa_act: float = KAPPA_ACT,
) -> bool:
    """Set-level check: every member a singleton cause, plus condition (M)."""
    cause = set(cause)
    if not cause:
        raise ValueError("the empty set is not a cause candidate")
    if cause & model.effect:
        raise ValueError("cause states must avoid the effect set")
    members = singleton_cause_set(model, cause, kappa, kappa_act)
    if members != frozenset(cause):
        return False
    return check_m(model, cause)


def cause_front(causes: Iterable[int], graph: Graph, initial: int) -> frozenset[int]:
    """Members reachable without first crossing another member."""
    causes = set(causes)
    return frozenset(
        c for c in causes if c in reachable_avoiding(graph, initial, causes - {c})
    )


def canonical_cause(
    model: ConcreteModel,
    restrict: Iterable[int] | None = None,
    kappa: float = KAPPA,
    kappa_act: float = KAPPA_ACT,
) -> frozenset[int]:
    """The front of all singleton causes within the given state restriction."""
    causes = singleton_cause_set(model, restrict, kappa, kappa_act)
    return cause_front(causes, support_graph(model), model.initial)


def recall_covers(
    model_or_graph, cause: Iterable[int], reference: Iterable[int],
    effect: Iterable[int] | None = None, initial: int | None = None,
) -> bool:
    """Does every finite path that hits `reference` and reaches the effect
    also hit `cause`?  Vacuously true when `reference` is unreachable."""
    if isinstance(model_or_graph, ConcreteModel):
        graph = support_graph(model_or_graph)
        effect = model_or_graph.effect
        initial = model_or_graph.initial
    else:
        graph = model_or_graph
        if effect is None or initial is None:
            raise ValueError("effect and initial are required with a raw graph")
    return not exists_path_via(graph, initial, via=reference, target=effect, avoid=cause)


# --- exact-rational twin (oracle for the float verdicts) ------------------

def _modified_rational(
    mdp: exact_mod.RationalMDP, pivot: int, effect: set[int], w: Fraction
) -> exact_mod.RationalMDP:
    n, m = mdp.n_states, mdp.n_actions
    rows = [list(r) + [None] for r in mdp.rows]
    rows[pivot] = [None] * m + [{min(effect): w, n: 1 - w}]
    rows.append([None] * (m + 1))  # the fresh terminal no-effect state
    return exact_mod.RationalMDP(
        n_states=n + 1, rows=tuple(tuple(r) for r in rows), initial=mdp.initial
    )


def single_state_verdict_exact(
    mdp: exact_mod.RationalMDP,
    state: int,
    effect: set[int],
    state_cap: int = exact_mod.DEFAULT_STATE_CAP,
) -> CauseVerdict:
    """Same trichotomy with exact arithmetic; the corner is exact equality."""
    if state in effect:
        raise ValueError("pivot is an effect state")
    w = exact_mod.exact_reach(mdp, effect, "min", state_cap)[state]
    modified = _modified_rational(mdp, state, effect, w)
    values = exact_mod.exact_reach(modified, effect, "max", state_cap + 1)
    q0 = values[modified.initial]
    if w > q0:
        return CauseVerdict(state, 1, BRANCH_GREATER, float(w), float(q0))
    if w < q0:
        return CauseVerdict(state, -1, BRANCH_LESS, float(w), float(q0))
    succ = []
    for s in range(modified.n_states):
        targets: set[int] = set()
        for a in modified.enabled(s):
            row = modified.rows[s][a]
            q = sum((p * values[t] for t, p in row.items()), Fraction(0))
            if q == values[s]:
                targets |= set(row)
        succ.append(frozenset(targets))
    sub = Graph(n=modified.n_states, succ=tuple(succ), edges=())
    if state in reachable_avoiding(sub, modified.initial, ()):
        return CauseVerdict(state, -1, BRANCH_CORNER_REACHABLE, float(w), float(q0))
    return CauseVerdict(state, 1, BRANCH_CORNER_UNREACHABLE, float(w), float(q0))
