"""Extremal reachability probabilities and qualitative path queries.

Quantitative min/max reachability is computed by value iteration from
below with graph-based precomputation pinning the exact 0 and 1 values:

* max objective: states that cannot reach the target at all get 0, states
  with an almost-surely-reaching policy get 1 (the standard double
  fixpoint), and the rest iterate to the least fixed point.
* min objective: states from which some policy avoids the target forever
  get 0 (greatest fixpoint over closed sub-systems); on the remainder the
  Bellman-min operator has a unique fixed point, so plain iteration is
  safe.

Pinning matters: a residual check alone can stop far below the true value
when the only mass flows through slow cycles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .model import ConcreteModel, Graph

VI_TOL = 1e-10
KAPPA_ACT = 1e-7
MAX_SWEEPS = 10**6


class IterationLimitError(RuntimeError):
    """Value iteration hit the sweep cap without converging."""


@dataclass(frozen=True)
class QualitativeSets:
    prob0: frozenset[int]
    prob1: frozenset[int]  # empty for the min objective (not precomputed)


@dataclass(frozen=True)
class ReachValues:
    objective: str  # "min" | "max"
    target: frozenset[int]
    values: np.ndarray
    residual: float
    sweeps: int
    qualitative: QualitativeSets
    _model: "ConcreteModel"
    _kappa_act: float

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def optimal_actions(self) -> tuple[tuple[int, ...], ...]:
        """Per state, the enabled actions whose backup matches the value
        within the action tolerance (computed on demand)."""
        n, m = self._model.n_states, len(self._model.actions)
        q = (self._model.trans.reshape(n * m, n) @ self.values).reshape(n, m)
        mask = self._model.enabled & (np.abs(self.values[:, None] - q) <= self._kappa_act)
        return tuple(tuple(int(a) for a in np.flatnonzero(mask[s])) for s in range(n))


def _target_mask(n: int, target: Iterable[int]) -> np.ndarray:
    tgt = np.zeros(n, dtype=bool)
    for t in target:
        tgt[t] = True
    return tgt


def _prob0_max_mask(pos: np.ndarray, tgt: np.ndarray) -> np.ndarray:
    can = tgt.copy()
    while True:
        grown = can | (pos & can[None, None, :]).any(axis=(1, 2))
        if (grown == can).all():
            return ~can
        can = grown


def _prob1_max_mask(pos: np.ndarray, enabled: np.ndarray, tgt: np.ndarray) -> np.ndarray:
    u = np.ones(tgt.shape, dtype=bool)
    while True:
        # grow from the target the states that can step toward it while
        # staying inside the current candidate set
        allin = ~((pos & ~u[None, None, :]).any(axis=2)) & enabled
        v = tgt.copy()
        while True:
            somein = (pos & v[None, None, :]).any(axis=2)
            grown = v | (allin & somein).any(axis=1)
            if (grown == v).all():
                break
            v = grown
        if (v == u).all():
            return u
        u = v


def _prob0_min_mask(pos: np.ndarray, enabled: np.ndarray, tgt: np.ndarray) -> np.ndarray:
    # greatest fixpoint of "some enabled action keeps the support inside";
    # terminal states avoid trivially
    terminal = ~enabled.any(axis=1)
    u = ~tgt
    while True:
        allin = ~((pos & ~u[None, None, :]).any(axis=2)) & enabled
        keep = allin.any(axis=1) | terminal
        grown = u & keep
        if (grown == u).all():
            return u
        u = grown


def prob0_max(model: ConcreteModel, target: set[int]) -> set[int]:
    """States where even the best policy never reaches the target."""
    pos = (model.trans > 0.0) & model.enabled[:, :, None]
    mask = _prob0_max_mask(pos, _target_mask(model.n_states, target))
    return {int(s) for s in np.flatnonzero(mask)}


def prob1_max(model: ConcreteModel, target: set[int]) -> set[int]:
    """States with a policy reaching the target almost surely."""
    pos = (model.trans > 0.0) & model.enabled[:, :, None]
    mask = _prob1_max_mask(pos, model.enabled, _target_mask(model.n_states, target))
    return {int(s) for s in np.flatnonzero(mask)}


def prob0_min(model: ConcreteModel, target: set[int]) -> set[int]:
    """States where some policy avoids the target forever."""
    pos = (model.trans > 0.0) & model.enabled[:, :, None]
    mask = _prob0_min_mask(pos, model.enabled, _target_mask(model.n_states, target))
    return {int(s) for s in np.flatnonzero(mask)}


def _value_iteration(
    model: ConcreteModel,
    target: set[int],
    objective: str,
    tol: float,
    kappa_act: float,
    max_sweeps: int,
    trace: list[np.ndarray] | None = None,
) -> ReachValues:
    n, m = model.n_states, len(model.actions)
    tgt = _target_mask(n, target)
    pos = (model.trans > 0.0) & model.enabled[:, :, None]

    if objective == "max":
        p0 = _prob0_max_mask(pos, tgt)
        p1 = _prob1_max_mask(pos, model.enabled, tgt)
        quali = QualitativeSets(
            frozenset(int(s) for s in np.flatnonzero(p0)),
            frozenset(int(s) for s in np.flatnonzero(p1)),
        )
    else:
        p0 = _prob0_min_mask(pos, model.enabled, tgt)
        p1 = np.zeros(n, dtype=bool)
        quali = QualitativeSets(frozenset(int(s) for s in np.flatnonzero(p0)), frozenset())

    pinned = p0 | p1 | tgt
    v = np.zeros(n)
    v[p1] = 1.0
    v[tgt] = 1.0

    no_action = ~model.enabled.any(axis=1)
    flat = model.trans.reshape(n * m, n)
    disabled = ~model.enabled
    fill = -np.inf if objective == "max" else np.inf
    reduce_ = np.maximum.reduce if objective == "max" else np.minimum.reduce
    qbuf = np.empty(n * m)

    residual = np.inf
    sweeps = 0
    while residual > tol:
        if sweeps >= max_sweeps:
            raise IterationLimitError(f"no convergence after {max_sweeps} sweeps")
        np.matmul(flat, v, out=qbuf)
        q = qbuf.reshape(n, m)
        q[disabled] = fill
        new = reduce_(q, axis=1)
        new[no_action] = 0.0
        new[pinned] = v[pinned]
        residual = float(np.max(np.abs(new - v)))
        v = new
        sweeps += 1
        if trace is not None:
            trace.append(v.copy())

    v = np.clip(v, 0.0, 1.0)
    return ReachValues(
        objective=objective,
        target=frozenset(target),
        values=v,
        residual=residual,
        sweeps=sweeps,
        qualitative=quali,
        _model=model,
        _kappa_act=kappa_act,
    )


def max_reach(
    model: ConcreteModel,
    target: Iterable[int],
    tol: float = VI_TOL,
    kappa_act: float = KAPPA_ACT,
    max_sweeps: int = MAX_SWEEPS,
    trace: list[np.ndarray] | None = None,
) -> ReachValues:
    """Best-case (policy-maximal) probability of eventually reaching target."""
    return _value_iteration(model, set(target), "max", tol, kappa_act, max_sweeps, trace)


def min_reach(
    model: ConcreteModel,
    target: Iterable[int],
    tol: float = VI_TOL,
    kappa_act: float = KAPPA_ACT,
    max_sweeps: int = MAX_SWEEPS,
    trace: list[np.ndarray] | None = None,
) -> ReachValues:
    """Worst-case-for-the-adversary (policy-minimal) reachability probability."""
    return _value_iteration(model, set(target), "min", tol, kappa_act, max_sweeps, trace)


def reachable_avoiding(graph: Graph, start: int, avoid: Iterable[int]) -> frozenset[int]:
    """States s with a path start .. s whose strict prefix avoids `avoid`.

    Until semantics: the start itself is always reported (empty prefix), and
    states inside `avoid` are reported when first reached but never expanded.
    """
    avoid = set(avoid)
    seen = {start}
    stack = [] if start in avoid else [start]
    while stack:
        s = stack.pop()
        for t in graph.succ[s]:
            if t not in seen:
                seen.add(t)
                if t not in avoid:
                    stack.append(t)
    return frozenset(seen)


def exists_path_via(
    graph: Graph,
    start: int,
    via: Iterable[int],
    target: Iterable[int],
    avoid: Iterable[int],
) -> bool:
    """Is there a path from start that hits `via` and then `target`, never
    touching `avoid`?"""
    avoid = set(avoid)
    targets = set(target) - avoid
    first_leg = reachable_avoiding(graph, start, avoid)
    for v in set(via) - avoid:
        if v in first_leg and reachable_avoiding(graph, v, avoid) & targets:
            return True
    return False
