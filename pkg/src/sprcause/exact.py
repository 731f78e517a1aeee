"""Exact-rational reachability for small models.

Independent oracle for the float value-iteration path: deterministic
memoryless policy iteration with exact Fraction linear solves.  Memoryless
deterministic policies attain extremal reachability probabilities, and at
termination the (honest) policy value is a fixed point of the optimal
Bellman operator, which pins it to the true optimum.

For the min objective, states from which some policy avoids the target
forever are pinned to exactly 0 in every evaluation; on the remaining
states every policy leaks into target-or-pinned, which makes the policy
evaluation systems nonsingular and the Bellman-min fixed point unique.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .model import ConcreteModel

DEFAULT_STATE_CAP = 12


class StateCapError(ValueError):
    """Model too large for the exact back end."""


@dataclass(frozen=True)
class RationalMDP:
    n_states: int
    # rows[s][a] is {target: Fraction} or None when the action is disabled
    rows: tuple[tuple[dict[int, Fraction] | None, ...], ...]
    initial: int = 0

    @property
    def n_actions(self) -> int:
        return len(self.rows[0])

    def enabled(self, s: int) -> list[int]:
        return [a for a, row in enumerate(self.rows[s]) if row is not None]

    def to_concrete(self, states=None, actions=None, effect=()) -> ConcreteModel:
        """Float twin of this model (for float-vs-exact comparisons)."""
        n, m = self.n_states, self.n_actions
        trans = np.zeros((n, m, n))
        enabled = np.zeros((n, m), dtype=bool)
        for s in range(n):
            for a, row in enumerate(self.rows[s]):
                if row is None:
                    continue
                enabled[s, a] = True
                for t, p in row.items():
                    trans[s, a, t] = float(p)
        return ConcreteModel(
            states=tuple(states) if states else tuple(f"s{i}" for i in range(n)),
            actions=tuple(actions) if actions else tuple(f"a{i}" for i in range(m)),
            initial=self.initial,
            effect=frozenset(effect),
            point=(),
            trans=trans,
            enabled=enabled,
        )


def from_parametric(pmodel, point: Iterable[Fraction]) -> RationalMDP:
    """Instantiate a parametric model at an exact rational point."""
    from .model import instantiate_exact

    rows = instantiate_exact(pmodel, [Fraction(x) for x in point])
    return RationalMDP(
        n_states=pmodel.n_states,
        rows=tuple(tuple(r) for r in rows),
        initial=pmodel.initial,
    )


def from_concrete(model: ConcreteModel) -> RationalMDP:
    """Convert float rows to exact binary rationals."""
    rows = []
    for s in range(model.n_states):
        per_action: list[dict[int, Fraction] | None] = []
        for a in range(len(model.actions)):
            if not model.enabled[s, a]:
                per_action.append(None)
                continue
            per_action.append(
                {
                    int(t): Fraction(float(model.trans[s, a, t]))
                    for t in np.flatnonzero(model.trans[s, a] > 0.0)
                }
            )
        rows.append(tuple(per_action))
    return RationalMDP(n_states=model.n_states, rows=tuple(rows), initial=model.initial)


def _solve_linear(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    """Gaussian elimination with exact fractions."""
    n = len(b)
    m = [row[:] + [b[i]] for i, row in enumerate(a)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular system")
        m[col], m[pivot] = m[pivot], m[col]
        inv = 1 / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [x - factor * y for x, y in zip(m[r], m[col])]
    return [m[i][n] for i in range(n)]


def _avoid_forever(mdp: RationalMDP, target: set[int]) -> set[int]:
    """States with a policy whose support never meets the target."""
    u = set(range(mdp.n_states)) - target
    while True:
        drop = set()
        for s in u:
            acts = mdp.enabled(s)
            if not acts:
                continue  # terminal: avoids trivially
            if not any(set(mdp.rows[s][a]) <= u for a in acts):
                drop.add(s)
        if not drop:
            return u
        u -= drop


def _evaluate(
    mdp: RationalMDP, policy: list[int], target: set[int], zero: set[int]
) -> list[Fraction]:
    """Exact reach probabilities of the policy's chain; `zero` states pinned."""
    n = mdp.n_states
    values: list[Fraction] = [Fraction(0)] * n
    for t in target:
        values[t] = Fraction(1)
    # states that can reach the target in this chain; the rest stay 0
    succ: list[set[int]] = [set() for _ in range(n)]
    for s in range(n):
        if s in target or s in zero or policy[s] < 0:
            continue
        succ[s] = set(mdp.rows[s][policy[s]])
    can = set(target)
    changed = True
    while changed:
        changed = False
        for s in range(n):
            if s not in can and succ[s] & can:
                can.add(s)
                changed = True
    unknown = [s for s in range(n) if s in can and s not in target and s not in zero]
    if unknown:
        idx = {s: i for i, s in enumerate(unknown)}
        k = len(unknown)
        a = [[Fraction(0)] * k for _ in range(k)]
        b = [Fraction(0)] * k
        for s in unknown:
            i = idx[s]
            a[i][i] += 1
            for t, p in mdp.rows[s][policy[s]].items():
                if t in idx:
                    a[i][idx[t]] -= p
                else:
                    b[i] += p * values[t]
        sol = _solve_linear(a, b)
        for s in unknown:
            values[s] = sol[idx[s]]
    return values


def exact_reach(
    mdp: RationalMDP,
    target: Iterable[int],
    objective: str,
    state_cap: int = DEFAULT_STATE_CAP,
) -> list[Fraction]:
    """Exact optimal reachability values (min or max over policies)."""
    if mdp.n_states > state_cap:
        raise StateCapError(f"{mdp.n_states} states exceeds cap {state_cap}")
    if objective not in ("min", "max"):
        raise ValueError("objective must be 'min' or 'max'")
    target = set(target)
    n = mdp.n_states
    zero = _avoid_forever(mdp, target) if objective == "min" else set()
    better = (lambda q, v: q > v) if objective == "max" else (lambda q, v: q < v)

    policy = [acts[0] if (acts := mdp.enabled(s)) else -1 for s in range(n)]
    seen_policies = set()
    while True:
        key = tuple(policy)
        if key in seen_policies:
            raise RuntimeError("policy iteration cycled")
        seen_policies.add(key)
        values = _evaluate(mdp, policy, target, zero)
        improved = False
        for s in range(n):
            if s in target or s in zero or policy[s] < 0:
                continue
            for a in mdp.enabled(s):
                q = sum((p * values[t] for t, p in mdp.rows[s][a].items()), Fraction(0))
                if better(q, values[s]):
                    policy[s] = a
                    improved = True
                    break
        if not improved:
            return values
