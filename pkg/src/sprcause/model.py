"""Parametric MDPs, their JSON file format, and concrete instantiations.

A parametric model is a finite MDP whose transition probabilities are
arithmetic expressions over a parameter vector.  Instantiating it at a
parameter point yields a concrete MDP with dense per-(state, action)
probability rows; rows are validated (sum to 1, entries in [0,1] up to a
small float tolerance) rather than assumed well defined.

States and actions are strings in files and dense integer indices
internally; index order is file order, which keeps every downstream
computation deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .expr import Expr, ExprError, ParamSpace, evaluate, evaluate_exact, is_literal_zero, parse_expr

ROW_SUM_TOL = 1e-9
ENTRY_TOL = 1e-12

_MODEL_KEYS = {"states", "actions", "initial", "terminal_effect", "params", "transitions"}
_TRANS_KEYS = {"from", "action", "to", "prob"}


class ModelError(ValueError):
    """Malformed model document or ill-defined instantiation."""


@dataclass(frozen=True)
class ParametricModel:
    states: tuple[str, ...]
    actions: tuple[str, ...]
    initial: int
    effect: frozenset[int]  # terminal effect states
    param_space: ParamSpace
    # transitions[s][a] is a dict {target: Expr}; missing (s, a) means disabled
    transitions: tuple[tuple[dict[int, Expr] | None, ...], ...]

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    def state_index(self, name: str) -> int:
        try:
            return self.states.index(name)
        except ValueError:
            raise ModelError(f"unknown state {name!r}") from None

    def enabled_actions(self, s: int) -> tuple[int, ...]:
        return tuple(a for a, row in enumerate(self.transitions[s]) if row is not None)


@dataclass(frozen=True)
class ConcreteModel:
    """A parametric model evaluated at one parameter point (dense rows)."""

    states: tuple[str, ...]
    actions: tuple[str, ...]
    initial: int
    effect: frozenset[int]
    point: tuple[float, ...]
    trans: np.ndarray  # (S, A, S), zero rows where disabled
    enabled: np.ndarray  # (S, A) bool

    def __post_init__(self):
        self.trans.setflags(write=False)
        self.enabled.setflags(write=False)

    @property
    def n_states(self) -> int:
        return len(self.states)

    def state_index(self, name: str) -> int:
        try:
            return self.states.index(name)
        except ValueError:
            raise ModelError(f"unknown state {name!r}") from None


@dataclass(frozen=True)
class Graph:
    """Support graph: edge s -> t iff some action moves s to t with P > 0."""

    n: int
    succ: tuple[frozenset[int], ...]
    edges: tuple[tuple[int, int, int], ...]  # (state, action, successor)


def parse_model(document: str) -> ParametricModel:
    """Parse and validate the JSON model format."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as e:
        raise ModelError(f"invalid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ModelError("model document must be a JSON object")
    unknown = set(doc) - _MODEL_KEYS
    if unknown:
        raise ModelError(f"unknown keys: {sorted(unknown)}")
    missing = _MODEL_KEYS - set(doc)
    if missing:
        raise ModelError(f"missing keys: {sorted(missing)}")

    states = tuple(doc["states"])
    actions = tuple(doc["actions"])
    if len(set(states)) != len(states) or len(set(actions)) != len(actions):
        raise ModelError("duplicate state or action names")
    if not doc["terminal_effect"]:
        raise ModelError("terminal_effect must be nonempty")
    s_index = {s: i for i, s in enumerate(states)}
    a_index = {a: i for i, a in enumerate(actions)}
    if doc["initial"] not in s_index:
        raise ModelError(f"initial state {doc['initial']!r} not declared")
    for e in doc["terminal_effect"]:
        if e not in s_index:
            raise ModelError(f"effect state {e!r} not declared")
    effect = frozenset(s_index[e] for e in doc["terminal_effect"])
    params = ParamSpace(tuple(doc["params"]))

    rows: list[list[dict[int, Expr] | None]] = [
        [None] * len(actions) for _ in states
    ]
    seen: set[tuple[int, int, int]] = set()
    for tr in doc["transitions"]:
        if set(tr) != _TRANS_KEYS:
            raise ModelError(f"transition must have exactly keys {sorted(_TRANS_KEYS)}")
        for key in ("from", "to"):
            if tr[key] not in s_index:
                raise ModelError(f"transition references unknown state {tr[key]!r}")
        if tr["action"] not in a_index:
            raise ModelError(f"transition references unknown action {tr['action']!r}")
        s, a, t = s_index[tr["from"]], a_index[tr["action"]], s_index[tr["to"]]
        if (s, a, t) in seen:
            raise ModelError(f"duplicate transition {tr['from']}-{tr['action']}->{tr['to']}")
        seen.add((s, a, t))
        try:
            prob = parse_expr(tr["prob"], params)
        except ExprError as e:
            raise ModelError(
                f"transition {tr['from']}-{tr['action']}->{tr['to']}: {e}"
            ) from None
        if is_literal_zero(prob):
            continue  # identically zero: does not enable the action
        if rows[s][a] is None:
            rows[s][a] = {}
        rows[s][a][t] = prob

    # Terminal states must be exactly the declared effect set.
    for i, s in enumerate(states):
        has_action = any(rows[i][a] is not None for a in range(len(actions)))
        if i in effect and has_action:
            raise ModelError(f"effect state {s!r} must be terminal (no transitions)")
        if i not in effect and not has_action:
            raise ModelError(f"non-effect state {s!r} has no enabled action")

    return ParametricModel(
        states=states,
        actions=actions,
        initial=s_index[doc["initial"]],
        effect=effect,
        param_space=params,
        transitions=tuple(tuple(r) for r in rows),
    )


def load_model(path) -> ParametricModel:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_model(fh.read())


def instantiate(model: ParametricModel, point: Sequence[float]) -> ConcreteModel:
    """Evaluate every transition expression at the parameter point.

    Raises ModelError when a row is not a probability distribution: an
    entry further than ENTRY_TOL outside [0,1], or a row sum off by more
    than ROW_SUM_TOL.  Entries within tolerance are clamped to [0,1].
    """
    if len(point) != model.param_space.dimension:
        raise ModelError(
            f"parameter point has dimension {len(point)}, expected {model.param_space.dimension}"
        )
    env = dict(zip(model.param_space.names, map(float, point)))
    n, m = model.n_states, model.n_actions
    trans = np.zeros((n, m, n))
    enabled = np.zeros((n, m), dtype=bool)
    for s in range(n):
        for a in range(m):
            row = model.transitions[s][a]
            if row is None:
                continue
            enabled[s, a] = True
            total = 0.0
            for t, ex in row.items():
                v = evaluate(ex, env)
                if v < -ENTRY_TOL or v > 1.0 + ENTRY_TOL:
                    raise ModelError(
                        f"entry {v!r} out of [0,1] at ({model.states[s]}, {model.actions[a]})"
                    )
                v = min(max(v, 0.0), 1.0)
                trans[s, a, t] = v
                total += v
            if abs(total - 1.0) > ROW_SUM_TOL:
                raise ModelError(
                    f"row sums to {total!r} at ({model.states[s]}, {model.actions[a]})"
                )
    return ConcreteModel(
        states=model.states,
        actions=model.actions,
        initial=model.initial,
        effect=model.effect,
        point=tuple(float(x) for x in point),
        trans=trans,
        enabled=enabled,
    )


def instantiate_exact(
    model: ParametricModel, point: Sequence[Fraction]
) -> "list[list[dict[int, Fraction] | None]]":
    """Exact-rational rows for the same point (used by the exact back end)."""
    if len(point) != model.param_space.dimension:
        raise ModelError("parameter point has wrong dimension")
    env = {name: Fraction(v) for name, v in zip(model.param_space.names, point)}
    rows: list[list[dict[int, Fraction] | None]] = []
    for s in range(model.n_states):
        out: list[dict[int, Fraction] | None] = []
        for a in range(model.n_actions):
            row = model.transitions[s][a]
            if row is None:
                out.append(None)
                continue
            vals = {t: evaluate_exact(ex, env) for t, ex in row.items()}
            if any(v < 0 or v > 1 for v in vals.values()):
                raise ModelError(f"entry out of [0,1] at ({model.states[s]}, {model.actions[a]})")
            if sum(vals.values()) != 1:
                raise ModelError(f"row does not sum to 1 at ({model.states[s]}, {model.actions[a]})")
            out.append(vals)
        rows.append(out)
    return rows


def model_to_json(model: ParametricModel) -> dict:
    """The JSON mirror of a parametric model (inverse of parse_model)."""
    from .expr import to_string

    transitions = []
    for s in range(model.n_states):
        for a in range(model.n_actions):
            row = model.transitions[s][a]
            if row is None:
                continue
            for t in sorted(row):
                transitions.append(
                    {
                        "from": model.states[s],
                        "action": model.actions[a],
                        "to": model.states[t],
                        "prob": to_string(row[t]),
                    }
                )
    return {
        "states": list(model.states),
        "actions": list(model.actions),
        "initial": model.states[model.initial],
        "terminal_effect": sorted(model.states[e] for e in model.effect),
        "params": list(model.param_space.names),
        "transitions": transitions,
    }


def support_graph(model: ConcreteModel) -> Graph:
    """Edges with positive probability under some action."""
    pos = model.trans > 0.0
    succ = []
    edges = []
    for s in range(model.n_states):
        targets: set[int] = set()
        for a in np.flatnonzero(model.enabled[s]):
            for t in np.flatnonzero(pos[s, a]):
                targets.add(int(t))
                edges.append((s, int(a), int(t)))
        succ.append(frozenset(targets))
    return Graph(n=model.n_states, succ=tuple(succ), edges=tuple(edges))
