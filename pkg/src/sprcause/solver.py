"""End-to-end identification: sampling, filtering, set cover, bounds.

Pipeline per run: draw the parameter batch, analyze every sampled MDP
(singleton-cause verdicts + support graph), keep the states whose
singleton bound clears the threshold delta, compute each sample's
canonical cause over those states, build the per-sample cover sets, pick
an irredundant index set greedily, and attach the PAC bounds.

Everything is deterministic given (model, distribution, N, delta, beta,
seed); worker count only changes scheduling, never results.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bounds import (
    AnalysisBatch,
    SampleAnalysis,
    cause_probability_bound,
    cause_sample_count,
    recall_sample_count,
    tail_root,
)
from .model import ParametricModel, instantiate, support_graph
from .reach import KAPPA_ACT
from .sprcheck import (
    KAPPA,
    recall_covers,
    satisfies_minimality,
    single_state_verdict_exact,
    singleton_causes,
)
from . import exact as exact_mod
from .sampling import DistSpec, SampleBatch, sample

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolveConfig:
    kappa: float = KAPPA
    kappa_act: float = KAPPA_ACT
    vi_tol: float = 1e-10
    geq_filter: bool = False  # delta filter with >= instead of the default >
    exact_corners: bool = False  # re-decide corner verdicts with exact arithmetic
    exact_state_cap: int = exact_mod.DEFAULT_STATE_CAP
    workers: int = 1


@dataclass(frozen=True)
class CauseSolution:
    members: tuple[frozenset[str], ...]
    eta: tuple[float, ...]
    n_counts: tuple[int, ...]
    zeta: float
    m_count: int
    candidate_states: tuple[str, ...]  # S_N, sorted by state name
    indices: tuple[int, ...]  # selected sample indices (0-based)
    cover_sizes: tuple[int, ...]
    delta: float
    beta: float
    n_samples: int
    seed: int
    empty_canonical_samples: int
    excluded_members: tuple[frozenset[str], ...] = ()
    canonical_causes: tuple[tuple[str, ...], ...] | None = None  # verbose payload

    @property
    def no_cause(self) -> bool:
        return not self.members

    def to_json_dict(self) -> dict:
        doc = {
            "members": [sorted(m) for m in self.members],
            "eta": list(self.eta),
            "n": list(self.n_counts),
            "zeta": self.zeta,
            "m": self.m_count,
            "S_N": list(self.candidate_states),
            "indices": list(self.indices),
            "delta": self.delta,
            "beta": self.beta,
            "N": self.n_samples,
            "seed": self.seed,
            "empty_canonical_samples": self.empty_canonical_samples,
        }
        if self.canonical_causes is not None:
            doc["canonical_causes"] = [list(c) for c in self.canonical_causes]
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2) + "\n"


def _analyze_point(
    pmodel: ParametricModel, point: tuple[float, ...], config: SolveConfig
) -> SampleAnalysis:
    concrete = instantiate(pmodel, point)
    verdicts = singleton_causes(
        concrete, kappa=config.kappa, kappa_act=config.kappa_act, tol=config.vi_tol
    )
    if config.exact_corners and concrete.n_states <= config.exact_state_cap:
        rational = None
        for c, v in verdicts.items():
            if v.branch.startswith("corner"):
                if rational is None:
                    rational = exact_mod.from_concrete(concrete)
                verdicts[c] = single_state_verdict_exact(
                    rational, c, set(concrete.effect), config.exact_state_cap + 1
                )
    causes = frozenset(c for c, v in verdicts.items() if v.sign == 1)
    return SampleAnalysis(cause_states=causes, graph=support_graph(concrete))


def _analyze_chunk(args) -> list[SampleAnalysis]:
    pmodel, points, config = args
    return [_analyze_point(pmodel, tuple(p), config) for p in points]


def analyze_batch(
    pmodel: ParametricModel, batch: SampleBatch, config: SolveConfig = SolveConfig()
) -> AnalysisBatch:
    """Singleton-cause analysis for every sampled point (duplicates shared)."""
    points = [tuple(float(x) for x in p) for p in batch.points]
    distinct = sorted(set(points))
    if config.workers > 1 and len(distinct) > 1:
        chunks = np.array_split(np.arange(len(distinct)), min(config.workers, len(distinct)))
        jobs = [(pmodel, [distinct[i] for i in chunk], config) for chunk in chunks]
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_analyze_chunk, jobs))
        flat = [a for part in results for a in part]
    else:
        flat = _analyze_chunk((pmodel, distinct, config))
    by_point = dict(zip(distinct, flat))
    return AnalysisBatch(
        initial=pmodel.initial,
        effect=pmodel.effect,
        analyses=tuple(by_point[p] for p in points),
    )


def filter_states(
    batch: AnalysisBatch,
    delta: float,
    beta: float,
    geq: bool = False,
) -> frozenset[int]:
    """S_N: non-effect states whose singleton bound clears delta."""
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta {delta} outside [0, 1)")
    keep = set()
    for c in range(batch.analyses[0].graph.n):
        if c in batch.effect:
            continue
        bound = cause_probability_bound({c}, batch, beta)
        if bound >= delta if geq else bound > delta:
            keep.add(c)
    return frozenset(keep)


def cover_set(
    index: int, batch: AnalysisBatch, candidate_states: frozenset[int]
) -> frozenset[int]:
    """Samples on which sample `index`'s canonical cause stays recall-optimal.

    Samples with an empty canonical cause have nothing to cover and are
    always included, as is `index` itself (self-coverage).
    """
    member = batch.canonical(index, candidate_states)
    if not member:
        raise ValueError(f"sample {index} has an empty canonical cause")
    return _cover_of(member, batch, candidate_states)


def _cover_of(
    member: frozenset[int], batch: AnalysisBatch, candidate_states: frozenset[int]
) -> frozenset[int]:
    covered = set()
    for j, a in enumerate(batch.analyses):
        canonical_j = batch.canonical(j, candidate_states)
        if not canonical_j:
            covered.add(j)
            continue
        if (
            member <= (a.cause_states & candidate_states)
            and satisfies_minimality(a.graph, batch.initial, member)
            and recall_covers(a.graph, member, canonical_j, effect=batch.effect, initial=batch.initial)
        ):
            covered.add(j)
    return frozenset(covered)


def select_indices(cover_sets: dict[int, frozenset[int]], universe: frozenset[int]) -> list[int]:
    """Greedy cover of `universe`, then a pruning pass restoring irredundancy.

    Ties go to the larger cover set, then the smaller index.  Raises when
    the sets cannot cover the universe (impossible with self-coverage).
    """
    chosen: list[int] = []
    covered: set[int] = set()
    remaining = dict(cover_sets)
    while covered < universe:
        best = None
        best_key = None
        for i in sorted(remaining):
            gain = len(remaining[i] - covered)
            key = (gain, len(remaining[i]), -i)
            if best_key is None or key > best_key:
                best, best_key = i, key
        if best is None or best_key[0] == 0:
            raise AssertionError("cover sets cannot cover all samples")
        chosen.append(best)
        covered |= remaining.pop(best)

    pruned = True
    while pruned:
        pruned = False
        for i in sorted(chosen):
            rest = set().union(*(cover_sets[j] for j in chosen if j != i)) if len(chosen) > 1 else set()
            if cover_sets[i] <= rest:
                chosen.remove(i)
                pruned = True
                break
    return sorted(chosen)


def solve(
    pmodel: ParametricModel,
    dist: DistSpec,
    n_samples: int,
    delta: float,
    beta: float,
    seed: int,
    config: SolveConfig = SolveConfig(),
    verbose: bool = False,
) -> CauseSolution:
    """Identify a nonredundant collection of probable causes with PAC bounds."""
    if n_samples < 1:
        raise ValueError("need at least one sample")
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta {delta} outside [0, 1)")
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta {beta} outside (0, 1)")
    dist = _align_dist(dist, pmodel)
    batch = sample(dist, n_samples, seed)
    analyses = analyze_batch(pmodel, batch, config)
    return solve_from_analyses(pmodel, analyses, delta, beta, seed, config, verbose)


def solve_from_analyses(
    pmodel: ParametricModel,
    analyses: AnalysisBatch,
    delta: float,
    beta: float,
    seed: int,
    config: SolveConfig = SolveConfig(),
    verbose: bool = False,
) -> CauseSolution:
    s_n = filter_states(analyses, delta, beta, geq=config.geq_filter)
    canonicals = [analyses.canonical(i, s_n) for i in range(analyses.n)]
    empty_count = sum(1 for c in canonicals if not c)
    universe = frozenset(range(analyses.n))

    # distinct nonempty canonical causes; the cover set depends only on the set
    rep_index: dict[frozenset[int], int] = {}
    for i, c in enumerate(canonicals):
        if c and c not in rep_index:
            rep_index[c] = i
    covers = {i: _cover_of(c, analyses, s_n) for c, i in rep_index.items()}

    if covers:
        chosen = select_indices(covers, universe)
    else:
        chosen = []  # no sample produced a cause: everything vacuously covered

    # a member whose own bound misses delta cannot sit in the candidate
    # family; drop it and report the honest (possibly lower) zeta
    kept, excluded = [], []
    for i in chosen:
        member = canonicals[i]
        bound = cause_probability_bound(member, analyses, beta)
        clears = bound >= delta if config.geq_filter else bound > delta
        (kept if clears else excluded).append(i)
    for i in excluded:
        log.warning(
            "dropping member %s: eta below the delta filter",
            sorted(pmodel.states[s] for s in canonicals[i]),
        )
    chosen = kept
    member_sets = [canonicals[i] for i in chosen]

    for i in chosen:
        rest = [covers[j] for j in chosen if j != i]
        union_rest = frozenset().union(*rest) if rest else frozenset()
        assert not covers[i] <= union_rest, "redundant member survived pruning"

    order = sorted(
        range(len(member_sets)), key=lambda k: sorted(pmodel.states[s] for s in member_sets[k])
    )
    member_sets = [member_sets[k] for k in order]
    chosen = [chosen[k] for k in order]
    m_count = recall_sample_count(member_sets, s_n, analyses)
    zeta = tail_root(analyses.n - m_count, analyses.n, beta)

    names = pmodel.states
    return CauseSolution(
        members=tuple(frozenset(names[s] for s in m) for m in member_sets),
        eta=tuple(cause_probability_bound(m, analyses, beta) for m in member_sets),
        n_counts=tuple(cause_sample_count(m, analyses) for m in member_sets),
        zeta=zeta,
        m_count=m_count,
        candidate_states=tuple(sorted(names[s] for s in s_n)),
        indices=tuple(sorted(chosen)),
        cover_sizes=tuple(len(covers[i]) for i in sorted(chosen)),
        delta=delta,
        beta=beta,
        n_samples=analyses.n,
        seed=seed,
        empty_canonical_samples=empty_count,
        excluded_members=tuple(frozenset(names[s] for s in canonicals[i]) for i in excluded),
        canonical_causes=(
            tuple(tuple(sorted(names[s] for s in c)) for c in canonicals) if verbose else None
        ),
    )


def _align_dist(dist: DistSpec, pmodel: ParametricModel) -> DistSpec:
    """Reorder distribution parameters to the model's parameter order."""
    want = pmodel.param_space.names
    if dist.params == want:
        return dist
    if set(dist.params) != set(want):
        raise ValueError(
            f"distribution covers {sorted(dist.params)}, model needs {sorted(want)}"
        )
    perm = [dist.params.index(p) for p in want]
    return DistSpec(
        params=want,
        weights=dist.weights,
        components=tuple(tuple(comp[j] for j in perm) for comp in dist.components),
    )
