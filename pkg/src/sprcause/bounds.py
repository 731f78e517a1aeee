"""Scenario-style PAC lower bounds from sample counts.

The bound after discarding k of N samples at confidence beta is the root
t of

    sum_{i<=k} C(N,i) (1-t)^i t^(N-i)  =  (1-beta)/N,

i.e. the binomial CDF at k with success probability 1-t.  The no-discard
case (k = 0) is special: the un-union-bounded scenario bound applies and
gives (1-beta)^(1/N), which is larger than the k=0 root of the equation
above.  The CDF is evaluated through the regularized incomplete beta
function, which stays finite for sample counts far beyond direct
summation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from scipy.special import betainc

from .model import Graph
from .sprcheck import cause_front, recall_covers, satisfies_minimality

BISECT_TOL = 1e-12


@dataclass(frozen=True)
class BoundQuery:
    discarded: int
    total: int
    confidence: float

    def __post_init__(self):
        if not 0 <= self.discarded <= self.total:
            raise ValueError(f"discard count {self.discarded} outside 0..{self.total}")
        if self.total < 1:
            raise ValueError("need at least one sample")
        if not 0.0 < self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside (0, 1]")


def binomial_cdf(k: int, n: int, success: float) -> float:
    """P[Bin(n, success) <= k] via the regularized incomplete beta identity."""
    if k >= n:
        return 1.0
    return float(betainc(n - k, k + 1, 1.0 - success))


def tail_root(discarded: int, total: int, confidence: float) -> float:
    """The PAC lower-bound value t*(k, beta) for k discarded of N samples."""
    q = BoundQuery(discarded, total, confidence)
    k, n, beta = q.discarded, q.total, q.confidence
    if k == 0:
        return (1.0 - beta) ** (1.0 / n)
    if k == n:
        return 0.0
    rhs = (1.0 - beta) / n

    def cdf_at(t: float) -> float:
        # success probability of a "violation" is 1 - t
        return binomial_cdf(k, n, 1.0 - t)

    lo, hi = 0.0, 1.0
    while hi - lo > BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if cdf_at(mid) < rhs:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class SampleAnalysis:
    """Per-sample cache: singleton-cause states and the support graph."""

    cause_states: frozenset[int]
    graph: Graph


@dataclass(frozen=True)
class AnalysisBatch:
    """Analyses for one sampled batch over a shared model skeleton."""

    initial: int
    effect: frozenset[int]
    analyses: tuple[SampleAnalysis, ...]

    def __post_init__(self):
        object.__setattr__(self, "_canonical_cache", {})

    @property
    def n(self) -> int:
        return len(self.analyses)

    def canonical(self, index: int, restrict: frozenset[int]) -> frozenset[int]:
        key = (index, restrict)
        cache = self._canonical_cache
        if key not in cache:
            a = self.analyses[index]
            cache[key] = cause_front(a.cause_states & restrict, a.graph, self.initial)
        return cache[key]


def cause_sample_count(cause: Iterable[int], batch: AnalysisBatch) -> int:
    """Samples on which `cause` is an SPR cause (members all singleton causes
    over the full state space, plus minimality); duplicates count separately."""
    cause = frozenset(cause)
    if cause & batch.effect:
        raise ValueError("cause states must avoid the effect set")
    count = 0
    for a in batch.analyses:
        if cause <= a.cause_states and satisfies_minimality(a.graph, batch.initial, cause):
            count += 1
    return count


def cause_probability_bound(cause: Iterable[int], batch: AnalysisBatch, confidence: float) -> float:
    """eta: PAC lower bound on the probability that `cause` is an SPR cause."""
    n = cause_sample_count(cause, batch)
    return tail_root(batch.n - n, batch.n, confidence)


def recall_sample_count(
    collection: Iterable[Iterable[int]],
    candidate_states: Iterable[int],
    batch: AnalysisBatch,
) -> int:
    """Samples on which some member is a recall-optimal SPR cause.

    The member must be made of singleton causes within the candidate
    states, satisfy minimality, and cover every effect path through the
    sample's canonical cause.  Samples whose canonical cause is empty have
    nothing to cover and count as covered.
    """
    restrict = frozenset(candidate_states)
    members = [frozenset(c) for c in collection]
    count = 0
    for i, a in enumerate(batch.analyses):
        canonical = batch.canonical(i, restrict)
        if not canonical:
            count += 1
            continue
        causes_here = a.cause_states & restrict
        for member in members:
            if member <= causes_here and satisfies_minimality(
                a.graph, batch.initial, member
            ) and recall_covers(
                a.graph, member, canonical, effect=batch.effect, initial=batch.initial
            ):
                count += 1
                break
    return count


def recall_probability_bound(
    collection: Iterable[Iterable[int]],
    candidate_states: Iterable[int],
    batch: AnalysisBatch,
    confidence: float,
) -> float:
    """zeta: PAC lower bound on the recall-optimal probability of `collection`."""
    m = recall_sample_count(collection, candidate_states, batch)
    return tail_root(batch.n - m, batch.n, confidence)
