"""Document-selection policies and the main recommendation engine.

The engine runs one trial per incoming situation: retrieve the nearest
case, pick a slate (greedy in high-level critical situations, epsilon-
greedy otherwise, uniform-random fallback below the similarity threshold),
absorb the click feedback, refresh the dimension weights, and re-cluster
the case base periodically. A context-free variant keeps one global
preference pool and ignores situations entirely; it is the comparison
baseline for the clustering experiments.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from .casebase import (CaseBase, DocumentStats, RetrievalResult,
                       UserPreferences)
from .clustering import ClusteringConfig, cluster_situations, should_recluster
from .errors import EmptyCandidates
from .simindex import SituationIndex
from .situation import DimensionWeights, Situation, Taxonomies


@dataclass
class BanditConfig:
    epsilon: float = 0.1
    slate_size: int = 10
    threshold_b: float = 2.4
    seed: int = 0
    cold_start_fallback: bool = True

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must be in [0, 1], got {self.epsilon}")
        if self.slate_size < 1:
            raise ValueError("slate_size must be >= 1")
        if not 0.0 <= self.threshold_b <= 3.0:
            raise ValueError(f"threshold_b must be in [0, 3], got "
                             f"{self.threshold_b}")


class Branch(str, Enum):
    HLCS_GREEDY = "hlcs-greedy"
    EPS_GREEDY = "eps-greedy"
    COLD_START = "cold-start"
    NO_RECOMMEND = "no-recommend"


@dataclass
class TrialRecord:
    situation: Situation
    shown: List[str]
    clicks: Dict[str, int]
    branch: Branch


@dataclass
class Recommendation:
    slate: List[str]
    branch: Branch
    retrieval: Optional[RetrievalResult]


def get_ctr(ds: DocumentStats) -> float:
    """Empirical click-through rate; zero-impression documents score 0."""
    if ds.impressions <= 0:
        return 0.0
    return min(ds.clicks, ds.impressions) / ds.impressions


def greedy_top_n(candidates: UserPreferences, n: int) -> List[str]:
    """Top-n documents by CTR, ties broken by lowest doc id."""
    ranked = sorted(candidates.docs,
                    key=lambda d: (-get_ctr(candidates.docs[d]), d))
    return ranked[:n]


def epsilon_greedy(candidates: UserPreferences, n: int, epsilon: float,
                   rng: np.random.Generator) -> List[str]:
    """Slate of up to n distinct documents: each pick exploits the argmax-CTR
    document with probability 1 - epsilon, otherwise explores uniformly
    among the documents not yet selected."""
    if not candidates:
        raise EmptyCandidates("epsilon_greedy needs a non-empty candidate set")
    remaining = sorted(candidates.docs)
    ctr = {d: get_ctr(candidates.docs[d]) for d in remaining}
    slate: List[str] = []
    for _ in range(min(n, len(remaining))):
        q = rng.random()
        if q > epsilon:
            # remaining is sorted, so the first maximum is the lowest doc id
            pick = 0
            best = ctr[remaining[0]]
            for i in range(1, len(remaining)):
                if ctr[remaining[i]] > best:
                    best, pick = ctr[remaining[i]], i
        else:
            pick = int(rng.integers(len(remaining)))
        slate.append(remaining.pop(pick))
    return slate


class RecommendationEngine:
    """Situation-aware engine: case retrieval + epsilon-greedy selection +
    periodic situation clustering.

    With clustering disabled the engine retrieves by exhaustive scan and
    never re-partitions the case base.
    """

    def __init__(self, taxonomies: Taxonomies, doc_pool: Sequence[str],
                 config: Optional[BanditConfig] = None,
                 clustering: Optional[ClusteringConfig] = None,
                 hlcs: Sequence[Situation] = (),
                 clustering_enabled: bool = True,
                 weights: Optional[DimensionWeights] = None,
                 index: Optional[SituationIndex] = None):
        self.config = config if config is not None else BanditConfig()
        self.clustering_cfg = (clustering if clustering is not None
                               else ClusteringConfig())
        self.clustering_enabled = clustering_enabled
        self.casebase = CaseBase(taxonomies, weights=weights, hlcs=hlcs,
                                 index=index, routing=clustering_enabled)
        self.doc_pool = sorted(doc_pool)
        self.rng = np.random.default_rng(self.config.seed)
        self.tt = 0

    def _random_slate(self) -> List[str]:
        n = min(self.config.slate_size, len(self.doc_pool))
        picks = self.rng.choice(len(self.doc_pool), size=n, replace=False)
        return [self.doc_pool[i] for i in picks]

    def recommend(self, situation: Situation) -> Recommendation:
        cb = self.casebase
        retrieval = cb.retrieve(situation)
        gate_ok = (retrieval is not None
                   and retrieval.unweighted_sim >= self.config.threshold_b
                   and retrieval.case.prefs)
        if not gate_ok:
            if self.config.cold_start_fallback:
                return Recommendation(self._random_slate(), Branch.COLD_START,
                                      retrieval)
            return Recommendation([], Branch.NO_RECOMMEND, retrieval)
        if cb.is_hlcs(retrieval.case.situation):
            slate = greedy_top_n(retrieval.case.prefs, self.config.slate_size)
            cb.mark_hlcs(situation)
            return Recommendation(slate, Branch.HLCS_GREEDY, retrieval)
        slate = epsilon_greedy(retrieval.case.prefs, self.config.slate_size,
                               self.config.epsilon, self.rng)
        return Recommendation(slate, Branch.EPS_GREEDY, retrieval)

    def observe(self, situation: Situation, rec: Recommendation,
                feedback: UserPreferences) -> None:
        cb = self.casebase
        cb.update_preferences(situation, rec.retrieval, feedback)
        if rec.retrieval is not None:
            cb.weights.record(rec.retrieval.per_dim_sims)
        self.tt += 1
        if (self.clustering_enabled
                and should_recluster(self.tt, self.clustering_cfg.recluster_period)
                and len(cb) >= self.clustering_cfg.num_clusters):
            # vary the init draw between re-clustering passes, deterministically
            cluster_situations(
                cb, replace(self.clustering_cfg,
                            seed=self.clustering_cfg.seed + self.tt))

    def step(self, situation: Situation,
             feedback_source: Callable[[Situation, List[str]],
                                       Tuple[UserPreferences, Dict[str, int]]]
             ) -> TrialRecord:
        rec = self.recommend(situation)
        feedback, slate_clicks = feedback_source(situation, rec.slate)
        self.observe(situation, rec, feedback)
        return TrialRecord(situation, rec.slate, slate_clicks, rec.branch)


class GlobalEpsilonGreedy:
    """Context-free baseline: one global preference pool, no situations."""

    def __init__(self, doc_pool: Sequence[str],
                 config: Optional[BanditConfig] = None):
        self.config = config if config is not None else BanditConfig()
        self.doc_pool = sorted(doc_pool)
        self.prefs = UserPreferences()
        self.rng = np.random.default_rng(self.config.seed)

    def recommend(self, situation: Situation) -> Recommendation:
        if not self.prefs:
            n = min(self.config.slate_size, len(self.doc_pool))
            picks = self.rng.choice(len(self.doc_pool), size=n, replace=False)
            return Recommendation([self.doc_pool[i] for i in picks],
                                  Branch.COLD_START, None)
        slate = epsilon_greedy(self.prefs, self.config.slate_size,
                               self.config.epsilon, self.rng)
        return Recommendation(slate, Branch.EPS_GREEDY, None)

    def observe(self, situation: Situation, rec: Recommendation,
                feedback: UserPreferences) -> None:
        self.prefs.merge(feedback)


@dataclass
class EpsilonTunerState:
    """Weights over candidate epsilon values, reinforced by observed clicks."""

    candidates: List[float]
    weights: List[float] = field(default_factory=list)
    tried: Set[int] = field(default_factory=set)
    trial_index: int = 0

    def __post_init__(self):
        if not self.candidates:
            raise ValueError("need at least one epsilon candidate")
        if not self.weights:
            self.weights = [1.0] * len(self.candidates)
        if len(self.weights) != len(self.candidates):
            raise ValueError("one weight per candidate")

    @property
    def best(self) -> float:
        return self.candidates[self.best_index]

    @property
    def best_index(self) -> int:
        return max(range(len(self.weights)),
                   key=lambda i: (self.weights[i], -i))


def tune_epsilon(state: EpsilonTunerState,
                 run_episode: Callable[[float], float],
                 rng: np.random.Generator) -> Tuple[float, EpsilonTunerState]:
    """One tuning round: pick a candidate epsilon (argmax-weight with
    probability tau = min(1, 0.01 t), otherwise uniformly among untried
    candidates, falling back to all once every candidate was tried), run
    one episode with it, and add the observed clicks to its weight."""
    t = state.trial_index + 1
    tau = min(1.0, 0.01 * t)
    q = rng.random()
    if q <= tau:
        i = state.best_index
    else:
        pool = [j for j in range(len(state.candidates))
                if j not in state.tried]
        if not pool:
            pool = list(range(len(state.candidates)))
        i = pool[int(rng.integers(len(pool)))]
    clicks = run_episode(state.candidates[i])
    state.weights[i] += clicks
    state.tried.add(i)
    state.trial_index = t
    return state.candidates[i], state
