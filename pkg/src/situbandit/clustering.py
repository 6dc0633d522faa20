"""Semantic k-medoid clustering of situations.

Medoids are actual situations (symbolic triples admit no mean vector).
The core loop alternates similarity-maximizing assignment with medoid
recomputation, with deterministic repair of emptied clusters and an
optional greedy medoid-swap refinement pass that escapes the local optima
a purely random initialization tends to land in.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .errors import EmptyCluster, TooFewCases
from .simindex import SituationIndex
from .situation import DimensionWeights, Situation, Taxonomies, weighted_similarity


@dataclass
class ClusteringConfig:
    num_clusters: int = 10
    max_iterations: int = 60
    recluster_period: int = 40
    seed: int = 0
    refine: bool = True
    max_swap_passes: int = 4

    def __post_init__(self):
        if self.num_clusters < 1 or self.max_iterations < 1 \
                or self.recluster_period < 1:
            raise ValueError("num_clusters, max_iterations and "
                             "recluster_period must all be >= 1")


@dataclass
class ClusteringResult:
    labels: np.ndarray          # case index -> cluster id
    medoids: List[int]          # cluster id -> case index
    objective_trace: List[float]


def should_recluster(tt: int, ct: int) -> bool:
    """Periodic trigger: re-cluster every ct engine iterations."""
    return tt > 0 and tt % ct == 0


def recompute_medoid(members: Sequence[Situation], w: DimensionWeights,
                     taxonomies: Taxonomies) -> int:
    """Index of the member maximizing mean similarity to its co-members."""
    if not members:
        raise EmptyCluster("cannot pick a medoid from an empty cluster")
    best, best_score = 0, -1.0
    for i, cand in enumerate(members):
        score = sum(weighted_similarity(cand, m, w, taxonomies)
                    for m in members) / len(members)
        if score > best_score + 1e-12:
            best, best_score = i, score
    return best


def _assign(sim: np.ndarray, medoids: np.ndarray) -> np.ndarray:
    labels = np.argmax(sim[:, medoids], axis=1)
    # a medoid always belongs to its own cluster (ties can occur between
    # duplicate situations; self-similarity is never exceeded)
    labels[medoids] = np.arange(len(medoids))
    return labels


def _repair_empty(sim: np.ndarray, medoids: np.ndarray,
                  labels: np.ndarray) -> None:
    """Reseed each emptied cluster with the worst-assigned situation."""
    k = len(medoids)
    for cid in range(k):
        if np.any(labels == cid):
            continue
        assigned_sim = sim[np.arange(len(labels)), medoids[labels]]
        assigned_sim[medoids] = np.inf  # keep existing medoids in place
        worst = int(np.argmin(assigned_sim))
        medoids[cid] = worst
        labels[worst] = cid


def _objective(sim: np.ndarray, medoids: np.ndarray,
               labels: np.ndarray) -> float:
    return float(sim[np.arange(len(labels)), medoids[labels]].sum())


def _swap_refine(sim: np.ndarray, medoids: np.ndarray, passes: int) -> bool:
    """Greedy medoid swaps that improve the assignment objective."""
    n = sim.shape[0]
    k = len(medoids)
    improved_any = False
    for _ in range(passes):
        improved = False
        for cid in range(k):
            others = np.delete(medoids, cid)
            if len(others):
                without = sim[:, others].max(axis=1)
            else:
                without = np.full(n, -np.inf)
            current = float(np.maximum(without, sim[:, medoids[cid]]).sum())
            cand = np.setdiff1d(np.arange(n), medoids)
            if not len(cand):
                continue
            gains = np.maximum(without[:, None], sim[:, cand]).sum(axis=0)
            best = int(np.argmax(gains))
            if gains[best] > current + 1e-9:
                medoids[cid] = cand[best]
                improved = True
                improved_any = True
        if not improved:
            break
    return improved_any


def kmedoids(sim: np.ndarray, cfg: ClusteringConfig) -> ClusteringResult:
    """Cluster items given their full pairwise similarity matrix."""
    n = sim.shape[0]
    if n < cfg.num_clusters:
        raise TooFewCases(f"{n} cases for {cfg.num_clusters} clusters")
    rng = np.random.default_rng(cfg.seed)
    medoids = rng.choice(n, size=cfg.num_clusters, replace=False)
    trace: List[float] = []
    labels = _assign(sim, medoids)
    _repair_empty(sim, medoids, labels)
    for _ in range(cfg.max_iterations):
        trace.append(_objective(sim, medoids, labels))
        new_medoids = medoids.copy()
        for cid in range(cfg.num_clusters):
            members = np.flatnonzero(labels == cid)
            sub = sim[np.ix_(members, members)]
            new_medoids[cid] = members[int(np.argmax(sub.mean(axis=1)))]
        new_labels = _assign(sim, new_medoids)
        _repair_empty(sim, new_medoids, new_labels)
        if np.array_equal(new_medoids, medoids) \
                and np.array_equal(new_labels, labels):
            break
        medoids, labels = new_medoids, new_labels
    if cfg.refine and _swap_refine(sim, medoids, cfg.max_swap_passes):
        labels = _assign(sim, medoids)
        _repair_empty(sim, medoids, labels)
        trace.append(_objective(sim, medoids, labels))
    # canonical cluster ids: order clusters by their medoid's case index
    order = np.argsort(medoids, kind="stable")
    remap = np.empty(cfg.num_clusters, dtype=np.int64)
    remap[order] = np.arange(cfg.num_clusters)
    return ClusteringResult(labels=remap[labels],
                            medoids=[int(m) for m in medoids[order]],
                            objective_trace=trace)


def situation_similarity_matrix(index: SituationIndex, loc: np.ndarray,
                                tim: np.ndarray, soc: np.ndarray,
                                alpha: Sequence[float]) -> np.ndarray:
    return index.pairwise_weighted(loc, tim, soc, alpha)


def cluster_situations(cb, cfg: ClusteringConfig):
    """Re-cluster a case base in place; returns it with fresh assignments."""
    enc = cb.encoded
    sim = situation_similarity_matrix(cb.index, enc.loc, enc.tim, enc.soc,
                                      cb.weights.alpha)
    result = kmedoids(sim, cfg)
    cb.set_partition([int(l) for l in result.labels], result.medoids)
    cb.last_clustering = result
    return cb
