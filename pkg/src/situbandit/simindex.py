"""Vectorized situation-similarity lookups.

Precomputes one Wu-Palmer matrix per dimension over the (small) concept
vocabularies, so the engine and the clusterer can score thousands of
situations with numpy indexing instead of per-pair tree walks. The scalar
functions in `situation` remain the reference semantics; tests pin the two
paths against each other.
"""

from __future__ import annotations

from typing import Sequence, Tuple

import numpy as np

from .ontology import Taxonomy
from .situation import Situation, Taxonomies


def concept_similarity_matrix(t: Taxonomy, order: Sequence[str]) -> np.ndarray:
    """Dense Wu-Palmer matrix over `order`, a listing of all concept ids."""
    n = len(order)
    paths = []
    for cid in order:
        path = [cid]
        while path[-1] != t.root:
            path.append(t.parent[path[-1]])
        path.reverse()
        paths.append(path)
    mat = np.empty((n, n), dtype=np.float64)
    for i, pi in enumerate(paths):
        for j in range(i, n):
            pj = paths[j]
            common = 0
            for a, b in zip(pi, pj):
                if a != b:
                    break
                common += 1
            sim = 2.0 * common / (len(pi) + len(pj))
            mat[i, j] = sim
            mat[j, i] = sim
    return mat


class SituationIndex:
    """Integer encoding of situations plus per-dimension similarity matrices."""

    def __init__(self, taxonomies: Taxonomies):
        self.taxonomies = taxonomies
        self.orders: Tuple[list, ...] = tuple(
            sorted(t.nodes) for t in taxonomies.as_tuple())
        self.index_of: Tuple[dict, ...] = tuple(
            {cid: i for i, cid in enumerate(order)} for order in self.orders)
        self.matrices: Tuple[np.ndarray, ...] = tuple(
            concept_similarity_matrix(t, order)
            for t, order in zip(taxonomies.as_tuple(), self.orders))

    def encode(self, s: Situation) -> Tuple[int, int, int]:
        self.taxonomies.validate(s)
        return tuple(ix[c] for ix, c in zip(self.index_of, s.as_tuple()))

    def decode(self, idx: Sequence[int]) -> Situation:
        return Situation(*(order[i] for order, i in zip(self.orders, idx)))

    def per_dim_sims(self, a: Sequence[int],
                     b: Sequence[int]) -> Tuple[float, float, float]:
        return tuple(m[i, j] for m, i, j in zip(self.matrices, a, b))

    def weighted_to_many(self, query: Sequence[int], loc: np.ndarray,
                         tim: np.ndarray, soc: np.ndarray,
                         alpha: Sequence[float]) -> np.ndarray:
        """Weighted similarity of one encoded situation to arrays of others."""
        m0, m1, m2 = self.matrices
        return (alpha[0] * m0[query[0], loc]
                + alpha[1] * m1[query[1], tim]
                + alpha[2] * m2[query[2], soc])

    def pairwise_weighted(self, loc: np.ndarray, tim: np.ndarray,
                          soc: np.ndarray,
                          alpha: Sequence[float]) -> np.ndarray:
        """Full weighted similarity matrix among encoded situations."""
        m0, m1, m2 = self.matrices
        return (alpha[0] * m0[np.ix_(loc, loc)]
                + alpha[1] * m1[np.ix_(tim, tim)]
                + alpha[2] * m2[np.ix_(soc, soc)])

    def unweighted_to_many(self, query: Sequence[int], loc: np.ndarray,
                           tim: np.ndarray, soc: np.ndarray) -> np.ndarray:
        return self.weighted_to_many(query, loc, tim, soc, (1.0, 1.0, 1.0))


class EncodedSituations:
    """Growable parallel int arrays of encoded situations."""

    def __init__(self, index: SituationIndex, capacity: int = 64):
        self.index = index
        self._data = np.empty((3, capacity), dtype=np.int64)
        self.size = 0

    def append(self, encoded: Sequence[int]) -> int:
        if self.size == self._data.shape[1]:
            self._data = np.concatenate(
                [self._data, np.empty_like(self._data)], axis=1)
        self._data[:, self.size] = encoded
        self.size += 1
        return self.size - 1

    @property
    def loc(self) -> np.ndarray:
        return self._data[0, :self.size]

    @property
    def tim(self) -> np.ndarray:
        return self._data[1, :self.size]

    @property
    def soc(self) -> np.ndarray:
        return self._data[2, :self.size]

    def row(self, i: int) -> Tuple[int, int, int]:
        return tuple(self._data[:, i])
