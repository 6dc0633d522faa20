import numpy as np
import pytest

from situbandit.errors import UnknownConcept
from situbandit.ontology import Dimension
from situbandit.situation import (DimensionWeights, Situation, Taxonomies,
                                  is_exact_match, record_gamma_and_update,
                                  sim_per_dimension, unweighted_similarity,
                                  weighted_similarity)

from conftest import chain, two_level


@pytest.fixture
def taxonomies():
    # location is a chain so that a parent/child pair scores exactly 0.8
    return Taxonomies(chain(Dimension.LOCATION, "Any", "A", "B"),
                      two_level(Dimension.TIME, "T"),
                      two_level(Dimension.SOCIAL, "S"))


def test_identical_situations(taxonomies):
    s = Situation("B", "Ta1", "Sb2")
    assert sim_per_dimension(s, s, taxonomies) == (1.0, 1.0, 1.0)
    assert unweighted_similarity(s, s, taxonomies) == pytest.approx(3.0)


def test_roots_triple(taxonomies):
    s = Situation("Any", "Troot", "Sroot")
    assert sim_per_dimension(s, s, taxonomies) == (1.0, 1.0, 1.0)


def test_sibling_locations(tiny_taxonomies):
    # locations are depth-2 siblings (La vs Lb under the root): 0.5
    s1 = Situation("La", "Ta1", "Sa1")
    s2 = Situation("Lb", "Ta1", "Sa1")
    assert sim_per_dimension(s1, s2, tiny_taxonomies) == \
        pytest.approx((0.5, 1.0, 1.0))


def test_unknown_concept_propagates(taxonomies):
    with pytest.raises(UnknownConcept):
        sim_per_dimension(Situation("Nope", "Ta1", "Sa1"),
                          Situation("A", "Ta1", "Sa1"), taxonomies)


def test_weighted_similarity_examples(taxonomies):
    s1 = Situation("A", "Ta1", "Sa1")
    s2 = Situation("B", "Ta1", "Sa1")  # per-dim sims (0.8, 1, 1)
    assert weighted_similarity(
        s1, s1, DimensionWeights(alpha=(1, 1, 1)), taxonomies) == \
        pytest.approx(3.0)
    assert weighted_similarity(
        s1, s2, DimensionWeights(alpha=(0, 0, 0)), taxonomies) == 0.0
    assert weighted_similarity(
        s1, s2, DimensionWeights(alpha=(0.5, 0.5, 0.5)), taxonomies) == \
        pytest.approx(1.4)


def test_unweighted_similarity_examples(taxonomies):
    s1 = Situation("A", "Ta1", "Sa1")
    s2 = Situation("B", "Ta1", "Sa1")
    assert unweighted_similarity(s1, s2, taxonomies) == pytest.approx(2.8)
    # a (0.5, 0.5, 0.5) pair sums to 1.5, below the default gate B = 2.4
    s3 = Situation("Any", "Troot", "Sroot")
    s4 = Situation("B", "Ta1", "Sa1")
    sims = sim_per_dimension(s3, s4, taxonomies)
    assert sum(sims) < 2.4


def test_exact_match_tolerance():
    assert is_exact_match(3.0)
    assert is_exact_match(3.0 - 1e-12)
    assert not is_exact_match(2.9)


def test_record_gamma_single_observation():
    w = DimensionWeights()
    assert w.alpha == pytest.approx((1 / 3, 1 / 3, 1 / 3))
    record_gamma_and_update(w, (1.0, 1.0, 1.0))
    assert w.alpha == pytest.approx((1.0, 1.0, 1.0))


def test_record_gamma_running_mean():
    w = DimensionWeights()
    record_gamma_and_update(w, (0.8, 0.9, 1.0))
    assert w.alpha == pytest.approx((0.8, 0.9, 1.0))
    record_gamma_and_update(w, (1.0, 0.5, 0.5))
    assert w.alpha[0] == pytest.approx(0.9)
    record_gamma_and_update(w, (0.5, 0.5, 0.5))
    # dimension 0 saw {0.8, 1.0, 0.5}
    assert w.alpha[0] == pytest.approx((0.8 + 1.0 + 0.5) / 3)


def test_record_gamma_pair_mean():
    w = DimensionWeights()
    record_gamma_and_update(w, (1.0, 1.0, 1.0))
    record_gamma_and_update(w, (0.5, 1.0, 1.0))
    assert w.alpha[0] == pytest.approx(0.75)


def test_windowed_mean():
    w = DimensionWeights(window=2)
    for sims in [(0.0, 0, 0), (1.0, 0, 0), (1.0, 0, 0)]:
        record_gamma_and_update(w, sims)
    assert w.alpha[0] == pytest.approx(1.0)
    assert len(w.gamma_history[0]) == 2


def test_alpha_stays_in_unit_interval():
    rng = np.random.default_rng(3)
    w = DimensionWeights()
    for _ in range(200):
        record_gamma_and_update(w, tuple(rng.uniform(0, 1, 3)))
        assert all(0.0 <= a <= 1.0 for a in w.alpha)


def test_self_similarity_equals_alpha_sum(tiny_taxonomies):
    rng = np.random.default_rng(4)
    for _ in range(20):
        alpha = tuple(rng.uniform(0, 1, 3))
        w = DimensionWeights(alpha=alpha)
        s = Situation("La2", "Tb1", "Sa2")
        assert weighted_similarity(s, s, w, tiny_taxonomies) == \
            pytest.approx(sum(alpha))


def test_unweighted_three_iff_equal(tiny_taxonomies):
    locs = ["La1", "La2", "Lb1"]
    sits = [Situation(l, "Ta1", "Sa1") for l in locs]
    for s1 in sits:
        for s2 in sits:
            sim = unweighted_similarity(s1, s2, tiny_taxonomies)
            assert (abs(sim - 3.0) < 1e-12) == (s1 == s2)


def test_argmax_invariance_under_alpha_scaling(tiny_taxonomies):
    query = Situation("La1", "Ta1", "Sa1")
    pool = [Situation("La2", "Ta1", "Sa1"),
            Situation("Lb1", "Tb1", "Sa1"),
            Situation("La1", "Ta2", "Sb1")]
    base = DimensionWeights(alpha=(0.2, 0.5, 0.9))
    scaled = DimensionWeights(alpha=(0.4, 1.0, 1.8))

    def argmax(w):
        sims = [weighted_similarity(query, p, w, tiny_taxonomies)
                for p in pool]
        return sims.index(max(sims))

    assert argmax(base) == argmax(scaled)
