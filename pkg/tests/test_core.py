import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hullforge import (
    ConvexHullGen,
    CoordMinGen,
    DomainError,
    ParetoGen,
    PointPattern,
    SpaceMismatchError,
    euclid,
    first_difference_h,
    h_indicator,
    higher_difference_h,
    param,
)
from hullforge.core import (
    check_axioms,
    higher_difference_closed_form,
    prime_factorization_holds,
)
from hullforge.corpora import LexDropGen
from hullforge.generators import EnvelopeGen


# -- pattern algebra ---------------------------------------------------------


def test_pattern_multiset_semantics():
    a = PointPattern.from_points([euclid(0, 0), euclid(1, 1), euclid(0, 0)])
    b = PointPattern.from_points([euclid(1, 1), euclid(0, 0), euclid(0, 0)])
    assert a == b
    assert a.total_mass == 3
    assert a.multiplicity(euclid(0, 0)) == 2
    assert a.remove(euclid(0, 0)).multiplicity(euclid(0, 0)) == 1
    assert a.remove_all(euclid(0, 0)).total_mass == 1
    assert PointPattern.empty() <= a
    assert a - a == PointPattern.empty()


def test_pattern_rejects_mixed_spaces_and_bad_values():
    with pytest.raises(SpaceMismatchError):
        PointPattern.from_points([euclid(0, 0), param(0.5, 1.0)])
    with pytest.raises(DomainError):
        euclid(float("nan"), 0.0)
    with pytest.raises(DomainError):
        PointPattern.from_points([euclid(0, 0)]).remove(euclid(0, 0), 2)


def test_space_mismatch_raises_in_ops():
    gen = ConvexHullGen(2)
    mu = PointPattern.from_points([euclid(0, 0)])
    with pytest.raises(SpaceMismatchError):
        h_indicator(gen, mu, param(0.1, 0.2))


# -- the indicator and its difference calculus --------------------------------


def test_indicator_worked_examples():
    gen = ConvexHullGen(2)
    tri = PointPattern.from_points([euclid(0, 0), euclid(2, 0), euclid(0, 2)])
    assert h_indicator(gen, tri, euclid(0.5, 0.5)) == 0
    assert h_indicator(gen, PointPattern.empty(), euclid(3, 3)) == 1
    cm = CoordMinGen()
    assert h_indicator(cm, PointPattern.from_points([euclid(0.3, 0.3)]), euclid(0.5, 0.5)) == 0


def test_first_difference_examples():
    gen = ConvexHullGen(2)
    assert first_difference_h(gen, PointPattern.empty(), euclid(1, 1), euclid(1, 1)) == 0
    seg = PointPattern.from_points([euclid(0, 0), euclid(2, 0)])
    assert first_difference_h(gen, seg, euclid(1, 1), euclid(1, 0)) == 0
    one = PointPattern.from_points([euclid(0, 0)])
    assert first_difference_h(gen, one, euclid(4, 0), euclid(2, 0)) == -1


def test_higher_difference_examples():
    gen = ConvexHullGen(2)
    empty = PointPattern.empty()
    assert higher_difference_h(gen, empty, [euclid(0, 0), euclid(2, 0)], euclid(1, 0)) == -1
    with pytest.raises(DomainError):
        higher_difference_h(gen, empty, [], euclid(0, 0))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3))
def test_difference_recursion_matches_closed_form(seed, m):
    rng = random.Random(seed)
    gen = ConvexHullGen(2)
    mu = PointPattern.from_points(
        [euclid(rng.uniform(0, 1), rng.uniform(0, 1)) for _ in range(rng.randint(0, 5))]
    )
    xs = [euclid(rng.uniform(0, 1), rng.uniform(0, 1)) for _ in range(m)]
    z = euclid(rng.uniform(0, 1), rng.uniform(0, 1))
    assert higher_difference_h(gen, mu, xs, z) == higher_difference_closed_form(gen, mu, xs, z)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_first_difference_range_and_absorption(seed):
    rng = random.Random(seed)
    gen = ParetoGen(2)
    mu = PointPattern.from_points(
        [euclid(rng.uniform(0, 1), rng.uniform(0, 1)) for _ in range(rng.randint(0, 6))]
    )
    x = euclid(rng.uniform(0, 1), rng.uniform(0, 1))
    z = euclid(rng.uniform(0, 1), rng.uniform(0, 1))
    d = first_difference_h(gen, mu, x, z)
    assert d in (-1, 0)
    if h_indicator(gen, mu, z) == 0:
        assert d == 0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_cyclic_products_vanish(seed):
    rng = random.Random(seed)
    gen = ConvexHullGen(2)
    mu = PointPattern.from_points(
        [euclid(rng.uniform(0, 1), rng.uniform(0, 1)) for _ in range(rng.randint(0, 5))]
    )
    pts = [euclid(rng.uniform(0, 1), rng.uniform(0, 1)) for _ in range(3)]
    z1, z2, z3 = pts
    assert first_difference_h(gen, mu, z1, z2) * first_difference_h(gen, mu, z2, z1) == 0
    prod = (
        first_difference_h(gen, mu, z1, z2)
        * first_difference_h(gen, mu, z2, z3)
        * first_difference_h(gen, mu, z3, z1)
    )
    assert prod == 0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_minus_point_identity(seed):
    rng = random.Random(seed)
    gen = CoordMinGen()
    pts = [euclid(rng.uniform(0, 1), rng.uniform(0, 1)) for _ in range(rng.randint(1, 7))]
    if rng.random() < 0.4:
        pts.append(pts[0])
    mu = PointPattern.from_points(pts)
    for p, _ in mu.entries:
        assert h_indicator(gen, mu.remove(p), p) == h_indicator(gen, mu, p)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_hull_monotone_in_pattern(seed):
    rng = random.Random(seed)
    gen = ConvexHullGen(2)
    pts = [euclid(rng.uniform(0, 1), rng.uniform(0, 1)) for _ in range(rng.randint(0, 6))]
    mu = PointPattern.from_points(pts)
    bigger = mu.add(euclid(rng.uniform(0, 1), rng.uniform(0, 1)))
    x = euclid(rng.uniform(0, 1), rng.uniform(0, 1))
    if gen.hull_contains(mu, x) and x not in bigger:
        assert gen.hull_contains(bigger, x)


# -- axiom machinery ----------------------------------------------------------


def test_check_axioms_passes_on_valid_generator(planar_corpus):
    patterns, probes = planar_corpus
    report = check_axioms(ConvexHullGen(2), patterns[:40], probes, seed=1)
    assert report.all_passed, report.failures()
    assert sum(c.passed for c in report.checks.values()) > 0


def test_check_axioms_flags_broken_generator(planar_corpus):
    patterns, probes = planar_corpus
    report = check_axioms(LexDropGen(), patterns[:20], probes, seed=1)
    assert not report.all_passed
    assert report.checks["H3a"].failed > 0 or report.checks["H3"].failed > 0
    assert report.counterexamples


def test_prime_factorization_probe():
    gen = EnvelopeGen(dim=1, env_const=2.0, beta=1.0)
    mu = PointPattern.from_points([param(0.0, 1.0), param(0.6, 0.8)])
    for z in [param(0.1, 0.5), param(0.5, 0.9), param(0.3, -0.2)]:
        assert prime_factorization_holds(gen, mu, z)


def test_convex_hull_is_not_prime():
    # three spread points absorb an interior probe jointly but not singly
    gen = ConvexHullGen(2)
    mu = PointPattern.from_points([euclid(0, 0), euclid(2, 0), euclid(1, 2)])
    z = euclid(1.0, 0.5)
    assert not prime_factorization_holds(gen, mu, z)
