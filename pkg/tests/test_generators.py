import itertools
import math
import random

import numpy as np
import pytest

from hullforge import (
    ConvexHullGen,
    CoordMinGen,
    DiskHullGen,
    EnvelopeGen,
    HalfPlaneGen,
    ParetoGen,
    PointPattern,
    convex_hull_vertices,
    euclid,
    hull_mass,
    line,
    param,
    polytope_boundary,
)
from hullforge.core import ConfigurationError, check_axioms, prime_factorization_holds
from hullforge.generators import envelope_boundary, envelope_value
from hullforge.sampling import (
    HoelderBand,
    LinesBand,
    UniformAnnulus,
    UniformBox,
)


# -- convex hull kernel -------------------------------------------------------


def test_convex_hull_vertices_examples():
    idx = convex_hull_vertices([(0, 0), (1, 0), (0, 1), (0.25, 0.25)])
    assert sorted(idx) == [0, 1, 2]
    idx = convex_hull_vertices([(0, 0), (1, 0), (2, 0)])
    assert sorted(idx) == [0, 2]
    cube = list(itertools.product((0.0, 1.0), repeat=3))
    idx = convex_hull_vertices(cube + [(0.5, 0.5, 0.5)])
    assert sorted(idx) == list(range(8))
    assert convex_hull_vertices([]) == []
    assert convex_hull_vertices([(3.0, 4.0)]) == [0]
    assert sorted(convex_hull_vertices([(0, 0), (1, 1)])) == [0, 1]


def test_convex_hull_vertices_lexicographic_order():
    pts = [(1.0, 0.0), (0.0, 0.0), (0.5, 1.0)]
    idx = convex_hull_vertices(pts)
    assert [pts[i] for i in idx] == sorted(pts[i] for i in idx)


def test_convex_boundary_excludes_face_points():
    gen = ConvexHullGen(2)
    mu = PointPattern.from_points(
        [euclid(0, 0), euclid(2, 0), euclid(0, 2), euclid(1, 0), euclid(0.5, 0.5)]
    )
    bd = gen.boundary(mu)
    assert set(bd.support()) == {euclid(0, 0), euclid(2, 0), euclid(0, 2)}
    # on-edge and interior points live in the hull; vertices do not
    assert gen.hull_contains(mu, euclid(1, 0))
    assert gen.hull_contains(mu, euclid(0.5, 0.5))
    assert not gen.hull_contains(mu, euclid(0, 0))


def test_convex_boundary_retains_multiplicities():
    gen = ConvexHullGen(2)
    mu = PointPattern.from_points([euclid(0, 0), euclid(0, 0), euclid(1, 0), euclid(0, 1)])
    bd = gen.boundary(mu)
    assert bd.multiplicity(euclid(0, 0)) == 2


def _relint_member(subset, q, tol=1e-9):
    """q in the relative interior of the convex hull of the subset."""
    pts = np.asarray(subset, dtype=float)
    qv = np.asarray(q, dtype=float)
    k, d = pts.shape
    scale = max(1.0, float(np.abs(pts).max()), float(np.abs(qv).max()))
    if k == 1:
        return bool(np.all(pts[0] == qv))
    centered = pts[1:] - pts[0]
    rank = np.linalg.matrix_rank(centered, tol=tol * scale)
    if rank < k - 1:
        return False  # degenerate simplex; covered by a smaller subset
    lam, res, *_ = np.linalg.lstsq(centered.T, qv - pts[0], rcond=None)
    recon = pts[0] + centered.T @ lam
    if np.linalg.norm(recon - qv) > tol * scale:
        return False
    lam0 = 1.0 - lam.sum()
    eps = 1e-12
    return bool(lam0 > eps and np.all(lam > eps))


def relint_oracle(points, q, dim, tol=1e-9):
    """Brute force: some subset of size <= dim+1 holds q in its relative interior."""
    pts = list(dict.fromkeys(points))
    for k in range(1, dim + 2):
        for subset in itertools.combinations(pts, k):
            if _relint_member(subset, q, tol):
                return True
    return False


@pytest.mark.parametrize("dim", [2, 3])
def test_convex_membership_matches_relint_oracle(dim):
    # The subset criterion characterises closed-hull membership, which also
    # reports extreme support points; the hull proper excludes them (adding a
    # copy bumps the boundary multiplicity), so those probes are asserted
    # separately.
    rng = random.Random(900 + dim)
    gen = ConvexHullGen(dim)
    for _ in range(120):
        n = rng.randint(1, 8)
        pts = [tuple(rng.uniform(0, 1) for _ in range(dim)) for _ in range(n)]
        mu = PointPattern.from_points([euclid(*p) for p in pts])
        probes = [tuple(rng.uniform(-0.1, 1.1) for _ in range(dim)) for _ in range(8)]
        # crafted probes: pair midpoints and convex combinations
        if n >= 2:
            a, b = rng.sample(pts, 2)
            probes.append(tuple((ai + bi) / 2 for ai, bi in zip(a, b)))
        if n >= 3:
            a, b, c = rng.sample(pts, 3)
            probes.append(tuple((ai + bi + ci) / 3 for ai, bi, ci in zip(a, b, c)))
        ext = {p.coords for p in gen.boundary(mu).support()}
        for q in probes:
            if q in ext:
                continue
            got = gen.hull_contains(mu, euclid(*q))
            want = relint_oracle(pts, q, dim)
            assert got == want, (pts, q, got, want)
        for p in ext:
            assert not gen.hull_contains(mu, euclid(*p))


def test_convex_hull_mass_examples():
    gen = ConvexHullGen(2)
    box = UniformBox((0, 0), (1, 1), rate=5.0)
    square = PointPattern.from_points(
        [euclid(0, 0), euclid(1, 0), euclid(0, 1), euclid(1, 1)]
    )
    assert hull_mass(gen, square, box) == pytest.approx(5.0)
    assert hull_mass(gen, PointPattern.empty(), box) == 0.0
    two = PointPattern.from_points([euclid(0, 0), euclid(1, 1)])
    assert hull_mass(gen, two, box) == 0.0


def test_coordmin_hull_mass_quadrant():
    gen = CoordMinGen()
    box = UniformBox((0, 0), (1, 1), rate=1.0)
    mu = PointPattern.from_points([euclid(0.5, 0.5)])
    assert hull_mass(gen, mu, box) == pytest.approx(0.25)


def test_pareto_staircase_mass_matches_grid():
    gen = ParetoGen(2)
    box = UniformBox((0, 0), (1, 1), rate=2.0)
    rng = random.Random(7)
    for _ in range(25):
        pts = [euclid(rng.uniform(0, 1), rng.uniform(0, 1)) for _ in range(rng.randint(1, 9))]
        mu = PointPattern.from_points(pts)
        exact = hull_mass(gen, mu, box)
        xs = (np.arange(160) + 0.5) / 160
        gx, gy = np.meshgrid(xs, xs, indexing="ij")
        covered = np.zeros_like(gx, dtype=bool)
        for p in mu.support():
            covered |= (gx >= p.coords[0]) & (gy >= p.coords[1])
        approx = 2.0 * covered.mean()
        assert exact == pytest.approx(approx, abs=0.03)


def test_hull_mass_monotone_in_pattern():
    gen = ConvexHullGen(2)
    box = UniformBox((0, 0), (1, 1), rate=1.0)
    rng = random.Random(3)
    for _ in range(30):
        pts = [euclid(rng.uniform(0, 1), rng.uniform(0, 1)) for _ in range(rng.randint(0, 8))]
        mu = PointPattern.from_points(pts)
        bigger = mu.add(euclid(rng.uniform(0, 1), rng.uniform(0, 1)))
        assert hull_mass(gen, bigger, box) >= hull_mass(gen, mu, box) - 1e-12


# -- envelope generator -------------------------------------------------------


def test_envelope_value_examples():
    mu = PointPattern.from_points([param(0.0, 1.0)])
    assert envelope_value(mu, 0.1, env_const=2.0, beta=1.0) == pytest.approx(0.8)
    assert envelope_value(PointPattern.empty(), 0.1, 2.0, 1.0) == -math.inf
    mu2 = PointPattern.from_points([param(0.0, 1.0), param(0.1, 0.5)])
    assert envelope_value(mu2, 0.1, 2.0, 1.0) == pytest.approx(0.8)


def test_envelope_boundary_examples():
    mu = PointPattern.from_points([param(0.0, 1.0), param(0.1, 0.5)])
    bd = envelope_boundary(mu, env_const=2.0, beta=1.0)
    assert set(bd.support()) == {param(0.0, 1.0)}
    single = PointPattern.from_points([param(0.3, 0.2)])
    assert envelope_boundary(single, 2.0, 1.0) == single
    far = PointPattern.from_points([param(0.0, 1.0), param(10.0, 1.0)])
    assert envelope_boundary(far, 2.0, 1.0) == far


def test_envelope_boundary_atoms_touch_envelope():
    gen = EnvelopeGen(dim=1, env_const=1.0, beta=0.7)
    rng = random.Random(5)
    for _ in range(40):
        pts = [param(rng.uniform(0, 1), rng.uniform(0, 1)) for _ in range(rng.randint(1, 9))]
        mu = PointPattern.from_points(pts)
        bd = gen.boundary(mu)
        for p in mu.support():
            on_env = gen.envelope_value(mu, p.site) == pytest.approx(p.level, abs=1e-12)
            assert (p in bd) == on_env


def test_envelope_prime_property_on_corpus(band_corpus):
    gen = EnvelopeGen(dim=1, env_const=1.0, beta=1.0)
    patterns, probes = band_corpus
    for mu in patterns[:50]:
        for z in probes[:6]:
            assert prime_factorization_holds(gen, mu, z)


def test_pareto_prime_property_on_corpus(planar_corpus):
    gen = ParetoGen(2)
    patterns, probes = planar_corpus
    for mu in patterns[:50]:
        for z in probes[:6]:
            assert prime_factorization_holds(gen, mu, z)


# -- half-plane generator -----------------------------------------------------


def _square_lines():
    return [
        line(0.0, 0.5),
        line(math.pi / 2, 0.5),
        line(math.pi, 0.5),
        line(3 * math.pi / 2, 0.5),
    ]


def test_polytope_boundary_square():
    mu = PointPattern.from_points(_square_lines())
    bd = polytope_boundary(mu, window_radius=5.0)
    assert bd == mu
    extra = mu.add(line(0.3, 3.0))
    bd2 = polytope_boundary(extra, window_radius=5.0)
    assert set(bd2.support()) == set(mu.support())
    assert polytope_boundary(PointPattern.empty(), 5.0).is_empty


def test_halfplane_support_function():
    gen = HalfPlaneGen(window_radius=5.0)
    mu = PointPattern.from_points(_square_lines())
    angles = np.array([0.0, math.pi / 4, math.pi / 2])
    h = gen.hull_support(mu, angles)
    assert h[0] == pytest.approx(0.5, abs=1e-9)
    assert h[1] == pytest.approx(0.5 * math.sqrt(2), abs=1e-9)
    assert h[2] == pytest.approx(0.5, abs=1e-9)
    # empty pattern: the window disk itself
    assert gen.hull_support(PointPattern.empty(), angles) == pytest.approx([5.0] * 3)


def test_halfplane_hull_mass_square_band():
    gen = HalfPlaneGen(window_radius=2.0)
    band = LinesBand(0.4, 2.0, rate=1.0)
    mu = PointPattern.from_points(_square_lines())
    got = hull_mass(gen, mu, band)
    # support function of the square of half-width 0.5
    angles = (np.arange(20000) + 0.5) * (2 * math.pi / 20000)
    h_sq = 0.5 * (np.abs(np.cos(angles)) + np.abs(np.sin(angles)))
    want = float(np.clip(2.0 - np.maximum(h_sq, 0.4), 0, None).sum() * (2 * math.pi / 20000))
    assert got == pytest.approx(want, rel=1e-3)


def test_halfplane_duplicate_lines_keep_multiplicity():
    gen = HalfPlaneGen(window_radius=5.0)
    pts = _square_lines()
    mu = PointPattern.from_points(pts + [pts[0]])
    bd = gen.boundary(mu)
    assert bd.multiplicity(pts[0]) == 2


# -- disk-anchored hull -------------------------------------------------------


def test_diskhull_area_no_points():
    gen = DiskHullGen(anchor_radius=0.3)
    assert gen.hull_area(PointPattern.empty()) == pytest.approx(math.pi * 0.09)


def test_diskhull_area_single_point():
    r0, px = 1.0, 2.0
    gen = DiskHullGen(anchor_radius=r0)
    mu = PointPattern.from_points([euclid(px, 0.0)])
    # kite formed by the two tangent segments plus the major arc
    half = math.acos(r0 / px)
    kite = r0 * px * math.sin(half)
    arc = 0.5 * r0 * r0 * (2 * math.pi - 2 * half)
    assert gen.hull_area(mu) == pytest.approx(kite + arc, rel=1e-12)


def test_diskhull_area_square_corners():
    gen = DiskHullGen(anchor_radius=0.3)
    mu = PointPattern.from_points(
        [euclid(1, 1), euclid(-1, 1), euclid(-1, -1), euclid(1, -1)]
    )
    assert gen.hull_area(mu) == pytest.approx(4.0, rel=1e-12)


def test_diskhull_area_matches_grid():
    gen = DiskHullGen(anchor_radius=0.3)
    rng = random.Random(12)
    xs = np.linspace(-1, 1, 401)
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    cell = (xs[1] - xs[0]) ** 2
    for _ in range(10):
        pts = []
        while len(pts) < rng.randint(1, 6):
            x, y = rng.uniform(-1, 1), rng.uniform(-1, 1)
            if 0.3 < math.hypot(x, y) < 1.0:
                pts.append(euclid(x, y))
        mu = PointPattern.from_points(pts)
        exact = gen.hull_area(mu)
        mask = gx * gx + gy * gy <= 0.09
        support = [p.coords for p in mu.support()]
        probe_pts = np.column_stack([gx[~mask], gy[~mask]])
        inside = np.zeros(len(probe_pts), dtype=bool)
        for i, q in enumerate(probe_pts):
            inside[i] = not gen._separable((q[0], q[1]), support)
        approx = (mask.sum() + inside.sum()) * cell
        assert exact == pytest.approx(approx, abs=0.01)


def test_diskhull_mass_requires_matching_annulus():
    gen = DiskHullGen(anchor_radius=0.3)
    mu = PointPattern.from_points([euclid(0.5, 0.0)])
    with pytest.raises(ConfigurationError):
        hull_mass(gen, mu, UniformAnnulus(0.4, 1.0, rate=1.0))


# -- full axiom batteries (small corpora; the acceptance gate runs 1000) -------


@pytest.mark.parametrize(
    "name,gen,fixture",
    [
        ("convex2", ConvexHullGen(2), "planar_corpus"),
        ("convex3", ConvexHullGen(3), "spatial_corpus"),
        ("coordmin", CoordMinGen(), "planar_corpus"),
        ("pareto", ParetoGen(2), "planar_corpus"),
        ("envelope", EnvelopeGen(dim=1, env_const=1.0, beta=1.0), "band_corpus"),
        ("halfplane", HalfPlaneGen(window_radius=2.0), "lines_corpus"),
        ("diskhull", DiskHullGen(anchor_radius=0.3), "planar_corpus"),
    ],
)
def test_axiom_battery(name, gen, fixture, request):
    patterns, probes = request.getfixturevalue(fixture)
    report = check_axioms(gen, patterns[:60], probes, seed=17)
    assert report.all_passed, (name, report.failures(), report.counterexamples[:2])
