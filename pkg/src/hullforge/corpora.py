"""Randomized pattern corpora for the axiom battery, plus negative controls."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from . import generators
from .core import HullGenerator, PointPattern, SpacePoint, euclid, line, param


def _with_duplicates(pts: list[SpacePoint], rng: random.Random) -> list[SpacePoint]:
    if pts and rng.random() < 0.2:
        pts = pts + [pts[rng.randrange(len(pts))]]
    return pts


def euclid_corpus(
    dim: int,
    count: int,
    max_points: int,
    seed: int,
    lo: float = 0.0,
    hi: float = 1.0,
) -> tuple[list[PointPattern], list[SpacePoint]]:
    rng = random.Random(seed)
    pats = []
    for _ in range(count):
        k = rng.randint(0, max_points)
        pts = [euclid(*[rng.uniform(lo, hi) for _ in range(dim)]) for _ in range(k)]
        pats.append(PointPattern.from_points(_with_duplicates(pts, rng)))
    pad = 0.2 * (hi - lo)
    probes = [
        euclid(*[rng.uniform(lo - pad, hi + pad) for _ in range(dim)]) for _ in range(32)
    ]
    return pats, probes


def param_corpus(
    dim: int, count: int, max_points: int, seed: int
) -> tuple[list[PointPattern], list[SpacePoint]]:
    rng = random.Random(seed)
    pats = []
    for _ in range(count):
        k = rng.randint(0, max_points)
        pts = [
            param(tuple(rng.uniform(0, 1) for _ in range(dim)), rng.uniform(0, 1))
            for _ in range(k)
        ]
        pats.append(PointPattern.from_points(_with_duplicates(pts, rng)))
    probes = [
        param(tuple(rng.uniform(-0.2, 1.2) for _ in range(dim)), rng.uniform(-0.5, 1.2))
        for _ in range(32)
    ]
    return pats, probes


def line_corpus(
    count: int, max_points: int, seed: int, window: float
) -> tuple[list[PointPattern], list[SpacePoint]]:
    rng = random.Random(seed)
    pats = []
    for _ in range(count):
        k = rng.randint(0, max_points)
        pts = [
            line(rng.uniform(0, 2 * math.pi), rng.uniform(0, 1.2 * window))
            for _ in range(k)
        ]
        pats.append(PointPattern.from_points(_with_duplicates(pts, rng)))
    probes = [
        line(rng.uniform(0, 2 * math.pi), rng.uniform(0, 1.3 * window)) for _ in range(32)
    ]
    return pats, probes


@dataclass(frozen=True)
class LexDropGen(HullGenerator):
    """Deliberately invalid generator: drops the lexicographically first point.

    Negative-control fixture; repeated thinning keeps dropping points, so the
    idempotency axiom fails on any pattern with two or more support points.
    """

    def __post_init__(self):
        object.__setattr__(self, "space_tag", ("euclid", 2))

    def boundary(self, mu: PointPattern) -> PointPattern:
        if mu.is_empty:
            return mu
        first = min(mu.support(), key=lambda p: p.coords)
        return mu.restrict(lambda p: p != first)

    def hull_contains(self, mu: PointPattern, x: SpacePoint) -> bool:
        return self.hull_contains_definitional(mu, x)


def _battery_chunk(args) -> "AxiomReport":
    name, count, max_points, seed, lo, hi = args
    gen, make_corpus = GENERATOR_SUITE[name]
    patterns, probes = make_corpus(count, max_points, seed)
    from .core import check_axioms

    return check_axioms(gen, patterns[lo:hi], probes, seed=seed + lo)


def run_axiom_battery(
    name: str, count: int, max_points: int, seed: int, threads: int = 1
):
    """Axiom battery over a generator's random corpus, optionally chunked.

    Chunk workers rebuild the corpus deterministically and check disjoint
    slices; merged counters do not depend on the worker count.
    """
    from .core import AxiomReport

    chunk = max(32, count // max(1, 4 * threads))
    jobs = [
        (name, count, max_points, seed, lo, min(lo + chunk, count))
        for lo in range(0, count, chunk)
    ]
    if threads > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_battery_chunk, jobs))
    else:
        parts = [_battery_chunk(j) for j in jobs]
    report = AxiomReport()
    for part in parts:
        report.merge(part)
    return report


#: name -> (generator, corpus factory(count, seed))
GENERATOR_SUITE = {
    "convex2": (
        generators.ConvexHullGen(dim=2),
        lambda count, max_points, seed: euclid_corpus(2, count, max_points, seed),
    ),
    "convex3": (
        generators.ConvexHullGen(dim=3),
        lambda count, max_points, seed: euclid_corpus(3, count, max_points, seed),
    ),
    "coordmin": (
        generators.CoordMinGen(),
        lambda count, max_points, seed: euclid_corpus(2, count, max_points, seed),
    ),
    "pareto": (
        generators.ParetoGen(dim=2),
        lambda count, max_points, seed: euclid_corpus(2, count, max_points, seed),
    ),
    "envelope": (
        generators.EnvelopeGen(dim=1, env_const=1.0, beta=1.0),
        lambda count, max_points, seed: param_corpus(1, count, max_points, seed),
    ),
    "halfplane": (
        generators.HalfPlaneGen(window_radius=2.0),
        lambda count, max_points, seed: line_corpus(count, max_points, seed, 2.0),
    ),
    "diskhull": (
        generators.DiskHullGen(anchor_radius=0.3),
        lambda count, max_points, seed: euclid_corpus(2, count, max_points, seed, -1.0, 1.0),
    ),
    "broken_lexdrop": (
        LexDropGen(),
        lambda count, max_points, seed: euclid_corpus(2, count, max_points, seed),
    ),
}
