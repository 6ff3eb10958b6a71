"""Poisson process simulation over structured intensity models.

Every sampler is a pure function of an :class:`RngStream` value, so a fixed
(model, base seed, stream index) triple reproduces the same pattern bit for
bit on any machine and under any degree of parallelism.  The harness assigns
one stream per replication.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import (
    ConfigurationError,
    DomainError,
    EuclidPoint,
    LinePoint,
    ParamPoint,
    PointPattern,
    SpacePoint,
)

_GOLDEN = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def mix64(z: int) -> int:
    """SplitMix64 finalizer; bijective on 64-bit integers."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


@dataclass(frozen=True)
class RngStream:
    """A (base seed, stream index) pair naming one reproducible random stream."""

    base_seed: int
    stream_index: int = 0

    def seed(self) -> int:
        return mix64(self.base_seed ^ ((self.stream_index * _GOLDEN) & _MASK))

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed()))

    def stream(self, index: int) -> "RngStream":
        """Sibling stream under the same base seed."""
        return RngStream(self.base_seed, index)

    def child(self, tag: int) -> "RngStream":
        """Independent sub-namespace rooted at this stream.

        The tag is folded into the derived base seed, so further ``stream``
        indexing cannot collide with a sibling namespace.
        """
        return RngStream(mix64(self.seed() ^ ((tag * _GOLDEN) & _MASK)), 0)


# ---------------------------------------------------------------------------
# intensity models


class IntensityModel:
    """Region + density + total mass; drives sampling and hull integrals."""

    rate: float

    @property
    def total_mass(self) -> float:
        raise NotImplementedError

    def sample_points(self, n: int, rng: np.random.Generator) -> list[SpacePoint]:
        """n i.i.d. draws from the normalized intensity."""
        raise NotImplementedError

    def sample_pattern(self, rng: np.random.Generator) -> PointPattern:
        n = int(rng.poisson(self.total_mass))
        return PointPattern.from_points(self.sample_points(n, rng))


@dataclass(frozen=True)
class UniformBox(IntensityModel):
    """rate * Lebesgue on an axis-aligned box in R^d, d <= 3."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    rate: float = 1.0

    def __post_init__(self) -> None:
        if len(self.lo) != len(self.hi) or not 1 <= len(self.lo) <= 3:
            raise ConfigurationError("box bounds must share a dimension in 1..3")
        if any(h <= l for l, h in zip(self.lo, self.hi)) or self.rate < 0:
            raise ConfigurationError("box must be nondegenerate and rate >= 0")
        vol = math.prod(h - l for l, h in zip(self.lo, self.hi))
        object.__setattr__(self, "_volume", vol)
        object.__setattr__(self, "_mass", self.rate * vol)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> float:
        return self._volume

    @property
    def total_mass(self) -> float:
        return self._mass

    def sample_points(self, n, rng):
        pts = rng.uniform(self.lo, self.hi, size=(n, self.dim))
        return [EuclidPoint(tuple(row)) for row in pts]


@dataclass(frozen=True)
class UniformDisk(IntensityModel):
    """rate * Lebesgue on a planar disk."""

    center: tuple[float, float]
    radius: float
    rate: float = 1.0

    def __post_init__(self) -> None:
        if self.radius <= 0 or self.rate < 0:
            raise ConfigurationError("disk radius must be positive and rate >= 0")

    @property
    def total_mass(self) -> float:
        return self.rate * math.pi * self.radius**2

    def sample_points(self, n, rng):
        r = self.radius * np.sqrt(rng.uniform(size=n))
        ang = rng.uniform(0.0, 2.0 * math.pi, size=n)
        cx, cy = self.center
        return [
            EuclidPoint((cx + ri * math.cos(a), cy + ri * math.sin(a)))
            for ri, a in zip(r, ang)
        ]


@dataclass(frozen=True)
class UniformPolygon(IntensityModel):
    """rate * Lebesgue on a convex polygon (counterclockwise vertices)."""

    vertices: tuple[tuple[float, float], ...]
    rate: float = 1.0

    def __post_init__(self) -> None:
        if len(self.vertices) < 3:
            raise ConfigurationError("polygon needs at least 3 vertices")

    @property
    def area(self) -> float:
        v = self.vertices
        s = sum(
            v[i][0] * v[(i + 1) % len(v)][1] - v[(i + 1) % len(v)][0] * v[i][1]
            for i in range(len(v))
        )
        return 0.5 * s

    @property
    def total_mass(self) -> float:
        return self.rate * self.area

    def _contains(self, x: float, y: float) -> bool:
        v = self.vertices
        for i in range(len(v)):
            ax, ay = v[i]
            bx, by = v[(i + 1) % len(v)]
            if (bx - ax) * (y - ay) - (by - ay) * (x - ax) < 0.0:
                return False
        return True

    def sample_points(self, n, rng):
        xs = [p[0] for p in self.vertices]
        ys = [p[1] for p in self.vertices]
        lo = (min(xs), min(ys))
        hi = (max(xs), max(ys))
        out: list[SpacePoint] = []
        while len(out) < n:
            cand = rng.uniform(lo, hi, size=(max(n - len(out), 8), 2))
            for x, y in cand:
                if self._contains(x, y):
                    out.append(EuclidPoint((float(x), float(y))))
                    if len(out) == n:
                        break
        return out


@dataclass(frozen=True)
class UniformAnnulus(IntensityModel):
    """rate * Lebesgue on the annulus r_inner < ||x|| < r_outer (origin centred)."""

    r_inner: float
    r_outer: float
    rate: float = 1.0

    def __post_init__(self) -> None:
        if not 0 <= self.r_inner < self.r_outer:
            raise ConfigurationError("annulus needs 0 <= r_inner < r_outer")

    @property
    def total_mass(self) -> float:
        return self.rate * math.pi * (self.r_outer**2 - self.r_inner**2)

    def sample_points(self, n, rng):
        u = rng.uniform(size=n)
        r = np.sqrt(self.r_inner**2 + u * (self.r_outer**2 - self.r_inner**2))
        ang = rng.uniform(0.0, 2.0 * math.pi, size=n)
        return [
            EuclidPoint((ri * math.cos(a), ri * math.sin(a))) for ri, a in zip(r, ang)
        ]


@dataclass(frozen=True)
class HoelderBand(IntensityModel):
    """rate * Lebesgue on the band {(s, u): s in window, 0 <= u <= phi(s)}.

    ``phi`` must be (holder_const, holder_exp)-Hoelder with holder_const no
    larger than the envelope constant of the paired generator; then every
    sampled envelope stays below phi pointwise.  Only u >= 0 is sampled: lower
    atoms can neither raise the envelope above zero nor carry weight for the
    depth integrands used here, so the restriction is exact for this band.
    """

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    phi: Callable[[np.ndarray], np.ndarray]
    phi_sup: float
    phi_integral: float
    holder_const: float
    holder_exp: float
    rate: float = 1.0
    resolution: int = 2048

    def __post_init__(self) -> None:
        if len(self.lo) != len(self.hi) or not 1 <= len(self.lo) <= 2:
            raise ConfigurationError("band window must be 1- or 2-dimensional")
        if self.phi_sup <= 0 or self.phi_integral <= 0:
            raise ConfigurationError("phi must be positive on the window")
        if not 0 < self.holder_exp <= 1 or self.holder_const < 0:
            raise ConfigurationError("need holder_exp in (0,1] and holder_const >= 0")

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def window_volume(self) -> float:
        return float(np.prod([h - l for l, h in zip(self.lo, self.hi)]))

    @property
    def total_mass(self) -> float:
        return self.rate * self.phi_integral

    def phi_at(self, sites: np.ndarray) -> np.ndarray:
        return np.asarray(self.phi(sites), dtype=float)

    def grid_sites(self, resolution: int | None = None) -> tuple[np.ndarray, float]:
        """Midpoint grid over the window and the cell volume."""
        n = resolution or self.resolution
        if self.dim == 1:
            edges = np.linspace(self.lo[0], self.hi[0], n + 1)
            mids = 0.5 * (edges[:-1] + edges[1:])
            return mids[:, None], (self.hi[0] - self.lo[0]) / n
        n1 = max(16, int(math.sqrt(n)))
        ex = np.linspace(self.lo[0], self.hi[0], n1 + 1)
        ey = np.linspace(self.lo[1], self.hi[1], n1 + 1)
        mx = 0.5 * (ex[:-1] + ex[1:])
        my = 0.5 * (ey[:-1] + ey[1:])
        gx, gy = np.meshgrid(mx, my, indexing="ij")
        cell = (ex[1] - ex[0]) * (ey[1] - ey[0])
        return np.column_stack([gx.ravel(), gy.ravel()]), cell

    def sample_points(self, n, rng):
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        out: list[SpacePoint] = []
        while len(out) < n:
            batch = max(2 * (n - len(out)), 16)
            s = rng.uniform(lo, hi, size=(batch, self.dim))
            p = self.phi_at(s)
            accept = rng.uniform(0.0, self.phi_sup, size=batch) < p
            u = rng.uniform(size=batch) * p
            kept_s = s[accept]
            kept_u = u[accept]
            for site, ui in zip(kept_s[: n - len(out)], kept_u[: n - len(out)]):
                out.append(ParamPoint(tuple(site), float(ui)))
        return out


@dataclass(frozen=True)
class LinesBand(IntensityModel):
    """Poisson line process in the band h_inner(theta) <= u <= h_outer(theta).

    Lines are half-plane boundaries {x: <x, s_theta> <= u}; constant support
    functions describe concentric disks.  theta carries the measure
    rate * (h_outer - h_inner)(theta) dtheta.
    """

    h_inner: float
    h_outer: float
    rate: float = 1.0

    def __post_init__(self) -> None:
        if not 0 <= self.h_inner < self.h_outer:
            raise ConfigurationError("need 0 <= h_inner < h_outer")

    @property
    def gap(self) -> float:
        return self.h_outer - self.h_inner

    @property
    def total_mass(self) -> float:
        return self.rate * 2.0 * math.pi * self.gap

    def sample_points(self, n, rng):
        ang = rng.uniform(0.0, 2.0 * math.pi, size=n)
        u = rng.uniform(self.h_inner, self.h_outer, size=n)
        return [LinePoint(float(a), float(ui)) for a, ui in zip(ang, u)]


@dataclass(frozen=True)
class HalfLine(IntensityModel):
    """Unit-dimension process on [start, infinity) truncated at a horizon.

    Arrivals beyond start + horizon are dropped; the scenarios using this
    model only ever read the minimum point and closed-form tail integrals, so
    the truncation does not affect any estimator value.
    """

    start: float
    rate: float = 1.0
    horizon: float = 50.0

    def __post_init__(self) -> None:
        if self.rate <= 0 or self.horizon <= 0:
            raise ConfigurationError("need positive rate and horizon")

    @property
    def total_mass(self) -> float:
        # mass of the simulated (truncated) window
        return self.rate * self.horizon

    def sample_points(self, n, rng):
        xs = self.start + rng.uniform(0.0, self.horizon, size=n)
        return [EuclidPoint((float(x),)) for x in xs]

    def sample_pattern(self, rng: np.random.Generator) -> PointPattern:
        # exponential gaps, i.e. a unit-rate renewal construction
        end = self.start + self.horizon
        pts = []
        x = self.start
        while True:
            x += rng.exponential(1.0 / self.rate)
            if x > end:
                break
            pts.append(EuclidPoint((float(x),)))
        return PointPattern.from_points(pts)


# ---------------------------------------------------------------------------
# sampling operations


def sample_poisson(model: IntensityModel, stream: RngStream) -> PointPattern:
    """One Poisson pattern: N ~ Poisson(total mass), then N i.i.d. points."""
    if model.total_mass < 0 or not math.isfinite(model.total_mass):
        raise DomainError("model must have finite nonnegative total mass")
    return model.sample_pattern(stream.generator())


def trimmed_resample(model, gen, observed: PointPattern, stream: RngStream) -> PointPattern:
    """Fresh Poisson sample restricted to the hull of ``observed``.

    Restriction of a Poisson process is Poisson, so thinning a fresh pattern
    through hull membership realises the hull-trimmed intensity exactly.
    """
    fresh = sample_poisson(model, stream)
    if fresh.is_empty:
        return fresh
    support = [p for p, _ in fresh.entries]
    mask = gen.hull_contains_many(observed, support)
    counts = {p: m for (p, m), keep in zip(fresh.entries, mask) if keep}
    return PointPattern.from_counts(counts)
