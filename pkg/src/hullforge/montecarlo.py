"""Replication harness, statistical tests, and rate regressions.

Each replication draws its pattern from a dedicated RNG stream (stream index
= replication index inside a per-scenario namespace), so summaries do not
depend on execution order or worker count; aggregation happens on arrays in
replication order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import ks_2samp, norm

from . import analytics, estimators, generators, sampling
from .core import ConfigurationError, DomainError, HullGenerator, PointPattern


# ---------------------------------------------------------------------------
# scenario registry


@dataclass(frozen=True)
class Scenario:
    """A named (generator, intensity family, integrand, target) bundle."""

    name: str
    gen: HullGenerator
    make_model: Callable[[float], sampling.IntensityModel]
    make_integrand: Callable[[float], estimators.Integrand]
    target: Callable[[float], float]
    default_t: float
    covariate: Callable[[float], estimators.Integrand] | None = None
    hoelder_params: Callable[[float], analytics.HoelderScenarioParams] | None = None


def _phi_ramp(sites: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + sites[:, 0])


def _ramp_superlevel(u: float) -> float:
    # Lebesgue measure of {s in [0,1]: phi(s) >= u} for phi(s) = (1+s)/2
    if u <= 0.5:
        return 1.0
    if u >= 1.0:
        return 0.0
    return 2.0 * (1.0 - u)


def _hoelder_band(t: float) -> sampling.HoelderBand:
    return sampling.HoelderBand(
        lo=(0.0,),
        hi=(1.0,),
        phi=_phi_ramp,
        phi_sup=1.0,
        phi_integral=0.75,
        holder_const=0.5,
        holder_exp=1.0,
        rate=t,
    )


def hoelder_scenario_params(t: float) -> analytics.HoelderScenarioParams:
    profiles = {i: _ramp_superlevel for i in (1, 2, 3, 4)}
    return analytics.HoelderScenarioParams(
        dim=1,
        beta=1.0,
        env_const=1.0,
        holder_const=0.5,
        gamma=1.0,
        rate=t,
        f_profiles=profiles,
        f_sup=1.0,
    )


_MEANWIDTH_K = 1.0
_MEANWIDTH_L = 2.0
_SANITY_INNER = 0.3
_SANITY_OUTER = 1.0


def _build_scenarios() -> dict[str, Scenario]:
    unit_square = lambda t: sampling.UniformBox((0.0, 0.0), (1.0, 1.0), rate=t)
    inv_const = lambda t: estimators.Constant(1.0 / t)
    return {
        "convex_square": Scenario(
            name="convex_square",
            gen=generators.ConvexHullGen(dim=2),
            make_model=unit_square,
            make_integrand=inv_const,
            target=lambda t: 1.0,
            default_t=50.0,
        ),
        "pareto_square": Scenario(
            name="pareto_square",
            gen=generators.ParetoGen(dim=2),
            make_model=unit_square,
            make_integrand=inv_const,
            target=lambda t: 1.0,
            default_t=20.0,
        ),
        "coordmin": Scenario(
            name="coordmin",
            gen=generators.CoordMinGen(),
            make_model=unit_square,
            make_integrand=inv_const,
            target=lambda t: 1.0,
            default_t=1.0,
        ),
        "hoelder_d1": Scenario(
            name="hoelder_d1",
            gen=generators.EnvelopeGen(dim=1, env_const=1.0, beta=1.0),
            make_model=_hoelder_band,
            make_integrand=lambda t: estimators.Indicator(),
            target=lambda t: 0.75 * t,
            default_t=1.0,
            covariate=lambda t: estimators.PowerDepth(2.0),
            hoelder_params=hoelder_scenario_params,
        ),
        "halfline_min": Scenario(
            name="halfline_min",
            gen=generators.ParetoGen(dim=1),
            make_model=lambda t: sampling.HalfLine(start=1.0, rate=t),
            make_integrand=lambda t: estimators.PowerTail(2.0),
            target=lambda t: t * 1.0,
            default_t=1.0,
        ),
        "meanwidth_disks": Scenario(
            name="meanwidth_disks",
            gen=generators.HalfPlaneGen(window_radius=_MEANWIDTH_L),
            make_model=lambda t: sampling.LinesBand(_MEANWIDTH_K, _MEANWIDTH_L, rate=t),
            make_integrand=lambda t: estimators.RadialPower(beta=1.0, weight=1.0),
            target=lambda t: t * analytics.meanwidth_target(_MEANWIDTH_K, _MEANWIDTH_L),
            default_t=1.0,
        ),
        "disk_support_sanity": Scenario(
            name="disk_support_sanity",
            gen=generators.DiskHullGen(anchor_radius=_SANITY_INNER),
            make_model=lambda t: sampling.UniformAnnulus(_SANITY_INNER, _SANITY_OUTER, rate=t),
            make_integrand=lambda t: estimators.Constant(1.0),
            target=lambda t: t * math.pi * (_SANITY_OUTER**2 - _SANITY_INNER**2),
            default_t=1.0,
        ),
    }


_SCENARIOS = _build_scenarios()


def get_scenario(name: str) -> Scenario:
    try:
        return _SCENARIOS[name]
    except KeyError as exc:
        raise ConfigurationError(f"unknown scenario {name!r}") from exc


def scenario_names() -> list[str]:
    return sorted(_SCENARIOS)


# ---------------------------------------------------------------------------
# configuration and summaries


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved experiment parameters; everything downstream is a pure function of it."""

    scenario: str
    replications: int
    base_seed: int = 0
    t_grid: tuple[float, ...] = ()
    nested_probes: int = 512
    nested_replicas: int = 200
    threads: int = 1
    negative_control: bool = False

    def __post_init__(self):
        if self.replications < 2:
            raise ConfigurationError("need at least 2 replications")
        if any(b <= a for a, b in zip(self.t_grid, self.t_grid[1:])):
            raise ConfigurationError("t grid must be strictly increasing")
        get_scenario(self.scenario)

    def grid(self) -> tuple[float, ...]:
        return self.t_grid or (get_scenario(self.scenario).default_t,)


@dataclass
class TRow:
    t: float
    target: float
    mean: float
    variance: float
    se: float
    ci_lo: float
    ci_hi: float
    mean_varest: float
    mean_boundary_count: float
    mean_complement_mass: float
    w1: float
    ks: float
    ks_resid_max: float
    unbiased_pass: bool


@dataclass
class ReplicationSummary:
    """Per-t aggregates, normality diagnostics, and log-log slope fits.

    CI half-widths are 2.576 standard errors (99% normal).  Raw per-t arrays
    are retained on the object for downstream identity checks; CSV and JSON
    serialisations carry only the aggregates.
    """

    scenario: str
    replications: int
    base_seed: int
    rows: list[TRow] = field(default_factory=list)
    variance_slope: float | None = None
    variance_slope_se: float | None = None
    w1_slope: float | None = None
    w1_slope_se: float | None = None
    samples: dict[float, dict[str, np.ndarray]] = field(default_factory=dict)

    @property
    def ks_resid_max(self) -> float:
        return max((r.ks_resid_max for r in self.rows), default=0.0)


_Z99 = 2.5758293035489004  # 99% two-sided normal quantile


def _hull_mass_scale(f: estimators.Integrand) -> float | None:
    """hull mass / hull term ratio when the integrand is flat on the band."""
    if isinstance(f, estimators.Constant):
        return 1.0 / f.c
    if isinstance(f, estimators.Indicator):
        return 1.0
    if isinstance(f, estimators.RadialPower) and f.beta == 1.0 and f.weight == 1.0:
        return 1.0
    return None


def _replicate_chunk(args) -> list[tuple[float, float, int, float, float]]:
    scenario_name, t, stream_tag, base_seed, lo, hi = args
    scen = get_scenario(scenario_name)
    model = scen.make_model(t)
    f = scen.make_integrand(t)
    target = scen.target(t)
    scale = _hull_mass_scale(f)
    out = []
    for rep in range(lo, hi):
        stream = sampling.RngStream(base_seed).child(stream_tag).stream(rep)
        pattern = sampling.sample_poisson(model, stream)
        est = estimators.hull_estimate(scen.gen, model, f, pattern)
        ks = estimators.ks_error(scen.gen, model, f, pattern, target, hull_term=est.hull_term)
        resid = abs(est.value - target - ks)
        complement = (
            model.total_mass - scale * est.hull_term if scale is not None else math.nan
        )
        out.append((est.value, est.variance_estimate, est.boundary_count, complement, resid))
    return out


def run_replications(config: ExperimentConfig, t_offset: int = 0) -> ReplicationSummary:
    """Independent replications over the t grid, aggregated deterministically.

    ``t_offset`` shifts the per-t stream namespace so a grid can be run one
    point at a time (for incremental output) with identical results.
    """
    scen = get_scenario(config.scenario)
    summary = ReplicationSummary(
        scenario=config.scenario,
        replications=config.replications,
        base_seed=config.base_seed,
    )
    R = config.replications
    for t_index, t in enumerate(config.grid()):
        chunk = max(64, R // max(1, 4 * config.threads))
        jobs = [
            (config.scenario, t, t_offset + t_index, config.base_seed, lo, min(lo + chunk, R))
            for lo in range(0, R, chunk)
        ]
        if config.threads > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=config.threads) as pool:
                parts = list(pool.map(_replicate_chunk, jobs))
        else:
            parts = [_replicate_chunk(j) for j in jobs]
        records = [r for part in parts for r in part]
        values = np.array([r[0] for r in records])
        varests = np.array([r[1] for r in records])
        bcounts = np.array([r[2] for r in records], dtype=float)
        complements = np.array([r[3] for r in records])
        resid = max(r[4] for r in records)
        target = scen.target(t)
        mean = float(values.mean())
        var = float(values.var(ddof=1))
        se = math.sqrt(var / R)
        if R >= 100 and var > 0:
            w1, ks = normality_diagnostics(values)
        else:
            w1, ks = math.nan, math.nan
        summary.rows.append(
            TRow(
                t=t,
                target=target,
                mean=mean,
                variance=var,
                se=se,
                ci_lo=mean - _Z99 * se,
                ci_hi=mean + _Z99 * se,
                mean_varest=float(varests.mean()),
                mean_boundary_count=float(bcounts.mean()),
                mean_complement_mass=float(complements.mean()),
                w1=w1,
                ks=ks,
                ks_resid_max=resid,
                unbiased_pass=abs(mean - target) <= 4.0 * se,
            )
        )
        summary.samples[t] = {
            "values": values,
            "varest": varests,
            "boundary_count": bcounts,
            "complement_mass": complements,
        }
    if len(summary.rows) >= 4:
        pairs = [(r.t, r.variance) for r in summary.rows if r.variance > 0]
        if len(pairs) >= 4:
            summary.variance_slope, summary.variance_slope_se = rate_fit(pairs)
        w1_pairs = [(r.t, r.w1) for r in summary.rows if math.isfinite(r.w1) and r.w1 > 0]
        if len(w1_pairs) >= 4:
            summary.w1_slope, summary.w1_slope_se = rate_fit(w1_pairs)
    return summary


# ---------------------------------------------------------------------------
# spatial Markov two-sample test


@dataclass
class MarkovReport:
    scenario: str
    pairs: int
    coordinates: tuple[str, ...]
    statistics: tuple[float, ...]
    pvalues: tuple[float, ...]
    negative_control: bool

    @property
    def all_pass(self) -> bool:
        return all(p > 1e-3 for p in self.pvalues)


def _interior_stats(gen, model, f, pattern) -> tuple[float, float, float]:
    bd = gen.boundary(pattern)
    interior = pattern - bd
    fsum = sum(m * f.value(p) for p, m in interior.entries)
    mass = generators.hull_mass(gen, pattern, model) if not pattern.is_empty else 0.0
    return float(interior.total_mass), float(fsum), mass


def markov_two_sample(config: ExperimentConfig) -> MarkovReport:
    """Two-sample test of the hull-trimmed conditional law.

    Arm A evaluates the statistic vector (interior count, interior f-sum,
    hull mass) on single realisations; arm B evaluates it with the interior
    replaced by an independent fresh pattern thinned to the observed hull.
    Under the trimmed-resampling law both arms share a distribution; the
    negative control skips the thinning and must be detected.
    """
    scen = get_scenario(config.scenario)
    t = config.grid()[0]
    model = scen.make_model(t)
    f = scen.make_integrand(t)
    gen = scen.gen
    n = config.replications
    root = sampling.RngStream(config.base_seed)
    arm_a = np.empty((n, 3))
    arm_b = np.empty((n, 3))
    for i in range(n):
        eta = sampling.sample_poisson(model, root.child(11).stream(i))
        arm_a[i] = _interior_stats(gen, model, f, eta)

        eta2 = sampling.sample_poisson(model, root.child(12).stream(i))
        if config.negative_control:
            fresh = sampling.sample_poisson(model, root.child(13).stream(i))
        else:
            fresh = sampling.trimmed_resample(model, gen, eta2, root.child(13).stream(i))
        fsum = sum(m * f.value(p) for p, m in fresh.entries)
        mass = generators.hull_mass(gen, eta2, model) if not eta2.is_empty else 0.0
        arm_b[i] = (float(fresh.total_mass), float(fsum), mass)

    names = ("interior_count", "interior_fsum", "hull_mass")
    stats, pvals = [], []
    for j in range(3):
        res = ks_2samp(arm_a[:, j], arm_b[:, j], method="asymp")
        stats.append(float(res.statistic))
        pvals.append(float(res.pvalue))
    return MarkovReport(
        scenario=config.scenario,
        pairs=n,
        coordinates=names,
        statistics=tuple(stats),
        pvalues=tuple(pvals),
        negative_control=config.negative_control,
    )


# ---------------------------------------------------------------------------
# diagnostics and fits


def normality_diagnostics(samples: Sequence[float]) -> tuple[float, float]:
    """(W1, KS) distances of the standardized sample to the standard normal."""
    x = np.asarray(samples, dtype=float)
    if len(x) < 100:
        raise DomainError("need at least 100 samples")
    sd = x.std(ddof=1)
    if sd <= 0:
        raise DomainError("sample variance must be positive")
    z = np.sort((x - x.mean()) / sd)
    n = len(z)
    quantiles = norm.ppf((np.arange(1, n + 1) - 0.5) / n)
    w1 = float(np.mean(np.abs(z - quantiles)))
    cdf = norm.cdf(z)
    upper = np.abs(np.arange(1, n + 1) / n - cdf)
    lower = np.abs(np.arange(0, n) / n - cdf)
    ks = float(np.max(np.maximum(upper, lower)))
    return w1, ks


def rate_fit(pairs: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """Least-squares slope of log(metric) against log(t), with its standard error."""
    if len(pairs) < 4:
        raise DomainError("rate fits need at least 4 grid points")
    ts = np.array([p[0] for p in pairs], dtype=float)
    ms = np.array([p[1] for p in pairs], dtype=float)
    if np.any(ts <= 0) or np.any(ms <= 0):
        raise DomainError("rate fits need positive grid values and metrics")
    x = np.log(ts)
    y = np.log(ms)
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ (y - y.mean())) / sxx
    resid = y - y.mean() - slope * xc
    dof = len(pairs) - 2
    se = math.sqrt(float(resid @ resid) / dof / sxx)
    return slope, se


# ---------------------------------------------------------------------------
# nested Monte Carlo for the variance and covariance identities


@dataclass
class NestedIntegral:
    """lambda-integral of weight(x) * P(adding x changes the boundary)."""

    estimate: float
    se: float
    probes: int
    replicas: int

    @property
    def ci99(self) -> tuple[float, float]:
        return self.estimate - _Z99 * self.se, self.estimate + _Z99 * self.se


def nested_h_integral(
    config: ExperimentConfig,
    weight: Callable[[object], float],
    t: float | None = None,
) -> NestedIntegral:
    """Estimate int weight(x) E[H_x] dlambda by fresh-replica Monte Carlo.

    Probes are drawn lambda-proportionally; each probe gets its own bundle of
    fresh patterns, so the probe-level terms are independent and the reported
    standard error is honest.
    """
    scen = get_scenario(config.scenario)
    t = t if t is not None else config.grid()[0]
    model = scen.make_model(t)
    gen = scen.gen
    root = sampling.RngStream(config.base_seed)
    probes = model.sample_points(config.nested_probes, root.child(21).generator())
    terms = np.empty(len(probes))
    for i, x in enumerate(probes):
        ns = root.child(22).child(i)
        hits = 0
        for r in range(config.nested_replicas):
            eta = sampling.sample_poisson(model, ns.stream(r))
            if not gen.hull_contains(eta, x):
                hits += 1
        terms[i] = model.total_mass * weight(x) * hits / config.nested_replicas
    return NestedIntegral(
        estimate=float(terms.mean()),
        se=float(terms.std(ddof=1) / math.sqrt(len(terms))),
        probes=len(probes),
        replicas=config.nested_replicas,
    )


@dataclass
class PairedRun:
    values_f: np.ndarray
    values_g: np.ndarray
    ks_resid_max: float


def paired_estimates(
    config: ExperimentConfig,
    t: float | None = None,
    targets: tuple[float, float] | None = None,
) -> PairedRun:
    """Per-replication estimator values for the integrand and its covariate.

    Both estimators are evaluated on the same pattern, which is what the
    covariance identity is about.  When targets are supplied, the
    error-representation identity is checked for both integrands on every
    pattern and the worst residual is reported.
    """
    scen = get_scenario(config.scenario)
    if scen.covariate is None:
        raise ConfigurationError(f"scenario {scen.name} declares no covariate integrand")
    t = t if t is not None else config.grid()[0]
    model = scen.make_model(t)
    f = scen.make_integrand(t)
    g = scen.covariate(t)
    vf = np.empty(config.replications)
    vg = np.empty(config.replications)
    resid = 0.0
    root = sampling.RngStream(config.base_seed).child(31)
    for rep in range(config.replications):
        pattern = sampling.sample_poisson(model, root.stream(rep))
        est_f = estimators.hull_estimate(scen.gen, model, f, pattern)
        est_g = estimators.hull_estimate(scen.gen, model, g, pattern)
        vf[rep] = est_f.value
        vg[rep] = est_g.value
        if targets is not None:
            for est, fn, target in ((est_f, f, targets[0]), (est_g, g, targets[1])):
                err = estimators.ks_error(
                    scen.gen, model, fn, pattern, target, hull_term=est.hull_term
                )
                resid = max(resid, abs(est.value - target - err))
    return PairedRun(values_f=vf, values_g=vg, ks_resid_max=resid)


# ---------------------------------------------------------------------------
# interval helpers for the identity checks


def mean_ci99(values: np.ndarray) -> tuple[float, float, float]:
    m = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(len(values)))
    return m - _Z99 * se, m + _Z99 * se, m


def variance_ci99(values: np.ndarray) -> tuple[float, float, float]:
    n = len(values)
    v = float(values.var(ddof=1))
    centered = values - values.mean()
    m4 = float(np.mean(centered**4))
    se = math.sqrt(max(m4 - v * v, 0.0) / n)
    return v - _Z99 * se, v + _Z99 * se, v


def covariance_ci99(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    n = len(x)
    xc = x - x.mean()
    yc = y - y.mean()
    c = float(xc @ yc / (n - 1))
    m22 = float(np.mean(xc**2 * yc**2))
    se = math.sqrt(max(m22 - c * c, 0.0) / n)
    return c - _Z99 * se, c + _Z99 * se, c


def intervals_overlap(a: tuple[float, float], b: tuple[float, float]) -> bool:
    return a[0] <= b[1] and b[0] <= a[1]
