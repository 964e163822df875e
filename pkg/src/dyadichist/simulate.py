"""Monte-Carlo experiment driver: expected Wasserstein error curves on the
log2 scale with Delta-method confidence intervals, rate-slope estimation,
concentration checks, and a posterior-contraction probe.

Replicates are the parallel unit; every replicate derives its own rng stream
from (seed, estimator, n, rep) through SeedSequence spawn keys, so thread
count and scheduling can never change the numbers.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .core import (
    DiscreteMeasure,
    ModelConfig,
    discretize,
    fit_batch,
    posterior_mean_weights,
    sample_posterior,
)
from .distributions import Uniform, discretize_ground_truth
from .wasserstein import (
    identity_quantile,
    ot_discrete,
    quantile_from_weights,
    quantile_of_discrete,
    quantile_of_histogram,
    wasserstein_1d,
)

ESTIMATORS = ("empirical", "hist_zero_prior", "hist_default_prior", "hist_discretized")
_ESTIMATOR_ID = {name: i for i, name in enumerate(ESTIMATORS)}
_TRUTH_STREAM_KEY = (99, 0, 0)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


@dataclass(frozen=True)
class ExperimentSpec:
    gt: object
    v: float
    p: float = 2.0
    estimators: tuple = ESTIMATORS
    log2_n_list: tuple = (2, 4, 6, 8, 10, 12)
    reps: int = 100
    seed: int = 0
    truth_discretization_m: int = 1000

    def __post_init__(self):
        if self.v < 1 or self.p < 1:
            raise ValueError("orders v and p must be >= 1")
        if self.reps < 2:
            raise ValueError("reps must be >= 2 (the CI needs a variance)")
        lns = tuple(int(x) for x in self.log2_n_list)
        if len(set(lns)) != len(lns) or list(lns) != sorted(lns):
            raise ValueError("log2_n_list values must be distinct and sorted")
        if any(x < 0 for x in lns):
            raise ValueError("log2_n_list values must be nonnegative")
        object.__setattr__(self, "log2_n_list", lns)
        ests = tuple(self.estimators)
        for e in ests:
            if e not in _ESTIMATOR_ID:
                raise ValueError(f"unknown estimator {e!r}")
        if not ests:
            raise ValueError("need at least one estimator")
        object.__setattr__(self, "estimators", ests)
        if self.gt.dim >= 2 and (
            self.truth_discretization_m is None or self.truth_discretization_m < 1
        ):
            raise ValueError("d >= 2 experiments need truth_discretization_m >= 1")


@dataclass(frozen=True)
class ResultRow:
    estimator: str
    n: int
    mean_w: float
    sd_w: float
    log2_mean: float
    ci_lo: float
    ci_hi: float


@dataclass(frozen=True)
class ExperimentResult:
    rows: tuple


def _rep_rng(seed: int, est: str, log2n: int, rep: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(_ESTIMATOR_ID[est], log2n, rep))
    return np.random.default_rng(ss)


def wv_quantile_vs_gt(q, gt, v: float) -> float:
    """W_v between a piecewise quantile function and a 1-D ground truth.

    Uniform truth is exact (both quantiles are piecewise affine); otherwise
    integrates |q(z) - Q_gt(z)|^v by 32-point Gauss-Legendre per segment,
    with an extra break at z = 0.5 where the Split quantile has a kink.
    """
    if isinstance(gt, Uniform):
        return wasserstein_1d(q, identity_quantile(), v)
    # midpoint split halves the panels so a kink of |difference| inside a
    # panel costs less accuracy; overall error is ~1e-6 absolute
    edges = np.unique(
        np.concatenate((q.z_lo, q.z_hi, 0.5 * (q.z_lo + q.z_hi), [0.5]))
    )
    z1 = edges[:-1]
    half = 0.5 * (edges[1:] - z1)
    mid = z1 + half
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).reshape(-1)
    idx = np.clip(np.searchsorted(q.z_lo, nodes, side="right") - 1, 0, q.a.size - 1)
    hist_vals = q.a[idx] + q.b[idx] * nodes
    diff = np.abs(hist_vals - gt.quantile(nodes)) ** v
    seg = diff.reshape(half.size, _GL_NODES.size) @ _GL_WEIGHTS
    return float(max(np.dot(seg, half), 0.0) ** (1.0 / v))


def _refined_discretization(hist, target_atoms: int) -> DiscreteMeasure:
    """Discrete approximation of the continuous histogram measure.

    Each cell's mass is split uniformly over the finest dyadic sub-grid that
    stays within target_atoms atoms (never coarser than the cells), so the
    continuous estimator is not charged the one-atom-per-cell quantization
    penalty when evaluated through discrete optimal transport.
    """
    b, d = hist.b, hist.d
    refine = 0
    while (b * 2 ** (refine + 1)) ** d <= max(target_atoms, b**d):
        refine += 1
    f = 2**refine
    bf = b * f
    w = posterior_mean_weights(hist).reshape((b,) * d)
    for axis in range(d):
        w = np.repeat(w, f, axis=axis)
    w = (w / f**d).reshape(-1)
    atoms = (np.indices((bf,) * d).reshape(d, -1).T + 0.5) / bf
    keep = w > 0
    return DiscreteMeasure(atoms[keep], w[keep])


def _one_rep_error(spec: ExperimentSpec, est: str, log2n: int, rep: int, truth) -> float:
    d = spec.gt.dim
    n = 2**log2n
    rng = _rep_rng(spec.seed, est, log2n, rep)
    data = spec.gt.sample(rng, n)
    if est == "empirical":
        measure = DiscreteMeasure.empirical(data)
        if d == 1:
            return wv_quantile_vs_gt(quantile_of_discrete(measure), spec.gt, spec.v)
        return ot_discrete(measure, truth, spec.v, spec.p)
    prior = "zero" if est == "hist_zero_prior" else "auto"
    hist = fit_batch(data, ModelConfig(d=d, v=spec.v, p=spec.p, prior=prior))
    if est == "hist_discretized":
        measure = discretize(hist)
        if d == 1:
            return wv_quantile_vs_gt(quantile_of_discrete(measure), spec.gt, spec.v)
        return ot_discrete(measure, truth, spec.v, spec.p)
    if d >= 2:
        measure = _refined_discretization(hist, spec.truth_discretization_m)
        return ot_discrete(measure, truth, spec.v, spec.p)
    return wv_quantile_vs_gt(quantile_of_histogram(hist), spec.gt, spec.v)


def run_experiment(spec: ExperimentSpec, threads: int = 1) -> ExperimentResult:
    """Mean W_v error per (estimator, n) over spec.reps replicates.

    For d = 1 distances use the exact/quadrature quantile route; for d >= 2
    the truth is discretized once (its own fixed rng stream) and errors are
    solved as discrete optimal transport.
    """
    truth = None
    if spec.gt.dim >= 2:
        t_rng = np.random.default_rng(
            np.random.SeedSequence(entropy=spec.seed, spawn_key=_TRUTH_STREAM_KEY)
        )
        truth = discretize_ground_truth(spec.gt, spec.truth_discretization_m, t_rng)
    tasks = [(est, log2n) for est in spec.estimators for log2n in spec.log2_n_list]
    rows = []
    for est, log2n in tasks:
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                errors = list(
                    pool.map(
                        lambda rep: _one_rep_error(spec, est, log2n, rep, truth),
                        range(spec.reps),
                    )
                )
        else:
            errors = [_one_rep_error(spec, est, log2n, rep, truth) for rep in range(spec.reps)]
        errors = np.asarray(errors)
        mean = float(errors.mean())
        sd = float(errors.std(ddof=1))
        if mean > 0:
            lo, hi = delta_ci(mean, sd, spec.reps)
            log2_mean = math.log2(mean)
        else:
            log2_mean = lo = hi = -math.inf
        rows.append(ResultRow(est, 2**log2n, mean, sd, log2_mean, lo, hi))
    rows.sort(key=lambda r: (r.estimator, r.n))
    return ExperimentResult(tuple(rows))


def delta_ci(mean: float, sd: float, reps: int, level: float = 0.95) -> tuple:
    """CI for log2 of an MC mean: first-order error propagation through log2."""
    if mean <= 0:
        raise ValueError("mean must be positive")
    if sd < 0 or reps < 2:
        raise ValueError("need sd >= 0 and reps >= 2")
    z = NormalDist().inv_cdf((1.0 + level) / 2.0)
    half = z * sd / (mean * math.sqrt(reps) * math.log(2))
    center = math.log2(mean)
    return (center - half, center + half)


def fit_slope(rows) -> float:
    """OLS slope of log2_mean against log2(n) for one estimator's rows."""
    rows = list(rows)
    names = {r.estimator for r in rows}
    if len(names) > 1:
        raise ValueError("rows must belong to a single estimator")
    ns = sorted({r.n for r in rows})
    if len(ns) < 3:
        raise ValueError("need at least 3 distinct n values")
    x = np.log2([r.n for r in rows])
    y = np.array([r.log2_mean for r in rows])
    return float(np.polyfit(x, y, 1)[0])


def multinomial_concentration_mc(n: int, probs, reps: int, rng: np.random.Generator) -> float:
    """MC estimate of E(sum_j |X_j - n p_j|) / n for X ~ Multinomial(n, p)."""
    probs = np.asarray(probs, dtype=float)
    if n < 1 or reps < 1:
        raise ValueError("n and reps must be >= 1")
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
        raise ValueError("probs must lie on the simplex")
    draws = rng.multinomial(n, probs, size=reps)
    z = np.abs(draws - n * probs).sum(axis=1) / n
    return float(z.mean())


def dirichlet_concentration_mc(
    alpha, delta: float, reps: int, rng: np.random.Generator
) -> float:
    """Fraction of Dirichlet(alpha) draws with sum|pi_j - E pi_j| >= sqrt(k/abar)/delta.

    abar is the total concentration; the tail bound says this fraction
    cannot exceed delta (up to MC noise).
    """
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha <= 0):
        raise ValueError("alpha entries must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    k = alpha.size
    abar = alpha.sum()
    threshold = math.sqrt(k) / (math.sqrt(abar) * delta)
    gams = rng.gamma(alpha, size=(reps, k))
    pis = gams / gams.sum(axis=1, keepdims=True)
    dist = np.abs(pis - alpha / abar).sum(axis=1)
    return float((dist >= threshold).mean())


def posterior_contraction_mc(
    gt,
    v: float,
    p: float,
    n_list,
    radius_scale: float,
    posterior_draws: int,
    reps: int,
    rng: np.random.Generator,
    gamma: float = 1.01,
):
    """Per-n fraction of posterior draws outside a shrinking W_v ball.

    The radius is radius_scale * n^{-1/(2v)} * (log n)^{gamma/v}; under the
    contraction theory the fractions should trend to zero in n.
    """
    if gt.dim != 1:
        raise ValueError("the contraction probe uses exact 1-D distances only")
    fractions = []
    for n in n_list:
        radius = radius_scale * n ** (-1.0 / (2 * v)) * math.log(n) ** (gamma / v)
        exceed = 0
        total = 0
        for _ in range(reps):
            data = gt.sample(rng, n)
            hist = fit_batch(data, ModelConfig(d=1, v=v, p=p, prior="auto"))
            for _ in range(posterior_draws):
                weights = sample_posterior(hist, rng)
                w = wv_quantile_vs_gt(quantile_from_weights(weights), gt, v)
                exceed += w >= radius
                total += 1
        fractions.append(exceed / total)
    return fractions


def results_to_csv(result: ExperimentResult) -> str:
    """Results CSV: fixed header, 12 significant digits, dot decimal always."""
    lines = ["estimator,n,mean_w,sd_w,log2_mean,ci_lo,ci_hi"]
    for r in result.rows:
        lines.append(
            f"{r.estimator},{r.n},{r.mean_w:.12g},{r.sd_w:.12g},"
            f"{r.log2_mean:.12g},{r.ci_lo:.12g},{r.ci_hi:.12g}"
        )
    return "\n".join(lines) + "\n"


def results_to_json(result: ExperimentResult) -> str:
    rows = [
        {
            "estimator": r.estimator,
            "n": r.n,
            "mean_w": r.mean_w,
            "sd_w": r.sd_w,
            "log2_mean": r.log2_mean,
            "ci_lo": r.ci_lo,
            "ci_hi": r.ci_hi,
        }
        for r in result.rows
    ]
    return json.dumps({"rows": rows}, indent=2) + "\n"
