"""Dyadic partition geometry, the conjugate histogram model, and point estimators.

The sample space is [0,1)^d split into b = 2^K equal bins per axis.  Bin
occupancy counts plus per-bin Dirichlet prior concentrations fully determine
the posterior, so a histogram is just (d, K, counts, prior, n).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import (
    CapacityError,
    DegenerateHistogramError,
    DomainError,
    ImproperPosteriorError,
)

# Dense count arrays are used up to this many cells; beyond it, fit_batch
# switches to a sparse dict keyed by flat index.
DENSE_CELL_LIMIT = 2**24

# Normalized-gamma sampling switches to a Gaussian approximation above this
# concentration to avoid overflow.
HUGE_ALPHA = 1e15

PriorSpec = Union[str, float, np.ndarray, Sequence[float]]


def auto_depth(n: int, d: int, v: float) -> tuple[float, int, int]:
    """Depth rule: k_n = n^{1/2v} for d <= 2v, else n^{1/d}; K = ceil(log2 k_n).

    Returns (k_n, K, b) with b = 2^K.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if d <= 2 * v:
        k_n = float(n) ** (1.0 / (2.0 * v))
    else:
        k_n = float(n) ** (1.0 / d)
    # guard against log2 of an exact power of two landing epsilon above it
    K = max(0, math.ceil(math.log2(k_n) - 1e-12))
    return k_n, K, 2**K


def default_prior_concentration(n: int, d: int, v: float) -> float:
    """Uniform per-bin concentration c(n) keeping the total prior mass within budget.

    c = 1 for d <= v, n^{1/2 - d/2v} for v < d <= 2v, n^{-v/d} for d > 2v.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if d <= v:
        return 1.0
    if d <= 2 * v:
        return float(n) ** (0.5 - d / (2.0 * v))
    return float(n) ** (-v / d)


@dataclass(frozen=True)
class ModelConfig:
    """Histogram model configuration.

    depth: None resolves K from the sample size via auto_depth; an int fixes K.
    prior: "zero", "auto" (default_prior_concentration), a scalar
           concentration, or a per-bin array of length b^d.
    """

    d: int
    v: float
    p: float = 2.0
    depth: int | None = None
    prior: PriorSpec = "zero"

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.v < 1:
            raise ValueError("v must be >= 1")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.depth is not None and self.depth < 0:
            raise ValueError("explicit depth must be >= 0")

    def resolve_depth(self, n: int) -> int:
        if self.depth is not None:
            return self.depth
        if n == 0:
            return 0
        return auto_depth(n, self.d, self.v)[1]

    def resolve_prior(self, n: int, cells: int) -> np.ndarray:
        if isinstance(self.prior, str):
            if self.prior == "zero":
                return np.zeros(cells)
            if self.prior == "auto":
                c = default_prior_concentration(max(n, 1), self.d, self.v)
                return np.full(cells, c)
            raise ValueError(f"unknown prior spec {self.prior!r}")
        if np.isscalar(self.prior):
            c = float(self.prior)
            if c < 0:
                raise ValueError("prior concentration must be >= 0")
            return np.full(cells, c)
        arr = np.asarray(self.prior, dtype=float)
        if arr.shape != (cells,):
            raise ValueError(
                f"per-bin prior has length {arr.size}, expected {cells}"
            )
        if np.any(arr < 0):
            raise ValueError("prior concentrations must be >= 0")
        return arr


@dataclass
class DiscreteMeasure:
    """Weighted atoms in [0,1)^d."""

    atoms: np.ndarray  # shape (n, d)
    weights: np.ndarray  # shape (n,), nonnegative, sums to 1

    def __post_init__(self):
        self.atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        self.weights = np.asarray(self.weights, dtype=float)
        if self.atoms.shape[0] != self.weights.shape[0]:
            raise ValueError("atoms and weights length mismatch")
        if self.atoms.shape[0] == 0:
            raise ValueError("discrete measure needs at least one atom")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1 within 1e-12")
        if np.any(self.atoms < 0) or np.any(self.atoms >= 1):
            raise DomainError("atom coordinates must lie in [0,1)")

    @property
    def d(self) -> int:
        return self.atoms.shape[1]

    @classmethod
    def empirical(cls, points: np.ndarray) -> "DiscreteMeasure":
        points = np.atleast_2d(np.asarray(points, dtype=float))
        n = points.shape[0]
        return cls(points, np.full(n, 1.0 / n))


def _axis_bins(x: np.ndarray, K: int) -> np.ndarray:
    """0-based per-axis bin via recursive midpoint comparison; 1.0 clamps right."""
    lo = np.zeros_like(x)
    hi = np.ones_like(x)
    idx = np.zeros(x.shape, dtype=np.int64)
    for _ in range(K):
        mid = 0.5 * (lo + hi)
        right = x >= mid
        idx = 2 * idx + right
        lo = np.where(right, mid, lo)
        hi = np.where(right, hi, mid)
    return idx


def bin_index(point, K: int) -> tuple[tuple[int, ...], int]:
    """Locate the depth-K dyadic cell containing a point.

    Returns the 1-based multi-index and the row-major flat index (axis 0
    slowest).  Coordinates must be in [0,1]; exactly 1.0 falls in the last bin.
    """
    pt = np.atleast_1d(np.asarray(point, dtype=float))
    if np.any(pt < 0) or np.any(pt > 1):
        raise DomainError(f"point {pt.tolist()} outside [0,1]^d")
    axes = _axis_bins(pt, K)
    b = 2**K
    flat = 0
    for a in axes:
        flat = flat * b + int(a)
    multi = tuple(int(a) + 1 for a in axes)
    return multi, flat


def flat_bin_indices(points: np.ndarray, K: int) -> np.ndarray:
    """Vectorized row-major flat bin indices for an (n, d) point array."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    bad = np.where(np.any((points < 0) | (points > 1), axis=1))[0]
    if bad.size:
        raise DomainError(f"point at index {int(bad[0])} outside [0,1]^d")
    b = 2**K
    flat = np.zeros(points.shape[0], dtype=np.int64)
    for axis in range(points.shape[1]):
        flat = flat * b + _axis_bins(points[:, axis], K)
    return flat


@dataclass
class DyadicHistogram:
    """Depth-K dyadic cell counts with Dirichlet prior concentrations.

    counts is a dense int array of length b^d, or a {flat index: count} dict
    when b^d exceeds DENSE_CELL_LIMIT.  prior is a dense array in the dense
    case and a uniform scalar in the sparse case.
    """

    d: int
    K: int
    n: int
    counts: Union[np.ndarray, dict]
    prior: Union[np.ndarray, float]

    def __post_init__(self):
        if isinstance(self.counts, dict):
            total = sum(self.counts.values())
        else:
            self.counts = np.asarray(self.counts, dtype=np.int64)
            if self.counts.shape != (self.cells,):
                raise ValueError("counts length must be b^d")
            total = int(self.counts.sum())
        if total != self.n:
            raise ValueError(f"counts sum {total} != n {self.n}")
        if not isinstance(self.prior, dict) and not np.isscalar(self.prior):
            self.prior = np.asarray(self.prior, dtype=float)
            if self.prior.shape != (self.cells,):
                raise ValueError("prior length must be b^d")

    @property
    def b(self) -> int:
        return 2**self.K

    @property
    def cells(self) -> int:
        return 2 ** (self.K * self.d)

    @property
    def is_sparse(self) -> bool:
        return isinstance(self.counts, dict)

    @property
    def total_prior(self) -> float:
        if np.isscalar(self.prior):
            return float(self.prior) * self.cells
        return float(self.prior.sum())

    def dense_counts(self) -> np.ndarray:
        if not self.is_sparse:
            return self.counts
        if self.cells > DENSE_CELL_LIMIT:
            raise CapacityError(
                f"{self.cells} cells exceed the dense budget {DENSE_CELL_LIMIT}"
            )
        out = np.zeros(self.cells, dtype=np.int64)
        for k, c in self.counts.items():
            out[k] = c
        return out

    def dense_prior(self) -> np.ndarray:
        if np.isscalar(self.prior):
            if self.cells > DENSE_CELL_LIMIT:
                raise CapacityError(
                    f"{self.cells} cells exceed the dense budget {DENSE_CELL_LIMIT}"
                )
            return np.full(self.cells, float(self.prior))
        return self.prior


def fit_batch(points, config: ModelConfig) -> DyadicHistogram:
    """Bin points into the dyadic histogram prescribed by config.

    Empty input with auto depth yields the K=0 single-bin histogram.
    """
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        points = points.reshape(0, config.d)
    points = np.atleast_2d(points)
    if points.shape[1] != config.d:
        raise ValueError(f"points have dimension {points.shape[1]}, expected {config.d}")
    n = points.shape[0]
    K = config.resolve_depth(n)
    cells = 2 ** (K * config.d)
    flat = flat_bin_indices(points, K) if n else np.empty(0, dtype=np.int64)
    if cells <= DENSE_CELL_LIMIT:
        counts = np.bincount(flat, minlength=cells)
        prior = config.resolve_prior(n, cells)
        hist = DyadicHistogram(config.d, K, n, counts, prior)
    else:
        if isinstance(config.prior, (np.ndarray, list, tuple)):
            raise CapacityError("per-bin prior arrays unsupported above the dense budget")
        sparse: dict[int, int] = {}
        for f in flat:
            sparse[int(f)] = sparse.get(int(f), 0) + 1
        if config.prior == "zero":
            c = 0.0
        elif config.prior == "auto":
            c = default_prior_concentration(max(n, 1), config.d, config.v)
        else:
            c = float(config.prior)
        hist = DyadicHistogram(config.d, K, n, sparse, c)
    _warn_if_prior_over_budget(hist, config.v)
    return hist


def _warn_if_prior_over_budget(hist: DyadicHistogram, v: float) -> None:
    if hist.n == 0:
        return
    if hist.d <= 2 * v:
        budget = hist.n**0.5
    else:
        budget = hist.n ** (1.0 - v / hist.d)
    if hist.total_prior > budget:
        warnings.warn(
            f"total prior concentration {hist.total_prior:.3g} exceeds the "
            f"rate-optimality budget {budget:.3g} for n={hist.n}",
            stacklevel=3,
        )


def posterior_mean_weights(hist: DyadicHistogram) -> np.ndarray:
    """Posterior mean cell weights (prior_j + counts_j) / (n + total prior)."""
    denom = hist.n + hist.total_prior
    if denom <= 0:
        raise DegenerateHistogramError("n = 0 and all prior concentrations are 0")
    return (hist.dense_prior() + hist.dense_counts()) / denom


def density_at(hist: DyadicHistogram, point) -> float:
    """Density of the posterior-mean histogram at a point: b^d * weight of its cell."""
    _, flat = bin_index(point, hist.K)
    w = posterior_mean_weights(hist)
    return float(hist.b**hist.d * w[flat])


def _cell_centers(d: int, K: int, flats: np.ndarray) -> np.ndarray:
    b = 2**K
    coords = np.empty((flats.size, d))
    rem = flats.copy()
    for axis in range(d - 1, -1, -1):
        coords[:, axis] = (rem % b + 0.5) / b
        rem //= b
    return coords


def discretize(hist: DyadicHistogram) -> DiscreteMeasure:
    """Concentrate each cell's posterior-mean mass at the cell center."""
    if hist.is_sparse and (np.isscalar(hist.prior) and hist.prior > 0):
        raise CapacityError(
            "positive uniform prior over a sparse histogram would emit one atom per cell"
        )
    if hist.is_sparse:
        denom = hist.n + hist.total_prior
        if denom <= 0:
            raise DegenerateHistogramError("n = 0 and all prior concentrations are 0")
        flats = np.array(sorted(hist.counts), dtype=np.int64)
        weights = np.array([hist.counts[int(f)] for f in flats], dtype=float) / denom
    else:
        w = posterior_mean_weights(hist)
        flats = np.where(w > 0)[0]
        weights = w[flats]
    atoms = _cell_centers(hist.d, hist.K, flats)
    return DiscreteMeasure(atoms, weights)


def coarsen(hist: DyadicHistogram, target_K: int) -> DyadicHistogram:
    """Aggregate to a shallower depth; counts and prior totals are preserved."""
    if not 0 <= target_K <= hist.K:
        raise ValueError(f"target depth {target_K} not in [0, {hist.K}]")
    if target_K == hist.K:
        return hist
    shift = hist.K - target_K
    if hist.is_sparse:
        b, tb = hist.b, 2**target_K
        agg: dict[int, int] = {}
        for f, c in hist.counts.items():
            coarse = 0
            rem = f
            digits = []
            for _ in range(hist.d):
                digits.append(rem % b)
                rem //= b
            for dig in reversed(digits):
                coarse = coarse * tb + (dig >> shift)
            agg[coarse] = agg.get(coarse, 0) + c
        cells = tb**hist.d
        prior_c = float(hist.prior) * (2 ** (shift * hist.d))
        if cells <= DENSE_CELL_LIMIT:
            counts = np.zeros(cells, dtype=np.int64)
            for k, c in agg.items():
                counts[k] = c
            return DyadicHistogram(hist.d, target_K, hist.n, counts, np.full(cells, prior_c))
        return DyadicHistogram(hist.d, target_K, hist.n, agg, prior_c)
    return DyadicHistogram(
        hist.d,
        target_K,
        hist.n,
        aggregate_dyadic(hist.counts, hist.d, hist.K, target_K),
        aggregate_dyadic(hist.prior, hist.d, hist.K, target_K),
    )


def aggregate_dyadic(arr: np.ndarray, d: int, K: int, target_K: int) -> np.ndarray:
    """Sum a row-major depth-K cell array down to depth target_K."""
    if target_K == K:
        return arr.copy()
    f = 2 ** (K - target_K)
    tb = 2**target_K
    shaped = arr.reshape(tuple(x for _ in range(d) for x in (tb, f)))
    return shaped.sum(axis=tuple(range(1, 2 * d, 2))).reshape(tb**d)


def sample_posterior(hist: DyadicHistogram, rng: np.random.Generator) -> np.ndarray:
    """One weight vector drawn from Dirichlet(prior + counts).

    Normalizes independent Gamma(alpha_j, 1) draws; for enormous
    concentrations the gammas are replaced by their Gaussian limit.
    """
    alpha = hist.dense_prior() + hist.dense_counts()
    if np.any(alpha <= 0):
        raise ImproperPosteriorError(
            "some posterior concentration is zero; supply a positive prior"
        )
    if alpha.max() >= HUGE_ALPHA:
        g = alpha + np.sqrt(alpha) * rng.standard_normal(alpha.size)
        g = np.maximum(g, np.finfo(float).tiny)
    else:
        g = rng.gamma(alpha)
        # a shape far below 1 can underflow to an exact 0 draw
        g = np.maximum(g, np.finfo(float).tiny)
    return g / g.sum()


# ---------------------------------------------------------------------------
# Truncated 2-D Haar expansion (literal evaluation; equals the zero-prior
# dyadic histogram density grid at the same depth).
# ---------------------------------------------------------------------------


def _psi_mother(t: np.ndarray) -> np.ndarray:
    return np.where((t >= 0) & (t < 0.5), 1.0, np.where((t >= 0.5) & (t < 1), -1.0, 0.0))


def _psi_father(t: np.ndarray) -> np.ndarray:
    return np.where((t >= 0) & (t < 1), 1.0, 0.0)


_PSI = {"F": _psi_father, "M": _psi_mother}


def haar_estimate_2d(points, J: int) -> np.ndarray:
    """Density grid of the depth-J truncated Haar expansion on [0,1)^2.

    Evaluates 1 + sum over resolutions u < J of the empirical-coefficient
    wavelet terms at each depth-J cell center, returning a (2^J, 2^J) array
    indexed by (axis-1 bin, axis-2 bin).
    """
    if J < 0:
        raise ValueError("J must be >= 0")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] < 1 or points.shape[1] != 2:
        raise ValueError("need an (n, 2) point array with n >= 1")
    n = points.shape[0]
    g = 2**J
    centers = (np.arange(g) + 0.5) / g
    cx = centers[:, None] * np.ones((1, g))
    cy = np.ones((g, 1)) * centers[None, :]
    grid = np.ones((g, g))
    for u in range(J):
        scale = 2.0**u  # 2^{du/2} with d = 2
        for m1 in range(2**u):
            for m2 in range(2**u):
                for g1, g2 in (("M", "M"), ("M", "F"), ("F", "M")):
                    wav_pts = scale * _PSI[g1](2**u * points[:, 0] - m1) * _PSI[g2](
                        2**u * points[:, 1] - m2
                    )
                    beta = wav_pts.sum() / n
                    if beta == 0.0:
                        continue
                    grid += beta * scale * _PSI[g1](2**u * cx - m1) * _PSI[g2](
                        2**u * cy - m2
                    )
    return grid
