"""Ground-truth distributions on [0,1): uniform, symmetric Beta, the
two-triangle Split(a, e) family, and products of 1-D components.

Each law exposes an exact cdf, quantile, and inverse-cdf sampler so that
estimation error can be measured without resampling noise.  The incomplete
beta function is evaluated by a Lentz-style continued fraction (vectorized),
and Beta quantiles by a bracketed Newton iteration on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import DiscreteMeasure

_TINY = 1e-300
_CF_TOL = 1e-15
_CF_MAX_ITER = 300


def _betacf(a: float, b: float, x: np.ndarray) -> np.ndarray:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _TINY, _TINY, d)
    d = 1.0 / d
    h = d.copy()
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        h = h * d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = d * c
        h = h * delta
        if np.all(np.abs(delta - 1.0) < _CF_TOL):
            break
    return h


def betainc(a: float, b: float, x) -> np.ndarray:
    """Regularized incomplete beta function I_x(a, b), vectorized in x."""
    if a <= 0 or b <= 0:
        raise ValueError("beta parameters must be positive")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > 1):
        raise ValueError("x must lie in [0, 1]")
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    ln_beta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    # The continued fraction converges fast only below the switch point; use
    # the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) above it.
    switch = (a + 1.0) / (a + b + 2.0)
    lo = (x > 0) & (x < 1) & (x <= switch)
    hi = (x > 0) & (x < 1) & (x > switch)
    out[x <= 0] = 0.0
    out[x >= 1] = 1.0
    if lo.any():
        xs = x[lo]
        front = np.exp(a * np.log(xs) + b * np.log1p(-xs) - ln_beta) / a
        out[lo] = front * _betacf(a, b, xs)
    if hi.any():
        xs = 1.0 - x[hi]
        front = np.exp(b * np.log(xs) + a * np.log1p(-xs) - ln_beta) / b
        out[hi] = 1.0 - front * _betacf(b, a, xs)
    out = np.clip(out, 0.0, 1.0)
    return out[0] if scalar else out


def beta_quantile(a: float, b: float, z, tol: float = 1e-12) -> np.ndarray:
    """Inverse of I_x(a, b): bracketed Newton, falls back to bisection."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0) or np.any(z > 1):
        raise ValueError("z must lie in [0, 1]")
    scalar = z.ndim == 0
    z = np.atleast_1d(z).astype(float)
    lo = np.zeros_like(z)
    hi = np.ones_like(z)
    x = np.clip(z, 1e-6, 1 - 1e-6)
    ln_beta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    for _ in range(100):
        f = betainc(a, b, x) - z
        hi = np.where(f >= 0, np.minimum(hi, x), hi)
        lo = np.where(f < 0, np.maximum(lo, x), lo)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            pdf = np.exp((a - 1) * np.log(x) + (b - 1) * np.log1p(-x) - ln_beta)
            step = f / pdf
        x_new = x - step
        bad = ~np.isfinite(x_new) | (x_new <= lo) | (x_new >= hi)
        x_new = np.where(bad, 0.5 * (lo + hi), x_new)
        done = np.abs(x_new - x) < tol
        x = x_new
        if done.all() or np.all(hi - lo < tol):
            break
    x = np.where(z == 0, 0.0, np.where(z == 1, 1.0, x))
    return x[0] if scalar else x


@dataclass(frozen=True)
class Uniform:
    """Uniform law on [0,1)^d."""

    d: int = 1

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")

    @property
    def dim(self) -> int:
        return self.d

    def cdf(self, x):
        _require_1d(self)
        return _check_unit(np.asarray(x, dtype=float))

    def quantile(self, z):
        _require_1d(self)
        return _check_unit(np.asarray(z, dtype=float))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.random((n, self.d))


@dataclass(frozen=True)
class BetaSym:
    """Beta(x, x) law on [0,1)."""

    x: float

    def __post_init__(self):
        if self.x <= 0:
            raise ValueError("beta shape must be positive")

    @property
    def dim(self) -> int:
        return 1

    def cdf(self, x):
        return betainc(self.x, self.x, _check_unit(np.asarray(x, dtype=float)))

    def quantile(self, z):
        return beta_quantile(self.x, self.x, _check_unit(np.asarray(z, dtype=float)))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        u = rng.random(n)
        return np.minimum(self.quantile(u), np.nextafter(1.0, 0.0)).reshape(n, 1)


@dataclass(frozen=True)
class Split:
    """Density a x + b on [0, e), mirrored structure on [1-e, 1); zero between.

    b = (1 - a e^2) / (2 e); each half carries mass exactly 1/2.
    """

    a: float
    e: float
    b: float = field(init=False)

    def __post_init__(self):
        if not 0 < self.e < 0.5:
            raise ValueError("need 0 < e < 0.5")
        if not 0 < self.a < 1.0 / self.e**2:
            raise ValueError("need 0 < a < 1/e^2")
        object.__setattr__(self, "b", (1.0 - self.a * self.e**2) / (2.0 * self.e))

    @property
    def dim(self) -> int:
        return 1

    def density(self, x):
        return split_density(self.a, self.e, x)

    def cdf(self, x):
        x = _check_unit(np.asarray(x, dtype=float))
        a, b, e = self.a, self.b, self.e
        u = np.clip(x, 0.0, e)
        w = np.clip(x - (1.0 - e), 0.0, e)
        return a * u * u / 2.0 + b * u + a * w * w / 2.0 + b * w

    def quantile(self, z):
        z = _check_unit(np.asarray(z, dtype=float))
        a, b, e = self.a, self.b, self.e
        zz = np.where(z <= 0.5, z, z - 0.5)
        if abs(a) < 1e-12:
            t = zz / b
        else:
            t = (-b + np.sqrt(b * b + 2.0 * a * zz)) / a
        t = np.clip(t, 0.0, e)
        return np.where(z <= 0.5, t, 1.0 - e + t)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        u = rng.random(n)
        return np.minimum(self.quantile(u), np.nextafter(1.0, 0.0)).reshape(n, 1)


@dataclass(frozen=True)
class Product:
    """Independent product of 1-D ground truths, one per axis."""

    components: tuple

    def __post_init__(self):
        if len(self.components) < 1:
            raise ValueError("product needs at least one component")
        if any(c.dim != 1 for c in self.components):
            raise ValueError("product components must be one-dimensional")

    @property
    def dim(self) -> int:
        return len(self.components)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.column_stack([c.sample(rng, n).reshape(n) for c in self.components])


def _require_1d(gt) -> None:
    if gt.dim != 1:
        raise ValueError("cdf/quantile are defined for 1-D ground truths only")


def _check_unit(x: np.ndarray) -> np.ndarray:
    if np.any(x < 0) or np.any(x > 1):
        raise ValueError("argument must lie in [0, 1]")
    return x


def split_density(a: float, e: float, x) -> np.ndarray:
    """Density of Split(a, e): (a x + b) on [0,e), shifted copy on [1-e,1)."""
    if not 0 < e < 0.5:
        raise ValueError("need 0 < e < 0.5")
    if not 0 < a < 1.0 / e**2:
        raise ValueError("need 0 < a < 1/e^2")
    b = (1.0 - a * e**2) / (2.0 * e)
    x = np.asarray(x, dtype=float)
    left = (x >= 0) & (x < e)
    right = (x >= 1 - e) & (x < 1)
    return np.where(left, a * x + b, 0.0) + np.where(right, a * x + b - (1 - e) * a, 0.0)


def cdf(gt, x):
    """CDF of a 1-D ground truth at x (vectorized)."""
    _require_1d(gt)
    return gt.cdf(x)


def quantile(gt, z):
    """Quantile (inverse CDF) of a 1-D ground truth at z (vectorized)."""
    _require_1d(gt)
    return gt.quantile(z)


def sample(gt, rng: np.random.Generator, n: int) -> np.ndarray:
    """n i.i.d. draws, shape (n, dim); 1-D laws sample by inverse CDF."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return gt.sample(rng, n)


def discretize_ground_truth(gt, m: int, rng: np.random.Generator) -> DiscreteMeasure:
    """Empirical measure of m i.i.d. draws with equal weights 1/m."""
    if m < 1:
        raise ValueError("m must be >= 1")
    atoms = sample(gt, rng, m)
    return DiscreteMeasure(atoms, np.full(m, 1.0 / m))


def parse_ground_truth(text: str):
    """Parse 'uniform:d', 'beta:x', 'split:a,e' or 'product:spec|spec|...'."""
    text = text.strip()
    name, _, arg = text.partition(":")
    name = name.lower()
    try:
        if name == "uniform":
            return Uniform(int(arg) if arg else 1)
        if name == "beta":
            return BetaSym(float(arg))
        if name == "split":
            a_str, e_str = arg.split(",")
            return Split(float(a_str), float(e_str))
        if name == "product":
            return Product(tuple(parse_ground_truth(part) for part in arg.split("|")))
    except (TypeError, ValueError) as exc:
        raise ValueError(f"bad ground-truth spec {text!r}: {exc}") from exc
    raise ValueError(f"unknown ground-truth kind {name!r}")
