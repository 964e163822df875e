"""Installable self-test suites: concentration bounds, the Haar-expansion
cross-check, and the OT-solver-vs-quantile-formula oracle.

Each suite returns (passed, message); messages report the margin achieved so
a near-failure is visible in the report.
"""

from __future__ import annotations

import math

import numpy as np

from . import wasserstein as _w
from .core import DiscreteMeasure, ModelConfig, fit_batch, haar_estimate_2d, posterior_mean_weights
from .simulate import dirichlet_concentration_mc, multinomial_concentration_mc

_SEED = 20260826


def check_multinomial(reps: int = 2000) -> tuple:
    """E sum|X_j - n p_j| / n stays below sqrt((k-1)/n) plus 3 MC standard errors."""
    rng = np.random.default_rng(_SEED)
    min_margin = math.inf
    for n, k in ((100, 4), (1000, 16), (10000, 64)):
        probs = np.full(k, 1.0 / k)
        mean = multinomial_concentration_mc(n, probs, reps, rng)
        bound = math.sqrt((k - 1) / n)
        # MC standard error of the mean, from a second small batch of draws.
        draws = rng.multinomial(n, probs, size=500)
        se = np.abs(draws - n * probs).sum(axis=1).std(ddof=1) / n / math.sqrt(reps)
        min_margin = min(min_margin, bound + 3 * se - mean)
        if mean > bound + 3 * se:
            return False, f"multinomial (n={n}, k={k}): mean {mean:.4f} > bound {bound:.4f}+3se"
    return True, f"multinomial: smallest slack below the bound is {min_margin:.4f}"


def check_dirichlet(reps: int = 100_000) -> tuple:
    """Tail mass beyond sqrt(k/abar)/delta stays below delta plus 3 MC standard errors."""
    rng = np.random.default_rng(_SEED + 1)
    for k in (2, 8, 32):
        for delta in (0.1, 0.5):
            frac = dirichlet_concentration_mc(np.ones(k), delta, reps, rng)
            se = math.sqrt(delta * (1 - delta) / reps)
            if frac > delta + 3 * se:
                return False, f"dirichlet (k={k}, delta={delta}): exceedance {frac:.4f} > {delta}"
    return True, "dirichlet: all exceedance fractions within their delta bounds"


def check_haar(tol: float = 1e-10) -> tuple:
    """Truncated Haar expansion equals the zero-prior histogram density grid."""
    rng = np.random.default_rng(_SEED + 2)
    worst = 0.0
    for J in (1, 2, 3):
        for _ in range(5):
            n = int(rng.integers(1, 201))
            pts = rng.random((n, 2))
            grid = haar_estimate_2d(pts, J)
            hist = fit_batch(pts, ModelConfig(d=2, v=1.0, depth=J, prior="zero"))
            w = posterior_mean_weights(hist).reshape(2**J, 2**J)
            dens = (2**J) ** 2 * w
            worst = max(worst, float(np.abs(grid - dens).max()))
    if worst > tol:
        return False, f"haar: max grid deviation {worst:.3e} > {tol:.0e}"
    return True, f"haar: max grid deviation {worst:.3e}"


def check_ot_oracle(trials: int = 60, tol: float = 1e-9) -> tuple:
    """Simplex OT agrees with the 1-D quantile formula on random discrete pairs."""
    rng = np.random.default_rng(_SEED + 3)
    worst = 0.0
    for t in range(trials):
        v = 1.0 if t % 2 == 0 else 2.0
        na, nb = rng.integers(1, 65, size=2)
        mu = _random_discrete(rng, int(na))
        nu = _random_discrete(rng, int(nb))
        ot = _w.ot_discrete(mu, nu, v, 2.0)
        exact = _w.wasserstein_1d(_w.quantile_of_discrete(mu), _w.quantile_of_discrete(nu), v)
        worst = max(worst, abs(ot - exact))
    if worst > tol:
        return False, f"ot_oracle: max |simplex - quantile formula| = {worst:.3e} > {tol:.0e}"
    return True, f"ot_oracle: max |simplex - quantile formula| = {worst:.3e}"


def _random_discrete(rng: np.random.Generator, n_atoms: int) -> DiscreteMeasure:
    atoms = rng.random((n_atoms, 1))
    weights = rng.dirichlet(np.ones(n_atoms)) if n_atoms > 1 else np.ones(1)
    return DiscreteMeasure(atoms, weights)


SUITES = {
    "multinomial": check_multinomial,
    "dirichlet": check_dirichlet,
    "haar": check_haar,
    "ot_oracle": check_ot_oracle,
}


def run_suites(names=None) -> list:
    """Run the named suites (all by default); returns (name, passed, message) rows."""
    if names is None:
        names = list(SUITES)
    report = []
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}")
        passed, message = SUITES[name]()
        report.append((name, passed, message))
    return report
