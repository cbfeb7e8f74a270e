"""Statistical outlier gating over a distance matrix.

Each frame gets a k-nearest-neighbor mean distance statistic; a four
parameter generalized gamma distribution is fitted to those statistics by
maximum likelihood, and frames whose statistic exceeds the fitted upper
quantile (0.9 by default) are removed from the matrix in a single pass.

Density, for x > mu (zero otherwise):

    f(x) = gamma / (beta * Gamma(alpha)) * ((x-mu)/beta)^(alpha*gamma - 1)
           * exp(-((x-mu)/beta)^gamma)

With u = ((x-mu)/beta)^gamma the variable u is Gamma(alpha, 1), so the CDF
is the regularized lower incomplete gamma P(alpha, u) and quantiles invert
it in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import gammainc, gammaincinv, gammaln

from .errors import ContractError, FitError, PruneError
from .frameset import DistanceMatrix

MU_GRID_POINTS = 32


@dataclass(frozen=True)
class KnnStatistic:
    frame_id: str
    value: float
    k: int

    def __post_init__(self):
        if not np.isfinite(self.value) or self.value < 0:
            raise ContractError(f"knn statistic for {self.frame_id!r} must be finite and >= 0")
        if self.k < 1:
            raise ContractError("k must be >= 1")


@dataclass(frozen=True)
class GenGammaFit:
    """Fitted generalized gamma parameters and the derived 0.9 quantile."""

    alpha: float
    beta: float
    gamma: float
    mu: float
    log_likelihood: float
    threshold_T: float
    converged: bool = True

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0 or self.gamma <= 0:
            raise ContractError("alpha, beta, gamma must all be > 0")
        if not np.isfinite(self.log_likelihood):
            raise ContractError("log-likelihood must be finite")
        if self.threshold_T <= self.mu:
            raise ContractError("threshold must exceed the location parameter")


@dataclass(frozen=True)
class GenGammaFitConfig:
    restarts: int = 4
    seed: int = 0
    max_iters: int = 400
    tol: float = 1e-8


@dataclass(frozen=True, eq=False)
class PruneReport:
    removed_ids: tuple[str, ...]
    kept_ids: tuple[str, ...]
    stats: tuple[KnnStatistic, ...]
    fit: GenGammaFit

    def to_json_dict(self) -> dict:
        return {
            "removed": list(self.removed_ids),
            "kept": list(self.kept_ids),
            "stats": {s.frame_id: s.value for s in self.stats},
            "fit": {
                "alpha": self.fit.alpha,
                "beta": self.fit.beta,
                "gamma": self.fit.gamma,
                "mu": self.fit.mu,
                "loglik": self.fit.log_likelihood,
                "T": self.fit.threshold_T,
            },
        }


def knn_mean_distance(m: DistanceMatrix, k: int) -> list[KnnStatistic]:
    """Mean distance from each frame to its k nearest neighbors.

    Neighbor ties are broken by ascending frame index (stable sort).
    """
    n = len(m)
    if k < 1:
        raise ContractError("k must be >= 1")
    if n <= k:
        raise ContractError(f"need at least k+1={k + 1} frames, have {n}; reduce k")
    out = []
    for i in range(n):
        row = np.delete(m.values[i].astype(np.float64), i)
        nearest = np.sort(row, kind="stable")[:k]
        # stable sort on values == ties resolved by ascending original index
        out.append(KnnStatistic(m.frame_ids[i], float(np.mean(nearest)), k))
    return out


def gengamma_pdf(x, alpha: float, beta: float, gamma: float, mu: float = 0.0):
    """Normalized generalized gamma density; zero at and below mu."""
    if alpha <= 0 or beta <= 0 or gamma <= 0:
        raise ContractError("alpha, beta, gamma must all be > 0")
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.zeros_like(x)
    pos = x > mu
    if pos.any():
        z = (x[pos] - mu) / beta
        logf = (
            np.log(gamma)
            - np.log(beta)
            - gammaln(alpha)
            + (alpha * gamma - 1.0) * np.log(z)
            - z**gamma
        )
        out[pos] = np.exp(logf)
    return float(out[0]) if scalar else out


def gengamma_cdf(x, alpha: float, beta: float, gamma: float, mu: float = 0.0):
    """Regularized lower incomplete gamma of the substituted variable."""
    if alpha <= 0 or beta <= 0 or gamma <= 0:
        raise ContractError("alpha, beta, gamma must all be > 0")
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.zeros_like(x)
    pos = x > mu
    out[pos] = gammainc(alpha, ((x[pos] - mu) / beta) ** gamma)
    return float(out[0]) if scalar else out


def gengamma_quantile(fit: GenGammaFit, q: float) -> float:
    """x with CDF(x) = q, via the inverse regularized incomplete gamma."""
    if not (0.0 < q < 1.0):
        raise ContractError(f"quantile level q={q} outside (0, 1)")
    u = gammaincinv(fit.alpha, q)
    return float(fit.mu + fit.beta * u ** (1.0 / fit.gamma))


def _neg_loglik(theta: np.ndarray, z: np.ndarray, logz: np.ndarray) -> float:
    """Negative log-likelihood in log-parameter space, for samples z > 0."""
    la, lb, lg = theta
    if np.abs(theta).max() > 30.0:  # reject absurd corners before exp overflows
        return np.inf
    alpha, beta, gamma = np.exp(la), np.exp(lb), np.exp(lg)
    n = z.size
    with np.errstate(over="ignore"):
        pw = np.exp(gamma * (logz - lb))
    total = (
        n * (lg - lb - gammaln(alpha))
        + (alpha * gamma - 1.0) * float(np.sum(logz - lb))
        - float(np.sum(pw))
    )
    return -total if np.isfinite(total) else np.inf


def _gamma_moment_init(z: np.ndarray, logz: np.ndarray) -> np.ndarray:
    """Moment-based gamma(alpha, beta) start with gamma=1 (log space)."""
    s = float(np.log(np.mean(z)) - np.mean(logz))
    s = max(s, 1e-6)
    alpha0 = (3.0 - s + np.sqrt((s - 3.0) ** 2 + 24.0 * s)) / (12.0 * s)
    alpha0 = min(max(alpha0, 1e-3), 1e3)
    beta0 = float(np.mean(z)) / alpha0
    return np.array([np.log(alpha0), np.log(beta0), 0.0])


def fit_gengamma_mle(
    samples: Sequence[float],
    config: GenGammaFitConfig = GenGammaFitConfig(),
    quantile_level: float = 0.9,
) -> GenGammaFit:
    """Maximum-likelihood generalized gamma fit.

    The location mu is profiled over a fixed grid below min(samples) (joint
    optimization with a free location is ill-conditioned); at each grid
    point (alpha, beta, gamma) are optimized in log space by Nelder-Mead
    from a moment-based start plus seeded random restarts.  The best
    log-likelihood wins, ties going to the earliest (grid, restart) pair.

    Candidates on the distribution's degenerate ridges (alpha huge, beta
    tiny) can imply a non-finite or collapsed quantile; those are rejected
    so the returned fit always yields a usable threshold above mu.
    """
    x = np.asarray(list(samples), dtype=np.float64)
    if x.size < 8:
        raise FitError(f"need at least 8 samples, have {x.size}")
    if not np.isfinite(x).all():
        raise FitError("samples must be finite")
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        raise FitError("no spread: all samples are equal")

    if not (0.0 < quantile_level < 1.0):
        raise ContractError(f"quantile level {quantile_level} outside (0, 1)")

    rng = np.random.default_rng(config.seed)
    jitter = rng.normal(0.0, [0.5, 0.5, 0.3], size=(max(config.restarts - 1, 0), 3))

    span = hi - lo
    eps = 1e-6 * span
    # quadratic spacing: dense immediately below min(samples), coarse far away
    t = np.linspace(0.0, 1.0, MU_GRID_POINTS)
    mu_grid = (lo - eps) - span * t**2

    best = None  # (loglik, mu, alpha, beta, gamma, threshold, converged)
    for mu in mu_grid:
        z = x - mu
        logz = np.log(z)
        theta0 = _gamma_moment_init(z, logz)
        starts = [theta0] + [theta0 + d for d in jitter]
        for start in starts:
            res = minimize(
                _neg_loglik,
                start,
                args=(z, logz),
                method="Nelder-Mead",
                options={
                    "maxiter": config.max_iters,
                    "xatol": config.tol,
                    "fatol": config.tol,
                },
            )
            ll = -float(res.fun)
            if not np.isfinite(ll):
                continue
            alpha, beta, gamma = np.exp(res.x)
            with np.errstate(over="ignore"):
                threshold = float(
                    mu + beta * gammaincinv(alpha, quantile_level) ** (1.0 / gamma)
                )
            if not np.isfinite(threshold) or threshold <= mu:
                continue  # ridge solution; unusable as a gate
            if best is None or ll > best[0] + 1e-12:
                best = (ll, float(mu), float(alpha), float(beta), float(gamma),
                        threshold, bool(res.success))
    if best is None:
        raise FitError("optimizer found no admissible fit (degenerate sample?)")

    ll, mu, alpha, beta, gamma, threshold, converged = best
    return GenGammaFit(
        alpha=alpha,
        beta=beta,
        gamma=gamma,
        mu=mu,
        log_likelihood=ll,
        threshold_T=threshold,
        converged=converged,
    )


def prune_outliers(
    m: DistanceMatrix,
    k: int = 5,
    q: float = 0.9,
    config: GenGammaFitConfig = GenGammaFitConfig(),
) -> tuple[DistanceMatrix, PruneReport]:
    """Single fit-threshold-remove pass over the matrix.

    Frames whose k-NN mean statistic exceeds the fitted q-quantile are
    dropped; surviving rows/columns keep their original relative order.
    """
    stats = knn_mean_distance(m, k)
    values = [s.value for s in stats]
    fit = fit_gengamma_mle(values, config, quantile_level=q)
    threshold = fit.threshold_T
    removed = tuple(s.frame_id for s in stats if s.value > threshold)
    kept = tuple(s.frame_id for s in stats if s.value <= threshold)
    if len(kept) < 2:
        raise PruneError(
            f"pruning would leave {len(kept)} frame(s); need at least 2", m
        )
    report = PruneReport(removed_ids=removed, kept_ids=kept, stats=tuple(stats), fit=fit)
    return m.submatrix(kept), report
