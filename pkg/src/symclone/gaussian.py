"""Gaussian phase-space states and thermal corruption of cloning.

Covariance is the primary representation so that delta-function subsystems
(zero variance) are first class.  Densities in the cloning literature are
often written ``exp[-(x - mu)^T A (x - mu)]`` without the conventional 1/2;
that ``A`` is available as :attr:`GaussianState.exponent_matrix` and equals
half the precision.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .symplectic import TIME_REVERSAL, _as_matrix

__all__ = [
    "GaussianState",
    "ThermalConfig",
    "SampleStats",
    "SUBSYSTEMS",
    "initial_state",
    "pushforward",
    "marginal",
    "subsystem",
    "kl_divergence",
    "sample",
    "summary_stats",
    "analytic_stats",
    "standard_errors",
    "source_exponent_closed_form",
    "target_exponent_closed_form",
    "corruption_report",
    "histogram_grid",
]

SUBSYSTEMS = {"source": (0, 1), "target": (2, 3), "machine": (4, 5)}


@dataclass
class GaussianState:
    mean: np.ndarray
    cov: np.ndarray
    precision: Optional[np.ndarray] = None

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float)
        self.cov = np.asarray(self.cov, dtype=float)
        n = self.mean.shape[0]
        if self.cov.shape != (n, n):
            raise ValueError(f"covariance shape {self.cov.shape} does not match mean ({n},)")
        scale = max(1.0, float(np.max(np.abs(self.cov))))
        if np.max(np.abs(self.cov - self.cov.T)) > 1e-10 * scale:
            raise ValueError("covariance is not symmetric")
        self.cov = (self.cov + self.cov.T) / 2
        if n and np.linalg.eigvalsh(self.cov)[0] < -1e-12 * scale:
            raise ValueError("covariance is not positive semidefinite")
        if self.precision is not None:
            self.precision = np.asarray(self.precision, dtype=float)
            self.precision = (self.precision + self.precision.T) / 2

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def exponent_matrix(self) -> Optional[np.ndarray]:
        """``A`` in ``exp[-(x - mu)^T A (x - mu)]``, i.e. half the precision."""
        P = self.precision
        if P is None:
            try:
                P = np.linalg.inv(self.cov) if _invertible(self.cov) else None
            except np.linalg.LinAlgError:
                P = None
        return None if P is None else P / 2


def _invertible(C, rtol=1e-13):
    w = np.linalg.eigvalsh(C)
    return w[0] > rtol * max(1.0, w[-1])


@dataclass(frozen=True)
class ThermalConfig:
    """Widths of the initial source/target/machine Gaussians.

    ``alpha`` is the coefficient in ``exp(-alpha (q^2 + p^2))``, so the
    per-coordinate variance is ``1 / (2 alpha)``; ``math.inf`` means a
    delta function.
    """

    alpha_s: float = 1.0
    alpha_t: float = 1.0
    alpha_m: float = 1.0
    mu_q: float = 0.0
    mu_p: float = 0.0

    def __post_init__(self):
        for name in ("alpha_s", "alpha_t", "alpha_m"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive or inf")

    @classmethod
    def from_beta(cls, beta: float, alpha_s: float = 1.0, mu_q: float = 0.0, mu_p: float = 0.0,
                  thermal_target: bool = True):
        """Machine (and by default target) in the Gibbs state of a unit oscillator.

        ``alpha = beta / 2`` gives variance ``1 / beta`` per coordinate.  With
        ``thermal_target=False`` the target is a delta function.
        """
        if not beta > 0:
            raise ValueError("beta must be positive or inf")
        alpha = beta / 2
        return cls(alpha_s, alpha if thermal_target else math.inf, alpha, mu_q, mu_p)

    @property
    def beta(self) -> float:
        """Inverse temperature of the machine, ``2 alpha_m``."""
        return 2 * self.alpha_m


def initial_state(cfg: ThermalConfig) -> GaussianState:
    alphas = np.repeat([cfg.alpha_s, cfg.alpha_t, cfg.alpha_m], 2).astype(float)
    var = np.where(np.isinf(alphas), 0.0, 1.0 / (2.0 * alphas))
    mean = np.array([cfg.mu_q, cfg.mu_p, 0, 0, 0, 0], dtype=float)
    precision = None if np.any(np.isinf(alphas)) else np.diag(2.0 * alphas)
    return GaussianState(mean, np.diag(var), precision)


def pushforward(state: GaussianState, M) -> GaussianState:
    """Image of ``state`` under ``x -> M x``."""
    M = np.asarray(_as_matrix(M), dtype=float)
    if M.shape != (state.dim, state.dim):
        raise ValueError(f"map shape {M.shape} does not match state dim {state.dim}")
    precision = None
    if state.precision is not None:
        Minv = np.linalg.inv(M)
        precision = Minv.T @ state.precision @ Minv
    return GaussianState(M @ state.mean, M @ state.cov @ M.T, precision)


def marginal(state: GaussianState, keep: Sequence[int]) -> GaussianState:
    """Marginal over the coordinates in ``keep``.

    Covariance is the sub-block.  If the joint precision is known, the
    marginal precision is the Schur complement ``a - c^T b^-1 c`` of the
    discarded block; otherwise it is the inverse of the sub-block when that
    is invertible.
    """
    keep = list(keep)
    if not keep:
        raise ValueError("keep must be non-empty")
    drop = [i for i in range(state.dim) if i not in keep]
    cov = state.cov[np.ix_(keep, keep)]
    precision = None
    if state.precision is not None:
        P = state.precision
        a = P[np.ix_(keep, keep)]
        if drop:
            b = P[np.ix_(drop, drop)]
            c = P[np.ix_(drop, keep)]
            a = a - c.T @ np.linalg.solve(b, c)
        precision = a
    elif _invertible(cov):
        precision = np.linalg.inv(cov)
    return GaussianState(state.mean[keep], cov, precision)


def subsystem(state: GaussianState, name: str) -> GaussianState:
    return marginal(state, SUBSYSTEMS[name])


def kl_divergence(p: GaussianState, q: GaussianState) -> float:
    """``KL(p || q)`` for Gaussians with invertible covariances."""
    if p.dim != q.dim:
        raise ValueError("dimension mismatch")
    try:
        Lp = np.linalg.cholesky(p.cov)
        Lq = np.linalg.cholesky(q.cov)
    except np.linalg.LinAlgError:
        raise ValueError("kl_divergence needs positive-definite covariances") from None
    k = p.dim
    A = np.linalg.solve(Lq, Lp)
    d = np.linalg.solve(Lq, q.mean - p.mean)
    logdet = 2 * (np.sum(np.log(np.diag(Lq))) - np.sum(np.log(np.diag(Lp))))
    kl = 0.5 * (np.sum(A * A) + d @ d - k + logdet)
    return max(kl, 0.0)


def _factor(cov):
    w, V = np.linalg.eigh(cov)
    scale = max(1.0, w[-1]) if len(w) else 1.0
    if w.size and w[0] < -1e-12 * scale:
        raise ValueError(f"covariance has negative eigenvalue {w[0]:.3g}")
    return V * np.sqrt(np.clip(w, 0.0, None))


def sample(state: GaussianState, n: int, seed: int, chunk_size: int | None = None,
           workers: int = 1) -> np.ndarray:
    """Draw ``n`` samples, shape ``(n, dim)``.

    The covariance is factored by symmetric eigendecomposition, so singular
    (delta) directions are fine.  With ``chunk_size`` the draws are split into
    chunks seeded by ``(seed, chunk_index)``; the output then depends only on
    ``(seed, chunk_size)``, not on ``workers``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    L = _factor(state.cov)
    if chunk_size is None:
        z = np.random.default_rng(seed).standard_normal((n, state.dim))
        return state.mean + z @ L.T

    starts = list(range(0, n, chunk_size))

    def draw(i):
        m = min(chunk_size, n - starts[i])
        z = np.random.default_rng([seed, i]).standard_normal((m, state.dim))
        return state.mean + z @ L.T

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(draw, range(len(starts))))
    else:
        parts = [draw(i) for i in range(len(starts))]
    return np.vstack(parts)


@dataclass(frozen=True)
class SampleStats:
    mean_q: float
    mean_p: float
    std_q: float
    std_p: float
    rho: float
    n: Optional[int] = None

    def as_dict(self) -> dict:
        return asdict(self)


def _corr(cov):
    sq, sp = math.sqrt(max(cov[0, 0], 0.0)), math.sqrt(max(cov[1, 1], 0.0))
    if sq == 0 or sp == 0:
        return 0.0
    return float(np.clip(cov[0, 1] / (sq * sp), -1.0, 1.0))


def summary_stats(samples) -> SampleStats:
    """Sample moments of ``(q, p)`` pairs; unbiased (ddof=1) covariance.

    ``rho`` is reported as 0 when either coordinate has zero spread.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 2 or x.shape[1] != 2:
        raise ValueError("samples must have shape (N, 2)")
    if x.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    m = x.mean(axis=0)
    cov = np.cov(x, rowvar=False, ddof=1)
    return SampleStats(float(m[0]), float(m[1]), math.sqrt(cov[0, 0]), math.sqrt(cov[1, 1]),
                       _corr(cov), int(x.shape[0]))


def analytic_stats(state: GaussianState) -> SampleStats:
    if state.dim != 2:
        raise ValueError("analytic_stats expects a 2D (q, p) state")
    c = state.cov
    return SampleStats(float(state.mean[0]), float(state.mean[1]),
                       math.sqrt(c[0, 0]), math.sqrt(c[1, 1]), _corr(c))


def standard_errors(stats: SampleStats, n: int) -> dict:
    """Large-sample standard errors of the estimators, evaluated at ``stats``."""
    return {
        "mean_q": stats.std_q / math.sqrt(n),
        "mean_p": stats.std_p / math.sqrt(n),
        "std_q": stats.std_q / math.sqrt(2 * (n - 1)),
        "std_p": stats.std_p / math.sqrt(2 * (n - 1)),
        "rho": (1 - stats.rho ** 2) / math.sqrt(n - 1),
    }


def source_exponent_closed_form(alpha: float) -> np.ndarray:
    """Source exponent matrix after cloning with the integer map (alpha_s = 1)."""
    d = alpha ** 2 + 10 * alpha + 8
    return np.array([[alpha ** 2 + 6 * alpha, -4 * alpha],
                     [-4 * alpha, alpha ** 2 + 4 * alpha]]) / d


def target_exponent_closed_form(alpha: float) -> np.ndarray:
    """Target exponent matrix after cloning with the integer map (alpha_s = 1)."""
    d = alpha ** 2 + 5 * alpha + 5
    return np.array([[alpha ** 2 + 3 * alpha, alpha],
                     [alpha, alpha ** 2 + 2 * alpha]]) / d


def _ideal(cfg: ThermalConfig, F):
    src = subsystem(initial_state(cfg), "source")
    return {"source": src, "target": src, "machine": pushforward(src, F)}


def _tolist(a):
    return None if a is None else np.asarray(a).tolist()


def corruption_report(cfg: ThermalConfig, M, F=TIME_REVERSAL, zero_temperature_alpha: float = 1e8) -> dict:
    """Analytic after-cloning marginals and how far each is from perfect.

    For every subsystem: mean, covariance, exponent matrix, position-momentum
    correlation and ``KL(marginal || ideal)`` where the ideal is the initial
    source state (its ``F`` image for the machine).  KL is ``None`` when a
    covariance is singular.  ``zero_temperature`` repeats the source/target
    computation with ``alpha_t = alpha_m = zero_temperature_alpha`` and reports
    the largest deviation of their exponent matrices from the initial source's.
    """
    M = np.asarray(_as_matrix(M), dtype=float)
    F = np.asarray(F, dtype=float)
    final = pushforward(initial_state(cfg), M)
    ideal = _ideal(cfg, F)
    out = {"config": asdict(cfg), "subsystems": {}}
    for name in SUBSYSTEMS:
        m = subsystem(final, name)
        try:
            kl = kl_divergence(m, ideal[name])
        except ValueError:
            kl = None
        out["subsystems"][name] = {
            "mean": m.mean.tolist(),
            "ideal_mean": ideal[name].mean.tolist(),
            "covariance": m.cov.tolist(),
            "exponent_matrix": _tolist(m.exponent_matrix),
            "correlation": _corr(m.cov),
            "kl_from_ideal": kl,
        }

    cold = ThermalConfig(cfg.alpha_s, zero_temperature_alpha, zero_temperature_alpha, cfg.mu_q, cfg.mu_p)
    cold_final = pushforward(initial_state(cold), M)
    ref = subsystem(initial_state(cold), "source").exponent_matrix
    dev = {}
    for name in ("source", "target"):
        A = subsystem(cold_final, name).exponent_matrix
        dev[name] = None if (A is None or ref is None) else float(np.max(np.abs(A - ref)))
    out["zero_temperature"] = {"alpha": zero_temperature_alpha, "max_deviation": dev}
    return out


def histogram_grid(samples, bins: int = 50):
    """2D histogram of ``(q, p)`` samples: ``(q_edges, p_edges, counts)``."""
    x = np.asarray(samples, dtype=float)
    counts, qe, pe = np.histogram2d(x[:, 0], x[:, 1], bins=bins)
    return qe, pe, counts.astype(np.int64)
