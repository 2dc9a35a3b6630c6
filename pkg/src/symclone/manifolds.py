"""Cloning on tori, cotangent bundles and the group SU(2).

Unit quaternions ``(w, x, y, z)`` represent SU(2); all quaternion helpers
broadcast over leading axes.  Phase-space vectors are interleaved
``(q1, p1, q2, p2, ...)`` as everywhere else in the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .hamiltonian import has_real_log, real_generator
from .matfuncs import mat_exp
from .symplectic import LinearMap, _as_matrix, _is_integral, exact_det, is_generator, standard_form

__all__ = [
    "NoRealLogarithmError",
    "qmul", "qconj", "qinv", "qnormalize", "qexp", "qlog", "random_unit_quaternions", "IDENTITY_Q",
    "torus_clone", "ConfigLift", "cotangent_lift", "cylinder_clone",
    "single_hamiltonian_for_lift", "group_clone", "group_clone_inverse",
    "EuclideanChart", "ExponentialChart", "lifted_symplectic_check", "phase_space_check", "LiftCheck",
]

IDENTITY_Q = np.array([1.0, 0.0, 0.0, 0.0])


class NoRealLogarithmError(ValueError):
    """The map is not the exponential of any real generator."""


# --- quaternions -----------------------------------------------------------

def qmul(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ], axis=-1)


def qconj(a):
    a = np.asarray(a, dtype=float)
    return a * np.array([1.0, -1.0, -1.0, -1.0])


def qnormalize(a):
    a = np.asarray(a, dtype=float)
    n = np.linalg.norm(a, axis=-1, keepdims=True)
    if np.any(n == 0):
        raise ValueError("zero quaternion")
    return a / n


def qinv(a):
    """Inverse of a unit quaternion (its conjugate)."""
    return qconj(a)


def _q(*factors):
    out = factors[0]
    for f in factors[1:]:
        out = qmul(out, f)
    return qnormalize(out)


def qexp(v):
    """``exp`` of a pure quaternion with vector part ``v``: (cos|v|, sin|v| v/|v|)."""
    v = np.asarray(v, dtype=float)
    theta = np.linalg.norm(v, axis=-1, keepdims=True)
    return np.concatenate([np.cos(theta), np.sinc(theta / np.pi) * v], axis=-1)


def qlog(u):
    """Vector part of the principal log of a unit quaternion; |result| <= pi."""
    u = np.asarray(u, dtype=float)
    w = np.clip(u[..., :1], -1.0, 1.0)
    vec = u[..., 1:]
    s = np.linalg.norm(vec, axis=-1, keepdims=True)
    theta = np.arctan2(s, w)
    # theta / sin(theta) is smooth at 0; use the series there
    scale = np.where(s > 1e-8, theta / np.where(s > 0, s, 1.0), 1.0 + theta ** 2 / 6)
    return vec * scale


def random_unit_quaternions(n: int, seed: int = 0) -> np.ndarray:
    """Haar-uniform on SU(2): normalized standard Gaussians in R^4."""
    g = np.random.default_rng(seed).standard_normal((n, 4))
    return qnormalize(g)


def _check_unit(u, tol=1e-9):
    n = np.linalg.norm(np.asarray(u, dtype=float), axis=-1)
    if np.any(np.abs(n - 1) > tol):
        raise ValueError("quaternion is not of unit norm")


def group_clone(u_s, u_t, u_m):
    """Cloning map on SU(2)^3.

    ``(u_s, e, e)`` goes to ``(u_s, u_s, u_s)``.
    """
    for u in (u_s, u_t, u_m):
        _check_unit(u)
    return (_q(u_s, qinv(u_m), qinv(u_t)),
            _q(u_s, u_m),
            _q(u_s, qinv(u_t)))


def group_clone_inverse(v_s, v_t, v_m):
    for v in (v_s, v_t, v_m):
        _check_unit(v)
    return (_q(v_s, qinv(v_m), v_t),
            _q(qinv(v_m), v_s, qinv(v_m), v_t),
            _q(qinv(v_t), v_m, qinv(v_s), v_t))


# --- tori and cotangent lifts ----------------------------------------------

def _integer_valued(a) -> bool:
    a = np.asarray(a)
    if _is_integral(a):
        return True
    return a.dtype.kind == "f" and bool(np.all(np.isfinite(a))) and bool(np.all(a == np.rint(a)))


def _unimodular(M):
    M = np.asarray(_as_matrix(M))
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    if not _integer_valued(M):
        raise ValueError("torus maps need an integer matrix")
    M = np.rint(M).astype(np.int64)
    if abs(exact_det(M)) != 1:
        raise ValueError("torus maps need |det| = 1")
    return M


def _mod1(x):
    y = np.mod(x, 1.0)
    y[y >= 1.0] = 0.0
    return y


def torus_clone(M, x):
    """Apply an integer unimodular matrix to a torus point, reducing mod 1."""
    M = _unimodular(M)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != M.shape[0]:
        raise ValueError(f"point dim {x.shape[-1]} does not match map dim {M.shape[0]}")
    return _mod1(np.mod(x, 1.0) @ M.T)


@dataclass(frozen=True)
class ConfigLift:
    """Invertible linear map of configuration space; ``A`` is its inverse."""

    Lam: np.ndarray
    A: np.ndarray = field(default=None)

    def __post_init__(self):
        L = np.asarray(_as_matrix(self.Lam))
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise ValueError("Lam must be square")
        if _integer_valued(L) and abs(exact_det(np.rint(L).astype(np.int64))) == 1:
            L = np.rint(L).astype(np.int64)
            # inverse of a unimodular integer matrix is integral
            A = np.rint(np.linalg.inv(L)).astype(np.int64)
        else:
            L = L.astype(float)
            if abs(np.linalg.det(L)) < 1e-14:
                raise ValueError("Lam is singular")
            A = np.linalg.inv(L)
        if self.A is not None:
            A = np.asarray(self.A)
        if np.max(np.abs(L @ A - np.eye(L.shape[0]))) > 1e-12:
            raise ValueError("A is not the inverse of Lam")
        object.__setattr__(self, "Lam", L)
        object.__setattr__(self, "A", A)

    @property
    def torus_compatible(self) -> bool:
        return _is_integral(self.Lam) and abs(exact_det(self.Lam)) == 1


def cotangent_lift(L) -> LinearMap:
    """Phase-space map ``q' = Lam q``, ``p' = A^T p`` in interleaved order."""
    if not isinstance(L, ConfigLift):
        L = ConfigLift(L)
    n = L.Lam.shape[0]
    dtype = np.int64 if np.issubdtype(L.A.dtype, np.integer) else float
    out = np.zeros((2 * n, 2 * n), dtype=dtype)
    out[0::2, 0::2] = L.Lam
    out[1::2, 1::2] = L.A.T
    return LinearMap(out, label="cotangent-lift")


def cylinder_clone(L, x):
    """Lift of an integer unimodular configuration map on ``T*(S^1)^n``.

    Configurations are reduced mod 1; momenta are left unconstrained.
    """
    if not isinstance(L, ConfigLift):
        L = ConfigLift(L)
    if not L.torus_compatible:
        raise ValueError("configuration map must be integral with |det| = 1")
    y = np.asarray(x, dtype=float) @ np.asarray(cotangent_lift(L).matrix, dtype=float).T
    y[..., 0::2] = _mod1(y[..., 0::2])
    return y


def single_hamiltonian_for_lift(L) -> np.ndarray:
    """Real generator ``G`` with ``exp(G)`` equal to the lifted map.

    Accepts a :class:`ConfigLift` (lifted first) or a ready phase-space
    matrix.  Raises :class:`NoRealLogarithmError` when no real log exists.
    """
    if isinstance(L, ConfigLift):
        M = np.asarray(cotangent_lift(L).matrix, dtype=float)
    else:
        M = np.asarray(_as_matrix(L), dtype=float)
    report = has_real_log(M)
    if not report:
        raise NoRealLogarithmError(
            f"no real logarithm: negative real eigenvalues {report.negative_real}")
    try:
        G = real_generator(M)
    except ValueError as exc:
        # real log exists but the principal one does not (paired negatives)
        raise NoRealLogarithmError(f"no principal real logarithm: {exc}") from exc
    if not is_generator(G, tol=1e-8):
        raise NoRealLogarithmError("logarithm is not a Hamiltonian generator")
    err = np.max(np.abs(mat_exp(G) - M))
    if err > 1e-9:
        raise NoRealLogarithmError(f"logarithm does not reproduce the map (error {err:.2e})")
    return G


# --- charts and the lifted symplecticity check -----------------------------

class EuclideanChart:
    """Identity chart on R^n, centred at the evaluation point.

    Both maps accept extra leading (batch) axes.
    """

    def to_local(self, center, x):
        center = np.asarray(center, dtype=float)
        x = np.asarray(x, dtype=float)
        batch = x.shape[:x.ndim - center.ndim]
        return (x - center).reshape(batch + (-1,))

    def from_local(self, center, xi):
        center = np.asarray(center, dtype=float)
        xi = np.asarray(xi, dtype=float)
        return center + xi.reshape(xi.shape[:-1] + center.shape)


class ExponentialChart:
    """Axis-angle chart on products of SU(2) factors, centred at a point.

    ``u = c exp(xi)`` per factor, with ``|xi| < max_radius`` (pi/2 by default)
    to stay away from the chart boundary.  Both maps accept leading batch axes.
    """

    def __init__(self, max_radius: float = np.pi / 2):
        self.max_radius = max_radius

    def _check(self, xi):
        if np.any(np.linalg.norm(xi, axis=-1) >= self.max_radius):
            raise ValueError("chart coordinates outside the chart radius")

    def to_local(self, center, u):
        center = np.asarray(center, dtype=float)
        u = np.asarray(u, dtype=float)
        batch = u.shape[:u.ndim - center.ndim]
        c = center.reshape(-1, 4)
        xi = qlog(qmul(qinv(c), u.reshape(batch + c.shape)))
        self._check(xi)
        return xi.reshape(batch + (-1,))

    def from_local(self, center, xi):
        center = np.asarray(center, dtype=float)
        xi = np.asarray(xi, dtype=float)
        batch = xi.shape[:-1]
        c = center.reshape(-1, 4)
        v = xi.reshape(batch + (c.shape[0], 3))
        self._check(v)
        return qnormalize(qmul(c, qexp(v))).reshape(batch + center.shape)


@dataclass
class LiftCheck:
    passed: bool
    residual: float
    tol: float
    jacobian: np.ndarray

    def __bool__(self):
        return self.passed


def lifted_symplectic_check(config_map: Callable, chart, point, momentum=None, tol: float = 1e-6,
                            step: float = 1e-5, inner_step: float = 1e-3, seed: int = 0,
                            jacobian: Optional[Callable] = None, vectorized: bool = False) -> LiftCheck:
    """Numerically verify that the cotangent lift of ``config_map`` is symplectic.

    In the chart centred at ``point`` (domain) and at its image (codomain) the
    configuration map becomes ``f`` with ``f(0) = 0``.  The lift is
    ``(q, p) -> (f(q), Df(q)^{-T} p)``; ``Df`` comes from ``jacobian`` (in chart
    coordinates) when supplied, else from a 4th-order difference with
    ``inner_step``.  The phase-space Jacobian is then taken by central
    differences with ``step`` and ``J^T Omega J - Omega`` is compared to ``tol``.

    With ``vectorized=True`` ``config_map`` must accept a leading batch axis;
    every stencil point is then evaluated in one call.
    """
    point = np.asarray(point, dtype=float)
    image = np.asarray(config_map(point), dtype=float)

    def f(Q):
        pts = chart.from_local(point, Q)
        if vectorized:
            imgs = config_map(pts)
        else:
            imgs = np.stack([np.asarray(config_map(x), dtype=float) for x in pts])
        return chart.to_local(image, imgs)

    n = np.size(chart.to_local(point, point))
    m = 2 * n
    if momentum is None:
        momentum = np.random.default_rng(seed).uniform(-1, 1, n)
    z0 = np.zeros(m)
    z0[1::2] = np.asarray(momentum, dtype=float)

    outer = np.concatenate([z0 + step * np.eye(m), z0 - step * np.eye(m)])
    qs, ps = outer[:, 0::2], outer[:, 1::2]
    if jacobian is not None:
        Df = np.stack([np.asarray(jacobian(q), dtype=float) for q in qs])
    else:
        h = inner_step
        stencil = np.concatenate([c * h * np.eye(n)[:, None, :] for c in (1, -1, 2, -2)], axis=1)
        inner = qs[:, None, None, :] + stencil[None]              # (2m, n, 4, n)
        F = f(inner.reshape(-1, n)).reshape(2 * m, n, 4, n)      # [point, column, stencil, out]
        D = (8 * (F[:, :, 0] - F[:, :, 1]) - (F[:, :, 2] - F[:, :, 3])) / (12 * h)
        Df = D.transpose(0, 2, 1)
    lifted = np.empty((2 * m, m))
    lifted[:, 0::2] = f(qs)
    lifted[:, 1::2] = np.linalg.solve(Df.transpose(0, 2, 1), ps[..., None])[..., 0]
    J = (lifted[:m] - lifted[m:]).T / (2 * step)
    Om = standard_form(n).astype(float)
    res = float(np.max(np.abs(J.T @ Om @ J - Om)))
    return LiftCheck(res <= tol, res, tol, J)


def phase_space_check(phase_map: Callable, z, tol: float = 1e-6, step: float = 1e-5) -> LiftCheck:
    """Central-difference test of ``J^T Omega J = Omega`` for a map on R^2n."""
    z = np.asarray(z, dtype=float)
    m = z.size
    if m % 2:
        raise ValueError("phase space must be even-dimensional")
    J = np.empty((m, m))
    for j in range(m):
        e = np.zeros(m)
        e[j] = step
        J[:, j] = (np.asarray(phase_map(z + e)) - np.asarray(phase_map(z - e))) / (2 * step)
    Om = standard_form(m // 2).astype(float)
    res = float(np.max(np.abs(J.T @ Om @ J - Om)))
    return LiftCheck(res <= tol, res, tol, J)
