"""Quadratic Hamiltonians that realise linear symplectic maps.

A generator is a matrix ``h = Omega S`` with ``S`` symmetric; the flow of
``H(x) = x^T S x / 2`` for time ``t`` is ``exp(h t)``.  A cloning map is not
in the image of the exponential (it has negative real eigenvalues of odd
multiplicity), so it is realised as the product of two flows.  Two
factorisations are provided:

* :func:`symplectic_polar` -- symmetric positive-definite times orthogonal,
  both factors symplectic;
* :func:`spectral_split` -- real-modulus part times unit-modulus part of the
  spectrum, which is the decomposition behind the published generator tables.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla

from .matfuncs import (
    SpectralBlock,
    _log_unipotent,
    mat_exp,
    principal_log,
    real_log_spd,
    spectral_blocks,
)
from .symplectic import (
    _as_matrix,
    is_generator,
    is_symplectic,
    standard_form,
)

__all__ = [
    "HamiltonianFactors",
    "QuadraticHamiltonian",
    "RealLogReport",
    "Trajectory",
    "symplectic_polar",
    "spectral_split",
    "has_real_log",
    "real_generator",
    "generator_to_hamiltonian",
    "evolve",
    "two_stage_clone",
    "unitary_log",
]


class HamiltonianFactors(NamedTuple):
    """``phi = exp(X) @ exp(Y)``; ``X`` acts second (shear), ``Y`` first (rotation)."""

    X: np.ndarray
    Y: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return mat_exp(self.X) @ mat_exp(self.Y)


@dataclass
class QuadraticHamiltonian:
    """``H(x) = 1/2 x^T h x`` with ``h`` symmetric."""

    coefficients: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.coefficients, dtype=float)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError("coefficients must be square")
        # store exactly symmetric (upper triangle mirrored)
        self.coefficients = np.triu(h) + np.triu(h, 1).T

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return 0.5 * np.einsum("...i,ij,...j->...", x, self.coefficients, x)

    def generator(self) -> np.ndarray:
        return standard_form(self.coefficients.shape[0] // 2) @ self.coefficients


def _coord_names(dim):
    if dim == 6:
        return ["q_s", "p_s", "q_t", "p_t", "q_m", "p_m"]
    return [f"{c}{i}" for i in range(1, dim // 2 + 1) for c in ("q", "p")]


@dataclass
class Trajectory:
    times: np.ndarray
    points: np.ndarray
    labels: list = field(default_factory=list)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.points = np.asarray(self.points, dtype=float)
        if self.points.shape[0] != self.times.shape[0]:
            raise ValueError("times and points differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def endpoint(self) -> np.ndarray:
        return self.points[-1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + _coord_names(self.points.shape[1]))
        for t, x in zip(self.times, self.points):
            w.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in x])
        return buf.getvalue()


def unitary_log(U) -> np.ndarray:
    """Logarithm of an orthogonal symplectic matrix, returned as a generator.

    Such a matrix commutes with ``Omega`` and so is complex-linear for the
    coordinates ``z_k = q_k + i p_k``; the log is taken on that unitary matrix
    (angles in (-pi, pi]) and realified.  Unlike a generic real log this
    never pairs -1 eigenvalues across the complex structure, so the result
    is always Hamiltonian.
    """
    U = np.asarray(U, dtype=float)
    u = U[0::2, 0::2] + 1j * U[1::2, 0::2]
    # u is normal, so its complex Schur form is diagonal
    T, Q = sla.schur(u, output="complex")
    theta = np.angle(np.diag(T))
    theta[np.isclose(theta, -math.pi, atol=1e-12)] = math.pi
    L = (Q * (1j * theta)) @ Q.conj().T
    L = (L - L.conj().T) / 2
    out = np.zeros_like(U)
    out[0::2, 0::2] = L.real
    out[1::2, 1::2] = L.real
    out[1::2, 0::2] = L.imag
    out[0::2, 1::2] = -L.imag
    return out


def symplectic_polar(phi, tol: float = 1e-9) -> HamiltonianFactors:
    """Polar decomposition ``phi = exp(X) exp(Y)``.

    ``exp(X) = (phi phi^T)^{1/2}`` is symmetric positive-definite and ``exp(Y)``
    orthogonal; for symplectic ``phi`` both are symplectic, ``X`` is
    symmetric and ``Y`` antisymmetric, and both are generators.
    """
    phi = np.asarray(_as_matrix(phi), dtype=float)
    if not is_symplectic(phi, tol):
        raise ValueError("symplectic_polar: input is not symplectic")
    X = real_log_spd(phi @ phi.T) / 2
    U = mat_exp(-X) @ phi
    Y = unitary_log(U)
    return HamiltonianFactors(X, Y)


def _is_negative_real(z, tol=1e-9):
    return z.real < 0 and abs(z.imag) <= tol * abs(z)


def _real_basis(V, tol=1e-10):
    """Orthonormal real basis of the real subspace spanned by complex ``V``."""
    A = np.hstack([V.real, V.imag])
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    rank = int(np.sum(s > tol * s[0]))
    return U[:, :rank]


def _canonical_basis(Q, form, tol=1e-12):
    """Symplectic basis (columns E1, G1, ...) of the symplectic subspace ``Q``.

    Pivoting Gram-Schmidt inside the subspace; the pivot is the pair with the
    largest symplectic product.
    """
    vecs = [Q[:, i] for i in range(Q.shape[1])]
    cols = []
    while vecs:
        W = np.array([[u @ form @ v for v in vecs] for u in vecs])
        i, j = np.unravel_index(np.argmax(np.abs(W)), W.shape)
        if abs(W[i, j]) <= tol:
            raise np.linalg.LinAlgError("subspace is not symplectic")
        E, G = vecs[i], vecs[j] / W[i, j]
        cols += [E, G]
        rest = [v for k, v in enumerate(vecs) if k not in (i, j)]
        vecs = [v - (v @ form @ G) * E + (v @ form @ E) * G for v in rest]
    return np.column_stack(cols)


def _negative_plane_rotation(blocks: list[SpectralBlock], form) -> np.ndarray:
    """A generator ``R`` with ``exp(R) = -1`` on the negative-eigenvalue subspace
    and 0 elsewhere.

    Generalized eigenspaces of ``lam`` and ``1/lam`` are paired into a
    canonical basis split evenly (SVD) between them, so for simple
    eigenvalues both basis vectors have equal Euclidean length.  The rotation
    turns each pair through pi in the negative-energy sense.
    """
    neg = [b for b in blocks if _is_negative_real(b.center)]
    if not neg:
        return np.zeros(form.shape)
    P = sum(b.projector for b in neg).real
    used = set()
    cols = []
    for a, ba in enumerate(neg):
        if a in used:
            continue
        lam = ba.center.real
        if abs(abs(lam) - 1.0) < 1e-6:
            used.add(a)
            cols.append(_canonical_basis(_real_basis(ba.V), form))
            continue
        partner = min((k for k in range(len(neg)) if k not in used and k != a),
                      key=lambda k: abs(neg[k].center.real * lam - 1.0), default=None)
        if partner is None or abs(neg[partner].center.real * lam - 1.0) > 1e-6:
            raise np.linalg.LinAlgError(f"negative eigenvalue {lam:.6g} has no reciprocal partner")
        used |= {a, partner}
        big, small = (ba, neg[partner]) if abs(lam) > 1 else (neg[partner], ba)
        Qa, Qb = _real_basis(big.V), _real_basis(small.V)
        K = Qa.T @ form @ Qb
        Uk, sk, Wkt = np.linalg.svd(K)
        E = Qa @ Uk / np.sqrt(sk)
        G = Qb @ Wkt.T / np.sqrt(sk)
        for i in range(E.shape[1]):
            cols.append(np.column_stack([E[:, i], G[:, i]]))
    B = np.hstack(cols)
    k = B.shape[1] // 2
    J = standard_form(k)
    return -math.pi * (B @ J @ np.linalg.pinv(B) @ P)


def spectral_split(phi, tol: float = 1e-9) -> HamiltonianFactors:
    """Factor a symplectic map as ``exp(X) exp(Y)`` along its spectrum.

    ``X`` carries the log-moduli of the eigenvalues together with the
    nilpotent (Jordan) part of the logarithm; ``Y`` carries the eigenvalue
    phases.  On the subspace of negative real eigenvalues the phase ``pi``
    is realised by a rotation pairing each ``lam`` with ``1/lam`` (see
    :func:`_negative_plane_rotation`).  Both are generators, and ``exp(Y)`` has
    all eigenvalues on the unit circle.
    """
    phi = np.asarray(_as_matrix(phi), dtype=float)
    if not is_symplectic(phi, tol):
        raise ValueError("spectral_split: input is not symplectic")
    form = standard_form(phi.shape[0] // 2).astype(float)
    blocks = spectral_blocks(phi)
    X = np.zeros(phi.shape, dtype=complex)
    Y = np.zeros(phi.shape, dtype=complex)
    for b in blocks:
        z = b.center
        k = b.size
        nil = _log_unipotent(b.D, z)
        if _is_negative_real(z):
            X += b.V @ (math.log(abs(z)) * np.eye(k) + nil) @ b.W
        else:
            lz = np.log(z)
            X += b.V @ (lz.real * np.eye(k) + nil) @ b.W
            Y += b.V @ (1j * lz.imag * np.eye(k)) @ b.W
    Y = Y.real + _negative_plane_rotation(blocks, form)
    return HamiltonianFactors(X.real, Y)


@dataclass
class RealLogReport:
    """Outcome of :func:`has_real_log`; truthy iff a real logarithm exists."""

    exists: bool
    eigenvalues: np.ndarray
    negative_real: list

    def __bool__(self):
        return self.exists


def _jordan_sizes(D, center, tol=1e-7):
    k = D.shape[0]
    N = D - center * np.eye(k)
    scale = max(1.0, np.max(np.abs(D)))
    ranks = [k]
    P = np.eye(k, dtype=complex)
    for _ in range(k + 1):
        P = P @ N
        s = np.linalg.svd(P, compute_uv=False)
        ranks.append(int(np.sum(s > tol * scale)))
    sizes = {}
    for j in range(1, k + 1):
        count = ranks[j - 1] - 2 * ranks[j] + ranks[j + 1]
        if count:
            sizes[j] = count
    return sizes


def has_real_log(M) -> RealLogReport:
    """Whether the real matrix ``M`` has a real logarithm.

    A real log exists iff, for every negative real eigenvalue, Jordan blocks
    of each size occur an even number of times.  In particular an odd
    algebraic multiplicity rules it out.  The report lists every negative
    real eigenvalue with its multiplicity and Jordan block sizes.
    """
    M = np.asarray(_as_matrix(M), dtype=float)
    if abs(np.linalg.det(M)) < 1e-12 * max(1.0, np.max(np.abs(M))) ** M.shape[0]:
        raise ValueError("has_real_log: matrix is singular")
    blocks = spectral_blocks(M)
    negatives = []
    ok = True
    for b in blocks:
        if _is_negative_real(b.center):
            sizes = _jordan_sizes(b.D, b.center)
            negatives.append({
                "eigenvalue": b.center.real,
                "multiplicity": b.size,
                "jordan_blocks": sizes,
            })
            if any(c % 2 for c in sizes.values()):
                ok = False
    eigs = np.linalg.eigvals(M)
    order = np.lexsort((eigs.imag, eigs.real))
    return RealLogReport(ok, eigs[order], negatives)


def real_generator(M) -> np.ndarray:
    """Principal real logarithm of ``M``; raises if the spectrum touches the
    negative real axis."""
    return principal_log(np.asarray(_as_matrix(M), dtype=float))


def generator_to_hamiltonian(G, tol: float = 1e-9) -> QuadraticHamiltonian:
    """Recover ``h`` (symmetric) from a generator ``G = Omega h``."""
    G = np.asarray(_as_matrix(G), dtype=float)
    if not is_generator(G, tol):
        raise ValueError("not a generator: Omega^-1 G is not symmetric")
    omega = standard_form(G.shape[0] // 2)
    return QuadraticHamiltonian(-omega @ G)


def evolve(G, x0, t_total: float, steps: int) -> Trajectory:
    """Sample ``exp(G t) x0`` at ``steps + 1`` uniform times on [0, t_total]."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    G = np.asarray(_as_matrix(G), dtype=float)
    x0 = np.asarray(x0, dtype=float)
    times = np.linspace(0.0, t_total, steps + 1)
    pts = np.array([mat_exp(G * t) @ x0 for t in times])
    return Trajectory(times, pts)


def two_stage_clone(x0, X, Y, steps: int = 100, tau: float = 1.0) -> Trajectory:
    """Run ``h2 = Y / tau`` for time ``tau``, then ``h1 = X / tau`` for ``tau``.

    The endpoint is ``exp(X) exp(Y) x0``; total time ``2 tau``.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    first = evolve(Y / tau, x0, tau, steps)
    second = evolve(X / tau, first.endpoint, tau, steps)
    times = np.concatenate([first.times, tau + second.times[1:]])
    pts = np.vstack([first.points, second.points[1:]])
    return Trajectory(times, pts)
