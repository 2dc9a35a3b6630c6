"""Matrix exponential and real logarithms for small dense matrices."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

__all__ = [
    "mat_exp",
    "real_log_spd",
    "real_log_orthogonal",
    "principal_log",
    "SpectralBlock",
    "spectral_blocks",
    "EXP_NORM_LIMIT",
]

EXP_NORM_LIMIT = 50.0

# Pade coefficients and 1-norm thresholds for degrees 3, 5, 7, 9, 13.
_PADE = {
    3: [120.0, 60.0, 12.0, 1.0],
    5: [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0],
    7: [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0],
    9: [17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0],
    13: [64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
         16380.0, 182.0, 1.0],
}
_THETA = {3: 1.495585217958292e-2, 5: 2.539398330063230e-1,
          7: 9.504178996162932e-1, 9: 2.097847961257068e0,
          13: 5.371920351148152e0}


def _pade_uv(A, m):
    b = _PADE[m]
    n = A.shape[0]
    ident = np.eye(n, dtype=A.dtype)
    A2 = A @ A
    if m == 13:
        A4 = A2 @ A2
        A6 = A4 @ A2
        U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
                 + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
        V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
             + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
        return U, V
    powers = [ident, A2]
    while len(powers) < (m + 1) // 2:
        powers.append(powers[-1] @ A2)
    U = A @ sum(b[2 * j + 1] * powers[j] for j in range(len(powers)))
    V = sum(b[2 * j] * powers[j] for j in range(len(powers)))
    return U, V


def mat_exp(M) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a Pade core.

    Degree 3..13 is picked from the 1-norm; larger norms are scaled down by a
    power of two first.  Inputs with 1-norm above ``EXP_NORM_LIMIT`` still get
    a result, with a warning, since the 1e-12 relative accuracy target no
    longer holds there.
    """
    A = np.asarray(M)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"mat_exp needs a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("mat_exp: non-finite entries")
    A = A.astype(np.complex128 if np.iscomplexobj(A) else np.float64)
    if A.size == 0:
        return A
    norm = np.linalg.norm(A, 1)
    if norm > EXP_NORM_LIMIT:
        warnings.warn(f"mat_exp: 1-norm {norm:.3g} exceeds {EXP_NORM_LIMIT}; "
                      "accuracy target not guaranteed", RuntimeWarning, stacklevel=2)
    for m in (3, 5, 7, 9):
        if norm <= _THETA[m]:
            U, V = _pade_uv(A, m)
            return np.linalg.solve(V - U, V + U)
    s = max(0, math.ceil(math.log2(norm / _THETA[13])))
    U, V = _pade_uv(A / 2.0 ** s, 13)
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


def real_log_spd(P, sym_tol: float = 1e-10) -> np.ndarray:
    """Symmetric logarithm of a symmetric positive-definite matrix."""
    P = np.asarray(P, dtype=float)
    scale = max(1.0, np.max(np.abs(P)))
    if np.max(np.abs(P - P.T)) > sym_tol * scale:
        raise ValueError("real_log_spd: matrix is not symmetric")
    w, V = np.linalg.eigh((P + P.T) / 2)
    if np.any(w <= 0):
        raise ValueError(f"real_log_spd: non-positive eigenvalue {w.min():.3g}")
    L = (V * np.log(w)) @ V.T
    return (L + L.T) / 2


def real_log_orthogonal(U, tol: float = 1e-10) -> np.ndarray:
    """Antisymmetric logarithm of a special orthogonal matrix.

    Uses the real Schur form, which for an orthogonal matrix is block
    diagonal with 2x2 rotations and +-1 entries.  Rotation angles land in
    (-pi, pi]; pairs of -1 eigenvalues become rotations by pi.
    """
    U = np.asarray(U, dtype=float)
    n = U.shape[0]
    if np.max(np.abs(U.T @ U - np.eye(n))) > tol:
        raise ValueError("real_log_orthogonal: matrix is not orthogonal")
    if np.linalg.det(U) <= 0:
        raise ValueError("real_log_orthogonal: determinant must be +1")
    T, Z = sla.schur(U, output="real")
    A = np.zeros_like(T)
    minus_one = []
    i = 0
    while i < n:
        if i + 1 < n and abs(T[i + 1, i]) > tol:
            a, b, c, d = T[i, i], T[i, i + 1], T[i + 1, i], T[i + 1, i + 1]
            theta = math.atan2((c - b) / 2, (a + d) / 2)
            A[i, i + 1], A[i + 1, i] = -theta, theta
            i += 2
        else:
            if T[i, i] < 0:
                minus_one.append(i)
            i += 1
    if len(minus_one) % 2:
        raise ValueError("real_log_orthogonal: eigenvalue -1 with odd multiplicity")
    for j, k in zip(minus_one[0::2], minus_one[1::2]):
        A[j, k], A[k, j] = -math.pi, math.pi
    L = Z @ A @ Z.T
    return (L - L.T) / 2


@dataclass
class SpectralBlock:
    """One cluster of (numerically) equal eigenvalues.

    ``M = sum(b.V @ b.D @ b.W for b in blocks)`` and ``b.W @ b.V = I``;
    ``D`` is upper triangular with every eigenvalue close to ``center``.
    """

    center: complex
    V: np.ndarray
    W: np.ndarray
    D: np.ndarray

    @property
    def size(self) -> int:
        return self.D.shape[0]

    @property
    def projector(self) -> np.ndarray:
        return self.V @ self.W


def _cluster(eigs, rel_tol):
    clusters: list[list[int]] = []
    for i, lam in enumerate(eigs):
        hits = [c for c in clusters
                if any(abs(lam - eigs[j]) <= rel_tol * max(1.0, abs(lam)) for j in c)]
        merged = [i]
        for c in hits:
            merged.extend(c)
            clusters.remove(c)
        clusters.append(sorted(merged))
    return clusters


# beyond this the Sylvester coupling says two "clusters" are one split Jordan block
_MAX_COUPLING = 1e6


def spectral_blocks(M, rel_tol: float = 1e-5) -> list[SpectralBlock]:
    """Split ``M`` into its generalized eigenspaces.

    Complex Schur form, reordered so each eigenvalue cluster is contiguous,
    then decoupled with Sylvester solves.  Eigenvalues closer than
    ``rel_tol`` (relative) are one cluster, which keeps Jordan blocks split
    by rounding (spread ~ eps**(1/k)) together.  Large Jordan blocks can
    split wider than that; the tolerance is then widened until the
    reordering and decoupling are well conditioned.
    """
    M = np.asarray(M)
    eigs = np.linalg.eigvals(M)
    tol = rel_tol
    while True:
        try:
            return _spectral_blocks(M, eigs, tol)
        except np.linalg.LinAlgError:
            if tol >= 1e-1:
                raise
            tol *= 10


def _spectral_blocks(M, eigs, rel_tol):
    n = M.shape[0]
    clusters = _cluster(list(eigs), rel_tol)
    centers = [np.mean(eigs[c]) for c in clusters]
    radii = [max(rel_tol * max(1.0, abs(z)), max(abs(eigs[j] - z) for j in c) * 1.5 + 1e-12)
             for c, z in zip(clusters, centers)]

    Z = np.eye(n, dtype=complex)
    T = M.astype(complex)
    sizes = []
    offset = 0
    for c, z, r in zip(clusters, centers, radii):
        if offset == n:
            break
        sub = T[offset:, offset:]
        Ts, Zs, sdim = sla.schur(sub, output="complex",
                                 sort=lambda x, z=z, r=r: abs(x - z) <= r)
        if sdim != len(c):
            raise np.linalg.LinAlgError(
                f"eigenvalue cluster near {z:.6g}: expected {len(c)} values, reordering found {sdim}")
        T[offset:, offset:] = Ts
        T[:offset, offset:] = T[:offset, offset:] @ Zs
        Z[:, offset:] = Z[:, offset:] @ Zs
        sizes.append(len(c))
        offset += len(c)

    # Decouple: T = S D S^{-1} with D block diagonal.
    S = np.eye(n, dtype=complex)
    bounds = np.cumsum([0] + sizes)
    Tw = T.copy()
    for a in range(len(sizes) - 1):
        i0, i1 = bounds[a], bounds[a + 1]
        A = Tw[i0:i1, i0:i1]
        B = Tw[i1:, i1:]
        C = Tw[i0:i1, i1:]
        Y = sla.solve_sylvester(A, -B, -C)
        if not np.all(np.isfinite(Y)) or np.max(np.abs(Y), initial=0.0) > _MAX_COUPLING:
            raise np.linalg.LinAlgError("eigenvalue clusters too close to decouple")
        step = np.eye(n, dtype=complex)
        step[i0:i1, i1:] = Y
        S = S @ step
        Tw[i0:i1, i1:] = 0
    left = np.linalg.solve(S, Z.conj().T)
    right = Z @ S
    blocks = []
    for a, z in enumerate(centers):
        i0, i1 = bounds[a], bounds[a + 1]
        blocks.append(SpectralBlock(complex(z), right[:, i0:i1], left[i0:i1, :],
                                    Tw[i0:i1, i0:i1]))
    return blocks


def _log_unipotent(D, center):
    """log(D / center) for a block whose eigenvalues all sit near ``center``.

    ``D / center - I`` is nilpotent up to rounding, so the Mercator series
    terminates in practice.
    """
    k = D.shape[0]
    N = D / center - np.eye(k)
    term = np.eye(k, dtype=complex)
    out = np.zeros((k, k), dtype=complex)
    for j in range(1, 200):
        term = term @ N
        contrib = term * ((-1) ** (j + 1) / j)
        out = out + contrib
        if j >= k and np.max(np.abs(contrib)) <= 1e-18 * (1.0 + np.max(np.abs(out))):
            break
    return out


def principal_log(M, blocks: list[SpectralBlock] | None = None) -> np.ndarray:
    """Principal matrix logarithm, real when ``M`` is real.

    Raises ``ValueError`` when ``M`` is singular or has an eigenvalue on the
    closed negative real axis, where no principal real logarithm exists.
    """
    M = np.asarray(M)
    blocks = spectral_blocks(M) if blocks is None else blocks
    out = np.zeros(M.shape, dtype=complex)
    for b in blocks:
        z = b.center
        if abs(z) < 1e-14:
            raise ValueError("principal_log: singular matrix")
        if z.real < 0 and abs(z.imag) <= 1e-9 * abs(z):
            raise ValueError(f"principal_log: eigenvalue {z.real:.6g} on the negative real axis")
        L = np.log(z) * np.eye(b.size) + _log_unipotent(b.D, z)
        out += b.V @ L @ b.W
    if np.isrealobj(M):
        return out.real
    return out
