"""Symplectic vector-space primitives and linear cloning maps.

Phase-space vectors use interleaved ordering ``(q1, p1, q2, p2, ...)`` so the
standard form is block diagonal with ``[[0, 1], [-1, 0]]`` blocks.  For the
three-oscillator cloner the pairs are (source, target, machine).

Integral inputs are handled in exact rational arithmetic (``fractions``) so
that the default cloning map comes out as an integer matrix, bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .matfuncs import mat_exp

__all__ = [
    "LinearMap",
    "CloningChoices",
    "DegenerateStepError",
    "standard_form",
    "symplectic_residual",
    "is_symplectic",
    "is_antisymplectic",
    "is_generator",
    "symplectic_gram_schmidt",
    "build_cloning_map",
    "verify_cloning",
    "random_symplectic",
    "clone_variant",
    "exact_det",
]

DEFAULT_TOL = 1e-9
TIME_REVERSAL = np.array([[1, 0], [0, -1]])


class DegenerateStepError(ValueError):
    """Raised when a Gram-Schmidt pair has vanishing symplectic product."""

    def __init__(self, step: int, value=0):
        self.step = step
        super().__init__(
            f"degenerate Gram-Schmidt step {step}: Omega(E, G) = {value}"
        )


@dataclass(frozen=True)
class LinearMap:
    """A dense square matrix acting on phase-space vectors, plus a label.

    Behaves like an array for numpy purposes (``np.asarray(m)``, ``m @ x``).
    """

    matrix: np.ndarray
    label: str = ""
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"LinearMap must be square, got shape {m.shape}")
        if m.dtype != object and not np.all(np.isfinite(m)):
            raise ValueError("LinearMap entries must be finite")
        object.__setattr__(self, "matrix", m)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.matrix
        return self.matrix.astype(dtype)

    def __matmul__(self, other):
        return self.matrix @ np.asarray(other)

    def __rmatmul__(self, other):
        return np.asarray(other) @ self.matrix

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def T(self):
        return self.matrix.T

    @property
    def is_integral(self) -> bool:
        return _is_integral(self.matrix)


def _as_matrix(M) -> np.ndarray:
    if isinstance(M, LinearMap):
        return M.matrix
    return np.asarray(M)


def _is_integral(a) -> bool:
    a = np.asarray(a)
    if a.dtype.kind in "iub":
        return True
    if a.dtype == object:
        return all(
            isinstance(x, (int, np.integer))
            or (isinstance(x, Fraction) and x.denominator == 1)
            for x in a.flat
        )
    return False


def _is_rational(a) -> bool:
    a = np.asarray(a)
    if a.dtype.kind in "iub":
        return True
    if a.dtype == object:
        return all(isinstance(x, (int, np.integer, Fraction)) for x in a.flat)
    return False


def _to_fraction(a) -> np.ndarray:
    a = np.asarray(a)
    out = np.empty(a.shape, dtype=object)
    for idx, x in np.ndenumerate(a):
        out[idx] = Fraction(int(x)) if isinstance(x, (int, np.integer)) else Fraction(x)
    return out


def _from_fraction(a: np.ndarray) -> np.ndarray:
    """Integer array if every entry is integral, else float."""
    if all(x.denominator == 1 for x in a.flat):
        return np.array([[int(x) for x in row] for row in a], dtype=np.int64) \
            if a.ndim == 2 else np.array([int(x) for x in a], dtype=np.int64)
    return a.astype(float)


def exact_det(M) -> Fraction:
    """Determinant by fraction-exact Gaussian elimination."""
    A = _to_fraction(_as_matrix(M)).copy()
    n = A.shape[0]
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if A[r, col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            A[[col, pivot]] = A[[pivot, col]]
            det = -det
        det *= A[col, col]
        for r in range(col + 1, n):
            f = A[r, col] / A[col, col]
            if f:
                A[r, col:] = A[r, col:] - f * A[col, col:]
    return det


def standard_form(n_pairs: int) -> np.ndarray:
    """Block-diagonal symplectic form on ``2 * n_pairs`` dimensions."""
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    return np.kron(np.eye(n_pairs, dtype=np.int64), np.array([[0, 1], [-1, 0]]))


def _form_for(M: np.ndarray) -> np.ndarray:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] % 2:
        raise ValueError(f"phase-space dimension must be even, got {M.shape[0]}")
    return standard_form(M.shape[0] // 2)


def symplectic_residual(M, sign: int = 1):
    """``max |M^T Omega M - sign * Omega|``; exact for integer input."""
    M = _as_matrix(M)
    omega = _form_for(M)
    if _is_rational(M):
        Mf = _to_fraction(M)
        diff = Mf.T @ omega @ Mf - sign * omega
        return max(abs(x) for x in diff.flat)
    return float(np.max(np.abs(M.T @ omega @ M - sign * omega)))


def _predicate(M, sign, tol):
    M = _as_matrix(M)
    r = symplectic_residual(M, sign)
    if tol is None:
        return r == 0 if _is_rational(M) else r <= DEFAULT_TOL
    return r <= tol


def is_symplectic(M, tol: float | None = None) -> bool:
    """True iff ``M^T Omega M = Omega``.

    With ``tol=None`` integer matrices are compared exactly and float matrices
    at 1e-9.
    """
    return _predicate(M, 1, tol)


def is_antisymplectic(M, tol: float | None = None) -> bool:
    """True iff ``M^T Omega M = -Omega`` (the form is reversed)."""
    return _predicate(M, -1, tol)


def is_generator(M, tol: float | None = None) -> bool:
    """True iff ``M = Omega S`` with ``S`` symmetric (a Hamiltonian matrix)."""
    M = _as_matrix(M)
    omega = _form_for(M)
    S = -omega @ M  # Omega^{-1} = -Omega
    if _is_rational(M):
        asym = max(abs(x) for x in (S - S.T).flat)
        return asym == 0 if tol is None else asym <= tol
    asym = float(np.max(np.abs(S - S.T)))
    return asym <= (DEFAULT_TOL if tol is None else tol)


def _omega(u, v, form):
    return u @ form @ v


def _project_out(v, pairs, form):
    """Remove from ``v`` its components along canonical pairs ``(E, G)``."""
    for E, G in pairs:
        v = v - _omega(v, G, form) * E + _omega(v, E, form) * G
    return v


def symplectic_gram_schmidt(seed_pairs, form=None, tol: float = 1e-12) -> np.ndarray:
    """Turn seed pairs into a canonical basis.

    Each seed pair is projected onto the symplectic complement of the pairs
    already accepted, then ``G`` is rescaled so that ``Omega(E, G) = 1``.

    Returns a matrix whose columns are ``E1, G1, E2, G2, ...``.  When all
    seeds are integral/rational the arithmetic is exact.

    Raises
    ------
    DegenerateStepError
        If ``Omega(E, G)`` vanishes at some step (``.step`` is 1-based).
    """
    seeds = [(np.asarray(e), np.asarray(g)) for e, g in seed_pairs]
    if not seeds:
        raise ValueError("need at least one seed pair")
    dim = seeds[0][0].shape[0]
    if form is None:
        form = standard_form(dim // 2)
    exact = all(_is_rational(e) and _is_rational(g) for e, g in seeds) and _is_rational(form)
    if exact:
        form = _to_fraction(form)
        seeds = [(_to_fraction(e), _to_fraction(g)) for e, g in seeds]
    else:
        form = np.asarray(form, dtype=float)
        seeds = [(e.astype(float), g.astype(float)) for e, g in seeds]

    pairs = []
    for step, (e, g) in enumerate(seeds, start=1):
        E = _project_out(e, pairs, form)
        G = _project_out(g, pairs, form)
        c = _omega(E, G, form)
        if (c == 0) if exact else abs(c) <= tol:
            raise DegenerateStepError(step, c)
        pairs.append((E, G / c))
    cols = [v for pair in pairs for v in pair]
    out = np.column_stack(cols)
    return _from_fraction(out) if exact else out


@dataclass(frozen=True)
class CloningChoices:
    """Free data of the Gram-Schmidt construction of a 6x6 cloning map.

    ``second_pair`` holds the coefficients of ``E2`` and ``G2`` over the
    projected vectors ``(e2', e3', g2', g3')``.  ``third_seeds`` names the two
    projected vectors carried into the last step, and ``third_pair`` gives
    ``E3`` and ``G3`` as combinations of their projections ``(e3'', g3'')``.
    The defaults reproduce the standard integer cloning map.
    """

    F: np.ndarray = field(default_factory=lambda: TIME_REVERSAL.copy())
    second_pair: tuple = ((-1, 0, -2, 1), (0, 1, -3, 1))
    third_seeds: tuple = ("e2'", "g2'")
    third_pair: tuple = ((0, -1), (-1, 0))

    def __post_init__(self):
        F = np.asarray(self.F)
        if F.shape != (2, 2):
            raise ValueError("F must be 2x2")
        object.__setattr__(self, "F", F)
        names = ("e2'", "e3'", "g2'", "g3'")
        if len(self.third_seeds) != 2 or any(s not in names for s in self.third_seeds):
            raise ValueError(f"third_seeds must name two of {names}")


def build_cloning_map(choices: CloningChoices | None = None, return_trace: bool = False):
    """Construct a 6x6 linear symplectic cloning map by Gram-Schmidt.

    The first canonical pair is fixed by the cloning requirement
    ``(s, 0, 0) -> (s, s, F s)``; the remaining pairs are built from the
    projected standard basis vectors according to ``choices``.

    Returns the map as a :class:`LinearMap` (integer matrix when ``F`` and the
    choices are integral).  With ``return_trace=True`` also returns a dict of
    every intermediate vector.
    """
    choices = CloningChoices() if choices is None else choices
    F = choices.F
    if not is_antisymplectic(F, None if _is_rational(F) else DEFAULT_TOL):
        raise ValueError("F must be antisymplectic (F^T w F = -w)")

    exact = _is_rational(F) and all(
        _is_rational(np.asarray(c)) for c in (*choices.second_pair, *choices.third_pair)
    )
    conv = _to_fraction if exact else (lambda a: np.asarray(a, dtype=float))
    form = conv(standard_form(3))
    basis = conv(np.eye(6, dtype=np.int64))
    Fm = conv(F)
    e = {i: basis[:, 2 * (i - 1)] for i in (1, 2, 3)}
    g = {i: basis[:, 2 * (i - 1) + 1] for i in (1, 2, 3)}

    def clone_of(s2):
        out = conv(np.zeros(6, dtype=np.int64))
        out[0:2] = s2
        out[2:4] = s2
        out[4:6] = Fm @ s2
        return out

    def normalise(E, G, step):
        c = _omega(E, G, form)
        if (c == 0) if exact else abs(c) <= 1e-12:
            raise DegenerateStepError(step, c)
        return E, G / c

    trace = {}
    E1, G1 = normalise(clone_of(conv(np.array([1, 0]))), clone_of(conv(np.array([0, 1]))), 1)
    trace["E1"], trace["G1"] = E1, G1

    primes = {
        "e2'": _project_out(e[2], [(E1, G1)], form),
        "e3'": _project_out(e[3], [(E1, G1)], form),
        "g2'": _project_out(g[2], [(E1, G1)], form),
        "g3'": _project_out(g[3], [(E1, G1)], form),
    }
    trace.update(primes)
    pv = [primes[k] for k in ("e2'", "e3'", "g2'", "g3'")]
    ce, cg = (conv(np.asarray(c)) for c in choices.second_pair)
    E2 = sum(ci * v for ci, v in zip(ce, pv))
    G2 = sum(ci * v for ci, v in zip(cg, pv))
    E2, G2 = normalise(E2, G2, 2)
    trace["E2"], trace["G2"] = E2, G2

    doubles = [_project_out(primes[k], [(E2, G2)], form) for k in choices.third_seeds]
    trace["e3''"], trace["g3''"] = doubles
    ce, cg = (conv(np.asarray(c)) for c in choices.third_pair)
    E3 = ce[0] * doubles[0] + ce[1] * doubles[1]
    G3 = cg[0] * doubles[0] + cg[1] * doubles[1]
    E3, G3 = normalise(E3, G3, 3)
    trace["E3"], trace["G3"] = E3, G3

    M = np.column_stack([E1, G1, E2, G2, E3, G3])
    M = _from_fraction(M) if exact else M
    result = LinearMap(M, label="clone-map")
    if return_trace:
        trace = {k: (_from_fraction(v) if exact else v) for k, v in trace.items()}
        return result, trace
    return result


def verify_cloning(M, F=TIME_REVERSAL, tol: float | None = None) -> bool:
    """Check ``M (s, 0, 0) = (s, s, F s)`` on both source basis vectors and
    that ``M`` is symplectic."""
    M = _as_matrix(M)
    F = np.asarray(F)
    if M.shape != (6, 6):
        raise ValueError(f"cloning map must be 6x6, got {M.shape}")
    exact = tol is None and _is_rational(M) and _is_rational(F)
    for k in range(2):
        s = np.zeros(2, dtype=np.int64)
        s[k] = 1
        x = np.zeros(6, dtype=np.int64)
        x[:2] = s
        want = np.concatenate([s, s, F @ s])
        got = M @ x
        if exact:
            if any(a != b for a, b in zip(_to_fraction(got), _to_fraction(want))):
                return False
        elif np.max(np.abs(got - want)) > (DEFAULT_TOL if tol is None else tol):
            return False
    return is_symplectic(M, tol)


def random_symplectic(dim: int, scale: float = 1.0, seed: int = 0) -> LinearMap:
    """``exp(Omega S)`` for a random symmetric ``S`` with entries in [-scale, scale]."""
    if dim <= 0 or dim % 2:
        raise ValueError("dim must be a positive even integer")
    rng = np.random.default_rng(seed)
    A = rng.uniform(-scale, scale, size=(dim, dim))
    S = np.triu(A) + np.triu(A, 1).T
    return LinearMap(mat_exp(standard_form(dim // 2) @ S), label="random-symplectic")


def _direct_sum(*blocks) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=np.result_type(*blocks))
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i:i + k, i:i + k] = b
        i += k
    return out


def clone_variant(base, g, k, tol: float = DEFAULT_TOL) -> LinearMap:
    """Another cloning map from the ``Sp(4) x Sp(2)`` family.

    ``g`` acts on (target, machine) before cloning and ``k`` on the machine
    after; the result clones with ``F`` replaced by ``k F``.
    """
    base = _as_matrix(base)
    g = np.asarray(g)
    k = np.asarray(k)
    if g.shape != (4, 4) or k.shape != (2, 2):
        raise ValueError("g must be 4x4 and k 2x2")
    if not is_symplectic(g, tol) or not is_symplectic(k, tol):
        raise ValueError("g and k must be symplectic")
    I2 = np.eye(2, dtype=np.result_type(g, k))
    out = _direct_sum(I2, I2, k) @ base @ _direct_sum(I2, g)
    return LinearMap(out, label="clone-variant")
