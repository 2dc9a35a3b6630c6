"""Amplitude-level model of degenerate four-wave mixing as a cloner.

The crystal is a black-box coupler: two strong counter-propagating pumps
(amplitudes A2, A3) and a weak signal A1 produce a phase-conjugate output
along -k1 (the anticlone) and a copy along k3 + delta (the clone).  Carrier
oscillations are not integrated and pump depletion is ignored.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .symplectic import is_antisymplectic, is_symplectic

__all__ = [
    "OpticalMode",
    "FwmConfig",
    "BeamGeometry",
    "FrequencyMismatchError",
    "phase_match_residual",
    "phase_match_status",
    "fwm_outputs",
    "quadrature_matrix",
    "quadrature_map_check",
    "quadrature_is_symplectic",
    "ChannelRun",
    "modulated_run",
    "pump_noise_series",
    "EXACT_TOL",
    "APPROX_REL_TOL",
]

EXACT_TOL = 1e-12
APPROX_REL_TOL = 1e-3


class FrequencyMismatchError(ValueError):
    """Beams in degenerate mixing must share one frequency."""


@dataclass(frozen=True)
class OpticalMode:
    k: tuple
    A: complex
    omega: float

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float)
        if k.shape != (2,):
            raise ValueError("k must be a 2D wavevector")
        object.__setattr__(self, "k", tuple(float(v) for v in k))
        object.__setattr__(self, "A", complex(self.A))
        object.__setattr__(self, "omega", float(self.omega))

    @property
    def kvec(self) -> np.ndarray:
        return np.array(self.k)


@dataclass(frozen=True)
class FwmConfig:
    """Material and pump settings.

    With ``normalize`` the pump power is assumed tuned so both effective
    gains equal 1; the raw gains below are then ignored.
    """

    chi3: float = 1.0
    eps0: float = 1.0
    A2: complex = 1.0
    A3: complex = 1.0
    normalize: bool = True
    omega: float = 1.0
    c_tilde: float = 1.0

    def __post_init__(self):
        if self.normalize and (self.A2 == 0 or self.A3 == 0):
            raise ValueError("normalization needs nonzero pumps")
        if not self.c_tilde > 0 or not self.omega > 0:
            raise ValueError("omega and c_tilde must be positive")

    @property
    def g_anticlone(self) -> complex:
        if self.normalize:
            return 1.0 + 0j
        return complex(self.eps0 * self.chi3 * self.A2 * self.A3)

    @property
    def g_clone(self) -> complex:
        if self.normalize:
            return 1.0 + 0j
        return complex(self.eps0 * self.chi3 * np.conj(self.A2) * self.A3)

    @property
    def k_magnitude(self) -> float:
        return self.omega / self.c_tilde


@dataclass(frozen=True)
class BeamGeometry:
    """Pump wavevector ``k2`` and transverse signal offset ``delta``.

    ``k3 = -k2`` and ``k1 = k2 + delta``; the anticlone leaves along
    ``-k1`` and the clone along ``k3 + delta``.
    """

    k2: tuple
    delta: tuple = (0.0, 0.0)

    def __post_init__(self):
        k2 = np.asarray(self.k2, dtype=float)
        d = np.asarray(self.delta, dtype=float)
        if k2.shape != (2,) or d.shape != (2,):
            raise ValueError("k2 and delta must be 2D vectors")
        if np.linalg.norm(k2) == 0:
            raise ValueError("k2 must be nonzero")
        if abs(k2 @ d) > 1e-12 * np.linalg.norm(k2) * max(1.0, np.linalg.norm(d)):
            raise ValueError("delta must be transverse to k2")
        object.__setattr__(self, "k2", tuple(map(float, k2)))
        object.__setattr__(self, "delta", tuple(map(float, d)))

    @classmethod
    def collinear(cls, k: float = 1.0, offset: float = 0.0):
        return cls((k, 0.0), (0.0, offset))

    @property
    def k3(self):
        return -np.array(self.k2)

    @property
    def k1(self):
        return np.array(self.k2) + np.array(self.delta)

    @property
    def k_anticlone(self):
        return -self.k1

    @property
    def k_clone(self):
        return self.k3 + np.array(self.delta)

    def as_dict(self) -> dict:
        return {name: np.asarray(getattr(self, name), dtype=float).tolist()
                for name in ("k2", "delta", "k3", "k1", "k_anticlone", "k_clone")}


def phase_match_residual(mode: OpticalMode, c_tilde: float) -> float:
    kn = float(np.linalg.norm(mode.kvec))
    if kn == 0:
        raise ValueError("phase matching undefined for k = 0")
    return abs(mode.omega - c_tilde * kn)


def phase_match_status(mode: OpticalMode, c_tilde: float) -> str:
    r = phase_match_residual(mode, c_tilde)
    if r <= EXACT_TOL:
        return "exact"
    if r <= APPROX_REL_TOL * mode.omega:
        return "approximate"
    return "mismatched"


def _check_frequency(signal: OpticalMode, cfg: FwmConfig):
    if abs(signal.omega - cfg.omega) > 1e-12 * cfg.omega:
        raise FrequencyMismatchError(
            f"signal frequency {signal.omega} differs from pump frequency {cfg.omega}")


def fwm_outputs(signal: OpticalMode, cfg: FwmConfig, geom: BeamGeometry):
    """Return ``(clone, anticlone)`` modes for a signal in the k1 direction."""
    _check_frequency(signal, cfg)
    clone = OpticalMode(geom.k_clone, cfg.g_clone * signal.A, cfg.omega)
    anticlone = OpticalMode(geom.k_anticlone, cfg.g_anticlone * np.conj(signal.A), cfg.omega)
    return clone, anticlone


def quadrature_matrix(f: Callable[[complex], complex]) -> np.ndarray:
    """Real 2x2 matrix of a real-linear map of C on ``(Re A, Im A)``."""
    cols = []
    for z in (1.0 + 0j, 1j):
        w = complex(f(z))
        cols.append([w.real, w.imag])
    return np.array(cols).T


def quadrature_map_check(f: Callable[[complex], complex] = np.conj, tol: float = 1e-12) -> bool:
    """True when ``f`` reverses the quadrature symplectic form."""
    return bool(is_antisymplectic(quadrature_matrix(f), tol=tol))


def quadrature_is_symplectic(f: Callable[[complex], complex], tol: float = 1e-12) -> bool:
    return bool(is_symplectic(quadrature_matrix(f), tol=tol))


@dataclass
class ChannelRun:
    t: np.ndarray
    source: np.ndarray
    clone: np.ndarray
    anticlone: np.ndarray

    def source_estimates(self, cfg: FwmConfig):
        """Source reconstructed from each output channel with the nominal gains."""
        return self.clone / cfg.g_clone, np.conj(self.anticlone / cfg.g_anticlone)

    def to_csv(self) -> str:
        lines = ["t,source_re,source_im,clone_re,clone_im,anticlone_re,anticlone_im"]
        for row in zip(self.t, self.source, self.clone, self.anticlone):
            t, s, c, a = row
            lines.append(",".join(f"{v:.17g}" for v in (t, s.real, s.imag, c.real, c.imag,
                                                        a.real, a.imag)))
        return "\n".join(lines) + "\n"


def pump_noise_series(n: int, std: float, seed: int) -> np.ndarray:
    """Real relative pump fluctuations ``eta(t)`` for :func:`modulated_run`."""
    return np.random.default_rng(seed).normal(0.0, std, n)


def modulated_run(A1_series, cfg: FwmConfig, geom: Optional[BeamGeometry] = None, t=None,
                  pump_noise=None) -> ChannelRun:
    """Push a slowly modulated signal through the mixer sample by sample.

    ``pump_noise`` multiplies both gains by ``1 + eta(t)``.  ``geom`` only
    serves to check the geometry is valid; the amplitude map does not depend
    on it.
    """
    A1 = np.asarray(A1_series, dtype=complex).ravel()
    if A1.size == 0:
        raise ValueError("signal series is empty")
    t = np.arange(A1.size, dtype=float) if t is None else np.asarray(t, dtype=float)
    if t.shape != A1.shape:
        raise ValueError("t and signal series differ in length")
    scale = np.ones(A1.size)
    if pump_noise is not None:
        eta = np.asarray(pump_noise)
        if eta.shape != A1.shape:
            raise ValueError("pump noise and signal series differ in length")
        scale = 1.0 + eta
    clone = cfg.g_clone * scale * A1
    anticlone = cfg.g_anticlone * scale * np.conj(A1)
    return ChannelRun(t, A1.copy(), clone, anticlone)
