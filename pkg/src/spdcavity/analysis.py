"""
Observables and closed-form reference values.

Photon numbers come from the full input-output solution.  The Petermann K
factor is computed from the biorthogonal eigenvectors of the cold-cavity
round-trip matrix; the closed forms for the locked and unlocked regimes are
kept alongside as cross-checks.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .bogoliubov import vacuum_cross_moment, vacuum_photon_number
from .cavity import CavityParams, build_round_trip, solve_input_output
from .elements import ParameterError, check_reflectivity

__all__ = [
    "DivergentAtThreshold",
    "Regime",
    "RoundTripMatrix",
    "KFactorResult",
    "PhotonNumbers",
    "photon_numbers",
    "orthogonal_mode_closed_form",
    "emission_modification_factor",
    "k_factor",
    "k_factor_closed_form",
    "critical_transmission",
    "threshold_gain",
    "CRITICAL_BAND",
]

#: Half-width in t of the band around t_c that is flagged as critical.
CRITICAL_BAND = 1e-3
#: K above this (overlap below its inverse) is reported as divergent.
OVERLAP_GUARD = 1e-12
K_CONSISTENCY = 1e-9


class DivergentAtThreshold(ArithmeticError):
    """Closed-form photon number evaluated at (or beyond) its pole."""


class Regime(str, enum.Enum):
    LOCKED = "Locked"
    UNLOCKED = "Unlocked"
    CRITICAL = "Critical"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class PhotonNumbers:
    n_a: float
    n_b: float
    correlation: complex  # <a_out^+ b_out>

    @property
    def total(self) -> float:
        return self.n_a + self.n_b

    def __iter__(self):
        return iter((self.n_a, self.n_b, self.total))


def photon_numbers(p: CavityParams) -> PhotonNumbers:
    """Vacuum-input output photon numbers ``n_a``, ``n_b`` and their sum."""
    sol = solve_input_output(p)
    return PhotonNumbers(
        vacuum_photon_number(sol.out_a),
        vacuum_photon_number(sol.out_b),
        vacuum_cross_moment(sol.out_a, sol.out_b),
    )


def _bracket(G: float, R: float, theta: float) -> float:
    denom = 1.0 - 2.0 * G * math.sqrt(R) * math.cos(2.0 * theta) + R
    if denom <= 1e-12:
        raise DivergentAtThreshold(
            f"G={G!r}, R={R!r}, theta={theta!r} is at or beyond the oscillation threshold"
        )
    return (1.0 - R) / denom


def orthogonal_mode_closed_form(G: float, R: float, theta: float) -> float:
    """
    Output photon number per mode with absorber and rotator removed.

    ``(G^2 - 1) [(1 - R) / (1 - 2 G sqrt(R) cos 2 theta + R)]^2``
    """
    CavityParams(G=G, R=R, theta=theta)
    return (G * G - 1.0) * _bracket(G, R, theta) ** 2


def emission_modification_factor(R: float, theta: float) -> float:
    """The bracket of :func:`orthogonal_mode_closed_form` at ``G = 1``."""
    check_reflectivity(R)
    return _bracket(1.0, R, theta)


def threshold_gain(R: float) -> float:
    """Gain at which the resonant cavity starts to oscillate."""
    R = check_reflectivity(R)
    if R == 0.0:
        raise ParameterError("R = 0 means no cavity feedback and no oscillation threshold")
    return (1.0 + R) / (2.0 * math.sqrt(R))


def critical_transmission(phi: float) -> float:
    """Absorber transmission ``t_c(phi)`` at which the two cold-cavity eigenmodes coalesce."""
    s = abs(math.sin(2.0 * float(phi)))
    return math.sqrt((1.0 - s) / (1.0 + s))


def k_factor_closed_form(t: float, phi: float) -> float:
    """Locked (``t < t_c``) and unlocked (``t > t_c``) closed forms; ``inf`` at ``t_c``."""
    a = (1.0 - t * t) ** 2
    b = (1.0 + t * t) ** 2 * math.sin(2.0 * phi) ** 2
    if a == 0.0 or b == 0.0:
        return 1.0
    if abs(a - b) <= 1e-15 * max(a, b):
        return math.inf
    # a > b exactly when t < t_c
    return a / (a - b) if a > b else b / (b - a)


@dataclass(frozen=True, eq=False)
class RoundTripMatrix:
    """Cold-cavity classical round-trip matrix with its biorthogonal eigensystem."""

    M: np.ndarray
    eigenvalues: np.ndarray
    right: np.ndarray  # columns e_n
    left: np.ndarray  # columns ebar_n, with ebar_n^+ M = lambda_n ebar_n^+

    @classmethod
    def from_params(cls, p: CavityParams) -> "RoundTripMatrix":
        return cls.from_matrix(build_round_trip(p.cold()).annihilation_block)

    @classmethod
    def from_matrix(cls, M) -> "RoundTripMatrix":
        M = np.array(M, dtype=complex)
        w, vl, vr = scipy.linalg.eig(M, left=True, right=True)
        return cls(M, w, vr, vl)

    def is_normal(self, tol: float = 1e-12) -> bool:
        M = self.M
        scale = max(1.0, float(np.max(np.abs(M))) ** 2)
        return float(np.max(np.abs(M @ M.conj().T - M.conj().T @ M))) <= tol * scale

    def overlaps(self) -> np.ndarray:
        """Per mode: ``(e^+ e, ebar^+ ebar, |ebar^+ e|^2)``."""
        rows = []
        for n in range(len(self.eigenvalues)):
            e, eb = self.right[:, n], self.left[:, n]
            rows.append(
                (np.vdot(e, e).real, np.vdot(eb, eb).real, abs(np.vdot(eb, e)) ** 2)
            )
        return np.array(rows)

    def petermann_factors(self) -> np.ndarray:
        """``K_n`` for each eigenmode; ``inf`` where the overlap guard trips."""
        out = []
        for norm_r, norm_l, overlap in self.overlaps():
            if overlap < OVERLAP_GUARD * norm_r * norm_l:
                out.append(math.inf)
            else:
                out.append(norm_r * norm_l / overlap)
        return np.array(out)


@dataclass(frozen=True)
class KFactorResult:
    K: float  # math.inf when divergent
    regime: Regime
    t_c: float
    closed_form: float

    @property
    def divergent(self) -> bool:
        return math.isinf(self.K)


def k_factor(p: CavityParams, critical_band: float = CRITICAL_BAND) -> KFactorResult:
    """
    Petermann excess-noise factor of the cold cavity.

    Computed as ``(e^+ e)(ebar^+ ebar) / |ebar^+ e|^2`` from the right and
    left eigenvectors.  Both eigenmodes of a 2x2 matrix carry the same K,
    which is asserted outside the critical band.  The gain ``G`` is ignored.
    """
    rtm = RoundTripMatrix.from_params(p)
    Ks = rtm.petermann_factors()
    t_c = critical_transmission(p.phi)
    near = abs(p.t - t_c) <= critical_band and not rtm.is_normal()

    if np.all(np.isfinite(Ks)):
        K = float(np.mean(Ks))
        if not near and abs(Ks[0] - Ks[1]) > K_CONSISTENCY * K:
            raise ArithmeticError(f"eigenmode K factors disagree: {Ks} at {p}")
    else:
        K = math.inf

    if near or math.isinf(K):
        regime = Regime.CRITICAL
    elif p.t < t_c:
        regime = Regime.LOCKED
    else:
        regime = Regime.UNLOCKED
    return KFactorResult(K, regime, t_c, k_factor_closed_form(p.t, p.phi))
