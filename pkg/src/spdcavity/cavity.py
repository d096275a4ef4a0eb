"""
Round-trip assembly and input-output solution of the two-mirror cavity.

Light entering through the output mirror travels left through rotator,
crystal, absorber and delay, is reflected by the end mirror and returns
through delay, absorber, (transparent) crystal and rotator.  The round trip
is assembled by pushing symbolic intracavity operators through the element
maps; the loop is then closed with the output-mirror boundary condition in
the doubled space ``(x, x^dagger)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .bogoliubov import (
    INPUT_BASIS,
    BogoliubovMap,
    ModeBasis,
    OperatorExpansion,
    apply_coefficients,
    commutator,
    dagger_coefficients,
)
from .elements import (
    ParameterError,
    absorber_relations,
    check_gain,
    check_reflectivity,
    check_transmission,
    crystal_relations,
    delay_relations,
    left_mirror_relations,
    rotator_relations,
)

__all__ = [
    "CavityParams",
    "RoundTripRelation",
    "InputOutputSolution",
    "SingularAtThreshold",
    "ROUND_TRIP_BASIS",
    "build_round_trip",
    "round_trip_closed_form",
    "noise_closed_form",
    "solve_input_output",
    "noise_commutators",
]

#: Basis used while assembling the round trip: the unknown left-travelling
#: operators at the output mirror plus the two absorber reservoirs.
ROUND_TRIP_BASIS = ModeBasis(("a_1L", "b_1L", "f_L_in", "f_R_in"))

CONDITION_LIMIT = 1e12


class SingularAtThreshold(ArithmeticError):
    """The cavity is at or above the oscillation threshold; no stationary solution."""


@dataclass(frozen=True)
class CavityParams:
    """
    Physical parameters of the cavity.

    Attributes
    ----------
    G : crystal gain, ``G >= 1``
    R : output mirror reflectivity, ``0 <= R < 1``
    t : absorber amplitude transmission, ``0 <= t <= 1``
    phi : rotator angle per pass [rad]
    theta : single-pass phase ``omega L / c`` [rad]
    """

    G: float = 1.0
    R: float = 0.0
    t: float = 1.0
    phi: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "G", check_gain(self.G))
        object.__setattr__(self, "R", check_reflectivity(self.R))
        object.__setattr__(self, "t", check_transmission(self.t))
        for name in ("phi", "theta"):
            x = float(getattr(self, name))
            if not math.isfinite(x):
                raise ParameterError(f"{name} must be finite, got {x}")
            object.__setattr__(self, name, x)

    @property
    def threshold_gain(self) -> float:
        """Resonant oscillation threshold ``(1 + R) / (2 sqrt R)``; infinite for R = 0."""
        if self.R == 0.0:
            return math.inf
        return (1.0 + self.R) / (2.0 * math.sqrt(self.R))

    @property
    def critical_transmission(self) -> float:
        s = abs(math.sin(2.0 * self.phi))
        return math.sqrt((1.0 - s) / (1.0 + s))

    def cold(self) -> "CavityParams":
        return replace(self, G=1.0)

    def as_dict(self) -> dict:
        return {"G": self.G, "R": self.R, "t": self.t, "phi": self.phi, "theta": self.theta}


@dataclass(frozen=True, eq=False)
class RoundTripRelation:
    """
    ``x_1R = A (x_1L, x_1L^dagger) + noise`` in doubled form.

    ``A`` is 4x4 on ``(a_1L, b_1L, a_1L^dagger, b_1L^dagger)``; ``noise`` holds
    ``(f_a, f_b, f_a^dagger, f_b^dagger)`` expanded over :data:`INPUT_BASIS`.
    """

    A: np.ndarray
    noise: tuple[OperatorExpansion, ...]

    @property
    def annihilation_block(self) -> np.ndarray:
        return self.A[:2, :2]

    @property
    def creation_block(self) -> np.ndarray:
        return self.A[:2, 2:]

    def noise_coefficients(self) -> np.ndarray:
        return np.stack([f.coefficients for f in self.noise])


def _round_trip_maps(p: CavityParams, left_mirror: BogoliubovMap | None):
    return (
        rotator_relations(p.phi, "left"),
        crystal_relations(p.G, "left"),
        absorber_relations(p.t, "left"),
        delay_relations(p.theta),
        left_mirror if left_mirror is not None else left_mirror_relations(),
        delay_relations(p.theta),
        absorber_relations(p.t, "right"),
        crystal_relations(p.G, "right"),
        rotator_relations(p.phi, "right"),
    )


def build_round_trip(
    p: CavityParams, left_mirror: BogoliubovMap | None = None
) -> RoundTripRelation:
    """
    Assemble the round trip from the element relations.

    The left-pass reservoir input is referenced at the output-mirror plane,
    i.e. the absorber sees ``-exp(-2 i theta) f_L_in``.  This absorbs the
    return-trip phase into the reservoir mode; it is a unitary relabelling
    of an independent vacuum mode and leaves every moment unchanged.

    ``left_mirror`` replaces the end-mirror relation (fault injection).
    """
    (rot_l, cry_l, abs_l, delay, mirror, delay_r, abs_r, cry_r, rot_r) = _round_trip_maps(
        p, left_mirror
    )
    n = len(ROUND_TRIP_BASIS)
    eye = np.eye(2 * n, dtype=complex)
    x = eye[[0, 1]]  # a_1L, b_1L
    f_left = -cmath.exp(-2j * p.theta) * eye[2]
    f_right = eye[3]

    x = apply_coefficients(rot_l.U, rot_l.V, x)
    x = apply_coefficients(cry_l.U, cry_l.V, x)
    a, _ = apply_coefficients(abs_l.U, abs_l.V, np.stack([x[0], f_left]))
    x = np.stack([a, x[1]])
    x = apply_coefficients(delay.U, delay.V, x)
    x = apply_coefficients(mirror.U, mirror.V, x)
    x = apply_coefficients(delay_r.U, delay_r.V, x)
    a, _ = apply_coefficients(abs_r.U, abs_r.V, np.stack([x[0], f_right]))
    x = np.stack([a, x[1]])
    x = apply_coefficients(cry_r.U, cry_r.V, x)
    x = apply_coefficients(rot_r.U, rot_r.V, x)

    # columns: u over (a_1L, b_1L), v over (a_1L, b_1L)
    Ga, Gc = x[:, 0:2], x[:, n : n + 2]
    A = np.block([[Ga, Gc], [Gc.conj(), Ga.conj()]])

    noise_rows = np.zeros_like(x)
    noise_rows[:, 2:n] = x[:, 2:n]
    noise_rows[:, n + 2 :] = x[:, n + 2 :]
    noise_rows = np.concatenate([noise_rows, dagger_coefficients(noise_rows)])
    noise = tuple(OperatorExpansion.from_coefficients(INPUT_BASIS, row) for row in noise_rows)
    return RoundTripRelation(A, noise)


def round_trip_closed_form(p: CavityParams) -> tuple[np.ndarray, np.ndarray]:
    """
    Annihilation and creation blocks of the round trip in closed form.

    With ``gamma_j = exp(2 i theta) (t^2 - (-1)^j) / 2``,
    ``S_j = gamma_j sin 2 phi`` and ``C_ij^+- = gamma_i cos 2 phi +- gamma_j``::

        Ga = -G       [[C_12^+,  S_1 ], [-S_1,   C_12^-]]
        Gc = sqrt(G^2-1) [[S_2, -C_21^+], [C_21^-, S_2   ]]
    """
    e = cmath.exp(2j * p.theta)
    t2 = p.t * p.t
    gamma = {1: e * (t2 + 1.0) / 2.0, 2: e * (t2 - 1.0) / 2.0}
    c2, s2 = math.cos(2 * p.phi), math.sin(2 * p.phi)
    S = {j: gamma[j] * s2 for j in (1, 2)}

    def C(i, j, sign):
        return gamma[i] * c2 + sign * gamma[j]

    Ga = -p.G * np.array([[C(1, 2, +1), S[1]], [-S[1], C(1, 2, -1)]])
    Gc = math.sqrt(p.G**2 - 1.0) * np.array([[S[2], -C(2, 1, +1)], [C(2, 1, -1), S[2]]])
    return Ga, Gc


def noise_closed_form(p: CavityParams) -> tuple[OperatorExpansion, OperatorExpansion]:
    """``(f_a, f_b) = r (t f_L_in + f_R_in) (cos phi, -sin phi)``."""
    r = 1j * math.sqrt(1.0 - p.t**2)
    common = r * (p.t * INPUT_BASIS.mode("f_L_in") + INPUT_BASIS.mode("f_R_in"))
    return math.cos(p.phi) * common, -math.sin(p.phi) * common


def noise_commutators(p: CavityParams) -> np.ndarray:
    """
    Table ``[f_i, f_j^dagger]`` for ``i, j`` in ``(a, b)``.

    Evaluated from the assembled noise expansions, not from a formula.
    """
    f = build_round_trip(p).noise
    return np.array([[commutator(f[i], f[j]) for j in range(2)] for i in range(2)])


@dataclass(frozen=True, eq=False)
class InputOutputSolution:
    """
    Output and intracavity operators over :data:`INPUT_BASIS`.

    ``coefficients`` is the 2x8 table of output coefficients on the formal
    symbols ``(a_in, b_in, a_in^+, b_in^+, f_a, f_b, f_a^+, f_b^+)``.
    """

    params: CavityParams
    out_a: OperatorExpansion
    out_b: OperatorExpansion
    intracavity: dict
    coefficients: np.ndarray
    condition_number: float
    spectral_radius: float

    SYMBOLS = ("a_in", "b_in", "a_in^+", "b_in^+", "f_a", "f_b", "f_a^+", "f_b^+")


def _closed_loop(p: CavityParams, rt: RoundTripRelation):
    rho = -math.sqrt(p.R)
    T = 1j * math.sqrt(1.0 - p.R)
    loop = rho * rt.A
    radius = float(np.max(np.abs(np.linalg.eigvals(loop))))
    K = np.eye(4) - loop
    cond = float(np.linalg.cond(K))
    if radius >= 1.0 or not math.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularAtThreshold(
            f"no stationary state for {p}: round-trip gain {radius:.12g}, "
            f"closed-loop condition number {cond:.3g} "
            f"(resonant threshold G = {p.threshold_gain:.9g})"
        )
    return rho, T, K, cond, radius


def solve_input_output(
    p: CavityParams, round_trip: RoundTripRelation | None = None
) -> InputOutputSolution:
    """
    Express the output (and intracavity) operators in terms of the inputs.

    Solves ``X = rho (A X + F) + T_d IN`` for the doubled intracavity vector
    ``X`` with the inputs and noise kept as formal symbols, then substitutes
    their expansions over :data:`INPUT_BASIS`.

    Raises
    ------
    SingularAtThreshold
        If the loop gain reaches unity or the closed-loop matrix is
        numerically singular.
    """
    rt = round_trip if round_trip is not None else build_round_trip(p)
    rho, T, K, cond, radius = _closed_loop(p, rt)

    T_d = np.diag([T, T, np.conj(T), np.conj(T)])
    # X over formal symbols (IN_d, F_d): 4 x 8
    X = np.linalg.solve(K, np.hstack([T_d, rho * np.eye(4)]))
    x_right = rt.A @ X + np.hstack([np.zeros((4, 4)), np.eye(4)])
    out_formal = T * x_right[:2] + np.hstack([rho * np.eye(2), np.zeros((2, 6))])

    n = len(INPUT_BASIS)
    inputs = np.zeros((4, 2 * n), dtype=complex)
    inputs[0, 0] = inputs[1, 1] = 1.0
    inputs[2:] = dagger_coefficients(inputs[:2])
    symbols = np.vstack([inputs, rt.noise_coefficients()])

    out = out_formal @ symbols
    X_rows = X @ symbols
    R_rows = x_right @ symbols
    # conjugate rows must be the daggers of the annihilation rows
    assert np.allclose(X_rows[2:], dagger_coefficients(X_rows[:2]), rtol=0, atol=1e-9)

    def op(row):
        return OperatorExpansion.from_coefficients(INPUT_BASIS, row)

    intracavity = {
        "a_1L": op(X_rows[0]),
        "b_1L": op(X_rows[1]),
        "a_1R": op(R_rows[0]),
        "b_1R": op(R_rows[1]),
    }
    return InputOutputSolution(
        params=p,
        out_a=op(out[0]),
        out_b=op(out[1]),
        intracavity=intracavity,
        coefficients=out_formal,
        condition_number=cond,
        spectral_radius=radius,
    )
