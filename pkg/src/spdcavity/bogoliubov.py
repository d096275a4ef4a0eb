"""
Linear algebra of bosonic operator expansions.

An operator is stored as two coefficient vectors over a fixed basis of
independent input modes m_k::

    o = sum_k u_k m_k + v_k m_k^dagger

Maps between vectors of such operators are Bogoliubov pairs (U, V)::

    out_i = sum_j U_ij in_j + V_ij in_j^dagger
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "ModeBasis",
    "INPUT_BASIS",
    "OperatorExpansion",
    "BogoliubovMap",
    "BasisMismatchError",
    "dagger",
    "commutator",
    "vacuum_photon_number",
    "vacuum_cross_moment",
    "apply_map",
    "apply_coefficients",
    "compose",
]

ALGEBRA_TOL = 1e-12


class BasisMismatchError(ValueError):
    """Operands live on different mode bases or have incompatible sizes."""


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ModeBasis:
    """Ordered, immutable list of independent input mode names."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if len(labels) < 1:
            raise ValueError("a mode basis needs at least one mode")
        if len(set(labels)) != len(labels):
            raise ValueError(f"mode labels must be unique, got {labels}")

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def mode(self, label: str) -> "OperatorExpansion":
        """Annihilation operator of a single basis mode."""
        u = np.zeros(len(self), dtype=complex)
        u[self.index(label)] = 1.0
        return OperatorExpansion(self, u, np.zeros(len(self), dtype=complex))

    def zero(self) -> "OperatorExpansion":
        n = len(self)
        return OperatorExpansion(self, np.zeros(n, complex), np.zeros(n, complex))


INPUT_BASIS = ModeBasis(("a_in", "b_in", "f_L_in", "f_R_in"))


@dataclass(frozen=True, eq=False)
class OperatorExpansion:
    """Operator written as coefficients over annihilators (u) and creators (v)."""

    basis: ModeBasis
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u, v = _frozen(self.u), _frozen(self.v)
        n = len(self.basis)
        if u.shape != (n,) or v.shape != (n,):
            raise BasisMismatchError(
                f"coefficient shapes {u.shape}, {v.shape} do not match basis size {n}"
            )
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise ValueError("operator coefficients must be finite")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @classmethod
    def from_coefficients(cls, basis: ModeBasis, row) -> "OperatorExpansion":
        """Build from a stacked row ``[u, v]`` of length ``2 n``."""
        n = len(basis)
        row = np.asarray(row, dtype=complex)
        return cls(basis, row[:n], row[n:])

    @property
    def coefficients(self) -> np.ndarray:
        return np.concatenate([self.u, self.v])

    def dagger(self) -> "OperatorExpansion":
        return OperatorExpansion(self.basis, self.v.conj(), self.u.conj())

    def allclose(self, other: "OperatorExpansion", atol: float = ALGEBRA_TOL) -> bool:
        _check_basis(self, other)
        return bool(
            np.allclose(self.u, other.u, rtol=0, atol=atol)
            and np.allclose(self.v, other.v, rtol=0, atol=atol)
        )

    def __add__(self, other: "OperatorExpansion") -> "OperatorExpansion":
        _check_basis(self, other)
        return OperatorExpansion(self.basis, self.u + other.u, self.v + other.v)

    def __sub__(self, other: "OperatorExpansion") -> "OperatorExpansion":
        _check_basis(self, other)
        return OperatorExpansion(self.basis, self.u - other.u, self.v - other.v)

    def __mul__(self, c: complex) -> "OperatorExpansion":
        return OperatorExpansion(self.basis, c * self.u, c * self.v)

    __rmul__ = __mul__

    def __neg__(self) -> "OperatorExpansion":
        return OperatorExpansion(self.basis, -self.u, -self.v)

    def __repr__(self) -> str:
        terms = []
        for k, label in enumerate(self.basis.labels):
            if self.u[k] != 0:
                terms.append(f"({self.u[k]:.6g}) {label}")
            if self.v[k] != 0:
                terms.append(f"({self.v[k]:.6g}) {label}^+")
        return "OperatorExpansion(" + (" + ".join(terms) or "0") + ")"


def _check_basis(*ops: OperatorExpansion) -> None:
    first = ops[0].basis
    for o in ops[1:]:
        if o.basis != first:
            raise BasisMismatchError(f"basis {o.basis.labels} != {first.labels}")


def dagger(o: OperatorExpansion) -> OperatorExpansion:
    """Hermitian conjugate: swaps and conjugates (u, v)."""
    return o.dagger()


def commutator(o1: OperatorExpansion, o2: OperatorExpansion) -> complex:
    """Return ``[o1, o2^dagger]`` for operators over independent bosonic modes."""
    _check_basis(o1, o2)
    return complex(np.dot(o1.u, o2.u.conj()) - np.dot(o1.v, o2.v.conj()))


def vacuum_photon_number(o: OperatorExpansion) -> float:
    """``<o^dagger o>`` with every basis mode in vacuum."""
    return float(np.sum(np.abs(o.v) ** 2))


def vacuum_cross_moment(o1: OperatorExpansion, o2: OperatorExpansion) -> complex:
    """``<o1^dagger o2>`` with every basis mode in vacuum."""
    _check_basis(o1, o2)
    return complex(np.dot(o1.v.conj(), o2.v))


@dataclass(frozen=True, eq=False)
class BogoliubovMap:
    """
    Linear map ``out = U in + V in^dagger`` on a vector of ports.

    Parameters
    ----------
    U, V : (m, m) complex arrays
        Annihilation and creation coupling blocks.
    """

    U: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        U, V = _frozen(self.U), _frozen(self.V)
        if U.ndim != 2 or U.shape[0] != U.shape[1] or U.shape != V.shape:
            raise BasisMismatchError(f"U {U.shape} and V {V.shape} must be equal square")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "V", V)

    @classmethod
    def identity(cls, m: int) -> "BogoliubovMap":
        return cls(np.eye(m), np.zeros((m, m)))

    @classmethod
    def passive(cls, U) -> "BogoliubovMap":
        U = np.asarray(U, dtype=complex)
        return cls(U, np.zeros_like(U))

    @property
    def ports(self) -> int:
        return self.U.shape[0]

    def doubled(self) -> np.ndarray:
        """Matrix acting on the stacked vector ``(in, in^dagger)``."""
        return np.block([[self.U, self.V], [self.V.conj(), self.U.conj()]])

    def canonical_deviation(self) -> float:
        """Largest entrywise violation of the commutator-preservation identities."""
        U, V = self.U, self.V
        d1 = U @ U.conj().T - V @ V.conj().T - np.eye(self.ports)
        d2 = U @ V.T - V @ U.T
        return float(max(np.max(np.abs(d1)), np.max(np.abs(d2))))

    def is_canonical(self, tol: float = ALGEBRA_TOL) -> bool:
        return self.canonical_deviation() <= tol

    def inverse(self) -> "BogoliubovMap":
        """Inverse of a canonical map, ``(U^dagger, -V^T)``."""
        if not self.is_canonical(1e-9):
            raise ValueError("closed-form inverse only holds for canonical maps")
        return BogoliubovMap(self.U.conj().T, -self.V.T)

    def allclose(self, other: "BogoliubovMap", atol: float = ALGEBRA_TOL) -> bool:
        return bool(
            self.U.shape == other.U.shape
            and np.allclose(self.U, other.U, rtol=0, atol=atol)
            and np.allclose(self.V, other.V, rtol=0, atol=atol)
        )

    def __matmul__(self, other: "BogoliubovMap") -> "BogoliubovMap":
        return compose(self, other)


def dagger_coefficients(C: np.ndarray) -> np.ndarray:
    """Row-wise dagger of a stack of ``[u, v]`` coefficient rows."""
    n = C.shape[-1] // 2
    return np.concatenate([C[..., n:].conj(), C[..., :n].conj()], axis=-1)


def apply_coefficients(U: np.ndarray, V: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Array kernel of :func:`apply_map` on stacked ``(m, 2n)`` coefficient rows."""
    return U @ C + V @ dagger_coefficients(C)


def apply_map(m: BogoliubovMap, ops: Sequence[OperatorExpansion]) -> list[OperatorExpansion]:
    """Push a vector of operator expansions through a Bogoliubov map."""
    if len(ops) != m.ports:
        raise BasisMismatchError(f"map has {m.ports} ports, got {len(ops)} operators")
    _check_basis(*ops)
    basis = ops[0].basis
    C = np.stack([o.coefficients for o in ops])
    out = apply_coefficients(m.U, m.V, C)
    return [OperatorExpansion.from_coefficients(basis, row) for row in out]


def compose(m2: BogoliubovMap, m1: BogoliubovMap) -> BogoliubovMap:
    """Map that applies ``m1`` first, then ``m2``."""
    if m1.ports != m2.ports:
        raise BasisMismatchError(f"cannot compose {m2.ports}-port with {m1.ports}-port map")
    U = m2.U @ m1.U + m2.V @ m1.V.conj()
    V = m2.U @ m1.V + m2.V @ m1.U.conj()
    return BogoliubovMap(U, V)
