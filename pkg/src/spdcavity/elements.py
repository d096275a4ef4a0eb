"""
Scattering relations of the intracavity elements.

Each constructor returns a :class:`BogoliubovMap` over a small set of ports.
Port orders:

* right mirror: ``(x_1R, x_in) -> (x_out, x_1L)``, one copy per polarization
* rotator, crystal, delay, left mirror: ``(a, b)``
* absorber: ``(a, f)`` where ``f`` is the reservoir port; ``b`` passes through

Operator phases are referenced at the output mirror and the elements are
infinitely thin, so the only propagation phase is in :func:`delay_relations`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .bogoliubov import BogoliubovMap

__all__ = [
    "ParameterError",
    "ElementSpec",
    "right_mirror_relations",
    "rotator_relations",
    "crystal_relations",
    "absorber_relations",
    "delay_relations",
    "left_mirror_relations",
]

Direction = Literal["left", "right"]


class ParameterError(ValueError):
    """A physical parameter is outside its admissible range."""


def _finite(name: str, x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ParameterError(f"{name} must be finite, got {x}")
    return x


def check_reflectivity(R: float) -> float:
    R = _finite("R", R)
    if not 0.0 <= R < 1.0:
        raise ParameterError(f"mirror reflectivity R must satisfy 0 <= R < 1, got {R}")
    return R


def check_gain(G: float) -> float:
    G = _finite("G", G)
    if G < 1.0:
        raise ParameterError(f"crystal gain G must satisfy G >= 1, got {G}")
    return G


def check_transmission(t: float) -> float:
    t = _finite("t", t)
    if not 0.0 <= t <= 1.0:
        raise ParameterError(f"absorber transmission t must satisfy 0 <= t <= 1, got {t}")
    return t


def _check_direction(direction: str) -> None:
    if direction not in ("left", "right"):
        raise ValueError(f"direction must be 'left' or 'right', got {direction!r}")


def right_mirror_relations(R: float) -> BogoliubovMap:
    """
    Partially reflecting output mirror for one polarization.

    ``x_out = T x_1R + rho x_in`` and ``x_1L = rho x_1R + T x_in`` with
    ``rho = -sqrt(R)`` and ``T = i sqrt(1 - R)``.
    """
    R = check_reflectivity(R)
    rho, T = -math.sqrt(R), 1j * math.sqrt(1.0 - R)
    return BogoliubovMap.passive([[T, rho], [rho, T]])


def rotator_relations(phi: float, direction: Direction = "left") -> BogoliubovMap:
    """Faraday rotator: same rotation sense on both passes, 2 phi per round trip."""
    phi = _finite("phi", phi)
    _check_direction(direction)
    c, s = math.cos(phi), math.sin(phi)
    return BogoliubovMap.passive([[c, s], [-s, c]])


def crystal_relations(G: float, direction: Direction = "left") -> BogoliubovMap:
    """
    Type-II parametric amplifier, phase matched for left-travelling light only.

    ``a' = G a + sqrt(G^2 - 1) b^dagger``, ``b' = G b + sqrt(G^2 - 1) a^dagger``.
    The right pass is transparent.
    """
    G = check_gain(G)
    _check_direction(direction)
    if direction == "right":
        return BogoliubovMap.identity(2)
    g = math.sqrt(G * G - 1.0)
    return BogoliubovMap(G * np.eye(2), [[0.0, g], [g, 0.0]])


def absorber_relations(t: float, direction: Direction = "left") -> BogoliubovMap:
    """Beam splitter on mode ``a`` and its reservoir port ``f``; ``r = i sqrt(1 - t^2)``."""
    t = check_transmission(t)
    _check_direction(direction)
    r = 1j * math.sqrt(1.0 - t * t)
    return BogoliubovMap.passive([[t, r], [r, t]])


def delay_relations(theta: float) -> BogoliubovMap:
    """Free propagation over the cavity length: phase ``exp(i theta)`` on both modes."""
    theta = _finite("theta", theta)
    return BogoliubovMap.passive(np.exp(1j * theta) * np.eye(2))


def left_mirror_relations() -> BogoliubovMap:
    """Perfect end mirror: sign flip on both polarizations."""
    return BogoliubovMap.passive(-np.eye(2))


_BUILDERS = {
    "right_mirror": ("R", lambda x, d: right_mirror_relations(x)),
    "rotator": ("phi", rotator_relations),
    "crystal": ("G", crystal_relations),
    "absorber": ("t", absorber_relations),
    "delay": ("theta", lambda x, d: delay_relations(x)),
    "left_mirror": (None, lambda x, d: left_mirror_relations()),
}


@dataclass(frozen=True)
class ElementSpec:
    """One element of the cavity with its scalar parameter."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _BUILDERS:
            raise ParameterError(f"unknown element kind {self.kind!r}")
        name = _BUILDERS[self.kind][0]
        if name is not None and name not in self.params:
            raise ParameterError(f"{self.kind} needs parameter {name!r}")
        # validate eagerly so a bad spec never reaches the solver
        self.relations("left")

    def relations(self, direction: Direction = "left") -> BogoliubovMap:
        name, build = _BUILDERS[self.kind]
        return build(None if name is None else self.params[name], direction)
