"""Independent reference computations used by the tests."""

import math

import numpy as np

from spdcavity.bogoliubov import INPUT_BASIS, apply_map, vacuum_cross_moment, vacuum_photon_number
from spdcavity.elements import (
    absorber_relations,
    crystal_relations,
    delay_relations,
    left_mirror_relations,
    right_mirror_relations,
    rotator_relations,
)


def propagate_round_trip(p, a, b):
    """Push intracavity operators at the output mirror once around the cavity."""
    fL, fR = INPUT_BASIS.mode("f_L_in"), INPUT_BASIS.mode("f_R_in")
    a, b = apply_map(rotator_relations(p.phi, "left"), [a, b])
    a, b = apply_map(crystal_relations(p.G, "left"), [a, b])
    a, _ = apply_map(absorber_relations(p.t, "left"), [a, fL])
    a, b = apply_map(delay_relations(p.theta), [a, b])
    a, b = apply_map(left_mirror_relations(), [a, b])
    a, b = apply_map(delay_relations(p.theta), [a, b])
    a, _ = apply_map(absorber_relations(p.t, "right"), [a, fR])
    a, b = apply_map(crystal_relations(p.G, "right"), [a, b])
    return apply_map(rotator_relations(p.phi, "right"), [a, b])


def brute_force_outputs(p, round_trips=400):
    """
    Stationary output operators by repeated substitution of the element
    relations (the cavity filled round trip by round trip from empty),
    without any closed-loop linear solve.
    """
    mirror = right_mirror_relations(p.R)
    a_in, b_in = INPUT_BASIS.mode("a_in"), INPUT_BASIS.mode("b_in")
    zero = INPUT_BASIS.zero()
    a_1L = apply_map(mirror, [zero, a_in])[1]
    b_1L = apply_map(mirror, [zero, b_in])[1]
    for _ in range(round_trips):
        a_1R, b_1R = propagate_round_trip(p, a_1L, b_1L)
        a_out, a_1L = apply_map(mirror, [a_1R, a_in])
        b_out, b_1L = apply_map(mirror, [b_1R, b_in])
    return a_out, b_out


def brute_force_photon_numbers(p, round_trips=400):
    a, b = brute_force_outputs(p, round_trips)
    return vacuum_photon_number(a), vacuum_photon_number(b), vacuum_cross_moment(a, b)


def eq21(G, R, theta):
    """Orthogonal-mode photon number written out independently of the package."""
    return (G * G - 1) * ((1 - R) / (1 - 2 * G * math.sqrt(R) * math.cos(2 * theta) + R)) ** 2


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
