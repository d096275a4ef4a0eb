"""Randomized invariant suite run by ``spdcavity check``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .analysis import (
    CRITICAL_BAND,
    critical_transmission,
    k_factor,
    k_factor_closed_form,
    orthogonal_mode_closed_form,
    photon_numbers,
)
from .bogoliubov import BogoliubovMap, commutator, vacuum_photon_number
from .cavity import (
    CavityParams,
    build_round_trip,
    noise_closed_form,
    round_trip_closed_form,
    solve_input_output,
)
from .elements import (
    absorber_relations,
    crystal_relations,
    delay_relations,
    left_mirror_relations,
    right_mirror_relations,
    rotator_relations,
)

FAULTS = ("left-mirror-sign",)


@dataclass(frozen=True)
class CheckResult:
    name: str
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.deviation <= self.tolerance)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<30s} max deviation {self.deviation:.3e}  (tol {self.tolerance:.0e})"


def random_params(rng: np.random.Generator, sub_threshold: bool = True) -> CavityParams:
    R = rng.uniform(0.01, 0.95)
    G_thr = (1 + R) / (2 * math.sqrt(R))
    G = 1 + rng.uniform(0, 0.9) * (G_thr - 1) if sub_threshold else rng.uniform(1, 3)
    return CavityParams(
        G=G,
        R=R,
        t=rng.uniform(0, 1),
        phi=rng.uniform(-math.pi, math.pi),
        theta=rng.uniform(-math.pi, math.pi),
    )


def output_commutator_deviation(p: CavityParams, left_mirror: BogoliubovMap | None = None) -> float:
    """Worst violation of the four output commutation relations."""
    sol = solve_input_output(p, build_round_trip(p, left_mirror=left_mirror))
    a, b = sol.out_a, sol.out_b
    return max(
        abs(commutator(a, a) - 1),
        abs(commutator(b, b) - 1),
        abs(commutator(a, b)),
        abs(commutator(a, b.dagger())),
    )


def structural_deviation(p: CavityParams, left_mirror: BogoliubovMap | None = None) -> float:
    rt = build_round_trip(p, left_mirror=left_mirror)
    Ga, Gc = round_trip_closed_form(p)
    fa, fb = noise_closed_form(p)
    return float(
        max(
            np.max(np.abs(rt.annihilation_block - Ga)),
            np.max(np.abs(rt.creation_block - Gc)),
            np.max(np.abs(rt.noise[0].coefficients - fa.coefficients)),
            np.max(np.abs(rt.noise[1].coefficients - fb.coefficients)),
        )
    )


def run_invariants(
    seed: int = 0, samples: int = 100, fault: str | None = None
) -> list[CheckResult]:
    """Run every invariant on ``samples`` random parameter tuples drawn from ``seed``."""
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}")
    mirror = BogoliubovMap.passive(np.eye(2)) if fault == "left-mirror-sign" else None
    rng = np.random.default_rng(seed)
    params = [random_params(rng) for _ in range(samples)]

    dev_elements = 0.0
    for p in params:
        maps = (
            right_mirror_relations(p.R),
            rotator_relations(p.phi),
            crystal_relations(p.G),
            absorber_relations(p.t),
            delay_relations(p.theta),
            left_mirror_relations(),
        )
        dev_elements = max(dev_elements, *(m.canonical_deviation() for m in maps))

    dev_struct = max(structural_deviation(p, mirror) for p in params)

    dev_noise = 0.0
    for p in params:
        f = build_round_trip(p, left_mirror=mirror).noise
        k = 1 - p.t**4
        c, s = math.cos(p.phi), math.sin(p.phi)
        expected = np.array([[k * c * c, -k * s * c], [-k * s * c, k * s * s]])
        got = np.array([[commutator(f[i], f[j]) for j in range(2)] for i in range(2)])
        dev_noise = max(dev_noise, float(np.max(np.abs(got - expected))))

    dev_comm = max(output_commutator_deviation(p, mirror) for p in params)

    dev_closed = 0.0
    for p in params:
        q = CavityParams(G=p.G, R=p.R, theta=p.theta)
        sol = solve_input_output(q, build_round_trip(q, left_mirror=mirror))
        exact = orthogonal_mode_closed_form(q.G, q.R, q.theta)
        n = vacuum_photon_number(sol.out_a)
        dev_closed = max(dev_closed, abs(n - exact) / max(exact, 1e-300) if exact else n)

    dev_k = 0.0
    for p in params:
        if abs(p.t - critical_transmission(p.phi)) <= CRITICAL_BAND:
            continue
        dev_k = max(dev_k, abs(k_factor(p).K / k_factor_closed_form(p.t, p.phi) - 1))

    cols = np.array([[p.G, p.R, p.t, p.phi, p.theta] for p in params]).T
    dev_kernel = 0.0
    for backend in kernels.BACKENDS:
        n_a, n_b, K, _, _ = kernels.evaluate_points(*cols, backend=backend)
        for i, p in enumerate(params):
            ref = photon_numbers(p)
            for got, want in ((n_a[i], ref.n_a), (n_b[i], ref.n_b)):
                dev_kernel = max(dev_kernel, abs(got - want) / max(want, 1e-300) if want else got)
            if abs(p.t - critical_transmission(p.phi)) > CRITICAL_BAND:
                dev_kernel = max(dev_kernel, abs(K[i] / k_factor(p).K - 1))

    return [
        CheckResult("element canonicality", dev_elements, 1e-12),
        CheckResult("round-trip closed form", dev_struct, 1e-12),
        CheckResult("noise commutators", dev_noise, 1e-12),
        CheckResult("output commutators", dev_comm, 1e-10),
        CheckResult("orthogonal-mode photon number", dev_closed, 1e-10),
        CheckResult("K factor closed form", dev_k, 1e-8),
        CheckResult("sweep kernel agreement", dev_kernel, 1e-9),
    ]
