"""Batched numpy implementation of the per-point sweep kernel."""

from __future__ import annotations

import numpy as np

CONDITION_LIMIT = 1e12
OVERLAP_GUARD = 1e-12

STATUS_OK = 0
STATUS_THRESHOLD = 1


def _dagger(C):
    n = C.shape[-1] // 2
    return np.concatenate([C[..., n:].conj(), C[..., :n].conj()], axis=-1)


def _apply(U, V, C):
    return U @ C + V @ _dagger(C)


def _mats(*rows):
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def _round_trip(G, t, phi, theta):
    """Doubled round-trip matrix (N,4,4) and noise rows (N,4,8)."""
    N = G.shape[0]
    one, zero = np.ones(N, complex), np.zeros(N, complex)
    c, s = np.cos(phi) + 0j, np.sin(phi) + 0j
    g = np.sqrt(G * G - 1.0) + 0j
    r = 1j * np.sqrt(1.0 - t * t)
    e = np.exp(1j * theta)

    rot = _mats((c, s), (-s, c))
    O = _mats((zero, zero), (zero, zero))
    crystal_U, crystal_V = _mats((G + 0j, zero), (zero, G + 0j)), _mats((zero, g), (g, zero))
    absorber = _mats((t + 0j, r), (r, t + 0j))
    delay = _mats((e, zero), (zero, e))
    mirror = _mats((-one, zero), (zero, -one))

    basis = np.broadcast_to(np.eye(8, dtype=complex), (N, 8, 8))
    x = basis[:, 0:2].copy()
    f_left = (-np.exp(-2j * theta))[:, None] * basis[:, 2]
    f_right = basis[:, 3]

    x = _apply(rot, O, x)
    x = _apply(crystal_U, crystal_V, x)
    y = _apply(absorber, O, np.stack([x[:, 0], f_left], axis=1))
    x = np.stack([y[:, 0], x[:, 1]], axis=1)
    x = _apply(delay, O, x)
    x = _apply(mirror, O, x)
    x = _apply(delay, O, x)
    y = _apply(absorber, O, np.stack([x[:, 0], f_right], axis=1))
    x = np.stack([y[:, 0], x[:, 1]], axis=1)
    x = _apply(rot, O, x)

    Ga, Gc = x[:, :, 0:2], x[:, :, 4:6]
    A = np.concatenate(
        [np.concatenate([Ga, Gc], axis=2), np.concatenate([Gc.conj(), Ga.conj()], axis=2)],
        axis=1,
    )
    noise = x.copy()
    noise[:, :, [0, 1, 4, 5]] = 0.0
    noise = np.concatenate([noise, _dagger(noise)], axis=1)
    return A, noise


def _petermann(M):
    """K from ``V^{-1}`` rows as left eigenvectors (biorthonormal to the columns of V)."""
    N = M.shape[0]
    K = np.full(N, np.inf)
    _, V = np.linalg.eig(M)
    det = np.linalg.det(V)
    ok = np.abs(det) > 0
    if np.any(ok):
        W = np.linalg.inv(V[ok])
        norm_r = np.sum(np.abs(V[ok]) ** 2, axis=1)  # per column
        norm_l = np.sum(np.abs(W) ** 2, axis=2)  # per row
        k = (norm_r * norm_l).max(axis=1)
        k[k > 1.0 / OVERLAP_GUARD] = np.inf
        K[ok] = k
    return K


def evaluate_points(G, R, t, phi, theta):
    """
    Evaluate output photon numbers and the cold-cavity K factor per point.

    Returns
    -------
    n_a, n_b, K, nonnormality : float arrays
    status : int array, ``STATUS_THRESHOLD`` where no stationary state exists
    """
    G, R, t, phi, theta = (np.ascontiguousarray(a, dtype=float) for a in (G, R, t, phi, theta))
    N = G.shape[0]
    A, noise = _round_trip(G, t, phi, theta)
    rho = -np.sqrt(R)
    T = 1j * np.sqrt(1.0 - R)

    loop = rho[:, None, None] * A
    I4 = np.eye(4)
    Kmat = I4 - loop
    radius = np.max(np.abs(np.linalg.eigvals(loop)), axis=1)
    cond = np.linalg.cond(Kmat)
    bad = ~(radius < 1.0) | ~np.isfinite(cond) | (cond > CONDITION_LIMIT)

    Kmat[bad] = I4
    T_d = np.zeros((N, 4, 4), complex)
    T_d[:, [0, 1], [0, 1]] = T[:, None]
    T_d[:, [2, 3], [2, 3]] = T.conj()[:, None]
    B = np.concatenate([T_d, rho[:, None, None] * I4], axis=2)
    X = np.linalg.solve(Kmat, B)
    right = A @ X + np.concatenate([np.zeros((N, 4, 4)), np.broadcast_to(I4, (N, 4, 4))], axis=2)
    direct = np.concatenate([rho[:, None, None] * np.eye(2), np.zeros((N, 2, 6))], axis=2)
    out_formal = T[:, None, None] * right[:, :2] + direct

    symbols = np.zeros((N, 8, 8), complex)
    symbols[:, 0, 0] = symbols[:, 1, 1] = 1.0
    symbols[:, 2, 4] = symbols[:, 3, 5] = 1.0
    symbols[:, 4:] = noise
    out = out_formal @ symbols
    n = np.sum(np.abs(out[:, :, 4:]) ** 2, axis=2)
    n[bad] = np.inf

    cold, _ = _round_trip(np.ones(N), t, phi, theta)
    M = cold[:, :2, :2]
    Mh = M.conj().transpose(0, 2, 1)
    scale = np.maximum(1.0, np.max(np.abs(M), axis=(1, 2)) ** 2)
    nonnormality = np.max(np.abs(M @ Mh - Mh @ M), axis=(1, 2)) / scale

    status = np.where(bad, STATUS_THRESHOLD, STATUS_OK).astype(np.int64)
    return n[:, 0], n[:, 1], _petermann(M), nonnormality, status
