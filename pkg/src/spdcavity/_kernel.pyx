# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-point sweep kernel (same contract as ``_kernel_fallback``)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, cos, sin, fabs, isfinite, INFINITY
from scipy.linalg.cython_lapack cimport zgeev, zgesv, zgesvd

cnp.import_array()

cdef double CONDITION_LIMIT = 1e12
cdef double OVERLAP_GUARD = 1e-12

STATUS_OK = 0
STATUS_THRESHOLD = 1

ctypedef double complex cplx


cdef inline double abs2(cplx z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline cplx conj(cplx z) noexcept nogil:
    return z.real - 1j * z.imag


cdef inline cplx dag_entry(cplx *row, int k) noexcept nogil:
    # entry k of the daggered coefficient row [u, v] -> [conj v, conj u]
    if k < 4:
        return conj(row[k + 4])
    return conj(row[k - 4])


cdef void apply2(cplx U[2][2], cplx V[2][2], cplx x[2][8], cplx out[2][8]) noexcept nogil:
    cdef int i, j, k
    cdef cplx acc
    for i in range(2):
        for k in range(8):
            acc = 0
            for j in range(2):
                acc = acc + U[i][j] * x[j][k] + V[i][j] * dag_entry(x[j], k)
            out[i][k] = acc


cdef void passive(cplx U[2][2], cplx V[2][2], cplx u00, cplx u01, cplx u10, cplx u11) noexcept nogil:
    U[0][0] = u00; U[0][1] = u01; U[1][0] = u10; U[1][1] = u11
    V[0][0] = 0; V[0][1] = 0; V[1][0] = 0; V[1][1] = 0


cdef void absorb(cplx x[2][8], cplx port[8], cplx U[2][2], cplx V[2][2]) noexcept nogil:
    # absorber acts on (a, reservoir); b passes through
    cdef cplx pair[2][8]
    cdef cplx res[2][8]
    cdef int k
    for k in range(8):
        pair[0][k] = x[0][k]
        pair[1][k] = port[k]
    apply2(U, V, pair, res)
    for k in range(8):
        x[0][k] = res[0][k]


cdef void copy_rows(cplx src[2][8], cplx dst[2][8]) noexcept nogil:
    cdef int i, k
    for i in range(2):
        for k in range(8):
            dst[i][k] = src[i][k]


cdef void round_trip(double G, double t, double phi, double theta,
                     cplx A[4][4], cplx noise[4][8]) noexcept nogil:
    cdef cplx U[2][2]
    cdef cplx V[2][2]
    cdef cplx x[2][8]
    cdef cplx y[2][8]
    cdef cplx f_left[8]
    cdef cplx f_right[8]
    cdef double c = cos(phi), s = sin(phi)
    cdef double g = sqrt(G * G - 1.0)
    cdef cplx r = 1j * sqrt(1.0 - t * t)
    cdef cplx e = cos(theta) + 1j * sin(theta)
    cdef int i, k

    for i in range(2):
        for k in range(8):
            x[i][k] = 1.0 if k == i else 0.0
    for k in range(8):
        f_left[k] = 0
        f_right[k] = 0
    # reservoir input referenced at the output-mirror plane
    f_left[2] = -conj(e * e)
    f_right[3] = 1.0

    # left pass: rotator, crystal, absorber, delay
    passive(U, V, c, s, -s, c)
    apply2(U, V, x, y)
    U[0][0] = G; U[0][1] = 0; U[1][0] = 0; U[1][1] = G
    V[0][0] = 0; V[0][1] = g; V[1][0] = g; V[1][1] = 0
    apply2(U, V, y, x)
    passive(U, V, t, r, r, t)
    absorb(x, f_left, U, V)
    passive(U, V, e, 0, 0, e)
    apply2(U, V, x, y)
    # end mirror
    passive(U, V, -1.0, 0, 0, -1.0)
    apply2(U, V, y, x)
    # right pass: delay, absorber, transparent crystal, rotator
    passive(U, V, e, 0, 0, e)
    apply2(U, V, x, y)
    copy_rows(y, x)
    passive(U, V, t, r, r, t)
    absorb(x, f_right, U, V)
    passive(U, V, c, s, -s, c)
    apply2(U, V, x, y)

    for i in range(2):
        for k in range(2):
            A[i][k] = y[i][k]
            A[i][k + 2] = y[i][k + 4]
            A[i + 2][k] = conj(y[i][k + 4])
            A[i + 2][k + 2] = conj(y[i][k])
        for k in range(8):
            noise[i][k] = 0 if (k % 4) < 2 else y[i][k]
        for k in range(8):
            noise[i + 2][k] = dag_entry(noise[i], k)


cdef double petermann(cplx M[4][4], double *nonnormal) noexcept nogil:
    """K of the upper-left 2x2 block from analytic right and left eigenvectors."""
    cdef cplx a = M[0][0], b = M[0][1], c = M[1][0], d = M[1][1]
    cdef cplx tr = a + d, disc, root, lam
    cdef cplx e0, e1, l0, l1, p0, p1, q0, q1, ov
    cdef double scale, m, nr, nl, K = 1.0, Kn
    cdef int n, i, j, k
    cdef cplx MM, MhM

    scale = 0
    for i in range(2):
        for j in range(2):
            if abs2(M[i][j]) > scale:
                scale = abs2(M[i][j])
    scale = scale if scale > 1.0 else 1.0
    m = 0
    for i in range(2):
        for j in range(2):
            MM = 0
            MhM = 0
            for k in range(2):
                MM = MM + M[i][k] * conj(M[j][k])
                MhM = MhM + conj(M[k][i]) * M[k][j]
            if sqrt(abs2(MM - MhM)) > m:
                m = sqrt(abs2(MM - MhM))
    nonnormal[0] = m / scale

    # scalar matrix: every vector is an eigenvector, modes orthogonal
    if abs2(b) == 0 and abs2(c) == 0 and abs2(a - d) == 0:
        return 1.0

    disc = (a - d) * (a - d) + 4.0 * b * c
    root = disc ** 0.5
    K = 0
    for n in range(2):
        lam = (tr + root) / 2.0 if n == 0 else (tr - root) / 2.0
        # right: (M - lam) e = 0, take the better conditioned null vector
        p0 = b; p1 = lam - a
        q0 = lam - d; q1 = c
        if abs2(p0) + abs2(p1) >= abs2(q0) + abs2(q1):
            e0 = p0; e1 = p1
        else:
            e0 = q0; e1 = q1
        # left: ebar^+ (M - lam) = 0  <=>  (M^+ - conj lam) ebar = 0
        p0 = conj(c); p1 = conj(lam - a)
        q0 = conj(lam - d); q1 = conj(b)
        if abs2(p0) + abs2(p1) >= abs2(q0) + abs2(q1):
            l0 = p0; l1 = p1
        else:
            l0 = q0; l1 = q1
        nr = abs2(e0) + abs2(e1)
        nl = abs2(l0) + abs2(l1)
        ov = conj(l0) * e0 + conj(l1) * e1
        if abs2(ov) < OVERLAP_GUARD * nr * nl:
            return INFINITY
        Kn = nr * nl / abs2(ov)
        if Kn > K:
            K = Kn
    return K


cdef int evaluate_one(double G, double R, double t, double phi, double theta,
                      double *n_a, double *n_b, double *K, double *nonnormal) noexcept nogil:
    cdef cplx A[4][4]
    cdef cplx noise[4][8]
    cdef cplx cold[4][8]
    cdef cplx Acold[4][4]
    cdef cplx L[16]
    cdef cplx work[256]
    cdef cplx w[4]
    cdef cplx dummy[1]
    cdef cplx B[32]
    cdef cplx right[4][8]
    cdef cplx out[2][8]
    cdef cplx sym[8][8]
    cdef cplx acc
    cdef double rwork[32]
    cdef double sv[4]
    cdef int ipiv[4]
    cdef int n4 = 4, n8 = 8, one = 1, lwork = 256, info = 0
    cdef double rho = -sqrt(R), radius = 0, cond
    cdef cplx T = 1j * sqrt(1.0 - R)
    cdef int i, j, k
    cdef char jn = b'N'

    n_a[0] = INFINITY
    n_b[0] = INFINITY
    round_trip(1.0, t, phi, theta, Acold, cold)
    K[0] = petermann(Acold, nonnormal)
    round_trip(G, t, phi, theta, A, noise)

    # spectral radius of the loop rho * A (column-major copy)
    for i in range(4):
        for j in range(4):
            L[i + 4 * j] = rho * A[i][j]
    zgeev(&jn, &jn, &n4, L, &n4, w, dummy, &one, dummy, &one, work, &lwork, rwork, &info)
    if info != 0:
        return 1
    for i in range(4):
        if sqrt(abs2(w[i])) > radius:
            radius = sqrt(abs2(w[i]))

    # 2-norm condition number of I - rho A
    for i in range(4):
        for j in range(4):
            L[i + 4 * j] = (1.0 if i == j else 0.0) - rho * A[i][j]
    zgesvd(&jn, &jn, &n4, &n4, L, &n4, sv, dummy, &one, dummy, &one, work, &lwork, rwork, &info)
    if info != 0:
        return 1
    cond = sv[0] / sv[3] if sv[3] > 0 else INFINITY
    if not (radius < 1.0) or not isfinite(cond) or cond > CONDITION_LIMIT:
        return 1

    # (I - rho A) X = [T_d | rho I]
    for i in range(4):
        for j in range(4):
            L[i + 4 * j] = (1.0 if i == j else 0.0) - rho * A[i][j]
    for i in range(4):
        for j in range(8):
            B[i + 4 * j] = 0
        B[i + 4 * i] = T if i < 2 else conj(T)
        B[i + 4 * (i + 4)] = rho
    zgesv(&n4, &n8, L, &n4, ipiv, B, &n4, &info)
    if info != 0:
        return 1

    for i in range(4):
        for j in range(8):
            acc = 1.0 if j == i + 4 else 0.0
            for k in range(4):
                acc = acc + A[i][k] * B[k + 4 * j]
            right[i][j] = acc

    for i in range(8):
        for j in range(8):
            sym[i][j] = 0
    sym[0][0] = 1.0
    sym[1][1] = 1.0
    sym[2][4] = 1.0
    sym[3][5] = 1.0
    for i in range(4):
        for j in range(8):
            sym[4 + i][j] = noise[i][j]

    for i in range(2):
        for j in range(8):
            acc = 0
            for k in range(8):
                acc = acc + (T * right[i][k] + (rho if k == i else 0.0)) * sym[k][j]
            out[i][j] = acc
    n_a[0] = 0
    n_b[0] = 0
    for j in range(4, 8):
        n_a[0] += abs2(out[0][j])
        n_b[0] += abs2(out[1][j])
    return 0


def evaluate_points(G, R, t, phi, theta):
    """
    Evaluate output photon numbers and the cold-cavity K factor per point.

    Returns ``(n_a, n_b, K, nonnormality, status)`` as numpy arrays.
    """
    cdef double[::1] Gv = np.ascontiguousarray(G, dtype=np.float64)
    cdef double[::1] Rv = np.ascontiguousarray(R, dtype=np.float64)
    cdef double[::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef double[::1] pv = np.ascontiguousarray(phi, dtype=np.float64)
    cdef double[::1] hv = np.ascontiguousarray(theta, dtype=np.float64)
    cdef Py_ssize_t N = Gv.shape[0], i
    if not (Rv.shape[0] == tv.shape[0] == pv.shape[0] == hv.shape[0] == N):
        raise ValueError("parameter arrays must have equal length")
    na = np.empty(N)
    nb = np.empty(N)
    K = np.empty(N)
    nn = np.empty(N)
    st = np.empty(N, dtype=np.int64)
    cdef double[::1] nav = na, nbv = nb, Kv = K, nnv = nn
    cdef long long[::1] stv = st
    with nogil:
        for i in range(N):
            stv[i] = evaluate_one(Gv[i], Rv[i], tv[i], pv[i], hv[i],
                                  &nav[i], &nbv[i], &Kv[i], &nnv[i])
    return na, nb, K, nn, st
