# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled cyclic Jacobi kernel; same rotation order as ``_jacobi.py``.

Matrices are handled through interleaved float64 views (``x[i, 2j]`` real,
``x[i, 2j + 1]`` imaginary) so no complex libcalls appear in the inner loop.
"""
import numpy as np

from libc.math cimport sqrt, fabs, hypot

from ..errors import NoConvergence

from ._jacobi import round_robin

cdef double _TINY = 1e-300
cdef double _STALL = 1e-12


cdef double _off_norm(double[:, ::1] a, Py_ssize_t n) noexcept nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t i, j
    for i in range(n):
        for j in range(n):
            if i != j:
                acc += a[i, 2 * j] * a[i, 2 * j] + a[i, 2 * j + 1] * a[i, 2 * j + 1]
    return sqrt(acc)


cdef inline void _rot_cols(double[:, ::1] x, Py_ssize_t n, Py_ssize_t p, Py_ssize_t q,
                           double c, double ur, double ui) noexcept nogil:
    # col p <- c*xp - conj(u)*xq ; col q <- u*xp + c*xq
    cdef Py_ssize_t k
    cdef double xpr, xpi, xqr, xqi
    for k in range(n):
        xpr = x[k, 2 * p]
        xpi = x[k, 2 * p + 1]
        xqr = x[k, 2 * q]
        xqi = x[k, 2 * q + 1]
        x[k, 2 * p] = c * xpr - (ur * xqr + ui * xqi)
        x[k, 2 * p + 1] = c * xpi - (ur * xqi - ui * xqr)
        x[k, 2 * q] = ur * xpr - ui * xpi + c * xqr
        x[k, 2 * q + 1] = ur * xpi + ui * xpr + c * xqi


cdef void _rotate(double[:, ::1] a, double[:, ::1] v,
                  Py_ssize_t n, Py_ssize_t p, Py_ssize_t q) noexcept nogil:
    cdef double br = a[p, 2 * q]
    cdef double bi = a[p, 2 * q + 1]
    cdef double mag = hypot(br, bi)
    if mag <= _TINY:
        return
    cdef double theta = (a[q, 2 * q] - a[p, 2 * p]) / (2.0 * mag)
    cdef double sgn = 1.0 if theta >= 0.0 else -1.0
    cdef double t = sgn / (fabs(theta) + hypot(theta, 1.0))
    cdef double c = 1.0 / sqrt(1.0 + t * t)
    cdef double s = t * c
    # u = s * phase(b)
    cdef double ur = s * br / mag
    cdef double ui = s * bi / mag
    _rot_cols(a, n, p, q, c, ur, ui)
    _rot_cols(v, n, p, q, c, ur, ui)
    cdef Py_ssize_t k
    cdef double xpr, xpi, xqr, xqi
    for k in range(n):
        # row p <- c*xp - u*xq ; row q <- conj(u)*xp + c*xq
        xpr = a[p, 2 * k]
        xpi = a[p, 2 * k + 1]
        xqr = a[q, 2 * k]
        xqi = a[q, 2 * k + 1]
        a[p, 2 * k] = c * xpr - (ur * xqr - ui * xqi)
        a[p, 2 * k + 1] = c * xpi - (ur * xqi + ui * xqr)
        a[q, 2 * k] = ur * xpr + ui * xpi + c * xqr
        a[q, 2 * k + 1] = ur * xpi - ui * xpr + c * xqi
    a[p, 2 * q] = 0.0
    a[p, 2 * q + 1] = 0.0
    a[q, 2 * p] = 0.0
    a[q, 2 * p + 1] = 0.0
    a[p, 2 * p + 1] = 0.0
    a[q, 2 * q + 1] = 0.0


def jacobi_eigh(a_in, int max_sweeps=64, double tol=1e-14):
    """Diagonalize Hermitian ``a_in``; return ``(eigenvalues, eigenvectors, sweeps)``."""
    a_np = np.array(a_in, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t n = a_np.shape[0]
    v_np = np.eye(n, dtype=np.complex128)
    if n < 2:
        return a_np.diagonal().real.copy(), v_np, 0
    cdef double[:, ::1] a = a_np.view(np.float64)
    cdef double[:, ::1] v = v_np.view(np.float64)
    cdef double fro = float(np.linalg.norm(a_np))

    pairs = [(p, q) for ps, qs in round_robin(n) for p, q in zip(ps, qs)]
    cdef Py_ssize_t npairs = len(pairs)
    cdef Py_ssize_t[:, ::1] pq = np.array(pairs, dtype=np.intp).reshape(npairs, 2)
    cdef int sweep
    cdef Py_ssize_t i
    cdef double off
    cdef double prev = np.inf
    for sweep in range(max_sweeps + 1):
        off = _off_norm(a, n)
        if off <= tol * fro or (off <= _STALL * fro and off > 0.5 * prev):
            return a_np.diagonal().real.copy(), v_np, sweep
        prev = off
        if sweep == max_sweeps:
            break
        with nogil:
            for i in range(npairs):
                _rotate(a, v, n, pq[i, 0], pq[i, 1])
    raise NoConvergence(max_sweeps, _off_norm(a, n))
