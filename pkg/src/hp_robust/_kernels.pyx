# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: Legendre recurrences, Clenshaw sums, element matrices.

Every function here has a numpy twin in :mod:`hp_robust._pykernels` with the
same signature and semantics.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def legendre_table(int p, const double[::1] x):
    """Values of P_0..P_p at every point of ``x``; shape (p+1, len(x))."""
    cdef Py_ssize_t n = x.shape[0], i
    cdef int k
    out = np.empty((p + 1, n), dtype=np.float64)
    cdef double[:, ::1] P = out
    cdef double xi
    for i in range(n):
        xi = x[i]
        P[0, i] = 1.0
        if p >= 1:
            P[1, i] = xi
        for k in range(1, p):
            P[k + 1, i] = ((2 * k + 1) * xi * P[k, i] - k * P[k - 1, i]) / (k + 1)
    return out


def legendre_series(const double[::1] c, const double[::1] x):
    """Evaluate sum_k c[k] P_k(x) with the Clenshaw recurrence."""
    cdef Py_ssize_t n = x.shape[0], m = c.shape[0], i
    cdef Py_ssize_t k
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] y = out
    cdef double b1, b2, b0, xi
    for i in range(n):
        xi = x[i]
        b1 = 0.0
        b2 = 0.0
        for k in range(m - 1, 0, -1):
            b0 = c[k] + (2 * k + 1) * xi * b1 / (k + 1) - (k + 1) * b2 / (k + 2)
            b2 = b1
            b1 = b0
        if m > 0:
            y[i] = c[0] + xi * b1 - 0.5 * b2
        else:
            y[i] = 0.0
    return out


def legendre_der(const double[::1] c):
    """Legendre coefficients of the derivative; length max(len(c) - 1, 1)."""
    cdef Py_ssize_t m = c.shape[0], k
    cdef Py_ssize_t nout = m - 1 if m > 1 else 1
    out = np.zeros(nout, dtype=np.float64)
    cdef double[::1] b = out
    if m <= 1:
        return out
    # b_k = (2k+1) * sum of c_j over j = k+1, k+3, ...
    for k in range(m - 2, -1, -1):
        b[k] = c[k + 1]
        if k + 2 < nout:
            b[k] += b[k + 2]
    for k in range(nout):
        b[k] *= 2 * k + 1
    return out


def element_matrix(const double[:, ::1] N, const double[:, ::1] dN,
                   const double[::1] w, const double[::1] dvals,
                   double eps, double h):
    """eps * int N_i' N_k' + int d N_i N_k on an element of length ``h``.

    ``N``/``dN`` hold reference values/derivatives, shape (nbasis, nq).
    """
    cdef Py_ssize_t nb = N.shape[0], nq = N.shape[1], i, k, q
    cdef double jac = 0.5 * h, djac = 2.0 / h, s_stiff, s_mass
    out = np.empty((nb, nb), dtype=np.float64)
    cdef double[:, ::1] A = out
    for i in range(nb):
        for k in range(i, nb):
            s_stiff = 0.0
            s_mass = 0.0
            for q in range(nq):
                s_stiff += w[q] * dN[i, q] * dN[k, q]
                s_mass += w[q] * dvals[q] * N[i, q] * N[k, q]
            A[i, k] = eps * djac * s_stiff + jac * s_mass
            A[k, i] = A[i, k]
    return out
