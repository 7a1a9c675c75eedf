"""Pure numpy implementations of the compiled kernels in ``_kernels.pyx``."""
import numpy as np


def legendre_table(p, x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty((p + 1, x.size))
    out[0] = 1.0
    if p >= 1:
        out[1] = x
    for k in range(1, p):
        out[k + 1] = ((2 * k + 1) * x * out[k] - k * out[k - 1]) / (k + 1)
    return out


def legendre_series(c, x):
    c = np.asarray(c, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    m = c.size
    if m == 0:
        return np.zeros_like(x)
    b1 = np.zeros_like(x)
    b2 = np.zeros_like(x)
    for k in range(m - 1, 0, -1):
        b1, b2 = c[k] + (2 * k + 1) * x * b1 / (k + 1) - (k + 1) * b2 / (k + 2), b1
    return c[0] + x * b1 - 0.5 * b2


def legendre_der(c):
    c = np.asarray(c, dtype=np.float64)
    m = c.size
    nout = max(m - 1, 1)
    b = np.zeros(nout)
    if m <= 1:
        return b
    for k in range(m - 2, -1, -1):
        b[k] = c[k + 1]
        if k + 2 < nout:
            b[k] += b[k + 2]
    b *= 2 * np.arange(nout) + 1
    return b


def element_matrix(N, dN, w, dvals, eps, h):
    stiff = (dN * w) @ dN.T
    mass = (N * (w * dvals)) @ N.T
    return eps * (2.0 / h) * stiff + 0.5 * h * mass
