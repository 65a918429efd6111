# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: RK4 spin precession and cyclic Jacobi diagonalization."""
from libc.math cimport sqrt, fabs

import numpy as np


cdef inline void _deriv(double gamma, double bx, double bz,
                        double x, double y, double z,
                        double *dx, double *dy, double *dz) noexcept nogil:
    # dI/dt = gamma * I x B with B = (bx, 0, bz)
    dx[0] = gamma * (y * bz)
    dy[0] = gamma * (z * bx - x * bz)
    dz[0] = gamma * (-y * bx)


def rk4_precession(double[::1] state, double gamma, double bx, double bz0,
                   double bz1, double t0, double h, long n_steps,
                   long sample_every, double[:, ::1] samples):
    """Advance ``state`` in place through ``n_steps`` RK4 steps.

    The field is ``(bx, 0, bz0 + bz1 * t)``. Every ``sample_every`` steps the
    state is written to the next row of ``samples`` (row 0 is the start).
    Returns the largest deviation of ``|I|`` from its initial value.
    """
    cdef double x = state[0], y = state[1], z = state[2]
    cdef double n0 = sqrt(x * x + y * y + z * z)
    cdef double n0sq = n0 * n0
    cdef double worst = 0.0, dev, t, bz_a, bz_b, bz_c
    cdef double k1x, k1y, k1z, k2x, k2y, k2z, k3x, k3y, k3z, k4x, k4y, k4z
    cdef double hh = 0.5 * h, h6 = h / 6.0
    cdef long i, row = 0
    cdef long n_rows = samples.shape[0]
    if n_rows > 0:
        samples[0, 0] = x
        samples[0, 1] = y
        samples[0, 2] = z
        row = 1
    with nogil:
        for i in range(n_steps):
            t = t0 + i * h
            bz_a = bz0 + bz1 * t
            bz_b = bz_a + bz1 * hh
            bz_c = bz_a + bz1 * h
            _deriv(gamma, bx, bz_a, x, y, z, &k1x, &k1y, &k1z)
            _deriv(gamma, bx, bz_b, x + hh * k1x, y + hh * k1y, z + hh * k1z,
                   &k2x, &k2y, &k2z)
            _deriv(gamma, bx, bz_b, x + hh * k2x, y + hh * k2y, z + hh * k2z,
                   &k3x, &k3y, &k3z)
            _deriv(gamma, bx, bz_c, x + h * k3x, y + h * k3y, z + h * k3z,
                   &k4x, &k4y, &k4z)
            x += h6 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            y += h6 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
            z += h6 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
            dev = fabs(x * x + y * y + z * z - n0sq)
            if dev > worst:
                worst = dev
            if sample_every > 0 and (i + 1) % sample_every == 0 and row < n_rows:
                samples[row, 0] = x
                samples[row, 1] = y
                samples[row, 2] = z
                row += 1
    state[0] = x
    state[1] = y
    state[2] = z
    # |I|^2 - n0^2 ~ 2 n0 (|I| - n0) for small drift
    return worst / (2.0 * n0) if n0 > 0.0 else sqrt(worst)


def jacobi_eigh(double[:, ::1] matrix, double rel_tol=1e-13, int max_sweeps=100):
    """Cyclic Jacobi eigendecomposition of a real symmetric matrix.

    Returns ``(eigenvalues, eigenvectors, sweeps)`` with eigenvectors in the
    columns, unsorted. Raises RuntimeError when ``max_sweeps`` is exhausted.
    """
    cdef Py_ssize_t n = matrix.shape[0]
    a_np = np.array(matrix, dtype=np.float64, copy=True)
    v_np = np.eye(n, dtype=np.float64)
    cdef double[:, ::1] a = a_np
    cdef double[:, ::1] v = v_np
    cdef Py_ssize_t p, q, k
    cdef double scale = 0.0, off, apq, theta, t, c, s, akp, akq
    cdef int sweep
    for p in range(n):
        for q in range(n):
            if fabs(a[p, q]) > scale:
                scale = fabs(a[p, q])
    cdef double tol = rel_tol * scale
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += 2.0 * a[p, q] * a[p, q]
        if sqrt(off) <= tol:
            return np.diag(a_np).copy(), v_np, sweep
        if sweep == max_sweeps:
            break
        for p in range(n):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if fabs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    akp = a[p, k]
                    akq = a[q, k]
                    a[p, k] = c * akp - s * akq
                    a[q, k] = s * akp + c * akq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    akp = v[k, p]
                    akq = v[k, q]
                    v[k, p] = c * akp - s * akq
                    v[k, q] = s * akp + c * akq
    raise RuntimeError(f"Jacobi did not converge in {max_sweeps} sweeps")
