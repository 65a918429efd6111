"""Pure-Python fallback for the compiled kernels.

Same signatures and arithmetic as ``_kernels.pyx``. The RK4 loop runs at
roughly a microsecond per step, so it is only practical for short windows.
"""
import math

import numpy as np


def rk4_precession(state, gamma, bx, bz0, bz1, t0, h, n_steps, sample_every, samples):
    x, y, z = float(state[0]), float(state[1]), float(state[2])
    n0sq = x * x + y * y + z * z
    n0 = math.sqrt(n0sq)
    worst = 0.0
    hh = 0.5 * h
    h6 = h / 6.0
    n_rows = samples.shape[0]
    row = 0
    if n_rows > 0:
        samples[0] = (x, y, z)
        row = 1
    for i in range(n_steps):
        bz_a = bz0 + bz1 * (t0 + i * h)
        bz_b = bz_a + bz1 * hh
        bz_c = bz_a + bz1 * h
        k1x, k1y, k1z = gamma * y * bz_a, gamma * (z * bx - x * bz_a), -gamma * y * bx
        x2, y2, z2 = x + hh * k1x, y + hh * k1y, z + hh * k1z
        k2x, k2y, k2z = gamma * y2 * bz_b, gamma * (z2 * bx - x2 * bz_b), -gamma * y2 * bx
        x3, y3, z3 = x + hh * k2x, y + hh * k2y, z + hh * k2z
        k3x, k3y, k3z = gamma * y3 * bz_b, gamma * (z3 * bx - x3 * bz_b), -gamma * y3 * bx
        x4, y4, z4 = x + h * k3x, y + h * k3y, z + h * k3z
        k4x, k4y, k4z = gamma * y4 * bz_c, gamma * (z4 * bx - x4 * bz_c), -gamma * y4 * bx
        x += h6 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        y += h6 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        z += h6 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
        dev = abs(x * x + y * y + z * z - n0sq)
        if dev > worst:
            worst = dev
        if sample_every > 0 and (i + 1) % sample_every == 0 and row < n_rows:
            samples[row] = (x, y, z)
            row += 1
    state[0], state[1], state[2] = x, y, z
    return worst / (2.0 * n0) if n0 > 0.0 else math.sqrt(worst)


def jacobi_eigh(matrix, rel_tol=1e-13, max_sweeps=100):
    a = np.array(matrix, dtype=np.float64, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    tol = rel_tol * np.max(np.abs(a)) if n else 0.0
    for sweep in range(max_sweeps + 1):
        off = math.sqrt(float(np.sum(np.triu(a, 1) ** 2) * 2.0))
        if off <= tol:
            return np.diag(a).copy(), v, sweep
        if sweep == max_sweeps:
            break
        for p in range(n):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p], a[:, q] = c * col_p - s * col_q, s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :], a[q, :] = c * row_p - s * row_q, s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                col_p, col_q = v[:, p].copy(), v[:, q].copy()
                v[:, p], v[:, q] = c * col_p - s * col_q, s * col_p + c * col_q
    raise RuntimeError(f"Jacobi did not converge in {max_sweeps} sweeps")
