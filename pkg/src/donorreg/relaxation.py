"""Classical nuclear-moment precession while the electron relaxes.

During relaxation the electron projection falls linearly from ``Sz0`` to
``-Sz0`` over ``Tc``, so the nucleus sees the effective field

    B(t) = (Bx, 0, B0 - (A / gamma_n) * Sz0 * (1 - 2 t / Tc)).

If ``B0`` is below ``A / (2 gamma_n)`` the z component passes through zero
and a slow enough sweep drags the nuclear moment with it (adiabatic
passage), destroying the stored state.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import kernels

__all__ = [
    "RelaxationScenario",
    "Trajectory",
    "StepTooCoarse",
    "field_profile",
    "adiabaticity",
    "ensemble_fraction",
    "hyperfine_ratio",
    "integrate_trajectory",
    "GAUSS",
]

GAUSS = 1e-4


class StepTooCoarse(RuntimeError):
    """Halving the step still changes the result beyond tolerance."""


@dataclass(frozen=True)
class RelaxationScenario:
    """Inputs of one relaxation trajectory (SI units, rad/s for A and gamma_n)."""

    B0: float = 3.3
    Bx: float = 0.5 * GAUSS
    Tc: float = 6e-3
    Sz0: float = 0.5
    I0: tuple = (0.0, 0.0, -0.5)
    gamma_n: float = 2.0 * math.pi * 17.25144e6
    A: float = 2.0 * math.pi * 116e6

    def __post_init__(self):
        if not self.Tc > 0:
            raise ValueError("Tc must be positive")
        if not -0.5 <= self.Sz0 <= 0.5:
            raise ValueError("Sz0 must lie in [-1/2, 1/2]")
        if not math.isclose(math.sqrt(sum(c * c for c in self.I0)), 0.5, abs_tol=1e-12):
            raise ValueError("the nuclear vector I0 must have length 1/2")
        object.__setattr__(self, "I0", tuple(float(c) for c in self.I0))

    @classmethod
    def from_params(cls, p, **kw):
        return cls(gamma_n=p.gamma_n, A=p.A, **kw)

    @property
    def bz_coefficients(self):
        """``(bz0, bz1)`` with ``Bz(t) = bz0 + bz1 * t``."""
        h = self.A / self.gamma_n * self.Sz0
        return self.B0 - h, 2.0 * h / self.Tc


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled ``I(t)`` plus the summary quantities of a run."""

    t: np.ndarray
    I: np.ndarray
    delta_Iz: float
    flipped: bool
    step: float
    norm_drift: float
    xi: float
    n_steps: int

    @property
    def Iz_final(self):
        return float(self.I[-1, 2])


def field_profile(sc, t):
    """Effective field ``(Bx, 0, Bz(t))`` in tesla; ``t`` may be an array."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > sc.Tc):
        raise ValueError("t must lie in [0, Tc]")
    bz0, bz1 = sc.bz_coefficients
    bz = bz0 + bz1 * t
    return np.stack(np.broadcast_arrays(np.full_like(bz, sc.Bx), np.zeros_like(bz), bz), axis=-1)


def adiabaticity(sc):
    """``xi = |dBz/dt| / (gamma_n Bx^2)``; ``inf`` when ``Bx = 0``."""
    if sc.Bx == 0:
        return math.inf
    return abs(sc.bz_coefficients[1]) / (sc.gamma_n * sc.Bx ** 2)


def ensemble_fraction(p, B0=None):
    """``(eta, B0_min)``: fraction of nuclei that can flip and the safe field.

    ``B0_min = A / (2 gamma_n)``; below it, electrons whose projection lies
    in the window where ``Bz`` changes sign carry the nucleus with them.
    """
    B0 = p.b if B0 is None else B0
    b0_min = p.A / (2.0 * p.gamma_n)
    return max(0.0, (1.0 - B0 / b0_min) / 2.0), b0_min


def hyperfine_ratio(p):
    """Small parameter ``(A/2) / (gamma_e b)`` of the hyperfine admixture."""
    return p.A / 2.0 / (p.gamma_e * p.b)


def _run(sc, n_steps, n_samples, backend):
    bz0, bz1 = sc.bz_coefficients
    h = sc.Tc / n_steps
    every = max(1, n_steps // max(1, n_samples - 1))
    rows = n_steps // every + 1
    samples = np.zeros((rows, 3))
    state = np.array(sc.I0, dtype=float)
    drift = backend.rk4_precession(state, sc.gamma_n, sc.Bx, bz0, bz1, 0.0, h,
                                   n_steps, every, samples)
    t = np.arange(rows) * every * h
    return state, samples, t, drift


def _summary(sc, state):
    iz0 = sc.I0[2]
    delta = (iz0 - state[2]) / iz0 if iz0 != 0 else math.nan
    return float(delta), bool(np.sign(state[2]) != np.sign(iz0))


def integrate_trajectory(sc, step=1e-9, *, refine=True, rtol=0.01, norm_tol=1e-9,
                         max_halvings=16, n_samples=2001, backend=None):
    """Integrate the precession with fixed-step RK4 under step control.

    Steps are ``Tc / (N0 * 2**k)`` with ``N0 = round(Tc / step)``. A step
    ``h`` is accepted when the result at ``h`` differs from the one at
    ``2h`` by at most ``rtol`` (relative) and ``|I|`` drifts by at most
    ``norm_tol``. Because RK4 loses norm as ``h**5``, the search jumps
    straight to the predicted step rather than halving one level at a time.
    With ``refine=False`` only ``step`` and ``step/2`` are tried.
    """
    backend = kernels if backend is None else backend
    n0 = max(1, int(round(sc.Tc / step)))
    xi = adiabaticity(sc)
    level = 0
    prev = None
    while True:
        n = n0 << level
        state, samples, t, drift = _run(sc, n, n_samples, backend)
        delta, flipped = _summary(sc, state)
        if prev is not None and prev[0] == level - 1:
            scale = max(abs(delta), 1e-300)
            if abs(delta - prev[1]) <= rtol * scale and drift <= norm_tol:
                return Trajectory(t, samples, delta, flipped, sc.Tc / n, drift, xi, n)
        if not refine and level >= 1:
            raise StepTooCoarse(
                f"step {sc.Tc / n:.3e} s: delta_Iz {prev[1]:.6e} -> {delta:.6e}, norm drift {drift:.2e}"
            )
        if level >= max_halvings:
            raise StepTooCoarse(f"no accepted step after {max_halvings} halvings")
        prev = (level, delta)
        jump = 1
        if refine and math.isfinite(drift) and drift > norm_tol:
            # drift ~ h**5; aim one level above the predicted step so it serves as 2h
            need = math.log2(drift / norm_tol) / 5.0
            jump = max(1, math.ceil(need) - 1)
            if jump > 1:
                prev = None
        level = min(level + jump, max_halvings)
