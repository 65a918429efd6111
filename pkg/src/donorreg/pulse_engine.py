"""Rectangular RF pulses in the rotating frame.

Lab-frame amplitudes ``D_p`` expand the state as
``|Psi(t)> = sum_p D_p(t) exp(-i E_p t) |psi_p>``; they are constant between
pulses. During a pulse of carrier ``nu`` and phase ``phi`` the rotating
amplitudes ``c_p = exp[-i E_p t - i Sigma_p (nu t + phi)] D_p`` obey a
time-independent Schrodinger equation with Hamiltonian ``h``.
"""
from dataclasses import dataclass
import cmath
import math

import numpy as np

from .spin_model import SIGMA, build_v

__all__ = [
    "Pulse",
    "RegisterState",
    "FrameMismatch",
    "frame_transform",
    "build_rotating_h",
    "rotating_propagator",
    "lab_propagator",
    "evolve_pulse",
    "two_level_solution",
]


class FrameMismatch(ValueError):
    """The state is not in the frame the operation expects."""


@dataclass(frozen=True)
class Pulse:
    """Rectangular pulse: signed carrier ``nu`` (rad/s), ``duration`` (s),
    ``amplitude`` ``B1`` (T) and ``phase`` (rad)."""

    nu: float
    duration: float
    amplitude: float
    phase: float = 0.0

    def __post_init__(self):
        if not self.duration >= 0:
            raise ValueError("pulse duration must be non-negative")
        if not self.amplitude >= 0:
            raise ValueError("pulse amplitude must be non-negative")


@dataclass(frozen=True, eq=False)
class RegisterState:
    """Sixteen amplitudes in ``frame`` ("lab" or "rotating") at time ``clock``."""

    amplitudes: np.ndarray
    eig: object
    clock: float = 0.0
    frame: str = "lab"

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex)
        if a.shape != (16,):
            raise ValueError("a register state has 16 amplitudes")
        if self.frame not in ("lab", "rotating"):
            raise ValueError(f"unknown frame {self.frame!r}")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def basis_state(cls, eig, n, clock=0.0):
        a = np.zeros(16, dtype=complex)
        a[n] = 1.0
        return cls(a, eig, clock)

    @property
    def norm(self):
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    @property
    def populations(self):
        return np.abs(self.amplitudes) ** 2

    def basis_amplitudes(self):
        """Basis-ket amplitudes ``C_i`` at the current clock (lab frame only)."""
        if self.frame != "lab":
            raise FrameMismatch("basis amplitudes need a lab-frame state")
        return self.eig.to_basis(self.amplitudes, self.clock)


def _frame_phase(eig, pulse, t):
    return eig.energies * t + SIGMA * (pulse.nu * t + pulse.phase)


def frame_transform(s, pulse, direction):
    """Switch between lab amplitudes ``D`` and rotating amplitudes ``c``."""
    if direction == "to-rotating":
        if s.frame != "lab":
            raise FrameMismatch("state is already in the rotating frame")
        amps = s.amplitudes * np.exp(-1j * _frame_phase(s.eig, pulse, s.clock))
        return RegisterState(amps, s.eig, s.clock, "rotating")
    if direction == "to-lab":
        if s.frame != "rotating":
            raise FrameMismatch("state is already in the lab frame")
        amps = s.amplitudes * np.exp(1j * _frame_phase(s.eig, pulse, s.clock))
        return RegisterState(amps, s.eig, s.clock, "lab")
    raise ValueError(f"unknown direction {direction!r}")


def build_rotating_h(p, pulse, eig):
    """Rotating-frame Hamiltonian in the eigenbasis of ``eig``."""
    a = eig.vectors
    v = a.conj() @ build_v(p, pulse.amplitude) @ a.T
    h = v + np.diag(eig.energies + pulse.nu * SIGMA)
    return 0.5 * (h + h.conj().T)


def rotating_propagator(p, pulse, eig, duration=None):
    """``U`` with ``c(t' + tau) = U c(t')`` for the rotating frame."""
    tau = pulse.duration if duration is None else duration
    h = build_rotating_h(p, pulse, eig)
    # shift by the mean diagonal so the eigenphases stay small
    shift = float(np.mean(np.diag(h).real))
    w, b = np.linalg.eigh(h - shift * np.eye(16))
    return (b * np.exp(-1j * w * tau)) @ b.conj().T * np.exp(-1j * shift * tau)


def lab_propagator(p, pulse, eig, t_start, duration=None):
    """``U`` with ``D(t' + tau) = U D(t')`` for a pulse starting at ``t_start``."""
    tau = pulse.duration if duration is None else duration
    u = rotating_propagator(p, pulse, eig, tau)
    pre = np.exp(-1j * _frame_phase(eig, pulse, t_start))
    post = np.exp(1j * _frame_phase(eig, pulse, t_start + tau))
    return post[:, None] * u * pre[None, :]


def evolve_pulse(s, p, pulse, eig=None, duration=None):
    """Apply ``pulse`` (or its first ``duration`` seconds) to a lab-frame state."""
    if s.frame != "lab":
        raise FrameMismatch("evolve_pulse expects a lab-frame state")
    eig = s.eig if eig is None else eig
    tau = pulse.duration if duration is None else duration
    rot = frame_transform(RegisterState(s.amplitudes, eig, s.clock), pulse, "to-rotating")
    u = rotating_propagator(p, pulse, eig, tau)
    out = RegisterState(u @ rot.amplitudes, eig, s.clock + tau, "rotating")
    return frame_transform(out, pulse, "to-lab")


def two_level_solution(detuning, omega, tau, t_start=0.0, phase=0.0, initial="p",
                       coupling_sign=-1):
    """Closed-form lab amplitudes ``(D_p, D_q)`` of an isolated pair after a pulse.

    ``p`` is the member with the higher Sigma (spin up), ``q`` the one with
    the spin flipped, ``detuning = E_q - E_p - nu`` and the coupling is
    ``V_pq = coupling_sign * omega / 2`` (-1 for a nuclear flip, +1 for an
    electron flip). The pulse starts at ``t_start`` with ``phase``; these
    only change the relative phase of the result.
    """
    if omega < 0:
        raise ValueError("omega must be non-negative")
    if initial not in ("p", "q"):
        raise ValueError("initial must be 'p' or 'q'")
    lam = math.hypot(detuning, omega)
    if lam == 0.0:
        return (1.0 + 0j, 0j) if initial == "p" else (0j, 1.0 + 0j)
    half = lam * tau / 2.0
    cos, sin = math.cos(half), math.sin(half)
    flip = -coupling_sign * 1j * (omega / lam) * sin
    if initial == "p":
        dp = (cos + 1j * (detuning / lam) * sin) * cmath.exp(-0.5j * detuning * tau)
        dq = flip * cmath.exp(0.5j * detuning * tau + 1j * (detuning * t_start - phase))
        return dp, dq
    dq = (cos - 1j * (detuning / lam) * sin) * cmath.exp(0.5j * detuning * tau)
    dp = flip * cmath.exp(-0.5j * detuning * tau - 1j * (detuning * t_start - phase))
    return dp, dq
