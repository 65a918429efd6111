"""Basis, spin operators, static Hamiltonian and RF coupling of the register.

The register is a chain of four spin-1/2 objects ordered ``n2 e2 e1 n1``
(nucleus 2, electron 2, electron 1, nucleus 1). A basis ket is encoded as

    index = 8*n2 + 4*e2 + 2*e1 + n1,   up = 0, down = 1

so ``|0>`` has every spin up and ``|15>`` every spin down. All frequencies
are angular (rad/s) with hbar = 1; fields are in tesla.
"""
from dataclasses import dataclass
import math

import numpy as np

__all__ = [
    "SPINS",
    "UP",
    "DOWN",
    "TWO_PI",
    "SystemParams",
    "ConditionReport",
    "basis_index",
    "decode",
    "spin_label",
    "sigma_of",
    "SIGMA",
    "sector_indices",
    "spin_operators",
    "build_h0",
    "build_v",
    "sigma_operator",
    "validate_params",
]

TWO_PI = 2.0 * math.pi
UP, DOWN = 0, 1
SPINS = ("n2", "e2", "e1", "n1")
_BIT = {"n2": 3, "e2": 2, "e1": 1, "n1": 0}

# Boltzmann constant over hbar, rad s^-1 K^-1
KB_OVER_HBAR = 1.380649e-23 / 1.054571817e-34


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of the register in internal units.

    gamma_e, gamma_n are in rad s^-1 T^-1; A and J in rad/s; b and delta_b
    in tesla. ``delta_b`` is the half-difference, so the two atoms sit in
    fields ``b - delta_b`` and ``b + delta_b``.
    """

    gamma_e: float = TWO_PI * 28.1818e9
    gamma_n: float = TWO_PI * 17.25144e6
    A: float = TWO_PI * 116e6
    J: float = TWO_PI * 0.5e6
    b: float = 3.3
    delta_b: float = 0.5e-3

    def __post_init__(self):
        for name in ("gamma_e", "gamma_n", "A", "b"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.J < 0:
            raise ValueError(f"J must be non-negative, got {self.J!r}")
        if self.delta_b < 0:
            raise ValueError(f"delta_b must be non-negative, got {self.delta_b!r}")
        if self.b - self.delta_b <= 0:
            raise ValueError("field at atom 1 (b - delta_b) must be positive")

    @property
    def B1z(self):
        return self.b - self.delta_b

    @property
    def B2z(self):
        return self.b + self.delta_b

    @classmethod
    def from_display(cls, b_T=3.3, delta_b_mT=0.5, A_MHz=116.0, J_MHz=0.5,
                     gamma_e_GHz_per_T=28.1818, gamma_n_MHz_per_T=17.25144):
        """Build from ordinary-frequency display units (f = omega / 2 pi)."""
        return cls(
            gamma_e=TWO_PI * gamma_e_GHz_per_T * 1e9,
            gamma_n=TWO_PI * gamma_n_MHz_per_T * 1e6,
            A=TWO_PI * A_MHz * 1e6,
            J=TWO_PI * J_MHz * 1e6,
            b=b_T,
            delta_b=delta_b_mT * 1e-3,
        )

    def replace(self, **changes):
        fields = dict(self.__dict__)
        fields.update(changes)
        return SystemParams(**fields)


def basis_index(n2, e2, e1, n1):
    """Index of the ket with the given labels (0 = up, 1 = down)."""
    for v in (n2, e2, e1, n1):
        if v not in (UP, DOWN):
            raise ValueError(f"spin label must be 0 (up) or 1 (down), got {v!r}")
    return 8 * n2 + 4 * e2 + 2 * e1 + n1


def decode(index):
    """Inverse of :func:`basis_index`: returns ``(n2, e2, e1, n1)``."""
    if not 0 <= index < 16:
        raise ValueError(f"basis index out of range: {index!r}")
    return (index >> 3) & 1, (index >> 2) & 1, (index >> 1) & 1, index & 1


def spin_label(index, spin):
    """Label (0 up, 1 down) of one named spin in basis ket ``index``."""
    return (index >> _BIT[spin]) & 1


def with_label(index, spin, value):
    """Return ``index`` with the named spin set to ``value``."""
    bit = 1 << _BIT[spin]
    return (index & ~bit) | (bit if value else 0)


def sigma_of(index):
    """Total z-projection of the four spins (half-integer in -2..2)."""
    return sum(0.5 - b for b in decode(index))


SIGMA = np.array([sigma_of(i) for i in range(16)])


def sector_indices(sigma):
    """Basis indices with total projection ``sigma``, ascending."""
    return [i for i in range(16) if SIGMA[i] == sigma]


_SX = np.array([[0.0, 0.5], [0.5, 0.0]])
_SY = np.array([[0.0, -0.5j], [0.5j, 0.0]])
_SZ = np.array([[0.5, 0.0], [0.0, -0.5]])


def _embed(op, spin):
    """Single-spin 2x2 operator placed on ``spin`` in the 16-dim space."""
    mats = [np.eye(2)] * 4
    mats[SPINS.index(spin)] = op
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def spin_operators(spin):
    """``(x, y, z)`` components of the spin operator for one named spin."""
    return tuple(_embed(op, spin) for op in (_SX, _SY, _SZ))


def sigma_operator():
    return np.diag(SIGMA).astype(complex)


def build_h0(p):
    """Static Hamiltonian in the basis-ket representation (16x16, rad/s)."""
    s1 = spin_operators("e1")
    s2 = spin_operators("e2")
    i1 = spin_operators("n1")
    i2 = spin_operators("n2")
    h = (p.gamma_e * p.B1z * s1[2] + p.gamma_e * p.B2z * s2[2]
         - p.gamma_n * p.B1z * i1[2] - p.gamma_n * p.B2z * i2[2])
    for s, i in ((s1, i1), (s2, i2)):
        h = h + p.A * sum(s[k] @ i[k] for k in range(3))
    h = h + p.J * sum(s1[k] @ s2[k] for k in range(3))
    return np.asarray(h, dtype=complex)


def build_v(p, B1):
    """RF coupling operator ``gamma_e B1 (S1x + S2x) - gamma_n B1 (I1x + I2x)``."""
    if B1 < 0:
        raise ValueError("B1 must be non-negative")
    v = p.gamma_e * B1 * (_embed(_SX, "e1") + _embed(_SX, "e2"))
    v = v - p.gamma_n * B1 * (_embed(_SX, "n1") + _embed(_SX, "n2"))
    return np.asarray(v, dtype=complex)


@dataclass(frozen=True)
class ConditionReport:
    number: int
    description: str
    ratio: float
    threshold: str
    passed: bool


def validate_params(p, B1, *, temperature=1.0, T2=60e-3, Bx=0.5e-4, B0=None,
                    tau_cn=None, much=10.0):
    """Evaluate the six operating conditions of the register.

    ``B1`` is the nuclear-gate amplitude in tesla; ``Bx`` the stray transverse
    field during electron relaxation and ``B0`` the permanent field (defaults
    to ``p.b``). "Much less" means ratio <= 1/much, "much greater" ratio >=
    much. Always returns a report, never raises on a failed condition.
    """
    B0 = p.b if B0 is None else B0
    omega_n = p.gamma_n * B1 * (1.0 + p.A / (2.0 * p.gamma_n * p.b))
    if tau_cn is None:
        tau_cn = math.pi / omega_n if omega_n > 0 else math.inf
    split = p.B2z - p.B1z
    small, big = 1.0 / much, much

    def ratio(num, den):
        return num / den if den > 0 else math.inf

    r1 = ratio(omega_n, 2.0 * p.gamma_n * split)
    r2 = ratio(tau_cn, T2)
    r3 = ratio(p.gamma_e * p.b, KB_OVER_HBAR * temperature)
    r4 = ratio(p.gamma_e * split, p.J)
    r5 = ratio(abs(p.gamma_e * split - p.A), p.J)
    b0_min = p.A / (2.0 * p.gamma_n)
    eta = max(0.0, (1.0 - B0 / b0_min) / 2.0)
    ok6 = Bx <= 5e-4 or eta <= 0.01
    return [
        ConditionReport(1, "nuclear Rabi << 2 gamma_n (B2 - B1)", r1, f"<= {small:g}", r1 <= small),
        ConditionReport(2, "nuclear gate time << T2", r2, f"<= {small:g}", r2 <= small),
        ConditionReport(3, "electron Zeeman >> k_B T", r3, f">= {big:g}", r3 >= big),
        ConditionReport(4, "gamma_e (B2 - B1) >> J", r4, f">= {big:g}", r4 >= big),
        ConditionReport(5, "|gamma_e (B2 - B1) - A| >> J", r5, f">= {big:g}", r5 >= big),
        ConditionReport(6, "Bx <= 5 G or B0 near/above B0_min (eta <= 0.01)", eta,
                        "Bx <= 5 G or eta <= 0.01", ok6),
    ]
