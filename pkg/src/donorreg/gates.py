"""Compile logical gates into rectangular pulses.

Qubit convention: electron up (⇑) and nuclear up (↑) are |0>, down is |1>.
A CN gate flips its target when the control is |1>; an inverse CN when the
control is |0>. The carrier is resonant with the firing transition and the
amplitude makes the non-firing transition complete a whole number ``K`` of
Rabi cycles (the 2πK condition), so it returns to its start.
"""
from dataclasses import dataclass, field
import math

from .pulse_engine import Pulse
from .spin_model import DOWN, SPINS, UP, spin_label, with_label

__all__ = [
    "GateSpec",
    "CompiledPulse",
    "DegenerateField",
    "corrected_rabi",
    "rabi_factor",
    "suppression_amplitude",
    "compile_cnot",
    "compile_hadamard",
    "compile_gate",
    "selectivity_report",
    "species_of",
]

_KINDS = ("CN", "inverse-CN", "Hadamard")


class DegenerateField(ValueError):
    """The electron Rabi correction needs a nonzero field difference."""


def species_of(spin):
    return "electron" if spin.startswith("e") else "nuclear"


def _atom_electron(spin):
    return "e" + spin[1]


@dataclass(frozen=True)
class GateSpec:
    """A gate on named spins with every spectator fixed by ``context``.

    ``context`` maps spin ids (``n1``, ``e1``, ``e2``, ``n2``) to labels
    (0 up, 1 down). For a Hadamard it also fixes the same-atom electron,
    which plays the role of the reference control.
    """

    kind: str
    target: str
    control: str = None
    context: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.target not in SPINS:
            raise ValueError(f"unknown target spin {self.target!r}")
        ctx = dict(self.context)
        object.__setattr__(self, "context", ctx)
        if self.kind == "Hadamard":
            if species_of(self.target) != "nuclear":
                raise ValueError("Hadamard targets a nuclear spin")
            needed = set(SPINS) - {self.target}
        else:
            if self.control not in SPINS or self.control == self.target:
                raise ValueError("CN needs a control spin distinct from the target")
            needed = set(SPINS) - {self.target, self.control}
        if set(ctx) != needed:
            raise ValueError(f"context must assign exactly {sorted(needed)}, got {sorted(ctx)}")
        if any(v not in (UP, DOWN) for v in ctx.values()):
            raise ValueError("context labels must be 0 (up) or 1 (down)")

    @property
    def name(self):
        if self.kind == "Hadamard":
            return f"Had_{self.target}"
        prefix = "CN" if self.kind == "CN" else "invCN"
        return f"{prefix}_{self.control},{self.target}"

    @property
    def context_text(self):
        arrows = {UP: "up", DOWN: "down"}
        return " ".join(f"{k}={arrows[self.context[k]]}" for k in SPINS if k in self.context)


@dataclass(frozen=True)
class CompiledPulse:
    """A gate realized as one pulse plus its selection bookkeeping.

    ``driven`` is the firing pair ``(i, i')`` and ``suppressed`` the pair
    ``(j, j')`` held by the 2πK condition; ``rabi`` is the pair's Rabi
    frequency (rad/s) and ``detuning`` the suppressed pair's offset.
    """

    gate: GateSpec
    pulse: Pulse
    K: int
    detuning: float
    rabi: float
    driven: tuple
    suppressed: tuple
    eps_e: float
    eps_n: float
    sqrt_Pe: float


def rabi_factor(p, species, electron_state=DOWN):
    """Ratio of the dressed Rabi frequency to the bare one ``gamma B1``.

    For a nuclear flip the hyperfine admixture of the electron flip adds
    ``+A/(2 gamma_n b)`` when the same-atom electron is down and subtracts
    it when the electron is up.
    """
    if species == "electron":
        if p.delta_b == 0:
            raise DegenerateField("electron Rabi correction needs delta_b > 0")
        return 1.0 - p.J / (4.0 * p.gamma_e * p.delta_b)
    if species == "nuclear":
        sign = 1.0 if electron_state == DOWN else -1.0
        return 1.0 + sign * p.A / (2.0 * p.gamma_n * p.b)
    raise ValueError(f"unknown species {species!r}")


def _gamma(p, species):
    return p.gamma_e if species == "electron" else p.gamma_n


def corrected_rabi(p, B1, species, electron_state=DOWN):
    """Dressed Rabi frequency (rad/s) of a pulse of amplitude ``B1``."""
    if B1 <= 0:
        raise ValueError("B1 must be positive")
    return abs(_gamma(p, species) * B1 * rabi_factor(p, species, electron_state))


def suppression_amplitude(delta, K, species, p, electron_state=DOWN):
    """Amplitude ``B1`` whose dressed Rabi frequency is ``|delta|/sqrt(4K^2-1)``."""
    if K < 1 or int(K) != K:
        raise ValueError("K must be a positive integer")
    if delta == 0:
        raise ValueError("suppression needs a nonzero detuning")
    omega = abs(delta) / math.sqrt(4.0 * K * K - 1.0)
    return omega / abs(_gamma(p, species) * rabi_factor(p, species, electron_state))


def _apply(index, assignment):
    for spin, value in assignment.items():
        index = with_label(index, spin, value)
    return index


def _pairs(g, fire_value):
    """Driven ``(i, i')`` and suppressed ``(j, j')`` basis indices."""
    base = _apply(0, g.context)
    i = _apply(base, {g.control: fire_value, g.target: UP})
    j = _apply(base, {g.control: 1 - fire_value, g.target: UP})
    return (i, with_label(i, g.target, DOWN)), (j, with_label(j, g.target, DOWN))


def _select(g, eig, p, driven, suppressed, K, electron_state):
    species = species_of(g.target)
    E = eig.energies
    i, ip = driven
    j, jp = suppressed
    nu = float(E[ip] - E[i])
    delta = float(E[jp] - E[j] - nu)
    B1 = suppression_amplitude(delta, K, species, p, electron_state)
    rabi = abs(delta) / math.sqrt(4.0 * K * K - 1.0)
    return species, nu, delta, B1, rabi


def _selectivity(p, g, B1, rabi, species, K):
    spread_e = 4.0 * p.gamma_e * p.delta_b
    spread_n = 4.0 * p.gamma_n * p.delta_b
    if species == "electron":
        eps_e = rabi / spread_e if spread_e > 0 else math.inf
        eps_n = corrected_rabi(p, B1, "nuclear") / spread_n if spread_n > 0 else math.inf
    else:
        omega_e = p.gamma_e * B1 * abs(rabi_factor(p, "electron")) if p.delta_b > 0 else math.inf
        eps_e = omega_e / spread_e if spread_e > 0 else math.inf
        eps_n = rabi / spread_n if spread_n > 0 else math.inf
    sqrt_pe = math.nan
    if g.kind != "Hadamard" and species == "electron" and species_of(g.control) == "nuclear":
        sqrt_pe = p.A / (8.0 * p.gamma_e * p.delta_b * K) if p.delta_b > 0 else math.inf
    return eps_e, eps_n, sqrt_pe


def compile_cnot(g, eig, K, p, phase=0.0):
    """Compile a CN or inverse-CN gate against the energies of ``eig``."""
    if g.kind not in ("CN", "inverse-CN"):
        raise ValueError("compile_cnot handles CN and inverse-CN gates")
    fire = DOWN if g.kind == "CN" else UP
    driven, suppressed = _pairs(g, fire)
    electron_state = spin_label(driven[0], _atom_electron(g.target))
    species, nu, delta, B1, rabi = _select(g, eig, p, driven, suppressed, K, electron_state)
    pulse = Pulse(nu=nu, duration=math.pi / rabi, amplitude=B1, phase=phase)
    eps_e, eps_n, sqrt_pe = _selectivity(p, g, B1, rabi, species, K)
    return CompiledPulse(g, pulse, int(K), delta, rabi, driven, suppressed, eps_e, eps_n, sqrt_pe)


def compile_hadamard(g, eig, K_n, p, phase=0.0):
    """Compile a nuclear Hadamard (a π/2 pulse) on the transition fixed by ``context``.

    The suppressed pair is the same nuclear flip with the same-atom
    electron reversed, exactly as for a CN with that electron as control.
    """
    if g.kind != "Hadamard":
        raise ValueError("compile_hadamard handles Hadamard gates")
    ref = _atom_electron(g.target)
    i = _apply(_apply(0, g.context), {g.target: UP})
    driven = (i, with_label(i, g.target, DOWN))
    j = with_label(i, ref, 1 - g.context[ref])
    suppressed = (j, with_label(j, g.target, DOWN))
    electron_state = g.context[ref]
    species, nu, delta, B1, rabi = _select(g, eig, p, driven, suppressed, K_n, electron_state)
    pulse = Pulse(nu=nu, duration=math.pi / (2.0 * rabi), amplitude=B1, phase=phase)
    eps_e, eps_n, _ = _selectivity(p, g, B1, rabi, species, K_n)
    return CompiledPulse(g, pulse, int(K_n), delta, rabi, driven, suppressed, eps_e, eps_n, math.nan)


def compile_gate(g, eig, K, p, phase=0.0):
    if g.kind == "Hadamard":
        return compile_hadamard(g, eig, K, p, phase)
    return compile_cnot(g, eig, K, p, phase)


def selectivity_report(cp, p):
    """``(eps_e, eps_n, sqrt_Pe)`` of a compiled pulse (``sqrt_Pe`` NaN when not applicable)."""
    return cp.eps_e, cp.eps_n, cp.sqrt_Pe

