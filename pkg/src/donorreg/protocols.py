"""Initialization and entanglement protocols, electron relaxation, and sweeps.

A protocol is a list of :class:`ProtocolStep` (pulse, relax or wait). The
simulator keeps the register as lab-frame eigen-amplitudes ``D`` and can run
many realizations at once: every array below may carry a leading batch axis.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from .eigensolver import AmbiguousLabeling, NearDegeneracyWarning, eigensystem, swap_labels
from .gates import GateSpec, compile_gate
from .pulse_engine import RegisterState, lab_propagator
from .spin_model import DOWN, UP, decode

__all__ = [
    "ProtocolStep",
    "RunResult",
    "Ks",
    "SweepPoint",
    "random_initial",
    "relax_electrons",
    "initialization_gates",
    "entanglement_gates",
    "initialization_sequence",
    "entanglement_sequence",
    "full_sequence",
    "error_metric",
    "run_protocol",
    "run_batch",
    "sweep",
    "sweep_grid",
]

INITIAL_STATES = (6, 7, 14, 15)
RESIDENT_TOL = 1e-12


@dataclass(frozen=True)
class Ks:
    """2πK integers: electron gates with nuclear control, electron gates
    with electron control, and nuclear gates."""

    K_e: int = 103
    K_e_prime: int = 1
    K_n: int = 33620


@dataclass(frozen=True)
class ProtocolStep:
    """One step: ``kind`` is "pulse", "relax" or "wait"."""

    kind: str
    compiled: object = None
    duration: float = 0.0
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("pulse", "relax", "wait"):
            raise ValueError(f"unknown step kind {self.kind!r}")
        if self.kind == "pulse" and self.compiled is None:
            raise ValueError("a pulse step needs a compiled pulse")
        if self.duration < 0:
            raise ValueError("wait duration must be non-negative")
        if not self.label:
            name = self.compiled.gate.name if self.kind == "pulse" else self.kind
            object.__setattr__(self, "label", name)

    @classmethod
    def pulse(cls, compiled):
        return cls("pulse", compiled)

    @classmethod
    def relax(cls):
        return cls("relax")

    @classmethod
    def wait(cls, duration):
        return cls("wait", duration=duration)


@dataclass(frozen=True, eq=False)
class RunResult:
    """Final basis amplitudes ``C``, error ``P`` and per-step populations.

    ``trace`` holds ``(label, populations)`` with basis-ket populations taken
    after each step; ``theta`` is the relative phase of ``C15`` to ``C0``.
    """

    C: np.ndarray
    P: float
    trace: list = field(default_factory=list)
    total_time: float = 0.0

    @property
    def theta(self):
        return float(np.angle(self.C[15] * np.conj(self.C[0])))

    @property
    def norm(self):
        return float(np.sum(np.abs(self.C) ** 2))


def random_initial(seed):
    """Random normalized amplitudes ``(C6, C7, C14, C15)``.

    ``seed`` is anything :func:`numpy.random.default_rng` accepts, including
    a sequence of integers (used to split streams per grid point and
    realization).
    """
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    return z / np.linalg.norm(z)


def _relax_lookup():
    """For each basis ket, the ket with both electrons down and the same nuclei."""
    target = np.empty(16, dtype=int)
    for i in range(16):
        n2, _, _, n1 = decode(i)
        target[i] = 8 * n2 + 4 * DOWN + 2 * DOWN + n1
    return target


_RELAX_TARGET = _relax_lookup()


def _relax_basis(C):
    C = np.asarray(C, dtype=complex)
    out = np.zeros_like(C)
    for dest in np.unique(_RELAX_TARGET):
        members = np.flatnonzero(_RELAX_TARGET == dest)
        group = C[..., members]
        mag = np.sqrt(np.sum(np.abs(group) ** 2, axis=-1))
        resident = C[..., dest]
        largest = np.take_along_axis(group, np.argmax(np.abs(group), axis=-1)[..., None],
                                     axis=-1)[..., 0]
        ref = np.where(np.abs(resident) > RESIDENT_TOL, resident, largest)
        absref = np.abs(ref)
        phase = np.where(absref > 0, ref / np.where(absref > 0, absref, 1.0), 1.0)
        out[..., dest] = mag * phase
    return out


def relax_electrons(state):
    """Move every electron-up amplitude onto the all-electrons-down ket.

    Accepts basis amplitudes (array, optionally batched) or a lab-frame
    :class:`RegisterState`. Colliding amplitudes combine as the root sum of
    squares and take the phase of the resident all-down amplitude (or of
    the largest contributor if there is none), so population is preserved.
    """
    if isinstance(state, RegisterState):
        C = _relax_basis(state.basis_amplitudes())
        return RegisterState(state.eig.from_basis(C, state.clock), state.eig, state.clock)
    return _relax_basis(state)


def error_metric(C):
    """``P = |1/2 - |C0|^2| + |1/2 - |C15|^2|`` (works on batches)."""
    C = np.asarray(C)
    return np.abs(0.5 - np.abs(C[..., 0]) ** 2) + np.abs(0.5 - np.abs(C[..., 15]) ** 2)


def initialization_gates():
    """Gate specs of the initialization sequence in application order."""
    ctx1 = {"n2": UP, "e2": DOWN}
    ctx2 = {"e1": DOWN, "n1": DOWN}
    return [
        (GateSpec("CN", "e1", "n1", ctx1), "K_e"),
        (GateSpec("CN", "n1", "e1", ctx1), "K_n"),
        None,
        (GateSpec("CN", "e2", "n2", ctx2), "K_e"),
        (GateSpec("CN", "n2", "e2", ctx2), "K_n"),
        None,
    ]


def entanglement_gates():
    """Gate specs of the entangling sequence in application order (from |15>)."""
    return [
        (GateSpec("Hadamard", "n1", None, {"n2": DOWN, "e2": DOWN, "e1": DOWN}), "K_n"),
        (GateSpec("inverse-CN", "e1", "n1", {"n2": DOWN, "e2": DOWN}), "K_e"),
        (GateSpec("inverse-CN", "e2", "e1", {"n2": DOWN, "n1": UP}), "K_e_prime"),
        (GateSpec("inverse-CN", "n2", "e2", {"e1": UP, "n1": UP}), "K_n"),
    ]


def _compile_steps(specs, p, eig, ks):
    steps = []
    for item in specs:
        if item is None:
            steps.append(ProtocolStep.relax())
            continue
        g, kname = item
        steps.append(ProtocolStep.pulse(compile_gate(g, eig, getattr(ks, kname), p)))
    return steps


def initialization_sequence(p, eig, ks=Ks()):
    """``[CN_{n1,e1}, CN_{e1,n1}, relax, CN_{n2,e2}, CN_{e2,n2}, relax]`` as steps."""
    return _compile_steps(initialization_gates(), p, eig, ks)


def entanglement_sequence(p, eig, ks=Ks()):
    """``[Had_{n1}, invCN_{n1,e1}, invCN_{e1,e2}, invCN_{e2,n2}]`` as steps."""
    return _compile_steps(entanglement_gates(), p, eig, ks)


def full_sequence(p, eig, ks=Ks()):
    return initialization_sequence(p, eig, ks) + entanglement_sequence(p, eig, ks)


def run_batch(C0, steps, p, sim, trace=False):
    """Simulate basis amplitudes ``C0`` (shape ``(..., 16)``) through ``steps``.

    ``sim`` is the eigensystem the dynamics is expressed in. Returns the
    final basis amplitudes, the clock and (if requested) the trace.
    """
    D = sim.from_basis(np.asarray(C0, dtype=complex), 0.0)
    t = 0.0
    rows = []
    for step in steps:
        if step.kind == "pulse":
            pulse = step.compiled.pulse
            U = lab_propagator(p, pulse, sim, t)
            D = D @ U.T
            t += pulse.duration
        elif step.kind == "relax":
            D = sim.from_basis(_relax_basis(sim.to_basis(D, t)), t)
        else:
            t += step.duration
        if trace:
            rows.append((step.label, np.abs(sim.to_basis(D, t)) ** 2))
    return sim.to_basis(D, t), t, rows


def _embed_initial(initial):
    initial = np.asarray(initial, dtype=complex)
    C0 = np.zeros(initial.shape[:-1] + (16,), dtype=complex)
    if initial.shape[-1] == 16:
        return initial
    if initial.shape[-1] != 4:
        raise ValueError("initial amplitudes are (C6, C7, C14, C15) or a full 16-vector")
    C0[..., list(INITIAL_STATES)] = initial
    return C0


def run_protocol(initial, steps, p, eig):
    """Run one realization and report ``C(T)``, ``P`` and the population trace."""
    C0 = _embed_initial(initial)
    if not np.isclose(np.sum(np.abs(C0) ** 2), 1.0, atol=1e-9):
        raise ValueError("initial amplitudes must be normalized")
    C, t, rows = run_batch(C0, steps, p, eig, trace=True)
    return RunResult(C, float(error_metric(C)), rows, t)


@dataclass(frozen=True)
class SweepPoint:
    axis_value: float
    mean_P: float
    std_P: float
    n_realizations: int
    n_ambiguous_points: int


def _params_at(axis, value, p):
    if axis == "J":
        return p.replace(J=2.0 * math.pi * value)
    if axis == "deltaB":
        return p.replace(delta_b=value / 2.0)
    raise ValueError(f"unknown sweep axis {axis!r}")


def _run_point(q, sim, carriers, ks, init):
    steps = full_sequence(q, carriers, ks)
    C, _, _ = run_batch(_embed_initial(init), steps, q, sim)
    return error_metric(C)


def _point(args):
    axis, value, index, p, realizations, seed, ks, energy_source, sim_source = args
    q = _params_at(axis, value, p)
    init = np.array([random_initial([seed, index, r]) for r in range(realizations)])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearDegeneracyWarning)
        try:
            sim = eigensystem(q, sim_source)
            ambiguous = 0
        except AmbiguousLabeling:
            sim = eigensystem(q, sim_source, on_tie="first")
            ambiguous = 1
        carriers = sim if energy_source == sim_source else eigensystem(q, energy_source)
    P = _run_point(q, sim, carriers, ks, init)
    if ambiguous and carriers is sim:
        # carriers depend on the tied labels: average over both orderings
        P = np.concatenate([P, _run_point(q, sim, swap_labels(sim, sim.ties), ks, init)])
    return SweepPoint(float(value), float(np.mean(P)), float(np.std(P)), realizations, ambiguous)


def sweep(axis, grid, realizations, seed, p, energy_source="perturbative-2",
          sim_source="exact", ks=Ks(), workers=1):
    """Mean and spread of ``P`` over seeded realizations at each grid point.

    ``axis`` is "J" (grid in Hz, ordinary frequency) or "deltaB" (grid of
    the full field difference ``2 delta_b`` in tesla). Gates are recompiled
    once per grid point. Realization ``r`` at point ``k`` draws its initial
    state from the stream ``(seed, k, r)``, so results do not depend on
    ``workers``.
    """
    grid = [float(v) for v in grid]
    if not grid:
        raise ValueError("sweep grid is empty")
    if realizations < 1:
        raise ValueError("need at least one realization")
    jobs = [(axis, v, k, p, realizations, seed, ks, energy_source, sim_source)
            for k, v in enumerate(grid)]
    if workers <= 1:
        return [_point(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_point, jobs))


def sweep_grid(axis):
    """Default grids: J in Hz, or the full field difference in tesla."""
    if axis == "J":
        return [v * 1e6 for v in (0.1, 0.2, 0.5, 1, 2, 3, 4, 5, 7, 10)]
    if axis == "deltaB":
        return list(np.geomspace(0.1e-3, 5e-3, 25))
    raise ValueError(f"unknown sweep axis {axis!r}")
