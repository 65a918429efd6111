import math

import pytest
from hypothesis import given, settings, strategies as st

from donorreg.gates import (DegenerateField, GateSpec, compile_gate, corrected_rabi,
                            rabi_factor, suppression_amplitude)
from donorreg.protocols import entanglement_gates, initialization_gates
from donorreg.pulse_engine import RegisterState, evolve_pulse, two_level_solution
from donorreg.spin_model import DOWN, TWO_PI, UP, SystemParams, basis_index

CTX1 = {"n2": UP, "e2": DOWN}


def _hz(x):
    return x / TWO_PI


def test_gate_spec_validation():
    with pytest.raises(ValueError):
        GateSpec("CN", "e1", "e1", {})
    with pytest.raises(ValueError):
        GateSpec("CN", "e1", None, {})
    with pytest.raises(ValueError):
        GateSpec("XOR", "e1", "n1", {})
    g = GateSpec("inverse-CN", "e2", "e1", {"n2": DOWN, "n1": UP})
    assert g.name == "invCN_e1,e2"
    assert GateSpec("CN", "e1", "n1", CTX1).name == "CN_n1,e1"


def test_rabi_factors(p):
    assert rabi_factor(p.replace(J=0.0), "electron") == 1.0
    assert math.isclose(corrected_rabi(p.replace(J=0.0), 1e-5, "electron"), p.gamma_e * 1e-5)
    up, down = rabi_factor(p, "nuclear", UP), rabi_factor(p, "nuclear", DOWN)
    assert math.isclose(down - 1.0, 1.0 - up)
    assert math.isclose(down, 1 + p.A / (2 * p.gamma_n * p.b))
    with pytest.raises(DegenerateField):
        rabi_factor(p.replace(delta_b=0.0), "electron")


def test_electron_cn_numbers(p, pert2):
    cp = compile_gate(GateSpec("CN", "e1", "n1", CTX1), pert2, 103, p)
    assert cp.driven == (5, 7) and cp.suppressed == (4, 6)
    assert abs(_hz(cp.rabi) - 563e3) < 1e3
    assert abs(cp.pulse.duration - 0.89e-6) < 0.01e-6
    assert abs(abs(cp.detuning) - p.A) < 0.01 * p.A
    assert abs(cp.sqrt_Pe - 1.03 / 103) < 0.02 * 1.03 / 103
    assert abs(cp.eps_e - 0.01) < 0.001


def test_nuclear_cn_numbers(p, pert2):
    cp = compile_gate(GateSpec("CN", "n1", "e1", CTX1), pert2, 33620, p)
    assert cp.driven == (6, 7) and cp.suppressed == (4, 5)
    assert abs(_hz(cp.rabi) - 1725) < 5
    assert abs(cp.pulse.duration - 0.290e-3) < 2e-6
    assert abs(cp.eps_n - 1.7 / 34.5) < 0.002
    assert math.isnan(cp.sqrt_Pe)


def test_exchange_controlled_cn(p, pert2):
    cp = compile_gate(GateSpec("inverse-CN", "e2", "e1", {"n2": DOWN, "n1": UP}), pert2, 1, p)
    assert abs(_hz(cp.rabi) - 289e3) < 1e3
    assert abs(abs(cp.detuning) - p.J) < 0.02 * p.J


def test_hadamard(p, pert2, exact):
    cp = compile_gate(GateSpec("Hadamard", "n1", None, {"n2": DOWN, "e2": DOWN, "e1": DOWN}),
                      pert2, 33620, p)
    assert cp.driven == (14, 15) and cp.suppressed == (12, 13)
    assert abs(cp.pulse.duration - 0.1449e-3) < 1e-6
    # dynamics needs the exact vectors: they carry the hyperfine dressing of the flip
    out = evolve_pulse(RegisterState.basis_state(exact, 15), p, cp.pulse, exact)
    assert abs(out.populations[15] - 0.5) < 0.01 and abs(out.populations[14] - 0.5) < 0.01


def test_protocol_gate_pairs(p, pert2):
    want = {"CN_n1,e1": (5, 7), "CN_e1,n1": (6, 7), "CN_n2,e2": (11, 15), "CN_e2,n2": (7, 15),
            "invCN_n1,e1": (12, 14), "invCN_e1,e2": (8, 12), "invCN_e2,n2": (0, 8)}
    from donorreg.protocols import Ks
    ks = Ks()
    for item in initialization_gates() + entanglement_gates():
        if item is None:
            continue
        g, kname = item
        cp = compile_gate(g, pert2, getattr(ks, kname), p)
        if g.name in want:
            assert cp.driven == want[g.name], g.name


@pytest.mark.parametrize("K", [1, 2, 103, 33620])
def test_two_pi_k_exact(p, K):
    delta = TWO_PI * 1.16e8
    B1 = suppression_amplitude(delta, K, "electron", p)
    om = corrected_rabi(p, B1, "electron")
    assert math.isclose(om * math.sqrt(4 * K * K - 1), abs(delta), rel_tol=1e-12)
    _, dq = two_level_solution(delta, om, math.pi / om)
    assert abs(dq) ** 2 < 1e-12


def test_suppression_validation(p):
    with pytest.raises(ValueError):
        suppression_amplitude(1.0, 0, "electron", p)
    with pytest.raises(ValueError):
        suppression_amplitude(0.0, 3, "electron", p)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 5000))
def test_duration_monotone_in_k(K):
    p = SystemParams()
    from donorreg.eigensolver import perturbative_eigensystem
    e = perturbative_eigensystem(p, 2)
    g = GateSpec("CN", "e1", "n1", CTX1)
    a, b = compile_gate(g, e, K, p), compile_gate(g, e, K + 1, p)
    assert b.pulse.duration > a.pulse.duration and b.pulse.amplitude < a.pulse.amplitude


def test_full_model_nuclear_cn_fidelity(p, exact, pert2):
    g = GateSpec("CN", "n1", "e1", CTX1)
    cp = compile_gate(g, pert2, 33620, p)
    (i, ip), (j, _) = cp.driven, cp.suppressed
    fire = evolve_pulse(RegisterState.basis_state(exact, i), p, cp.pulse, exact)
    hold = evolve_pulse(RegisterState.basis_state(exact, j), p, cp.pulse, exact)
    assert fire.populations[ip] >= 0.99
    assert 1 - hold.populations[j] <= 0.01


def test_electron_cn_firing_index():
    assert basis_index(UP, DOWN, UP, DOWN) == 5 and basis_index(UP, DOWN, DOWN, DOWN) == 7
