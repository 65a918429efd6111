import math

import numpy as np
import pytest

from donorreg import protocols
from donorreg.eigensolver import AmbiguousLabeling
from donorreg.protocols import (Ks, ProtocolStep, entanglement_sequence, error_metric,
                                initialization_sequence, random_initial, relax_electrons,
                                run_protocol, sweep, sweep_grid)
from donorreg.pulse_engine import RegisterState
from donorreg.spin_model import DOWN, UP, basis_index


def test_random_initial_normalized_and_deterministic():
    for seed in range(20):
        z = random_initial(seed)
        assert abs(np.sum(np.abs(z) ** 2) - 1) < 1e-12
    assert np.array_equal(random_initial(42), random_initial(42))
    assert not np.array_equal(random_initial([1, 0, 0]), random_initial([1, 0, 1]))


def test_random_initial_isotropic():
    pops = np.array([np.abs(random_initial([9, r])) ** 2 for r in range(10_000)])
    assert np.all(np.abs(pops.mean(axis=0) - 0.25) < 0.02)


def test_relax_merges_onto_all_down():
    a, b = 0.6, 0.8j
    C = np.zeros(16, complex)
    C[basis_index(UP, DOWN, UP, DOWN)] = a
    C[basis_index(UP, DOWN, DOWN, DOWN)] = b
    out = relax_electrons(C)
    assert math.isclose(abs(out[7]), 1.0) and np.count_nonzero(np.abs(out) > 1e-15) == 1
    # the resident all-down amplitude keeps its phase
    assert abs(out[7] - 1j) < 1e-12


def test_relax_identity_on_all_down():
    C = np.zeros(16, complex)
    C[[6, 7, 14, 15]] = random_initial(5)
    assert np.allclose(relax_electrons(C), C)


def test_relax_four_way():
    C = np.zeros(16, complex)
    for e2 in (UP, DOWN):
        for e1 in (UP, DOWN):
            C[basis_index(DOWN, e2, e1, UP)] = 0.5
    out = relax_electrons(C)
    assert math.isclose(abs(out[14]) ** 2, 1.0) and math.isclose(np.sum(np.abs(out) ** 2), 1.0)


def test_relax_register_state(exact):
    s = RegisterState.basis_state(exact, 4, clock=2e-6)
    out = relax_electrons(s)
    assert abs(out.basis_amplitudes()[6]) ** 2 > 0.999


def test_relax_batch():
    rng = np.random.default_rng(3)
    C = rng.standard_normal((5, 16)) + 1j * rng.standard_normal((5, 16))
    C /= np.linalg.norm(C, axis=1, keepdims=True)
    out = relax_electrons(C)
    assert np.allclose(np.sum(np.abs(out) ** 2, axis=1), 1.0)
    assert np.allclose(out[2], relax_electrons(C[2]))


def test_error_metric():
    ideal = np.zeros(16, complex)
    ideal[[0, 15]] = 1 / math.sqrt(2)
    assert error_metric(ideal) < 1e-15
    top = np.zeros(16, complex)
    top[15] = 1.0
    assert math.isclose(error_metric(top), 1.0)


def test_step_validation():
    with pytest.raises(ValueError):
        ProtocolStep("pulse")
    with pytest.raises(ValueError):
        ProtocolStep.wait(-1.0)
    assert ProtocolStep.relax().label == "relax"


@pytest.mark.parametrize("start", [6, 15])
def test_initialization_reaches_15(p, exact, pert2, start):
    C0 = np.zeros(16, complex)
    C0[start] = 1.0
    res = run_protocol(C0, initialization_sequence(p, pert2), p, exact)
    assert abs(res.C[15]) ** 2 >= 0.99


def test_entanglement_from_15(p, exact, pert2):
    C0 = np.zeros(16, complex)
    C0[15] = 1.0
    res = run_protocol(C0, entanglement_sequence(p, pert2), p, exact)
    assert abs(abs(res.C[0]) ** 2 - 0.5) < 0.02 and abs(abs(res.C[15]) ** 2 - 0.5) < 0.02
    label, pops = res.trace[1]
    assert label == "invCN_n1,e1"
    assert pops[15] + pops[12] > 0.98 and min(pops[15], pops[12]) > 0.4
    assert math.isfinite(res.theta)


def test_wait_step_is_free_evolution(p, exact, pert2):
    C0 = np.zeros(16, complex)
    C0[15] = 1.0
    steps = entanglement_sequence(p, pert2)
    a = run_protocol(C0, steps, p, exact)
    b = run_protocol(C0, steps[:2] + [ProtocolStep.wait(0.0)] + steps[2:], p, exact)
    assert np.allclose(a.C, b.C)


def test_population_conserved_every_step(p, exact, protocol_steps):
    res = run_protocol(random_initial(11), protocol_steps, p, exact)
    for _, pops in res.trace:
        assert abs(np.sum(pops) - 1.0) < 1e-9
    assert len(res.trace) == len(protocol_steps)


def test_run_protocol_rejects_bad_input(p, exact, protocol_steps):
    with pytest.raises(ValueError):
        run_protocol(np.ones(4), protocol_steps, p, exact)
    with pytest.raises(ValueError):
        run_protocol(np.ones(3) / math.sqrt(3), protocol_steps, p, exact)


def test_sweep_deterministic_across_workers(p):
    grid = sweep_grid("J")[:3]
    a = sweep("J", grid, 8, 77, p, workers=1)
    b = sweep("J", grid, 8, 77, p, workers=2)
    assert a == b
    assert all(s.n_realizations == 8 and s.n_ambiguous_points == 0 for s in a)


def test_sweep_records_ambiguous_points(p, monkeypatch):
    real = protocols.eigensystem

    def flaky(q, source, on_tie="raise"):
        if source == "exact" and on_tie == "raise":
            raise AmbiguousLabeling(10, (10, 12), (0.7071, 0.7071))
        return real(q, source, on_tie)

    monkeypatch.setattr(protocols, "eigensystem", flaky)
    pts = sweep("deltaB", [1e-3], 4, 1, p)
    assert pts[0].n_ambiguous_points == 1 and math.isfinite(pts[0].mean_P)
    both = sweep("deltaB", [1e-3], 4, 1, p, energy_source="exact")
    assert both[0].n_ambiguous_points == 1


def test_sweep_validation(p):
    with pytest.raises(ValueError):
        sweep("J", [], 3, 0, p)
    with pytest.raises(ValueError):
        sweep("J", [1e6], 0, 0, p)
    with pytest.raises(ValueError):
        sweep("bogus", [1.0], 1, 0, p)


def test_ks_defaults():
    assert Ks() == Ks(103, 1, 33620)
