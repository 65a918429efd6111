import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from donorreg import kernels
from donorreg.eigensolver import (AmbiguousLabeling, NearDegeneracyWarning, basis_eigensystem,
                                  effective_nn_coupling, eigensystem, exact_eigensystem,
                                  label_match, perturbative_eigensystem, second_order_shifts,
                                  swap_labels, _sector_eigenpairs)
from donorreg.kernels import load_backend
from donorreg.spin_model import SIGMA, TWO_PI, SystemParams, build_h0


@pytest.mark.filterwarnings("ignore::donorreg.eigensolver.NearDegeneracyWarning")
def test_e15_minus_e6_exact():
    for p in (SystemParams(), SystemParams(J=TWO_PI * 3e6, delta_b=2e-3, b=2.0)):
        E = perturbative_eigensystem(p, 0).energies
        assert math.isclose(E[15] - E[6], 2 * p.gamma_n * p.b + p.A, rel_tol=1e-12)


def test_second_order_e7(p, pert0):
    d = second_order_shifts(p, pert0.energies)
    assert d[7] < 0 and 1e4 < abs(d[7]) / TWO_PI < 1e5
    assert d[0] == 0 and d[15] == 0


def test_second_order_matches_exact_shift(p, exact, pert0):
    # the closed-form shifts reproduce E_exact - E0 to well under 1 % of the largest shift
    shift = second_order_shifts(p, pert0.energies)
    true = exact.energies - pert0.energies
    assert np.max(np.abs(shift - true)) < 1e-2 * np.max(np.abs(true))


@settings(max_examples=15, deadline=None)
@given(st.floats(0.1e-3, 1.5e-3), st.floats(0.05e6, 2e6))
def test_second_order_tracks_exact_property(db, J_hz):
    p = SystemParams(delta_b=db, J=TWO_PI * J_hz)
    e0 = perturbative_eigensystem(p, 0).energies
    e2 = perturbative_eigensystem(p, 2).energies
    ex = exact_eigensystem(p).energies
    assert np.max(np.abs(ex - e2)) < 0.05 * np.max(np.abs(ex - e0))


def test_j_zero_psi13_pure():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearDegeneracyWarning)
        v = perturbative_eigensystem(SystemParams(J=0.0), 0).vectors
    assert np.allclose(np.abs(v[13]), np.eye(16)[13])


def test_exact_residual_and_sectors(p, exact):
    h = build_h0(p)
    for n in range(16):
        v = exact.vectors[n]
        assert np.linalg.norm(h @ v - exact.energies[n] * v) <= 1e-9 * np.linalg.norm(h)
        support = np.flatnonzero(np.abs(v) > 1e-14)
        assert np.all(SIGMA[support] == SIGMA[n])
    a = exact.vectors
    assert np.allclose(a @ a.conj().T, np.eye(16), atol=1e-12)


def test_extreme_sectors_exact(p, exact, pert0):
    for n in (0, 15):
        assert math.isclose(exact.energies[n], pert0.energies[n], rel_tol=1e-14)


def test_overlaps_at_defaults(exact):
    assert np.min(exact.overlaps) >= 0.99


def test_identity_labeling(exact):
    again = label_match(exact.energies, exact.vectors, exact)
    assert np.allclose(again.vectors, exact.vectors)
    assert np.allclose(again.overlaps, 1.0)


def test_phase_convention(exact, pert0):
    c = np.einsum("ni,ni->n", pert0.vectors.conj(), exact.vectors)
    assert np.allclose(c.imag, 0, atol=1e-12) and np.all(c.real > 0)


def _mixing_imbalance(q):
    values, rows = _sector_eigenpairs(build_h0(q))
    # lower member of the 10/12 pair: its character swaps through the crossing
    pair = [k for k in range(16) if abs(rows[k, 10]) + abs(rows[k, 12]) > 0.5]
    k = min(pair, key=lambda r: values[r])
    return abs(rows[k, 10]) - abs(rows[k, 12]), values, rows


def test_ambiguous_at_degeneracy():
    # second-order shifts move the equal-mixing point slightly off gamma_e*delta_b = A/2
    p = SystemParams()
    centre = p.A / (2 * p.gamma_e)
    lo, hi = centre * 0.99, centre * 1.01
    f_lo = _mixing_imbalance(p.replace(delta_b=lo))[0]
    assert f_lo * _mixing_imbalance(p.replace(delta_b=hi))[0] < 0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        f_mid = _mixing_imbalance(p.replace(delta_b=mid))[0]
        if f_mid * f_lo > 0:
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    gap, values, rows = _mixing_imbalance(p.replace(delta_b=mid))
    assert abs(gap) < 1e-7 and abs(mid / centre - 1) < 1e-3
    with pytest.raises(AmbiguousLabeling) as info:
        label_match(values, rows, basis_eigensystem())
    assert len(info.value.candidates) >= 2
    resolved = label_match(values, rows, basis_eigensystem(), on_tie="first")
    assert (10, 12) in resolved.ties
    swapped = swap_labels(resolved, resolved.ties)
    assert swapped.energies[10] == resolved.energies[12]


def test_near_degeneracy_warning():
    p = SystemParams()
    with pytest.warns(NearDegeneracyWarning):
        e = perturbative_eigensystem(p.replace(delta_b=p.A / (2 * p.gamma_e)), 2)
    assert e.near_degenerate


def test_source_dispatch(p):
    for s in ("exact", "perturbative-0", "perturbative-2"):
        assert eigensystem(p, s).source == s
    with pytest.raises(ValueError):
        eigensystem(p, "bogus")


def test_nn_coupling(p, pert0, exact):
    assert effective_nn_coupling(p, pert0) == 0.0
    assert abs(effective_nn_coupling(p, exact)) / TWO_PI <= 10.0
    assert abs(effective_nn_coupling(SystemParams(J=0.0))) < 1e-6 * p.A


@pytest.mark.parametrize("backend", ["cython", "python"])
def test_jacobi_matches_numpy(backend):
    try:
        mod = load_backend(backend)
    except ImportError:
        pytest.skip(f"{backend} backend not built")
    rng = np.random.default_rng(7)
    for n in (1, 4, 6):
        m = rng.standard_normal((n, n))
        m = np.ascontiguousarray(m + m.T)
        w, v, _ = mod.jacobi_eigh(m)
        assert np.allclose(np.sort(w), np.linalg.eigvalsh(m), atol=1e-12)
        assert np.allclose(m @ v, v * w, atol=1e-11)


def test_jacobi_sweep_limit():
    m = np.ascontiguousarray([[1.0, 2.0], [2.0, -1.0]])
    with pytest.raises(RuntimeError):
        kernels.jacobi_eigh(m, max_sweeps=0)


def test_python_backend_exact_agrees(p, exact, monkeypatch):
    from donorreg import eigensolver
    monkeypatch.setattr(eigensolver, "kernels", load_backend("python"))
    slow = eigensolver.exact_eigensystem(p)
    assert np.allclose(slow.energies, exact.energies, rtol=1e-13)


def test_env_forces_python_backend():
    import os
    import subprocess
    import sys
    env = dict(os.environ, DONORREG_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import donorreg; print(donorreg.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
