import numpy as np
import pytest

from donorreg.eigensolver import exact_eigensystem, perturbative_eigensystem
from donorreg.protocols import Ks, full_sequence, random_initial, run_batch, _embed_initial
from donorreg.relaxation import GAUSS, RelaxationScenario, integrate_trajectory
from donorreg.spin_model import SystemParams

RELAX_CASES = {
    "3.3T-0.5G": (3.3, 0.5),
    "3.3T-5G": (3.3, 5.0),
    "3.3T-50G": (3.3, 50.0),
    "3.5T-50G": (3.5, 50.0),
}


@pytest.fixture(scope="session")
def p():
    return SystemParams()


@pytest.fixture(scope="session")
def exact(p):
    return exact_eigensystem(p)


@pytest.fixture(scope="session")
def pert2(p):
    return perturbative_eigensystem(p, 2)


@pytest.fixture(scope="session")
def pert0(p):
    return perturbative_eigensystem(p, 0)


@pytest.fixture(scope="session")
def protocol_steps(p, pert2):
    return full_sequence(p, pert2, Ks())


@pytest.fixture(scope="session")
def random_batch(p, exact, protocol_steps):
    """Final amplitudes of 100 seeded random realizations at defaults."""
    init = np.array([random_initial([1, 0, r]) for r in range(100)])
    C, _, _ = run_batch(_embed_initial(init), protocol_steps, p, exact)
    return C


@pytest.fixture(scope="session")
def relax_runs():
    """The four reference relaxation trajectories, computed once per session."""
    cache = {}

    def get(name):
        if name not in cache:
            B0, bx = RELAX_CASES[name]
            cache[name] = integrate_trajectory(RelaxationScenario(B0=B0, Bx=bx * GAUSS))
        return cache[name]

    return get
