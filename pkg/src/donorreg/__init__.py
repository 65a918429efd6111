"""Simulator and pulse compiler for a two-donor electron/nuclear spin register.

Modules: ``spin_model`` (basis, Hamiltonian, RF coupling, validity checks),
``eigensolver`` (perturbative and exact labeled spectra), ``pulse_engine``
(rotating-frame propagation and the two-level oracle), ``gates`` (CN,
inverse-CN and Hadamard compilation), ``protocols`` (initialization,
entanglement, relaxation step, sweeps), ``relaxation`` (classical nuclear
precession during electron relaxation) and ``cli``.
"""
from .kernels import BACKEND
from .spin_model import SystemParams

__version__ = "0.1.0"
__all__ = ["BACKEND", "SystemParams", "__version__"]
