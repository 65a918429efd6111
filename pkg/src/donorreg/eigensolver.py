"""Labeled eigensystems of the static Hamiltonian.

Three sources are provided: closed-form zeroth-order perturbation theory,
the same plus second-order hyperfine corrections, and exact diagonalization
(cyclic Jacobi per Sigma sector). Labels follow basis dominance: state ``n``
is the eigenvector that reduces to basis ket ``|n>`` when the hyperfine
flip-flop and exchange mixing vanish.
"""
from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from . import kernels
from .spin_model import build_h0, sector_indices

__all__ = [
    "SOURCES",
    "EigenSystem",
    "AmbiguousLabeling",
    "EigensolverError",
    "NearDegeneracyWarning",
    "perturbative_eigensystem",
    "second_order_shifts",
    "exact_eigensystem",
    "eigensystem",
    "basis_eigensystem",
    "label_match",
    "swap_labels",
    "effective_nn_coupling",
    "near_degenerate",
]

SOURCES = ("perturbative-0", "perturbative-2", "exact")
TIE_TOL = 1e-6


class AmbiguousLabeling(Exception):
    """Two candidate eigenvectors overlap a reference state equally."""

    def __init__(self, label, candidates, overlaps):
        self.label = label
        self.candidates = tuple(candidates)
        self.overlaps = tuple(overlaps)
        super().__init__(
            f"label {label}: candidates {self.candidates} tie with overlaps {self.overlaps}"
        )


class EigensolverError(RuntimeError):
    """The Jacobi iteration failed to converge (internal error)."""


class NearDegeneracyWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Energies ``E[n]`` (rad/s) and coefficients ``a[n, i] = <i|psi_n>``."""

    energies: np.ndarray
    vectors: np.ndarray
    source: str
    near_degenerate: bool = False
    overlaps: np.ndarray = field(default=None)
    ties: tuple = ()

    def __post_init__(self):
        e = np.array(self.energies, dtype=float)
        a = np.array(self.vectors, dtype=complex)
        if e.shape != (16,) or a.shape != (16, 16):
            raise ValueError("EigenSystem needs 16 energies and a 16x16 coefficient array")
        e.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "vectors", a)

    def energy(self, n):
        return float(self.energies[n])

    def to_basis(self, D, t):
        """Basis amplitudes ``C_i(t) = sum_n a[n, i] D_n exp(-i E_n t)``."""
        return (np.asarray(D) * np.exp(-1j * self.energies * t)) @ self.vectors

    def from_basis(self, C, t):
        """Inverse of :meth:`to_basis`."""
        return (np.asarray(C) @ self.vectors.conj().T) * np.exp(1j * self.energies * t)


def near_degenerate(p, factor=10.0):
    """True inside the regime where the 10/12 labels are unreliable."""
    return abs(p.gamma_e * p.delta_b - p.A / 2.0) < factor * p.J / 2.0


def _unit(vec):
    n = np.linalg.norm(vec)
    return vec / n


def _pair_vectors(u, w, x, g):
    """Eigenvectors of ``[[c+x, g], [g, c-x]]`` in basis kets ``u``, ``w``.

    Returns ``(v_u, v_w)`` where ``v_u`` is the one dominated by ``|u>``.
    With ``x >= 0`` the first is the upper state; with ``x < 0`` the roles
    of upper and lower swap, which keeps each label on its own basis ket.
    """
    r = math.hypot(x, g)
    s = abs(x) + r
    v_u = np.zeros(16)
    v_w = np.zeros(16)
    if s == 0.0:
        v_u[u] = 1.0
        v_w[w] = 1.0
        return v_u, v_w
    sg = 1.0 if x >= 0 else -1.0
    v_u[u], v_u[w] = s, sg * g
    v_w[u], v_w[w] = -sg * g, s
    return _unit(v_u), _unit(v_w)


def _zeroth_energies(p):
    ge, gn, A, J, b, db = p.gamma_e, p.gamma_n, p.A, p.J, p.b, p.delta_b
    g = J / 2.0
    R = math.hypot(ge * db, g)
    R3 = math.hypot(ge * db + A / 2.0, g)
    x = ge * db - A / 2.0
    Rp = math.hypot(x, g)
    E = np.empty(16)
    E[0] = (ge - gn) * b + A / 2.0 + J / 4.0
    E[15] = (-ge + gn) * b + A / 2.0 + J / 4.0
    E[7] = -ge * b - gn * db + J / 4.0
    E[14] = -ge * b + gn * db + J / 4.0
    E[13] = gn * b - J / 4.0 - R
    E[11] = gn * b - J / 4.0 + R
    E[1] = ge * b - gn * db + J / 4.0
    E[8] = ge * b + gn * db + J / 4.0
    E[2] = -gn * b - J / 4.0 + R
    E[4] = -gn * b - J / 4.0 - R
    E[6] = -ge * b - gn * b - A / 2.0 + J / 4.0
    E[9] = ge * b + gn * b - A / 2.0 + J / 4.0
    E[3] = -gn * db - J / 4.0 + R3
    E[5] = -gn * db - J / 4.0 - R3
    # state 10 is the lower member while A/2 >= gamma_e dB, upper otherwise
    sg = -1.0 if x <= 0 else 1.0
    E[10] = gn * db - J / 4.0 + sg * Rp
    E[12] = gn * db - J / 4.0 - sg * Rp
    return E


def _zeroth_vectors(p):
    g = p.J / 2.0
    x = p.gamma_e * p.delta_b
    a = np.zeros((16, 16))
    for n in (0, 1, 6, 7, 8, 9, 14, 15):
        a[n, n] = 1.0
    # (ket with +x diagonal, ket with -x diagonal, half-splitting x, coupling)
    blocks = (
        (11, 13, x, g),
        (2, 4, x, g),
        (3, 5, x + p.A / 2.0, g),
        (10, 12, x - p.A / 2.0, g),
    )
    for u, w, xx, gg in blocks:
        a[u], a[w] = _pair_vectors(u, w, xx, gg)
    return a


def second_order_shifts(p, E0=None):
    """Closed-form second-order hyperfine corrections ``E2[n]`` (rad/s)."""
    if E0 is None:
        E0 = _zeroth_energies(p)
    gn, A, J, b, db = p.gamma_n, p.A, p.J, p.b, p.delta_b
    S = (p.gamma_e + gn) * b
    R = math.hypot(p.gamma_e * db, J / 2.0)
    q = A * A / 4.0
    E2 = np.zeros(16)
    E2[1] = q / (S - gn * db - R + J / 2.0)
    E2[2] = q / (-S + gn * db + R - J / 2.0)
    E2[4] = q / (-S - gn * db - R - J / 2.0)
    E2[7] = q / (-S - gn * db - R + J / 2.0)
    E2[8] = q / (S + gn * db + R + J / 2.0)
    E2[11] = q / (S + gn * db + R - J / 2.0)
    E2[13] = q / (S - gn * db - R - J / 2.0)
    E2[14] = q / (-S + gn * db + R + J / 2.0)
    E2[5] = q * (1.0 / (E0[5] - E0[6]) + 1.0 / (E0[5] - E0[9]))
    E2[6] = q * (1.0 / (E0[6] - E0[5]) + 1.0 / (E0[6] - E0[10]))
    E2[9] = q * (1.0 / (E0[9] - E0[5]) + 1.0 / (E0[9] - E0[10]))
    E2[10] = q * (1.0 / (E0[10] - E0[6]) + 1.0 / (E0[10] - E0[9]))
    return E2


def perturbative_eigensystem(p, order=2):
    """Closed-form eigensystem to zeroth or second order in the hyperfine flip-flop."""
    if order not in (0, 2):
        raise ValueError("order must be 0 or 2")
    E0 = _zeroth_energies(p)
    E = E0 + second_order_shifts(p, E0) if order == 2 else E0
    flag = near_degenerate(p)
    if flag:
        warnings.warn("gamma_e*delta_b is close to A/2: labels 10/12 are strongly mixed",
                      NearDegeneracyWarning, stacklevel=2)
    return EigenSystem(E, _zeroth_vectors(p), f"perturbative-{order}", near_degenerate=flag)


def basis_eigensystem():
    """Reference whose vectors are the bare basis kets (energies zero)."""
    return EigenSystem(np.zeros(16), np.eye(16), "basis")


def _sector_eigenpairs(h):
    """Unlabeled exact eigenpairs ``(values, vectors-as-rows)`` via Jacobi per Sigma block."""
    values = []
    rows = []
    for sigma in (-2.0, -1.0, 0.0, 1.0, 2.0):
        idx = sector_indices(sigma)
        block = np.ascontiguousarray(h[np.ix_(idx, idx)].real)
        try:
            w, v, _ = kernels.jacobi_eigh(block)
        except RuntimeError as exc:
            raise EigensolverError(str(exc)) from exc
        for k in range(len(idx)):
            vec = np.zeros(16)
            vec[idx] = v[:, k]
            values.append(w[k])
            rows.append(vec)
    return np.array(values), np.array(rows)


def label_match(values, vectors, reference, source="exact", on_tie="raise"):
    """Assign reference labels to unlabeled eigenpairs by greedy overlap.

    ``vectors`` holds one eigenvector per row. Pairs are taken in decreasing
    ``|<ref_n|v>|`` order. A candidate that ties within ``TIE_TOL`` with a
    still-open competitor raises :class:`AmbiguousLabeling`, or with
    ``on_tie="first"`` is resolved in scan order and the tied labels are
    listed in the result's ``ties``. Each vector's phase is fixed so its
    overlap with the reference is real and positive.
    """
    if on_tie not in ("raise", "first"):
        raise ValueError("on_tie must be 'raise' or 'first'")
    values = np.asarray(values, dtype=float)
    vectors = np.asarray(vectors, dtype=complex)
    ov = np.abs(reference.vectors.conj() @ vectors.T)  # ov[n, k]
    order = np.argsort(-ov, axis=None, kind="stable")
    label_of = -np.ones(16, dtype=int)
    vec_of = -np.ones(16, dtype=int)
    tied = []
    for flat in order:
        n, k = divmod(int(flat), 16)
        if vec_of[n] >= 0 or label_of[k] >= 0:
            continue
        o = ov[n, k]
        if o > TIE_TOL:
            rivals_k = [r for r in range(16) if r != k and label_of[r] < 0
                        and abs(ov[n, r] - o) <= TIE_TOL]
            rivals_n = [r for r in range(16) if r != n and vec_of[r] < 0
                        and abs(ov[r, k] - o) <= TIE_TOL]
            if rivals_k and on_tie == "raise":
                raise AmbiguousLabeling(n, [k, *rivals_k], [o, *(ov[n, r] for r in rivals_k)])
            if rivals_n and on_tie == "raise":
                raise AmbiguousLabeling(n, [n, *rivals_n], [o, *(ov[r, k] for r in rivals_n)])
            tied.extend(("vec", n, r) for r in rivals_k)
            tied.extend(("label", n, r) for r in rivals_n)
        vec_of[n] = k
        label_of[k] = n
    ties = set()
    for kind, n, r in tied:
        other = label_of[r] if kind == "vec" else r
        ties.add(tuple(sorted((n, int(other)))))
    energies = values[vec_of]
    a = vectors[vec_of].copy()
    overlaps = np.empty(16)
    for n in range(16):
        c = np.vdot(reference.vectors[n], a[n])
        overlaps[n] = abs(c)
        if abs(c) > 0:
            a[n] *= abs(c) / c
    es = EigenSystem(energies, a, source, ties=tuple(sorted(ties)))
    object.__setattr__(es, "overlaps", overlaps)
    return es


def swap_labels(eig, pairs):
    """Copy of ``eig`` with each label pair in ``pairs`` exchanged."""
    perm = np.arange(16)
    for m, n in pairs:
        perm[m], perm[n] = perm[n], perm[m]
    return EigenSystem(eig.energies[perm], eig.vectors[perm], eig.source,
                       eig.near_degenerate, ties=eig.ties)


def exact_eigensystem(p, reference=None, on_tie="raise"):
    """Exact eigensystem labeled against ``reference`` (zeroth order by default)."""
    values, rows = _sector_eigenpairs(build_h0(p))
    if reference is None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NearDegeneracyWarning)
            reference = perturbative_eigensystem(p, 0)
    es = label_match(values, rows, reference, "exact", on_tie)
    object.__setattr__(es, "near_degenerate", near_degenerate(p))
    return es


def eigensystem(p, source, on_tie="raise"):
    """Dispatch on a source name from :data:`SOURCES`."""
    if source == "exact":
        return exact_eigensystem(p, on_tie=on_tie)
    if source == "perturbative-0":
        return perturbative_eigensystem(p, 0)
    if source == "perturbative-2":
        return perturbative_eigensystem(p, 2)
    raise ValueError(f"unknown energy source {source!r}")


def effective_nn_coupling(p, eig=None):
    """Electron-mediated nucleus-nucleus coupling ``(E15 - E14) - (E7 - E6)``."""
    E = (exact_eigensystem(p) if eig is None else eig).energies
    return float((E[15] - E[14]) - (E[7] - E[6]))

