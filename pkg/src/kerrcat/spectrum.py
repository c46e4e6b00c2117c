"""Exact diagonalization, gap analysis and ground-manifold checks."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import TruncationError
from .fock import TruncatedSpace, _as_space, coherent, displaced_fock
from .hamiltonians import AcsParams, build_acs_hamiltonian

__all__ = [
    "EigenSet",
    "GapReport",
    "ManifoldReport",
    "eigensystem",
    "gap_report",
    "gap_sweep",
    "write_gap_csv",
    "ground_manifold_check",
    "pair_splittings",
    "subspace_overlap",
]


@dataclass
class EigenSet:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns

    def __len__(self):
        return len(self.eigenvalues)


@dataclass
class GapReport:
    numeric_gap: float
    analytic_gap: float
    relative_error: float
    degeneracy_split: float


@dataclass
class ManifoldReport:
    degeneracy_split: float
    overlap_plus: float
    overlap_minus: float
    subspace_overlap: float


def eigensystem(H: np.ndarray, k: int | None = None) -> EigenSet:
    """The ``k`` eigenpairs with lowest real part.

    Hermitian input goes through ``eigh`` (real, ascending); anything else
    through ``eig`` sorted by real part.
    """
    H = np.asarray(H)
    if not np.all(np.isfinite(H)):
        raise ValueError("Hamiltonian has non-finite entries")
    n = H.shape[0]
    k = n if k is None else k
    if k > n:
        raise ValueError(f"requested {k} eigenpairs from a {n}-dimensional operator")
    if np.allclose(H, H.conj().T, atol=1e-12 * max(1.0, np.abs(H).max())):
        w, v = np.linalg.eigh(0.5 * (H + H.conj().T))
        return EigenSet(w[:k], v[:, :k])
    w, v = np.linalg.eig(H)
    order = np.argsort(w.real, kind="stable")[:k]
    v = v[:, order] / np.linalg.norm(v[:, order], axis=0)
    return EigenSet(w[order], v)


def _auto_space(p: AcsParams, space) -> TruncatedSpace:
    if space is None:
        return TruncatedSpace.for_amplitude(p.max_amplitude, margin=20)
    return _as_space(space)


def gap_report(p: AcsParams, space: TruncatedSpace | None = None) -> GapReport:
    """Gap ``E2 - E0`` above the two-fold ground manifold.

    The reference value is ``K |alpha0 - alpha1|^2`` for separated wells
    and ``2K`` when the wells coincide.
    """
    space = _auto_space(p, space)
    es = eigensystem(build_acs_hamiltonian(space, p), 3)
    E = es.eigenvalues
    # The gap state must not lean on the cutoff.
    tail = np.sum(np.abs(es.eigenvectors[-5:, 2]) ** 2)
    if tail > 1e-8:
        raise TruncationError(f"gap state has weight {tail:.1e} near the cutoff", space.dim + 20)
    d2 = abs(p.alpha0 - p.alpha1) ** 2
    analytic = p.K * d2 if d2 > 0 else 2.0 * p.K
    numeric = float(E[2] - E[0])
    return GapReport(numeric, analytic, abs(numeric / analytic - 1.0), float(max(E[1] - E[0], 0.0)))


def gap_sweep(d_squared, K: float = 1.0, direction: complex = 1.0, center: complex = 0.0) -> list[tuple[float, GapReport]]:
    """Gap reports along a line of symmetric well pairs ``center +/- d/2``."""
    u = direction / abs(direction)
    out = []
    for d2 in d_squared:
        half = 0.5 * np.sqrt(d2) * u
        p = AcsParams(center + half, center - half, K)
        out.append((float(d2), gap_report(p)))
    return out


def write_gap_csv(path, sweep) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["d_squared", "numeric_gap", "analytic_gap", "rel_err"])
        for d2, r in sweep:
            w.writerow([f"{d2:.12g}", f"{r.numeric_gap:.12g}", f"{r.analytic_gap:.12g}", f"{r.relative_error:.12g}"])


def subspace_overlap(V: np.ndarray, W: np.ndarray) -> float:
    """Mean squared principal cosine between two column spans."""
    qv, _ = np.linalg.qr(V)
    qw, _ = np.linalg.qr(W)
    return float(np.linalg.norm(qv.conj().T @ qw) ** 2 / min(qv.shape[1], qw.shape[1]))


def ground_manifold_check(p: AcsParams, space: TruncatedSpace | None = None) -> ManifoldReport:
    """Compare the numeric two-dimensional ground space with the expected cat pair."""
    space = _auto_space(p, space)
    es = eigensystem(build_acs_hamiltonian(space, p), 2)
    V = es.eigenvectors
    if p.alpha0 == p.alpha1:
        plus = displaced_fock(space, p.alpha0, 0)
        minus = displaced_fock(space, p.alpha0, 1)
    else:
        c0 = coherent(space, p.alpha0)
        c1 = coherent(space, p.alpha1)
        plus = (c0 + c1) / np.linalg.norm(c0 + c1)
        minus = (c0 - c1) / np.linalg.norm(c0 - c1)
    proj = V @ V.conj().T
    return ManifoldReport(
        degeneracy_split=float(abs(es.eigenvalues[1] - es.eigenvalues[0])),
        overlap_plus=float(np.real(np.vdot(plus, proj @ plus))),
        overlap_minus=float(np.real(np.vdot(minus, proj @ minus))),
        subspace_overlap=subspace_overlap(V, np.column_stack([plus, minus])),
    )


def pair_splittings(eigenvalues, n_pairs: int) -> np.ndarray:
    """``E[2n+1] - E[2n]`` for the lowest ``n_pairs`` level pairs."""
    E = np.asarray(eigenvalues)
    return np.array([E[2 * n + 1] - E[2 * n] for n in range(n_pairs)])
