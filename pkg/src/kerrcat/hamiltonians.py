"""Hamiltonians of the parametrically driven Kerr resonator.

The single-mode engineered Hamiltonian is built in its factored form
``K A^dag A`` with ``A = (a - alpha0)(a - alpha1)``. Because ``A`` only
lowers, the truncated matrix is the exact Fock block of the infinite
operator, and both wells ``|alpha0>``, ``|alpha1>`` sit at energy zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateSelectorError, InvalidSpaceError
from .fock import (
    TruncatedSpace,
    _as_space,
    check_truncation,
    displacement_operator,
    ladder_operators,
    recommended_dim,
)

__all__ = [
    "AcsParams",
    "DriveParams",
    "NoiseParams",
    "MultiQubitSpec",
    "CoefficientRecord",
    "parse_complex",
    "build_acs_hamiltonian",
    "well_operator",
    "to_drive_form",
    "build_drive_hamiltonian",
    "displaced_hamiltonian",
    "effective_loss_hamiltonian",
    "metapotential",
    "ControlHamiltonian",
    "build_control_hamiltonian",
]


def parse_complex(value) -> complex:
    """Accept ``[re, im]``, a number, or the ``"mag@deg"`` shorthand."""
    if isinstance(value, str):
        s = value.strip()
        if "@" in s:
            mag, ang = s.split("@", 1)
            ang = ang.strip()
            if ang.endswith("deg"):
                phi = np.deg2rad(float(ang[:-3]))
            elif ang.endswith("rad"):
                phi = float(ang[:-3])
            else:
                phi = np.deg2rad(float(ang))
            return complex(float(mag) * np.exp(1j * phi))
        if s.startswith("["):
            return parse_complex(json.loads(s))
        return complex(s.replace(" ", "").replace("i", "j"))
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"complex literal must be [re, im], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    return complex(value)


def _cjson(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


@dataclass(frozen=True)
class AcsParams:
    """Kerr rate and the two well centers."""

    alpha0: complex
    alpha1: complex
    K: float = 1.0

    def __post_init__(self):
        if not self.K > 0:
            raise ValueError("Kerr rate K must be positive")
        if not (np.isfinite(self.alpha0) and np.isfinite(self.alpha1)):
            raise ValueError("well centers must be finite")

    @property
    def separation(self) -> float:
        return abs(self.alpha0 - self.alpha1)

    @property
    def max_amplitude(self) -> float:
        return max(abs(self.alpha0), abs(self.alpha1))

    @classmethod
    def from_json(cls, doc: dict) -> "AcsParams":
        return cls(parse_complex(doc["alpha0"]), parse_complex(doc["alpha1"]), float(doc.get("K", 1.0)))

    def to_json(self) -> dict:
        return {"K": self.K, "alpha0": _cjson(self.alpha0), "alpha1": _cjson(self.alpha1)}


@dataclass(frozen=True)
class DriveParams:
    """Drive-form coefficients; every entry is a rate (same units as K).

    ``detuning`` multiplies ``a^dag a``, ``epsilon`` multiplies ``a^dag``,
    ``beta`` multiplies ``a^dag^2`` and ``eta`` multiplies ``a^dag^2 a``.
    """

    detuning: float
    K: float
    beta: complex
    eta: complex
    epsilon: complex


@dataclass(frozen=True)
class NoiseParams:
    kappa: float = 0.0
    kappa_phi: float = 0.0

    def __post_init__(self):
        if self.kappa < 0 or self.kappa_phi < 0:
            raise ValueError("noise rates must be nonnegative")

    @classmethod
    def from_json(cls, doc: dict) -> "NoiseParams":
        return cls(float(doc.get("kappa", 0.0)), float(doc.get("kappa_phi", 0.0)))


@dataclass(frozen=True)
class MultiQubitSpec:
    """Control/target layout for the conditional-well Hamiltonian.

    Modes ``0..m_controls-1`` are controls; the rest are targets. When every
    control sits in ``|alpha1>`` the targets see wells ``(alpha2, alpha3)``,
    otherwise ``(alpha4, alpha5)``.
    """

    n_modes: int
    m_controls: int
    alpha0: complex
    alpha1: complex
    alpha2: complex
    alpha3: complex
    alpha4: complex
    alpha5: complex
    dim: int = 25
    K: float = 1.0

    def __post_init__(self):
        if not 1 <= self.m_controls < self.n_modes:
            raise ValueError("need 1 <= m_controls < n_modes")
        if self.alpha0 == self.alpha1:
            raise DegenerateSelectorError("control wells merge (alpha0 == alpha1)")
        if self.dim < 2:
            raise InvalidSpaceError("per-mode cutoff must be >= 2")

    @property
    def dims(self) -> list[int]:
        return [self.dim] * self.n_modes

    @classmethod
    def from_json(cls, doc: dict) -> "MultiQubitSpec":
        c = {k: parse_complex(doc[k]) for k in ("alpha0", "alpha1", "alpha2", "alpha3", "alpha4", "alpha5")}
        return cls(int(doc["n_modes"]), int(doc["m_controls"]), dim=int(doc.get("dim", 25)),
                   K=float(doc.get("K", 1.0)), **c)


@dataclass(frozen=True)
class CoefficientRecord:
    """Normal-ordered coefficients of a displaced Hamiltonian.

    ``H = constant + number a^dag a + kerr a^dag^2 a^2
          + (single a^dag + two_photon a^dag^2 + cubic a^dag^2 a + h.c.)``
    """

    constant: complex
    number: complex
    kerr: complex
    single: complex
    two_photon: complex
    cubic: complex


def well_operator(space: TruncatedSpace, alpha0: complex, alpha1: complex) -> np.ndarray:
    """``(a - alpha0)(a - alpha1)``; its null space holds both wells."""
    space = _as_space(space)
    a, _ = ladder_operators(space)
    eye = np.eye(space.dim)
    return a @ a - (alpha0 + alpha1) * a + alpha0 * alpha1 * eye


def build_acs_hamiltonian(space: TruncatedSpace, p: AcsParams, check: bool = True) -> np.ndarray:
    space = _as_space(space)
    if check:
        check_truncation(space, p.max_amplitude)
    A = well_operator(space, p.alpha0, p.alpha1)
    return p.K * (A.conj().T @ A)


def to_drive_form(p: AcsParams) -> DriveParams:
    K = p.K
    beta = K * p.alpha0 * p.alpha1
    eta = -K * (p.alpha0 + p.alpha1)
    return DriveParams(detuning=abs(eta) ** 2 / K, K=K, beta=beta, eta=eta, epsilon=beta * np.conj(eta) / K)


def build_drive_hamiltonian(space: TruncatedSpace, d: DriveParams, include_offset: bool = True) -> np.ndarray:
    """Expanded drive form; the offset ``|beta|^2/K`` keeps the wells at zero energy."""
    space = _as_space(space)
    a, ad = ladder_operators(space)
    n = ad @ a
    ad2 = ad @ ad
    drive = d.epsilon * ad + d.beta * ad2 + d.eta * (ad2 @ a)
    H = d.detuning * n + d.K * (ad2 @ a @ a) + drive + drive.conj().T
    if include_offset:
        H = H + (abs(d.beta) ** 2 / d.K) * np.eye(space.dim)
    return H


def _project_coefficients(Hd: np.ndarray) -> CoefficientRecord:
    # Low Fock matrix elements of a normal-ordered quartic fix its coefficients uniquely.
    c0 = Hd[0, 0]
    single = Hd[1, 0]
    two = Hd[2, 0] / np.sqrt(2.0)
    number = Hd[1, 1] - c0
    cubic = Hd[2, 1] / np.sqrt(2.0) - single
    kerr = (Hd[2, 2] - c0 - 2.0 * number) / 2.0
    return CoefficientRecord(constant=c0, number=number, kerr=kerr, single=single, two_photon=two, cubic=cubic)


def _conjugate_by_displacement(space: TruncatedSpace, H_builder, alpha: complex) -> np.ndarray:
    # Conjugate on a padded space so the cropped block is free of cutoff error.
    pad = recommended_dim(abs(alpha)) + 10
    big = TruncatedSpace(space.dim + pad)
    H = H_builder(big)
    D = displacement_operator(big, alpha, check=False)
    return (D.conj().T @ H @ D)[: space.dim, : space.dim]


def displaced_hamiltonian(space: TruncatedSpace, p: AcsParams, alpha: complex) -> tuple[np.ndarray, CoefficientRecord]:
    """``D^dag(alpha) H D(alpha)`` and its normal-ordered coefficients."""
    space = _as_space(space)
    check_truncation(space, p.max_amplitude)
    if alpha == 0:
        H = build_acs_hamiltonian(space, p)
        return H, _project_coefficients(H)
    Hd = _conjugate_by_displacement(space, lambda s: build_acs_hamiltonian(s, p, check=False), alpha)
    return Hd, _project_coefficients(Hd)


def effective_loss_hamiltonian(space: TruncatedSpace, p: AcsParams, noise: NoiseParams, alpha: complex) -> np.ndarray:
    """Displaced non-Hermitian ``H - i kappa a^dag a / 2``.

    The conjugation is exact, so the result also carries the constant
    ``-i kappa |alpha|^2 / 2`` next to the ``a^dag a`` and single-photon terms.
    """
    space = _as_space(space)
    Hd, _ = displaced_hamiltonian(space, p, alpha)
    if noise.kappa == 0:
        return Hd
    a, ad = ladder_operators(space)
    shifted_n = ad @ a + alpha * ad + np.conj(alpha) * a + abs(alpha) ** 2 * np.eye(space.dim)
    return Hd - 0.5j * noise.kappa * shifted_n


def metapotential(p: AcsParams, xs: Sequence[float], ps: Sequence[float]) -> np.ndarray:
    """Classical-limit energy surface on a ``(len(ps), len(xs))`` grid.

    Uses the scaled quadratures ``a = (x + ip)/sqrt(2)`` and the drive-form
    coefficients with ``a^dag -> a^*``; the constant offset puts both well
    bottoms at zero.
    """
    d = to_drive_form(p)
    xs = np.asarray(xs, dtype=float)
    ps = np.asarray(ps, dtype=float)
    a = (xs[None, :] + 1j * ps[:, None]) / np.sqrt(2.0)
    ac = np.conj(a)
    n = np.abs(a) ** 2
    drive = d.epsilon * ac + d.beta * ac**2 + d.eta * ac * n
    return d.detuning * n + d.K * n**2 + 2.0 * np.real(drive) + abs(d.beta) ** 2 / d.K


def _embed(op: sp.spmatrix, mode: int, dims: Sequence[int]) -> sp.csr_matrix:
    mats = [op if i == mode else sp.identity(dim, format="csr", dtype=complex) for i, dim in enumerate(dims)]
    return reduce(lambda x, y: sp.kron(x, y, format="csr"), mats)


class ControlHamiltonian:
    """Conditional-well Hamiltonian on the tensor-product space.

    The target wells ``(alpha2, alpha3)`` can be changed cheaply with
    :meth:`matrix`, which is what time-dependent gate schedules need.
    """

    def __init__(self, spec: MultiQubitSpec):
        self.spec = spec
        dims = spec.dims
        self.dims = dims
        self.total_dim = int(np.prod(dims))
        a1 = sp.diags(np.sqrt(np.arange(1, spec.dim, dtype=float)), 1, format="csr", dtype=complex)
        self._a = [_embed(a1, k, dims) for k in range(spec.n_modes)]
        eye = sp.identity(self.total_dim, format="csr", dtype=complex)
        self._eye = eye
        a0, a1c = spec.alpha0, spec.alpha1
        # Lagrange selector: 1 on the all-controls-in-|alpha1> branch, 0 if any control is in |alpha0>
        sel = eye
        for i in range(spec.m_controls):
            sel = sel @ ((a0 * eye - self._a[i]) / (a0 - a1c))
        self.selector = sel.tocsr()
        self._S2 = (sel @ sel).tocsr()
        H_c = sp.csr_matrix((self.total_dim, self.total_dim), dtype=complex)
        for i in range(spec.m_controls):
            A = self._a[i] @ self._a[i] - (a0 + a1c) * self._a[i] + a0 * a1c * eye
            H_c = H_c + spec.K * (A.conj().T @ A)
        self.control_part = H_c.tocsr()
        self._targets = list(range(spec.m_controls, spec.n_modes))
        self._aS = [(self._a[k] @ sel).tocsr() for k in self._targets]
        self._a2 = [(self._a[k] @ self._a[k]).tocsr() for k in self._targets]

    def target_well_operator(self, k_index: int, alpha2: complex, alpha3: complex) -> sp.csr_matrix:
        s = self.spec
        a4, a5 = s.alpha4, s.alpha5
        ak = self._a[self._targets[k_index]]
        c1 = alpha2 + alpha3 - a4 - a5
        c2 = a4 * (alpha3 - a5) + a5 * (alpha2 - a4)
        c3 = (alpha2 - a4) * (alpha3 - a5)
        # (a_k - T2)(a_k - T3) with T2 = a4 + (alpha2 - a4) S, T3 = a5 + (alpha3 - a5) S
        return (self._a2[k_index] - (a4 + a5) * ak - c1 * self._aS[k_index] + a4 * a5 * self._eye
                + c2 * self.selector + c3 * self._S2)

    def matrix(self, alpha2: complex | None = None, alpha3: complex | None = None) -> sp.csr_matrix:
        s = self.spec
        alpha2 = s.alpha2 if alpha2 is None else alpha2
        alpha3 = s.alpha3 if alpha3 is None else alpha3
        H = self.control_part
        for k in range(len(self._targets)):
            B = self.target_well_operator(k, alpha2, alpha3)
            H = H + s.K * (B.conj().T @ B)
        return H.tocsr()


def build_control_hamiltonian(spec: MultiQubitSpec, check: bool = True) -> sp.csr_matrix:
    if check:
        amp = max(abs(getattr(spec, f"alpha{i}")) for i in range(6))
        check_truncation(TruncatedSpace(spec.dim), amp)
    return ControlHamiltonian(spec).matrix()
