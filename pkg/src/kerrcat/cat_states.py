"""Closed-form cat, near-collision and collision state algebra."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import CollisionLimitError, PrecisionError
from .fock import TruncatedSpace, _as_space, coherent, displaced_fock, ladder_operators

__all__ = [
    "AcsOverlap",
    "NearCollisionSpec",
    "PhotonStats",
    "PauliProjection",
    "acs_overlap",
    "acs_states",
    "near_collision_state",
    "collision_pair",
    "photon_statistics",
    "near_collision_moments",
    "mandel_q",
    "mandel_q_from_state",
    "quadrature_uncertainty",
    "dephasing_projection",
    "dephasing_projection_numeric",
    "write_statistics_csv",
]

NEAR_COLLISION_FLOOR = 1e-6


def _wrap(angle: float) -> float:
    """Reduce to (-pi, pi]."""
    a = math.remainder(angle, 2 * math.pi)
    return math.pi if a == -math.pi else a


@dataclass(frozen=True)
class AcsOverlap:
    d: complex
    gamma: float
    norm_plus: float
    norm_minus: float
    cross_overlap: complex


@dataclass(frozen=True)
class NearCollisionSpec:
    alpha: complex
    delta_alpha: complex

    @property
    def delta_theta(self) -> float:
        theta = np.angle(self.alpha) if self.alpha != 0 else 0.0
        return _wrap(float(np.angle(self.delta_alpha)) - float(theta))

    @classmethod
    def from_polar(cls, alpha: complex, delta_mag: float, delta_theta: float) -> "NearCollisionSpec":
        theta = np.angle(alpha) if alpha != 0 else 0.0
        return cls(alpha, delta_mag * np.exp(1j * (theta + delta_theta)))


@dataclass
class PhotonStats:
    mean: float
    fluctuation: float
    distribution: np.ndarray
    M: float | None = None


@dataclass(frozen=True)
class PauliProjection:
    """``<C_i| n |C_j> = (cI I + cX X + cY Y + cZ Z)_{ij} / 2`` on the {|C+>, |C->} pair.

    The halved convention makes ``cI -> |alpha0|^2 + |alpha1|^2`` and
    ``cX -> |alpha0|^2 - |alpha1|^2`` for well separated wells.
    """

    cI: float
    cX: float
    cY: float
    cZ: float

    def matrix(self) -> np.ndarray:
        X = np.array([[0, 1], [1, 0]], dtype=complex)
        Y = np.array([[0, -1j], [1j, 0]])
        Z = np.diag([1.0, -1.0]).astype(complex)
        return 0.5 * (self.cI * np.eye(2) + self.cX * X + self.cY * Y + self.cZ * Z)


def acs_overlap(alpha0: complex, alpha1: complex) -> AcsOverlap:
    d = alpha0 - alpha1
    gamma = float(np.imag(alpha0 * np.conj(alpha1)))
    e = math.exp(-0.5 * abs(d) ** 2)
    den_minus = 2.0 * (1.0 - e * math.cos(gamma))
    n_plus = 1.0 / math.sqrt(2.0 * (1.0 + e * math.cos(gamma)))
    if den_minus <= 1e-300 or alpha0 == alpha1:
        err = CollisionLimitError("minus-state normalization diverges at alpha0 == alpha1; use collision_pair")
        err.norm_plus = n_plus  # still finite: 1/2
        raise err
    n_minus = 1.0 / math.sqrt(den_minus)
    cross = 1j * e * math.sin(gamma) / math.sqrt(1.0 - math.exp(-abs(d) ** 2) * math.cos(gamma) ** 2)
    return AcsOverlap(d, gamma, n_plus, n_minus, cross)


def acs_states(space: TruncatedSpace, alpha0: complex, alpha1: complex) -> tuple[np.ndarray, np.ndarray]:
    """``|C+->  = N+-(|alpha0> +- |alpha1>)`` with closed-form normalization."""
    ov = acs_overlap(alpha0, alpha1)
    c0 = coherent(space, alpha0)
    c1 = coherent(space, alpha1)
    return ov.norm_plus * (c0 + c1), ov.norm_minus * (c0 - c1)


def near_collision_state(space: TruncatedSpace, spec: NearCollisionSpec, exact: bool = False) -> np.ndarray:
    """``N (|alpha + dalpha> - |alpha>)``, or its ``dalpha -> 0`` limit when ``exact``.

    The limit is ``(e^{i Dtheta} |alpha,1> + i|alpha| sin(dtheta) |alpha>)`` normalized,
    with ``Dtheta`` the direction of ``dalpha``.
    """
    space = _as_space(space)
    mag = abs(spec.delta_alpha)
    if exact:
        big_theta = float(np.angle(spec.delta_alpha)) if mag > 0 else float(np.angle(spec.alpha))
        s = abs(spec.alpha) * math.sin(spec.delta_theta)
        psi = np.exp(1j * big_theta) * displaced_fock(space, spec.alpha, 1) + 1j * s * coherent(space, spec.alpha)
        return psi / math.sqrt(1.0 + s * s)
    if mag < NEAR_COLLISION_FLOOR:
        raise PrecisionError(f"|delta_alpha|={mag:.1e} below {NEAR_COLLISION_FLOOR:g}; request the exact branch")
    psi = coherent(space, spec.alpha + spec.delta_alpha) - coherent(space, spec.alpha)
    return psi / np.linalg.norm(psi)


def collision_pair(space: TruncatedSpace, alpha: complex) -> tuple[np.ndarray, np.ndarray]:
    c = coherent(space, alpha)
    f = displaced_fock(space, alpha, 1)
    return (c + f) / math.sqrt(2.0), (c - f) / math.sqrt(2.0)


def near_collision_moments(alpha_mag: float, delta_theta: float) -> tuple[float, float, float]:
    """``(M, mean, fluctuation)`` of the near-collision limit state."""
    s2 = (alpha_mag * math.sin(delta_theta)) ** 2
    M = (1.0 + 2.0 * s2) / (1.0 + s2)
    mean = alpha_mag**2 + M
    var = mean * (5.0 - 2.0 * M) + M * (M - 4.0)
    return M, mean, math.sqrt(max(var, 0.0))


def photon_statistics(state: np.ndarray, near_collision: tuple[float, float] | None = None) -> PhotonStats:
    """Photon-number distribution and moments of a normalized ket.

    Pass ``near_collision=(|alpha|, dtheta)`` to also record the closed-form ``M``.
    """
    pn = np.abs(state) ** 2
    pn = pn / pn.sum()
    n = np.arange(pn.size)
    mean = float(np.dot(n, pn))
    var = float(np.dot(n * n, pn)) - mean**2
    M = near_collision_moments(*near_collision)[0] if near_collision is not None else None
    return PhotonStats(mean, math.sqrt(max(var, 0.0)), pn, M)


def mandel_q(alpha_mag: float, delta_theta: float) -> float:
    if alpha_mag < 0:
        raise ValueError("alpha_mag must be nonnegative")
    M = near_collision_moments(alpha_mag, delta_theta)[0]
    a2 = alpha_mag**2
    return (2.0 * a2 * (2.0 - M) - M * M) / (a2 + M)


def mandel_q_from_state(state: np.ndarray) -> float:
    st = photon_statistics(state)
    return (st.fluctuation**2 - st.mean) / st.mean


def quadrature_uncertainty(state: np.ndarray) -> float:
    """``<(dX)^2><(dP)^2>`` with ``X = (a + a^dag)/2``, ``P = (a - a^dag)/(2i)``."""
    a, ad = ladder_operators(state.shape[0])
    X = 0.5 * (a + ad)
    P = (a - ad) / 2j

    def var(op):
        m = np.vdot(state, op @ state).real
        return np.vdot(state, op @ (op @ state)).real - m * m

    return float(var(X) * var(P))


def _number_matrix(alpha0: complex, alpha1: complex) -> np.ndarray:
    """``<C_i| a^dag a |C_j>`` from coherent-state algebra."""
    ov = acs_overlap(alpha0, alpha1)
    g = np.exp(-0.5 * abs(ov.d) ** 2 - 1j * ov.gamma)  # <alpha0|alpha1>
    q = np.conj(alpha0) * alpha1 * g  # <alpha0|n|alpha1>
    n0, n1 = abs(alpha0) ** 2, abs(alpha1) ** 2
    npl, nmi = ov.norm_plus, ov.norm_minus
    mpp = npl**2 * (n0 + n1 + 2.0 * q.real)
    mmm = nmi**2 * (n0 + n1 - 2.0 * q.real)
    mpm = npl * nmi * (n0 - n1 - 2j * q.imag)
    return np.array([[mpp, mpm], [np.conj(mpm), mmm]])


def dephasing_projection(alpha0: complex, alpha1: complex, large_separation: bool = False) -> PauliProjection:
    """Pauli decomposition of the photon-number operator on the cat pair.

    The default is exact for any separation. ``large_separation`` drops the
    ``N+- -> 1/sqrt(2)`` corrections, leaving ``cI = |a0|^2+|a1|^2``,
    ``cX = |a0|^2-|a1|^2`` and ``cZ + i cY`` proportional to
    ``2 a0^* a1 <a0|a1>``.
    """
    if large_separation:
        acs_overlap(alpha0, alpha1)
        d = alpha0 - alpha1
        gamma = np.imag(alpha0 * np.conj(alpha1))
        q = np.conj(alpha0) * alpha1 * np.exp(-0.5 * abs(d) ** 2 - 1j * gamma)
        n0, n1 = abs(alpha0) ** 2, abs(alpha1) ** 2
        return PauliProjection(float(n0 + n1), float(n0 - n1), float(2.0 * q.imag), float(2.0 * q.real))
    m = _number_matrix(alpha0, alpha1)
    return PauliProjection(
        cI=float(np.real(m[0, 0] + m[1, 1])),
        cX=float(2.0 * np.real(m[0, 1])),
        cY=float(-2.0 * np.imag(m[0, 1])),
        cZ=float(np.real(m[0, 0] - m[1, 1])),
    )


def dephasing_projection_numeric(space: TruncatedSpace, alpha0: complex, alpha1: complex) -> PauliProjection:
    """Same quantity by brute-force Fock-space matrix elements (test oracle)."""
    plus, minus = (coherent(space, alpha0) + coherent(space, alpha1)), (coherent(space, alpha0) - coherent(space, alpha1))
    plus /= np.linalg.norm(plus)
    minus /= np.linalg.norm(minus)
    a, ad = ladder_operators(space)
    n = ad @ a
    B = np.column_stack([plus, minus])
    m = B.conj().T @ n @ B
    return PauliProjection(float(np.real(m[0, 0] + m[1, 1])), float(2 * np.real(m[0, 1])),
                           float(-2 * np.imag(m[0, 1])), float(np.real(m[0, 0] - m[1, 1])))


def write_statistics_csv(path, rows) -> None:
    """``rows``: iterable of (alpha_mag, delta_theta, Q, mean, fluct, uncert_product)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha_mag", "delta_theta", "Q", "mean", "fluct", "uncert_product"])
        for r in rows:
            w.writerow([f"{v:.12g}" for v in r])
