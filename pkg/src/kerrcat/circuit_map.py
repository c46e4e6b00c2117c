"""Map between superconducting-circuit parameters and rotating-frame drive strengths.

Energies and frequencies share one unit (angular frequency, hbar = 1). The
rotating-frame Hamiltonian is

    H' = Delta n + K a^dag^2 a^2 + (beta^* a^dag^2 + eps^* a^dag + eta^* a^dag^2 a + h.c.)

with ``K = -E_C/(2 N^2) < 0``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .errors import InfeasibleTargetError
from .hamiltonians import AcsParams, parse_complex, to_drive_form

__all__ = [
    "CircuitParams",
    "EffectiveParams",
    "HardwareParams",
    "circuit_to_effective",
    "effective_to_drives",
    "acs_to_effective",
    "acs_to_circuit",
    "DRIVE_BOUND",
]

DRIVE_BOUND = 0.1


@dataclass(frozen=True)
class HardwareParams:
    """Fixed junction and array parameters."""

    E_C: float
    E_J: float
    E_J1: float
    E_J2: float
    N: int = 1

    def __post_init__(self):
        for name in ("E_C", "E_J", "E_J1", "E_J2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError("N must be a positive integer")

    @property
    def EJ_tilde(self) -> float:
        return 2.0 * self.E_J + self.E_J1 + self.E_J2

    @property
    def EJ_minus(self) -> float:
        return self.E_J1 - self.E_J2

    @property
    def omega_c(self) -> float:
        return math.sqrt(8.0 * self.EJ_tilde * self.E_C / self.N)

    @property
    def n0(self) -> float:
        return (self.EJ_tilde / (32.0 * self.N * self.E_C)) ** 0.25

    @property
    def varphi0(self) -> float:
        return (2.0 * self.N * self.E_C / self.EJ_tilde) ** 0.25

    @property
    def K(self) -> float:
        return -self.E_C / (2.0 * self.N**2)


@dataclass(frozen=True)
class CircuitParams:
    """Hardware plus drives.

    ``charge_drive`` is ``C_d V_d / e`` (dimensionless). ``delta1`` and
    ``delta2`` are relative flux-modulation depths, ``phi1..phi3`` the
    phases of the charge, ``2 omega_p`` flux and ``omega_p`` flux drives.
    """

    E_C: float
    E_J: float
    E_J1: float
    E_J2: float
    N: int
    delta1: float
    delta2: float
    charge_drive: float
    phi1: float
    phi2: float
    phi3: float
    omega_p: float

    def __post_init__(self):
        self.hardware  # validates energies and N
        if self.delta1 < 0 or self.delta2 < 0 or self.charge_drive < 0:
            raise ValueError("drive amplitudes must be nonnegative")

    @property
    def hardware(self) -> HardwareParams:
        return HardwareParams(self.E_C, self.E_J, self.E_J1, self.E_J2, self.N)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj) -> "CircuitParams":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(**{k: (int(obj[k]) if k == "N" else float(obj[k])) for k in cls.__dataclass_fields__})


@dataclass(frozen=True)
class EffectiveParams:
    omega_c: float
    Delta: float
    K: float
    beta: complex
    eta: complex
    epsilon: complex
    xi: complex
    epsilon_charge: complex
    n0: float
    varphi0: float

    def to_json(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            # + 0.0 turns negative zeros into plain zeros
            out[k] = [v.real + 0.0, v.imag + 0.0] if isinstance(v, complex) else v + 0.0
        return out

    @classmethod
    def from_json(cls, obj) -> "EffectiveParams":
        if isinstance(obj, str):
            obj = json.loads(obj)
        kw = {}
        for k in cls.__dataclass_fields__:
            v = obj.get(k, 0.0)
            kw[k] = parse_complex(v) if k in ("beta", "eta", "epsilon", "xi", "epsilon_charge") else float(v)
        return cls(**kw)


def _eta_coefficient(hw: HardwareParams) -> float:
    return hw.EJ_minus * hw.omega_c**1.5 / (4.0 * math.sqrt(hw.N) * (2.0 * hw.EJ_tilde) ** 1.5)


def _xi_coefficient(hw: HardwareParams) -> float:
    return -hw.EJ_minus * math.sqrt(hw.N * hw.omega_c / (8.0 * hw.EJ_tilde))


def circuit_to_effective(c: CircuitParams) -> EffectiveParams:
    hw = c.hardware
    wc = hw.omega_c
    K = hw.K
    beta = c.delta1 * hw.E_J * wc / (4.0 * hw.EJ_tilde) * np.exp(1j * c.phi2)
    e3 = np.exp(1j * c.phi3)
    eta = c.delta2 * _eta_coefficient(hw) * e3
    xi = c.delta2 * _xi_coefficient(hw) * e3
    eps_charge = -1j * hw.n0 * 2.0 * hw.E_C * c.charge_drive * np.exp(1j * c.phi1)
    return EffectiveParams(
        omega_c=wc,
        Delta=wc + 0.5 * K - c.omega_p,
        K=K,
        beta=complex(beta),
        eta=complex(eta),
        epsilon=complex(eps_charge + xi),
        xi=complex(xi),
        epsilon_charge=complex(eps_charge),
        n0=hw.n0,
        varphi0=hw.varphi0,
    )


def _polar(z: complex, scale: float) -> tuple[float, float]:
    """``z = amp * scale * e^{i phase}`` with ``amp >= 0``."""
    if z == 0:
        return 0.0, 0.0
    w = z / scale
    return float(abs(w)), float(np.angle(w))


def effective_to_drives(Delta: float, beta: complex, eta: complex, epsilon: complex, hw: HardwareParams,
                        bound: float = DRIVE_BOUND) -> CircuitParams:
    """Drive settings that reproduce ``(Delta, beta, eta, epsilon)`` on fixed hardware.

    Solved in order: ``delta1, phi2`` from beta; ``delta2, phi3`` from eta,
    which fixes the junction term xi; the charge drive supplies
    ``epsilon - xi``; the pump frequency absorbs Delta.
    """
    wc = hw.omega_c
    delta1, phi2 = _polar(complex(beta), hw.E_J * wc / (4.0 * hw.EJ_tilde))
    if eta != 0 and hw.EJ_minus == 0:
        raise InfeasibleTargetError("eta_requires_asymmetry", "symmetric junctions (E_J1 = E_J2) cannot produce a cubic drive")
    if eta != 0:
        delta2, phi3 = _polar(complex(eta), _eta_coefficient(hw))
    else:
        delta2, phi3 = 0.0, 0.0
    xi = delta2 * _xi_coefficient(hw) * np.exp(1j * phi3)
    charge, phi1 = _polar(complex(epsilon) - xi, -1j * hw.n0 * 2.0 * hw.E_C)
    omega_p = wc + 0.5 * hw.K - Delta
    for name, val in (("delta1", delta1), ("delta2", delta2)):
        if val > bound:
            raise InfeasibleTargetError(f"{name}_bound", f"{name} = {val:.4g} exceeds the small-drive bound {bound:g}")
    if omega_p <= 0:
        raise InfeasibleTargetError("pump_frequency", f"required pump frequency {omega_p:.4g} is not positive")
    return CircuitParams(hw.E_C, hw.E_J, hw.E_J1, hw.E_J2, hw.N, delta1, delta2, charge, phi1, phi2, phi3, omega_p)


def acs_to_effective(p: AcsParams, hw: HardwareParams) -> tuple[float, complex, complex, complex]:
    """Rotating-frame ``(Delta, beta, eta, epsilon)`` realising the wells of ``p`` on ``hw``.

    The circuit Kerr is negative, so the circuit Hamiltonian is ``-H`` for
    the positive-Kerr well Hamiltonian with ``|K| = E_C/(2N^2)``; the well
    positions are unchanged and rates are rescaled to the hardware Kerr.
    """
    d = to_drive_form(replace(p, K=abs(hw.K)))
    return -d.detuning, -np.conj(d.beta), -np.conj(d.eta), -np.conj(d.epsilon)


def acs_to_circuit(p: AcsParams, hw: HardwareParams, bound: float = DRIVE_BOUND) -> CircuitParams:
    return effective_to_drives(*acs_to_effective(p, hw), hw, bound=bound)
