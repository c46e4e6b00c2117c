"""Phase-space paths, coherent-state geometric phases and collision-state holonomy.

A path is a chain of straight segments and circular arcs in the ``Z = X + iP``
plane. Line integrals of ``P dX - X dP`` are evaluated in closed form on each
piece.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import OpenPathError
from .hamiltonians import parse_complex

__all__ = [
    "Line",
    "Arc",
    "PhasePath",
    "HolonomyResult",
    "enclosed_area",
    "coherent_geometric_phase",
    "collision_holonomy",
    "endpoint_holonomy",
    "su2_part",
]

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

_JOIN_TOL = 1e-9


def _phase_integral_line(a: complex, b: complex) -> float:
    # int P dX - X dP = -Im(conj(Z) dZ)
    return -float(np.imag(np.conj(a) * b))


@dataclass(frozen=True)
class Line:
    start: complex
    end: complex

    @property
    def length(self) -> float:
        return abs(self.end - self.start)

    def point(self, s):
        return self.start + (self.end - self.start) * np.asarray(s)

    def phase_integral(self) -> float:
        return _phase_integral_line(self.start, self.end)

    def sub(self, s0: float, s1: float) -> "Line":
        return Line(complex(self.point(s0)), complex(self.point(s1)))

    def levy_area(self) -> float:
        return 0.0

    def reversed(self) -> "Line":
        return Line(self.end, self.start)

    def to_json(self) -> dict:
        return {"type": "line", "start": [self.start.real, self.start.imag], "end": [self.end.real, self.end.imag]}


@dataclass(frozen=True)
class Arc:
    """``center + radius * exp(i theta)`` for theta from ``theta0`` to ``theta1``.

    ``theta1 > theta0`` runs counterclockwise.
    """

    center: complex
    radius: float
    theta0: float
    theta1: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("arc radius must be positive")

    @property
    def start(self) -> complex:
        return complex(self.point(0.0))

    @property
    def end(self) -> complex:
        return complex(self.point(1.0))

    @property
    def length(self) -> float:
        return self.radius * abs(self.theta1 - self.theta0)

    def point(self, s):
        th = self.theta0 + (self.theta1 - self.theta0) * np.asarray(s)
        return self.center + self.radius * np.exp(1j * th)

    def phase_integral(self) -> float:
        c, r = self.center, self.radius
        e0, e1 = np.exp(1j * self.theta0), np.exp(1j * self.theta1)
        im_part = r * np.real(np.conj(c) * (e1 - e0) / 1j) + r * r * (self.theta1 - self.theta0)
        return -float(im_part)

    def sub(self, s0: float, s1: float) -> "Arc":
        dt = self.theta1 - self.theta0
        return Arc(self.center, self.radius, self.theta0 + dt * s0, self.theta0 + dt * s1)

    def levy_area(self) -> float:
        """Signed area between the arc and its chord."""
        d = self.theta1 - self.theta0
        return 0.5 * self.radius**2 * (d - math.sin(d))

    def reversed(self) -> "Arc":
        return Arc(self.center, self.radius, self.theta1, self.theta0)

    def to_json(self) -> dict:
        return {
            "type": "arc",
            "center": [self.center.real, self.center.imag],
            "radius": self.radius,
            "theta0": self.theta0,
            "theta1": self.theta1,
        }


def _piece_from_json(obj: dict):
    kind = obj.get("type")
    if kind == "line":
        return Line(parse_complex(obj["start"]), parse_complex(obj["end"]))
    if kind == "arc":
        return Arc(parse_complex(obj["center"]), float(obj["radius"]), float(obj["theta0"]), float(obj["theta1"]))
    raise ValueError(f"unknown path piece type {kind!r}")


@dataclass(frozen=True)
class PhasePath:
    pieces: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        for p, q in zip(self.pieces[:-1], self.pieces[1:]):
            if abs(p.end - q.start) > _JOIN_TOL:
                raise ValueError(f"path pieces do not join: {p.end} -> {q.start}")

    @property
    def start(self) -> complex:
        return self.pieces[0].start

    @property
    def end(self) -> complex:
        return self.pieces[-1].end

    @property
    def closed(self) -> bool:
        return bool(self.pieces) and abs(self.end - self.start) <= _JOIN_TOL

    @property
    def length(self) -> float:
        return float(sum(p.length for p in self.pieces))

    @classmethod
    def polyline(cls, points: Sequence[complex], close: bool = False) -> "PhasePath":
        pts = [complex(z) for z in points]
        if close and pts[0] != pts[-1]:
            pts.append(pts[0])
        return cls(tuple(Line(a, b) for a, b in zip(pts[:-1], pts[1:])))

    @classmethod
    def square(cls, corner: complex, side: float, ccw: bool = True) -> "PhasePath":
        c = complex(corner)
        pts = [c, c + side, c + side + 1j * side, c + 1j * side]
        if not ccw:
            pts = [pts[0]] + pts[:0:-1]
        return cls.polyline(pts, close=True)

    def __add__(self, other: "PhasePath") -> "PhasePath":
        return PhasePath(self.pieces + other.pieces)

    def reversed(self) -> "PhasePath":
        return PhasePath(tuple(p.reversed() for p in reversed(self.pieces)))

    def resampled(self, n: int) -> "PhasePath":
        """Split every piece into ``n`` equal sub-pieces (same geometry)."""
        out = []
        for p in self.pieces:
            out.extend(p.sub(k / n, (k + 1) / n) for k in range(n))
        return PhasePath(tuple(out))

    def sample(self, n_per_piece: int = 50) -> np.ndarray:
        s = np.linspace(0.0, 1.0, n_per_piece + 1)
        pts = [self.pieces[0].point(s[:1])]
        pts += [p.point(s[1:]) for p in self.pieces]
        return np.concatenate(pts)

    def to_json(self) -> list:
        return [p.to_json() for p in self.pieces]

    @classmethod
    def from_json(cls, data) -> "PhasePath":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(tuple(_piece_from_json(d) for d in data))


def coherent_geometric_phase(path: PhasePath) -> float:
    """``int P dX - X dP`` along the path; ``-2 A`` for a closed loop of signed area ``A``."""
    return float(sum(p.phase_integral() for p in path.pieces))


def enclosed_area(path: PhasePath) -> float:
    """Signed area, counterclockwise positive (Green's theorem, exact on lines and arcs)."""
    if not path.closed:
        raise OpenPathError("enclosed area needs a closed path")
    return -0.5 * coherent_geometric_phase(path)


@dataclass
class HolonomyResult:
    """Collision-pair transport ``U`` acting on coefficients of ``(|Z,0>, |Z,1>)``."""

    unitary: np.ndarray
    global_phase: float
    decomposition: dict

    def to_json(self) -> dict:
        return {
            "unitary": {"re": self.unitary.real.tolist(), "im": self.unitary.imag.tolist()},
            "global_phase": self.global_phase,
            "decomposition": self.decomposition,
        }


def _exp_pauli(phi: float, vx: float, vy: float, vz: float) -> np.ndarray:
    """``exp(i (phi I + vx X + vy Y + vz Z))`` in closed form."""
    n = math.sqrt(vx * vx + vy * vy + vz * vz)
    if n == 0.0:
        return np.exp(1j * phi) * PAULI_I
    s = math.sin(n) / n
    m = math.cos(n) * PAULI_I + 1j * s * (vx * PAULI_X + vy * PAULI_Y + vz * PAULI_Z)
    return np.exp(1j * phi) * m


def _ordered_product(path: PhasePath, max_step: float) -> np.ndarray:
    # Second-order Magnus per step: the [Y, X] commutator contributes
    # 2 L Z, with L the Levy area between the sub-piece and its chord.
    U = PAULI_I.copy()
    for piece in path.pieces:
        n = max(1, math.ceil(piece.length / max_step))
        for k in range(n):
            sp = piece.sub(k / n, (k + 1) / n)
            dz = sp.end - sp.start
            step = _exp_pauli(sp.phase_integral(), -dz.imag, dz.real, 2.0 * sp.levy_area())
            U = step @ U
    return U


def collision_holonomy(path: PhasePath, max_step: float = 1e-3, tol: float = 1e-8) -> HolonomyResult:
    """Path-ordered ``P exp(i int (P dX - X dP) I + dX Y - dP X)``.

    The integral is repeated at half the step; a change larger than ``tol``
    triggers further halving until it settles.
    """
    U = _ordered_product(path, max_step)
    for _ in range(8):
        max_step *= 0.5
        U2 = _ordered_product(path, max_step)
        converged = np.max(np.abs(U2 - U)) <= tol
        U = U2
        if converged:
            break
    else:
        raise ArithmeticError("collision holonomy did not converge under step halving")
    dz = path.end - path.start
    phi = coherent_geometric_phase(path)
    return HolonomyResult(U, phi, {"I": phi, "X": -float(dz.imag), "Y": float(dz.real)})


def endpoint_holonomy(path: PhasePath) -> HolonomyResult:
    """Unordered exponential of the accumulated generator.

    Equals :func:`collision_holonomy` for any straight segment, where the
    generator direction is constant; curved or multi-leg paths differ by the
    ``Z`` rotation the ordering produces.
    """
    dz = path.end - path.start
    phi = coherent_geometric_phase(path)
    U = _exp_pauli(phi, -dz.imag, dz.real, 0.0)
    return HolonomyResult(U, phi, {"I": phi, "X": -float(dz.imag), "Y": float(dz.real)})


def su2_part(U: np.ndarray) -> np.ndarray:
    """Strip the global phase so that ``det = 1`` and the trace has nonnegative real part."""
    det = np.linalg.det(U)
    V = U / np.sqrt(det)
    if np.real(np.trace(V)) < 0:
        V = -V
    return V
