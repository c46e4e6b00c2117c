"""Truncated Fock-space linear algebra.

Operators, kets and density matrices are plain numpy arrays; a
:class:`TruncatedSpace` records the cutoff they share. Quadratures follow
``X = (a + a^dag)/2``, ``P = (a - a^dag)/(2i)`` so a coherent state ``|Z>``
with ``Z = X + iP`` has ``<X> = X``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .errors import DimensionMismatchError, InvalidSpaceError, TruncationError

__all__ = [
    "TruncatedSpace",
    "PhasePoint",
    "recommended_dim",
    "check_truncation",
    "ladder_operators",
    "number_operator",
    "parity_operator",
    "displacement_operator",
    "coherent",
    "displaced_fock",
    "fock",
    "normalize",
    "ket2dm",
    "is_density_matrix",
    "expect",
    "fidelity",
    "wigner_grid",
    "husimi_peak",
    "husimi_q",
    "write_wigner_csv",
]


@dataclass(frozen=True)
class TruncatedSpace:
    """Fock states ``|0>, ..., |dim-1>``."""

    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise InvalidSpaceError(f"Fock cutoff must be an integer >= 2, got {self.dim!r}")

    @classmethod
    def for_amplitude(cls, alpha_mag: float, margin: int = 0) -> "TruncatedSpace":
        return cls(recommended_dim(alpha_mag) + margin)


@dataclass(frozen=True)
class PhasePoint:
    X: float
    P: float

    @property
    def Z(self) -> complex:
        return complex(self.X, self.P)

    @classmethod
    def from_complex(cls, z: complex) -> "PhasePoint":
        return cls(float(np.real(z)), float(np.imag(z)))


def recommended_dim(alpha_mag: float) -> int:
    """Smallest cutoff keeping the coherent-state tail below ~1e-8."""
    a = abs(alpha_mag)
    return int(math.ceil(a * a + 6.0 * a + 10.0))


def check_truncation(space: TruncatedSpace, alpha_mag: float, what: str = "amplitude") -> None:
    need = recommended_dim(alpha_mag)
    if space.dim < need:
        raise TruncationError(f"dim={space.dim} too small for |{what}|={abs(alpha_mag):.4g}", need)


def _as_space(space) -> TruncatedSpace:
    return space if isinstance(space, TruncatedSpace) else TruncatedSpace(int(space))


def ladder_operators(space: TruncatedSpace) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(a, a_dag)``."""
    space = _as_space(space)
    a = np.diag(np.sqrt(np.arange(1, space.dim, dtype=float)), 1).astype(complex)
    return a, a.conj().T


def number_operator(space: TruncatedSpace) -> np.ndarray:
    return np.diag(np.arange(_as_space(space).dim, dtype=float)).astype(complex)


def parity_operator(space: TruncatedSpace) -> np.ndarray:
    n = np.arange(_as_space(space).dim)
    return np.diag((-1.0) ** n).astype(complex)


def displacement_operator(space: TruncatedSpace, alpha: complex, check: bool = True) -> np.ndarray:
    """``D(alpha) = exp(alpha a^dag - alpha^* a)`` exponentiated inside the cutoff.

    The truncated generator is anti-Hermitian, so the result is unitary to
    machine precision; low-lying matrix elements are accurate when the
    cutoff is adequate for ``|alpha|``.
    """
    space = _as_space(space)
    if check:
        check_truncation(space, abs(alpha))
    a, ad = ladder_operators(space)
    if alpha == 0:
        return np.eye(space.dim, dtype=complex)
    return expm(alpha * ad - np.conj(alpha) * a)


def _displaced_columns(dim: int, alpha: complex, ncols: int) -> np.ndarray:
    """Columns ``D(alpha)|n>`` for n < ncols, exact up to the row cutoff.

    Uses ``D|n+1> = (a^dag - alpha^*) D|n> / sqrt(n+1)`` on a padded row
    space so the recursion never touches the cutoff.
    """
    pad = recommended_dim(abs(alpha)) + ncols
    rows = dim + pad
    k = np.arange(rows)
    col = np.zeros(rows, dtype=complex)
    # log-space start avoids overflow in alpha^k / sqrt(k!)
    if alpha == 0:
        col[0] = 1.0
    else:
        logmag = k * math.log(abs(alpha)) - 0.5 * np.array([math.lgamma(j + 1) for j in k]) - 0.5 * abs(alpha) ** 2
        col = np.exp(logmag) * np.exp(1j * k * np.angle(alpha))
    sq = np.sqrt(np.arange(1, rows, dtype=float))
    out = np.empty((dim, ncols), dtype=complex)
    for n in range(ncols):
        out[:, n] = col[:dim]
        nxt = -np.conj(alpha) * col
        nxt[1:] += sq * col[:-1]
        col = nxt / math.sqrt(n + 1)
    return out


def coherent(space: TruncatedSpace, alpha: complex, check: bool = True) -> np.ndarray:
    return displaced_fock(space, alpha, 0, check=check)


def displaced_fock(space: TruncatedSpace, alpha: complex, n: int, check: bool = True) -> np.ndarray:
    """Normalized ``D(alpha)|n>`` truncated to the space."""
    space = _as_space(space)
    if n < 0 or n >= space.dim:
        raise IndexError(f"Fock index {n} outside 0..{space.dim - 1}")
    if check:
        check_truncation(space, abs(alpha))
    v = _displaced_columns(space.dim, alpha, n + 1)[:, n]
    return v / np.linalg.norm(v)


def fock(space: TruncatedSpace, n: int) -> np.ndarray:
    space = _as_space(space)
    if n < 0 or n >= space.dim:
        raise IndexError(f"Fock index {n} outside 0..{space.dim - 1}")
    v = np.zeros(space.dim, dtype=complex)
    v[n] = 1.0
    return v


def normalize(psi: np.ndarray) -> np.ndarray:
    return psi / np.linalg.norm(psi)


def ket2dm(psi: np.ndarray) -> np.ndarray:
    return np.outer(psi, psi.conj())


def is_density_matrix(rho: np.ndarray, herm_tol=1e-9, trace_tol=1e-7, pos_tol=1e-7) -> bool:
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        return False
    if abs(np.trace(rho) - 1) > trace_tol:
        return False
    return bool(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() >= -pos_tol)


def expect(op: np.ndarray, state: np.ndarray) -> complex:
    if state.ndim == 1:
        return complex(np.vdot(state, op @ state))
    return complex(np.trace(op @ state))


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """``|<a|b>|^2`` for kets, Uhlmann fidelity ``(Tr sqrt(sqrt(a) b sqrt(a)))^2`` otherwise."""
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatchError(f"dimension mismatch {a.shape[0]} vs {b.shape[0]}")
    if a.ndim == 1 and b.ndim == 1:
        f = abs(np.vdot(a, b)) ** 2
    elif a.ndim == 1:
        f = np.real(np.vdot(a, b @ a))
    elif b.ndim == 1:
        f = np.real(np.vdot(b, a @ b))
    else:
        sa = _psd_sqrt(a)
        w = np.linalg.eigvalsh(sa @ b @ sa)
        f = np.sum(np.sqrt(np.clip(w, 0.0, None))) ** 2
    return float(min(max(f, 0.0), 1.0))


def wigner_grid(state: np.ndarray, xs: Sequence[float], ps: Sequence[float]) -> np.ndarray:
    """Wigner function on a grid, shape ``(len(ps), len(xs))``.

    Evaluated as the displaced parity ``(2/pi) Tr[D^dag(Z) rho D(Z) Pi]`` with
    ``Z = x + ip``. Since ``D(Z) Pi D(-Z) = D(2Z) Pi`` this needs only the
    in-cutoff block of ``D(2Z)``, whose entries come from the generalized
    Laguerre recurrence; the result is exact for the given truncated state.
    """
    xs = np.asarray(xs, dtype=float)
    ps = np.asarray(ps, dtype=float)
    if xs.size == 0 or ps.size == 0:
        raise ValueError("empty grid")
    rho = np.outer(state, state.conj()) if state.ndim == 1 else np.asarray(state)
    dim = rho.shape[0]
    beta = 2.0 * (xs[None, :] + 1j * ps[:, None]).ravel()
    x = np.abs(beta) ** 2
    sign = (-1.0) ** np.arange(dim)
    total = np.zeros(beta.size, dtype=complex)
    for l in range(dim):
        nmax = dim - l
        # c_n = sqrt(n!/(n+l)!) L_n^(l)(x), accumulated against (-1)^n rho[n, n+l]
        weights = sign[:nmax] * np.diagonal(rho, offset=l)[:nmax]
        lag_prev = np.ones_like(x)
        lag = 1.0 + l - x
        norm = math.exp(-0.5 * math.lgamma(l + 1))
        s = weights[0] * norm * lag_prev
        for n in range(1, nmax):
            norm /= math.sqrt(n + l)
            norm *= math.sqrt(n)
            s = s + weights[n] * norm * lag
            lag_prev, lag = lag, ((2 * n + 1 + l - x) * lag - (n + l) * lag_prev) / (n + 1)
        term = beta ** l * s
        total += term if l == 0 else 2.0 * term.real
    w = (2.0 / np.pi) * np.exp(-0.5 * x) * total.real
    return w.reshape(ps.size, xs.size)


def husimi_q(state: np.ndarray, zs: Sequence[complex] | np.ndarray) -> np.ndarray:
    """``Q(Z) = <Z|rho|Z>/pi`` at the given phase-space points."""
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    dim = state.shape[0]
    out = np.empty(zs.shape, dtype=float)
    for idx, z in np.ndenumerate(zs):
        c = coherent(dim, z, check=False)
        out[idx] = np.real(expect(state, c)) / np.pi if state.ndim == 2 else abs(np.vdot(c, state)) ** 2 / np.pi
    return out


def husimi_peak(state: np.ndarray, seed: complex) -> complex:
    """Local maximum of the Husimi function reached from ``seed``."""
    from scipy.optimize import minimize

    def neg(v):
        return -float(husimi_q(state, complex(v[0], v[1]))[0])

    res = minimize(neg, [seed.real, seed.imag], method="Nelder-Mead", options={"xatol": 1e-6, "fatol": 1e-12})
    return complex(res.x[0], res.x[1])


def write_wigner_csv(path, xs, ps, w) -> None:
    """Rows ``x,p,w`` in row-major (p, x) order, 12 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "p", "w"])
        for i, p in enumerate(ps):
            for j, x in enumerate(xs):
                writer.writerow([f"{x:.12g}", f"{p:.12g}", f"{w[i, j]:.12g}"])
