"""Time evolution under moving-well schedules and steady states under loss."""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh
from scipy.sparse.linalg import eigsh
from scipy.special import jv

from .errors import DimensionMismatchError, TruncationError
from .fock import TruncatedSpace, _as_space, ladder_operators, recommended_dim
from .hamiltonians import AcsParams, NoiseParams, parse_complex
from .holonomy import Arc, Line

__all__ = [
    "Point",
    "Segment",
    "Schedule",
    "EvolutionResult",
    "ramp_sin2",
    "acs_builder",
    "evolve_schrodinger",
    "evolve_lindblad",
    "steady_state_alpha",
    "state_to_json",
    "state_from_json",
    "ConvergenceError",
]

_JOIN_TOL = 1e-9


class ConvergenceError(ArithmeticError):
    """Step halving changed the result by more than the requested tolerance."""


@dataclass(frozen=True)
class Point:
    """A well held fixed for the duration of a segment."""

    at: complex

    @property
    def start(self) -> complex:
        return self.at

    @property
    def end(self) -> complex:
        return self.at

    @property
    def length(self) -> float:
        return 0.0

    def point(self, s):
        return self.at + 0.0 * np.asarray(s)

    def to_json(self) -> dict:
        return {"type": "point", "at": [self.at.real, self.at.imag]}


def _curve_from_json(obj) -> Point | Line | Arc:
    kind = obj.get("type")
    if kind == "point":
        return Point(parse_complex(obj["at"]))
    if kind == "line":
        return Line(parse_complex(obj["start"]), parse_complex(obj["end"]))
    if kind == "arc":
        return Arc(parse_complex(obj["center"]), float(obj["radius"]), float(obj["theta0"]), float(obj["theta1"]))
    raise ValueError(f"unknown curve type {kind!r}")


def ramp_sin2(tau):
    """Smoothstep ``sin^2(pi tau / 2)``: zero velocity at both ends."""
    return np.sin(0.5 * np.pi * np.asarray(tau)) ** 2


@dataclass(frozen=True)
class Segment:
    duration: float
    alpha0: Point | Line | Arc
    alpha1: Point | Line | Arc

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("segment duration must be positive")

    def at(self, tau):
        """Well positions at local time fraction ``tau`` in [0, 1]."""
        s = ramp_sin2(tau)
        return self.alpha0.point(s), self.alpha1.point(s)

    @property
    def length(self) -> float:
        return max(self.alpha0.length, self.alpha1.length)

    def to_json(self) -> dict:
        return {"duration": self.duration, "alpha0": self.alpha0.to_json(), "alpha1": self.alpha1.to_json()}


@dataclass(frozen=True)
class Schedule:
    """Consecutive segments; times in units of ``1/K``."""

    segments: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ValueError("schedule needs at least one segment")
        for s, t in zip(self.segments[:-1], self.segments[1:]):
            if abs(s.alpha0.end - t.alpha0.start) > _JOIN_TOL or abs(s.alpha1.end - t.alpha1.start) > _JOIN_TOL:
                raise ValueError("well trajectories are discontinuous between segments")

    @classmethod
    def static(cls, alpha0: complex, alpha1: complex, duration: float) -> "Schedule":
        return cls((Segment(duration, Point(complex(alpha0)), Point(complex(alpha1))),))

    @property
    def total_time(self) -> float:
        return float(sum(s.duration for s in self.segments))

    @property
    def start(self) -> tuple[complex, complex]:
        return self.segments[0].alpha0.start, self.segments[0].alpha1.start

    @property
    def end(self) -> tuple[complex, complex]:
        return self.segments[-1].alpha0.end, self.segments[-1].alpha1.end

    def __add__(self, other: "Schedule") -> "Schedule":
        return Schedule(self.segments + other.segments)

    def scaled(self, factor: float) -> "Schedule":
        """Same trajectory, every duration multiplied by ``factor``."""
        return Schedule(tuple(Segment(s.duration * factor, s.alpha0, s.alpha1) for s in self.segments))

    def alphas(self, t: float) -> tuple[complex, complex]:
        t0 = 0.0
        for s in self.segments:
            if t <= t0 + s.duration:
                a0, a1 = s.at(min(max((t - t0) / s.duration, 0.0), 1.0))
                return complex(a0), complex(a1)
            t0 += s.duration
        return self.end

    def max_amplitude(self, samples: int = 64) -> float:
        tau = np.linspace(0.0, 1.0, samples + 1)
        m = 0.0
        for s in self.segments:
            a0, a1 = s.at(tau)
            m = max(m, float(np.max(np.abs(a0))), float(np.max(np.abs(a1))))
        return m

    def first_breach(self, dim: int, samples: int = 64) -> float | None:
        """Earliest sampled time at which ``dim`` is below the recommended cutoff."""
        t0 = 0.0
        tau = np.linspace(0.0, 1.0, samples + 1)
        for s in self.segments:
            a0, a1 = s.at(tau)
            mags = np.maximum(np.abs(a0), np.abs(a1))
            bad = [recommended_dim(m) > dim for m in mags]
            if any(bad):
                return t0 + s.duration * tau[bad.index(True)]
            t0 += s.duration
        return None

    def to_json(self) -> dict:
        return {"segments": [s.to_json() for s in self.segments]}

    @classmethod
    def from_json(cls, data) -> "Schedule":
        if isinstance(data, str):
            data = json.loads(data)
        segs = [
            Segment(float(d["duration"]), _curve_from_json(d["alpha0"]), _curve_from_json(d["alpha1"]))
            for d in data["segments"]
        ]
        return cls(tuple(segs))


@dataclass
class EvolutionResult:
    """Final state plus a monitor table with columns ``t, energy, leakage, fidelity``.

    For several propagated columns the monitor records the worst leakage and
    the mean energy and fidelity.
    """

    final_state: np.ndarray
    monitor: np.ndarray
    steps: int = 0

    @property
    def times(self) -> np.ndarray:
        return self.monitor[:, 0]

    @property
    def max_leakage(self) -> float:
        lk = self.monitor[:, 2]
        return float(np.nanmax(lk)) if np.any(np.isfinite(lk)) else float("nan")

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "energy", "leakage", "fidelity"])
            for row in self.monitor:
                w.writerow([f"{v:.12g}" for v in row])


def acs_builder(space: TruncatedSpace, K: float = 1.0) -> Callable[[complex, complex], np.ndarray]:
    """Fast ``(alpha0, alpha1) -> K A^dag A`` for repeated evaluation."""
    space = _as_space(space)
    a, _ = ladder_operators(space)
    a2 = a @ a
    eye = np.eye(space.dim, dtype=complex)

    def build(alpha0: complex, alpha1: complex) -> np.ndarray:
        A = a2 - (alpha0 + alpha1) * a + (alpha0 * alpha1) * eye
        return K * (A.conj().T @ A)

    return build


def _step_grid(sched: Schedule, dt: float) -> list[tuple[float, float, int]]:
    """(segment start, step size, count) with steps aligned to segment joins."""
    out, t0 = [], 0.0
    for s in sched.segments:
        n = max(1, math.ceil(s.duration / dt - 1e-12))
        out.append((t0, s.duration / n, n))
        t0 += s.duration
    return out


_GAUSS = (0.5 - math.sqrt(3) / 6, 0.5 + math.sqrt(3) / 6)
_C4 = math.sqrt(3) / 12


def _magnus_dense(H1, H2, h, psi):
    Heff = 0.5 * h * (H1 + H2) + 1j * _C4 * h * h * (H1 @ H2 - H2 @ H1)
    w, v = eigh(0.5 * (Heff + Heff.conj().T), driver="evr")
    phase = np.exp(-1j * w)
    if psi.ndim == 2:
        phase = phase[:, None]
    return v @ (phase * (v.conj().T @ psi))


def _chebyshev_expm(H, psi, tol=1e-15):
    """``exp(-i H) psi`` for sparse Hermitian ``H`` by a Chebyshev series.

    The spectrum is bracketed with Gershgorin discs; the series is cut once
    the Bessel weights fall below ``tol``.
    """
    diag = H.diagonal().real
    radius = np.asarray(abs(H).sum(axis=1)).ravel() - np.abs(diag)
    lo, hi = float(np.min(diag - radius)), float(np.max(diag + radius))
    c, r = 0.5 * (hi + lo), max(0.5 * (hi - lo), 1e-12)
    n_terms = int(r + 10.0 * r ** (1.0 / 3.0) + 20)
    J = jv(np.arange(n_terms + 1), r)
    Y = (H - c * sp.identity(H.shape[0], format="csr")) / r
    t_prev, t_cur = psi, Y @ psi
    out = J[0] * t_prev + 2.0 * (-1j) * J[1] * t_cur
    phase = -1j
    for k in range(2, n_terms + 1):
        t_prev, t_cur = t_cur, 2.0 * (Y @ t_cur) - t_prev
        phase *= -1j
        out = out + 2.0 * phase * J[k] * t_cur
        if abs(J[k]) < tol and k > r:
            break
    return np.exp(-1j * c) * out


def _magnus_sparse(H1, H2, h, psi):
    # same exponent as the dense step, applied to the kets by a Chebyshev series
    Heff = 0.5 * h * (H1 + H2) + 1j * _C4 * h * h * (H1 @ H2 - H2 @ H1)
    return _chebyshev_expm(Heff.tocsr(), psi)


def _ground_vectors(H, n):
    if sp.issparse(H):
        # H >= 0 with a degenerate zero-energy manifold: shift-invert just below it
        _, v = eigsh(H.tocsc(), k=n, sigma=-1e-3, which="LM")
        return v
    return eigh(H, driver="evr", subset_by_index=[0, n - 1])[1]


def _monitor_row(t, H, psi, target, n_ground):
    cols = psi if psi.ndim == 2 else psi[:, None]
    energy = float(np.mean(np.real(np.einsum("ij,ij->j", cols.conj(), H @ cols))))
    v = _ground_vectors(H, n_ground)
    leakage = float(np.max(1.0 - np.sum(np.abs(v.conj().T @ cols) ** 2, axis=0)))
    leakage = min(max(leakage, 0.0), 1.0)
    fid = float("nan")
    if target is not None:
        tgt = target(t)
        tgt = tgt if tgt.ndim == 2 else tgt[:, None]
        fid = float(np.mean(np.abs(np.einsum("ij,ij->j", tgt.conj(), cols)) ** 2))
    return [t, energy, leakage, fid]


def _propagate(hfun, sched, psi, dt, monitor_every, target, tail_check, leakage_dim=2):
    step = _magnus_sparse if sp.issparse(hfun(*sched.start)) else _magnus_dense
    rows, nsteps = [], 0
    rows.append(_monitor_row(0.0, hfun(*sched.start), psi, target, leakage_dim))
    for seg, (t0, h, n) in zip(sched.segments, _step_grid(sched, dt)):
        for k in range(n):
            ta = (k + _GAUSS[0]) / n
            tb = (k + _GAUSS[1]) / n
            H1 = hfun(*(complex(x) for x in seg.at(ta)))
            H2 = hfun(*(complex(x) for x in seg.at(tb)))
            psi = step(H1, H2, h, psi)
            nsteps += 1
            if nsteps % monitor_every == 0 or k == n - 1:
                t = t0 + (k + 1) * h
                a0, a1 = seg.at((k + 1) / n)
                if tail_check is not None:
                    tail_check(t, psi)
                rows.append(_monitor_row(t, hfun(complex(a0), complex(a1)), psi, target, leakage_dim))
    return psi, np.array(rows), nsteps


def _tail_checker(dim, tol=1e-6):
    def check(t, psi):
        cols = psi if psi.ndim == 2 else psi[:, None]
        tail = float(np.max(np.sum(np.abs(cols[-3:, :]) ** 2, axis=0)))
        if tail > tol:
            raise TruncationError(f"population {tail:.1e} reached the Fock cutoff at t={t:.6g}/K", dim + 10)

    return check


def _column_fidelities(ref, psi):
    a = ref if ref.ndim == 2 else ref[:, None]
    b = psi if psi.ndim == 2 else psi[:, None]
    return np.abs(np.einsum("ij,ij->j", a.conj(), b)) ** 2


def evolve_schrodinger(
    space: TruncatedSpace | None,
    sched: Schedule,
    psi0: np.ndarray,
    steps: int | None = None,
    *,
    dt: float = 0.2,
    K: float = 1.0,
    hamiltonian: Callable | None = None,
    target: Callable[[float], np.ndarray] | None = None,
    reference: np.ndarray | None = None,
    leakage_dim: int = 2,
    monitor_points: int = 200,
    converge: bool = True,
    tol: float = 1e-6,
    max_halvings: int = 3,
    check: bool = True,
) -> EvolutionResult:
    """Propagate ``psi0`` (a ket or a matrix of kets as columns).

    Each step applies a fourth-order Magnus exponent built from two Gauss
    points, exponentiated by dense ``eigh`` or, for sparse multi-mode
    Hamiltonians, by a Chebyshev series. ``steps`` fixes the total
    step count, otherwise ``dt`` sets the step.

    With ``converge`` each run is compared with one at twice the step;
    while they differ by more than ``tol`` the step is halved, at most
    ``max_halvings`` times, before :class:`ConvergenceError` is raised. The
    comparison uses fidelities to ``reference`` (expected final kets) when
    given and the raw final states otherwise.

    ``hamiltonian(alpha0, alpha1)`` overrides the default single-mode
    ``K A^dag A``; multi-mode control Hamiltonians plug in here together
    with ``leakage_dim`` set to the ground-manifold dimension.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if hamiltonian is None:
        space = _as_space(space)
        hamiltonian = acs_builder(space, K)
    dim = psi0.shape[0]
    if space is not None and _as_space(space).dim != dim:
        raise DimensionMismatchError(f"state dim {dim} vs space dim {_as_space(space).dim}")
    norms = np.linalg.norm(psi0, axis=0)
    if np.any(np.abs(norms - 1.0) > 1e-8):
        raise ValueError("initial state must be normalized")
    tail = None
    if check and space is not None:
        t_bad = sched.first_breach(dim)
        if t_bad is not None:
            raise TruncationError(f"cutoff {dim} inadequate for the well amplitude at t={t_bad:.6g}/K",
                                  recommended_dim(sched.max_amplitude()))
        tail = _tail_checker(dim)
    if steps is not None:
        dt = sched.total_time / steps
    def change(fine, coarse):
        if reference is not None:
            return float(np.max(np.abs(_column_fidelities(reference, fine) - _column_fidelities(reference, coarse))))
        return float(1.0 - np.min(_column_fidelities(fine, coarse)))

    def run(step, monitored):
        total = sum(n for _, _, n in _step_grid(sched, step))
        every = max(1, total // monitor_points) if monitored else total + 1
        return _propagate(hamiltonian, sched, psi0, step, every, target if monitored else None,
                          tail if monitored else None, leakage_dim)

    if not converge:
        psi, mon, n = run(dt, True)
        return EvolutionResult(psi, mon, n)
    coarse = run(2.0 * dt, False)[0]
    for _ in range(max_halvings + 1):
        psi, mon, n = run(dt, True)
        delta = change(psi, coarse)
        if delta <= tol:
            break
        coarse = psi
        dt *= 0.5
    else:
        raise ConvergenceError(f"halving the step to {2 * dt:.3g} still changes the result by {delta:.2e} (> {tol:g})")
    return EvolutionResult(psi, mon, n)


def _lindblad_rhs(H, L_ops, rho):
    out = -1j * (H @ rho - rho @ H)
    for L, LdL in L_ops:
        out += L @ rho @ L.conj().T - 0.5 * (LdL @ rho + rho @ LdL)
    return out


def evolve_lindblad(
    space: TruncatedSpace,
    sched: Schedule,
    rho0: np.ndarray,
    noise: NoiseParams,
    steps: int | None = None,
    *,
    dt: float | None = None,
    K: float = 1.0,
    monitor_points: int = 200,
    target: Callable[[float], np.ndarray] | None = None,
) -> EvolutionResult:
    """RK4 integration of ``drho/dt = -i[H,rho] + kappa D[a] rho + kappa_phi D[n] rho``.

    Without an explicit step the step is set from the generator's spectral
    radius so RK4 sits well inside its stability region.
    """
    space = _as_space(space)
    rho = np.asarray(rho0, dtype=complex)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    if rho.shape != (space.dim, space.dim):
        raise DimensionMismatchError(f"density matrix shape {rho.shape} vs dim {space.dim}")
    t_bad = sched.first_breach(space.dim)
    if t_bad is not None:
        raise TruncationError(f"cutoff {space.dim} inadequate at t={t_bad:.6g}/K", recommended_dim(sched.max_amplitude()))
    build = acs_builder(space, K)
    a, ad = ladder_operators(space)
    n_op = ad @ a
    L_ops = []
    if noise.kappa > 0:
        L_ops.append((math.sqrt(noise.kappa) * a, noise.kappa * n_op))
    if noise.kappa_phi > 0:
        L_ops.append((math.sqrt(noise.kappa_phi) * n_op, noise.kappa_phi * n_op @ n_op))
    if steps is not None:
        dt = sched.total_time / steps
    elif dt is None:
        radius = 0.0
        for s in sched.segments:
            for tau in (0.0, 0.5, 1.0):
                w = np.linalg.eigvalsh(build(*(complex(x) for x in s.at(tau))))
                radius = max(radius, w[-1] - w[0])
        radius += noise.kappa * space.dim + noise.kappa_phi * space.dim**2
        dt = 1.0 / max(radius, 1e-12)
    grid = _step_grid(sched, dt)
    every = max(1, sum(n for _, _, n in grid) // monitor_points)

    def row(t, H, rho):
        w, v = np.linalg.eigh(H)
        g = v[:, :2]
        leak = 1.0 - float(np.real(np.trace(g.conj().T @ rho @ g)))
        fid = float("nan")
        if target is not None:
            tg = target(t)
            fid = float(np.real(np.vdot(tg, rho @ tg)))
        return [t, float(np.real(np.trace(H @ rho))), min(max(leak, 0.0), 1.0), fid]

    rows = [row(0.0, build(*sched.start), rho)]
    nsteps = 0
    for seg, (t0, h, n) in zip(sched.segments, grid):
        for k in range(n):
            Ha = build(*(complex(x) for x in seg.at(k / n)))
            Hm = build(*(complex(x) for x in seg.at((k + 0.5) / n)))
            Hb = build(*(complex(x) for x in seg.at((k + 1) / n)))
            k1 = _lindblad_rhs(Ha, L_ops, rho)
            k2 = _lindblad_rhs(Hm, L_ops, rho + 0.5 * h * k1)
            k3 = _lindblad_rhs(Hm, L_ops, rho + 0.5 * h * k2)
            k4 = _lindblad_rhs(Hb, L_ops, rho + h * k3)
            rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            rho = 0.5 * (rho + rho.conj().T)
            nsteps += 1
            if nsteps % every == 0 or k == n - 1:
                rows.append(row(t0 + (k + 1) * h, Hb, rho))
    return EvolutionResult(rho, np.array(rows), nsteps)


def _steady_residual(z, a0, a1, K, kappa):
    u0, u1 = a0 - z, a1 - z
    return K * (np.conj(u0) + np.conj(u1)) * u0 * u1 + 0.5j * kappa * z


def steady_state_alpha(p: AcsParams, noise: NoiseParams | None = None, max_iter: int = 200, tol: float = 1e-12) -> list[complex]:
    """Coherent amplitudes stationary under the Kerr wells plus single-photon loss.

    Solves ``K (u0^* + u1^*) u0 u1 + i kappa alpha / 2 = 0`` with
    ``u_i = alpha_i - alpha`` by Newton iteration in the real plane, seeded
    at each well. Seeds that fail to converge are reported with a warning
    and contribute no root.
    """
    kappa = 0.0 if noise is None else noise.kappa
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    a0, a1, K = complex(p.alpha0), complex(p.alpha1), p.K
    if kappa == 0:
        return [a0] if a0 == a1 else [a0, a1]
    roots = []
    for seed in (a0, a1):
        z = seed
        ok = False
        for _ in range(max_iter):
            f = _steady_residual(z, a0, a1, K, kappa)
            u0, u1 = a0 - z, a1 - z
            f_z = -K * (np.conj(u0) + np.conj(u1)) * (u0 + u1) + 0.5j * kappa
            f_zb = -2.0 * K * u0 * u1
            J = np.array([[(f_z + f_zb).real, (1j * (f_z - f_zb)).real],
                          [(f_z + f_zb).imag, (1j * (f_z - f_zb)).imag]])
            try:
                dx = np.linalg.solve(J, [-f.real, -f.imag])
            except np.linalg.LinAlgError:
                break
            z = z + complex(dx[0], dx[1])
            if abs(complex(dx[0], dx[1])) < tol * max(1.0, abs(z)):
                ok = abs(_steady_residual(z, a0, a1, K, kappa)) <= 1e-10 * max(1.0, K)
                break
        if not ok:
            warnings.warn(f"steady-state Newton from seed {seed} did not converge", RuntimeWarning, stacklevel=2)
            continue
        if all(abs(z - r) > 1e-8 for r in roots):
            roots.append(z)
    return roots


def state_to_json(psi: np.ndarray) -> dict:
    psi = np.asarray(psi)
    return {"dim": int(psi.shape[0]), "re": psi.real.tolist(), "im": psi.imag.tolist()}


def state_from_json(data) -> np.ndarray:
    if isinstance(data, str):
        data = json.loads(data)
    psi = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
    if psi.shape[0] != int(data["dim"]):
        raise DimensionMismatchError(f"declared dim {data['dim']} but got {psi.shape[0]} entries")
    return psi
