"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Tolerances are the contract's, unchanged. Long simulations carry the
``slow`` marker; deselect them with ``-m "not slow"``.
"""

import math

import numpy as np
import pytest

from kerrcat.cat_states import (
    acs_overlap,
    dephasing_projection,
    dephasing_projection_numeric,
    mandel_q,
    mandel_q_from_state,
    near_collision_state,
    NearCollisionSpec,
    photon_statistics,
    quadrature_uncertainty,
)
from kerrcat.circuit_map import CircuitParams, HardwareParams, circuit_to_effective, effective_to_drives
from kerrcat.compiler import (
    compile_controlled,
    compile_rx,
    compile_ry,
    compile_rz,
    compile_rzry,
    fringe_phase_shift,
    naive_preparation_schedule,
    plan_preparation,
    predict_unitary,
    rx_matrix,
    rx_side_length,
    ry_matrix,
    rz_matrix,
    verify_gate,
    verify_preparation,
)
from kerrcat.dynamics import Schedule, Segment, evolve_lindblad, evolve_schrodinger, steady_state_alpha
from kerrcat.fock import TruncatedSpace, coherent, displaced_fock, husimi_peak, ket2dm
from kerrcat.hamiltonians import AcsParams, MultiQubitSpec, NoiseParams, build_acs_hamiltonian, build_control_hamiltonian
from kerrcat.holonomy import Line, PhasePath, collision_holonomy
from kerrcat.spectrum import eigensystem, gap_sweep, ground_manifold_check, subspace_overlap


def _verdict(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\n[acceptance {n:2d}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def test_01_degenerate_ground_manifold(capsys):
    p = AcsParams(4 * np.exp(2j * math.pi / 3), 3 * np.exp(-1j * math.pi / 4))
    space = TruncatedSpace(80)
    E = eigensystem(build_acs_hamiltonian(space, p, check=False), 2).eigenvalues
    rep = ground_manifold_check(p, space)
    ok = E[1] - E[0] <= 1e-6 and abs(E[0]) <= 1e-6 and rep.subspace_overlap >= 0.999
    _verdict(capsys, 1, ok, f"E1-E0={E[1] - E[0]:.2e}, E0={E[0]:.2e}, overlap={rep.subspace_overlap:.6f}")


def test_02_gap_law(capsys):
    d2s = [4, 9, 16, 25, 36, 49, 64]
    errs = [r.relative_error for _, r in gap_sweep(d2s)]
    monotone = all(b < a for a, b in zip(errs, errs[1:]))
    at16 = errs[2] <= 0.10
    large = all(e <= 0.05 for d2, e in zip(d2s, errs) if d2 >= 36)
    detail = "rel errors " + ", ".join(f"{d}:{e:.3f}" for d, e in zip(d2s, errs))
    _verdict(capsys, 2, monotone and at16 and large, detail)


def test_03_collision_gap(capsys):
    p = AcsParams(2.0, 2.0)
    space = TruncatedSpace(60)
    es = eigensystem(build_acs_hamiltonian(space, p), 3)
    gap = es.eigenvalues[2] - es.eigenvalues[0]
    ov = subspace_overlap(es.eigenvectors[:, :2], np.column_stack([displaced_fock(space, 2, 0), displaced_fock(space, 2, 1)]))
    ok = abs(gap / 2 - 1) <= 0.05 and ov >= 0.9999
    _verdict(capsys, 3, ok, f"gap={gap:.4f}, overlap={ov:.8f}")


def test_04_loss_steady_state(capsys):
    a0, a1 = 3 * np.exp(1j * math.pi / 3), -2.0
    noise = NoiseParams(5.0)
    roots = steady_state_alpha(AcsParams(a0, a1), noise)
    res_max = max(abs((np.conj(a0 - z) + np.conj(a1 - z)) * (a0 - z) * (a1 - z) + 2.5j * z) for z in roots)
    space = TruncatedSpace(45)
    rho0 = ket2dm(coherent(space, a0) + coherent(space, a1))
    rho0 /= np.trace(rho0)
    out = evolve_lindblad(space, Schedule.static(a0, a1, 4 / noise.kappa), rho0, noise)
    offsets = [abs(husimi_peak(out.final_state, z) - z) for z in roots]
    ok = len(roots) == 2 and res_max <= 1e-10 and max(offsets) <= 0.1 and abs(roots[0] - roots[1]) < abs(a0 - a1)
    _verdict(capsys, 4, ok, f"residual={res_max:.1e}, lobe offsets={[round(o, 4) for o in offsets]}")


@pytest.mark.slow
def test_05_collision_transport(capsys):
    z0, z1 = 2 + 2j, -1.7 - 2.3j
    c = np.array([1.3, 2 * np.exp(1j * math.pi / 6)])
    c /= np.linalg.norm(c)
    space = TruncatedSpace(45)
    psi0 = c[0] * coherent(space, z0) + c[1] * displaced_fock(space, z0, 1)
    sched = Schedule((Segment(100.0, Line(z0, z1), Line(z0, z1)),))
    res = evolve_schrodinger(space, sched, psi0, dt=0.2)
    U = collision_holonomy(PhasePath((Line(z0, z1),))).unitary
    w = U @ c
    want = w[0] * coherent(space, z1) + w[1] * displaced_fock(space, z1, 1)
    F = abs(np.vdot(want, res.final_state)) ** 2
    _verdict(capsys, 5, F >= 0.99, f"fidelity={F:.6f}")


@pytest.mark.slow
def test_06_holonomy_free_preparation(capsys):
    a0, a1 = 2.5 * np.exp(1j * math.pi / 8), 2 * np.exp(7j * math.pi / 12)
    plan = plan_preparation(a0, a1, "plus")
    F = verify_preparation(plan.schedule, a0, a1, "plus")
    F_naive = verify_preparation(naive_preparation_schedule(a0, a1), a0, a1, "plus")
    ok = F >= 0.99 and F - F_naive >= 0.05
    _verdict(capsys, 6, ok, f"planned={F:.6f}, naive={F_naive:.6f}")


@pytest.mark.slow
def test_07_gate_suite(capsys):
    gates = [
        (compile_rz(math.pi / 2), rz_matrix(math.pi / 2)),
        (compile_rx(math.pi / 2), rx_matrix(math.pi / 2)),
        (compile_ry(math.pi / 2), ry_matrix(math.pi / 2)),
        (compile_rzry(math.pi / 2, math.pi / 2), rz_matrix(math.pi / 2) @ ry_matrix(math.pi / 2)),
    ]
    fids, exact = [], True
    for g, ref in gates:
        exact &= bool(np.array_equal(g.predicted_unitary, ref.astype(complex)))
        exact &= abs(abs(np.trace(ref.conj().T @ predict_unitary(g))) / 2 - 1) < 1e-9
        fids.append(verify_gate(g).fidelity)
    side = rx_side_length(math.pi)
    ok = min(fids) >= 0.99 and exact and abs(side - 0.8862) <= 1e-4
    _verdict(capsys, 7, ok, f"fidelities={[round(f, 6) for f in fids]}, exact={exact}, l(pi)={side:.6f}")


def test_08_mandel_q_and_statistics(capsys):
    q0 = mandel_q(1e-9, 0.7)
    q10 = mandel_q(10.0, 0.0)
    space = TruncatedSpace(200)
    state = near_collision_state(space, NearCollisionSpec.from_polar(10.0, 1e-12, 0.0), exact=True)
    q10_state = mandel_q_from_state(state)
    alpha = 3 * np.exp(2j * math.pi / 3)
    pn = photon_statistics(near_collision_state(60, NearCollisionSpec.from_polar(alpha, 1e-12, 0.0), exact=True)).distribution
    prods = [
        quadrature_uncertainty(near_collision_state(space, NearCollisionSpec.from_polar(r, 1e-12, th), exact=True))
        for r in (0.0, 0.5, 1.0, 2.0, 3.0, 5.0) for th in np.linspace(0, math.pi, 7)
    ]
    ok = (abs(q0 + 1) <= 1e-6 and abs(q10 - 199 / 101) <= 1e-6 and abs(q10_state - q10) <= 1e-3
          and pn[9] <= 1e-3 and min(prods) >= 1 / 16 - 1e-3 and max(prods) <= 9 / 16 + 1e-3)
    _verdict(capsys, 8, ok, f"Q(0)={q0:.8f}, Q(10)={q10:.8f} (state {q10_state:.6f}), P_9={pn[9]:.1e}, "
                            f"uncertainty in [{min(prods):.4f}, {max(prods):.4f}]")


@pytest.mark.slow
def test_09_geometric_phase(capsys):
    shifts = {A: fringe_phase_shift(2.0, A) for A in (0.1, 0.25, 0.5)}
    errs = {A: abs(s / (-2 * A) - 1) for A, s in shifts.items()}
    ok = max(errs.values()) <= 0.01
    _verdict(capsys, 9, ok, ", ".join(f"A={A}: {s:.5f} (rel err {errs[A]:.2e})" for A, s in shifts.items()))


def _brute_overlaps(a0, a1, dim):
    space = TruncatedSpace(dim)
    c0, c1 = coherent(space, a0, check=False), coherent(space, a1, check=False)
    npl = 1 / np.linalg.norm(c0 + c1)
    nmi = 1 / np.linalg.norm(c0 - c1)
    return npl, nmi, np.vdot(npl * (c0 + c1), nmi * (c0 - c1))


def test_10_closed_form_overlaps(capsys):
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(100):
        a0, a1 = (4 * math.sqrt(rng.uniform()) * np.exp(2j * math.pi * rng.uniform()) for _ in range(2))
        ov = acs_overlap(a0, a1)
        npl, nmi, cross = _brute_overlaps(a0, a1, 90)
        worst = max(worst, abs(ov.norm_plus - npl), abs(ov.norm_minus - nmi), abs(ov.cross_overlap - cross))
    _verdict(capsys, 10, worst <= 1e-10, f"max deviation {worst:.2e}")


def test_11_dephasing_projection(capsys):
    rng = np.random.default_rng(11)
    space = TruncatedSpace(90)
    worst = 0.0
    for _ in range(50):
        a0, a1 = (4 * math.sqrt(rng.uniform()) * np.exp(2j * math.pi * rng.uniform()) for _ in range(2))
        cf = dephasing_projection(a0, a1)
        bf = dephasing_projection_numeric(space, a0, a1)
        worst = max(worst, *(abs(getattr(cf, k) - getattr(bf, k)) for k in ("cI", "cX", "cY", "cZ")))
    scs = dephasing_projection(2.0 * np.exp(0.4j), -2.0 * np.exp(0.4j))
    ok = worst <= 1e-8 and scs.cX == 0.0
    _verdict(capsys, 11, ok, f"max deviation {worst:.2e}, SCS cX={scs.cX}")


def test_12_circuit_map(capsys):
    hw = HardwareParams(1.3, 40.0, 25.0, 20.0, 3)
    k_exact = hw.K == -1.3 / 18
    sym = circuit_to_effective(CircuitParams(1.0, 30.0, 20.0, 20.0, 1, 0.05, 0.05, 0.01, 0.1, 0.2, 0.3, 20.0))
    rng = np.random.default_rng(12)
    worst = 0.0
    for _ in range(100):
        Delta = rng.uniform(-2, 2)
        beta, eta, eps = (complex(*rng.uniform(-s, s, 2)) for s in (0.05, 0.0005, 0.5))
        e = circuit_to_effective(effective_to_drives(Delta, beta, eta, eps, hw))
        for want, got in ((Delta, e.Delta), (beta, e.beta), (eta, e.eta), (eps, e.epsilon)):
            worst = max(worst, abs(got - want) / abs(want))
    ok = k_exact and sym.eta == 0 and sym.xi == 0 and worst <= 1e-9
    _verdict(capsys, 12, ok, f"K exact={k_exact}, symmetric eta={sym.eta}, xi={sym.xi}, round trip {worst:.1e}")


@pytest.mark.slow
def test_13_two_mode_control(capsys):
    spec = MultiQubitSpec(2, 1, 2.0, -2.0, 2.0 + 0.5j, -2.0 + 0.5j, 2.0, -2.0, dim=25)
    H = build_control_hamiltonian(spec, check=False)
    scale = np.linalg.norm(H.toarray(), 2)
    c = lambda z: coherent(spec.dim, z, check=False)  # noqa: E731
    pairs = [(spec.alpha0, spec.alpha4), (spec.alpha0, spec.alpha5), (spec.alpha1, spec.alpha2), (spec.alpha1, spec.alpha3)]
    residual = max(np.linalg.norm(H @ np.kron(c(x), c(y))) for x, y in pairs) / scale
    code = MultiQubitSpec(2, 1, 2.0, -2.0, 2.0, -2.0, 2.0, -2.0, dim=25)
    g = compile_controlled(compile_rz(math.pi), code)
    F = verify_gate(g).fidelity
    ok = residual <= 1e-6 and F >= 0.98
    _verdict(capsys, 13, ok, f"relative residual={residual:.1e}, CU process fidelity={F:.6f}")
