import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kerrcat.circuit_map import (
    CircuitParams,
    EffectiveParams,
    HardwareParams,
    acs_to_circuit,
    acs_to_effective,
    circuit_to_effective,
    effective_to_drives,
)
from kerrcat.errors import InfeasibleTargetError
from kerrcat.hamiltonians import AcsParams

TWO_PI = 2 * math.pi
# E_C/h = 200 MHz, N = 2; energies in rad/ns
REF = CircuitParams(TWO_PI * 0.2, TWO_PI * 40, TWO_PI * 25, TWO_PI * 20, 2, 0.02, 0.03, 0.01, 0.3, 1.1, -0.7, TWO_PI * 13.0)
HW = REF.hardware


def _oracle_in_ghz(c):
    # same formulas evaluated in cycles/ns; every output is linear in energy,
    # so multiplying by 2 pi must reproduce the angular-unit result
    EC, EJ, EJ1, EJ2 = (x / TWO_PI for x in (c.E_C, c.E_J, c.E_J1, c.E_J2))
    N = c.N
    Et = 2 * EJ + EJ1 + EJ2
    Em = EJ1 - EJ2
    wc = math.sqrt(8 * Et * EC / N)
    K = -EC / (2 * N * N)
    n0 = (Et / (32 * N * EC)) ** 0.25
    beta = c.delta1 * EJ * wc / (4 * Et) * np.exp(1j * c.phi2)
    eta = c.delta2 * Em * wc**1.5 / (4 * math.sqrt(N) * (2 * Et) ** 1.5) * np.exp(1j * c.phi3)
    xi = -c.delta2 * Em * math.sqrt(N * wc / (8 * Et)) * np.exp(1j * c.phi3)
    eps = -1j * n0 * 2 * EC * c.charge_drive * np.exp(1j * c.phi1)
    return {
        "omega_c": wc, "K": K, "Delta": wc + K / 2 - c.omega_p / TWO_PI,
        "beta": beta, "eta": eta, "xi": xi, "epsilon": eps + xi, "n0": n0,
        "varphi0": (2 * N * EC / Et) ** 0.25,
    }


def test_reference_set_against_unit_oracle():
    e = circuit_to_effective(REF)
    o = _oracle_in_ghz(REF)
    for k in ("omega_c", "K", "Delta", "beta", "eta", "xi", "epsilon"):
        assert abs(getattr(e, k) - TWO_PI * o[k]) <= 1e-12 * max(1.0, abs(TWO_PI * o[k])), k
    assert e.n0 == pytest.approx(o["n0"], rel=1e-14)
    assert e.varphi0 == pytest.approx(o["varphi0"], rel=1e-14)
    # frozen after the oracle check
    assert e.omega_c == pytest.approx(TWO_PI * 10.0, rel=1e-14)
    assert e.K == pytest.approx(-TWO_PI * 0.025, rel=1e-14)
    assert e.n0 == pytest.approx(1.7677669529663689, rel=1e-14)
    assert e.beta == pytest.approx(0.045600455768557355 + 0.08959393584621309j, rel=1e-12)
    assert e.eta == pytest.approx(0.001019431291280994 - 0.0008586551313264541j, rel=1e-12)


def test_kerr_formula_and_array_length():
    hw1 = HardwareParams(1.0, 30.0, 20.0, 15.0, 1)
    hw2 = HardwareParams(1.0, 30.0, 20.0, 15.0, 2)
    assert hw1.K == -0.5
    assert hw2.K == pytest.approx(hw1.K / 4, rel=1e-15)


def test_symmetric_junctions_give_no_cubic_drive():
    c = CircuitParams(1.0, 30.0, 20.0, 20.0, 1, 0.05, 0.05, 0.01, 0.1, 0.2, 0.3, 20.0)
    e = circuit_to_effective(c)
    assert e.eta == 0 and e.xi == 0


def test_eta_and_xi_share_phase():
    e = circuit_to_effective(REF)
    assert abs(math.remainder(np.angle(e.eta) - np.angle(-e.xi), TWO_PI)) < 1e-12


def test_energy_scaling():
    e1 = circuit_to_effective(REF)
    s = 10.0
    big = CircuitParams(REF.E_C * s, REF.E_J * s, REF.E_J1 * s, REF.E_J2 * s, REF.N, REF.delta1, REF.delta2,
                        REF.charge_drive, REF.phi1, REF.phi2, REF.phi3, REF.omega_p * s)
    e2 = circuit_to_effective(big)
    assert e2.omega_c == pytest.approx(s * e1.omega_c, rel=1e-14)
    assert e2.n0 == pytest.approx(e1.n0, rel=1e-14)
    assert e2.varphi0 == pytest.approx(e1.varphi0, rel=1e-14)


drives = st.tuples(
    st.floats(0.0, 0.1), st.floats(0.0, 0.1), st.floats(0.0, 0.5),
    st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi),
    st.floats(1.0, 80.0),
)


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


@settings(max_examples=100, deadline=None)
@given(d=drives)
def test_round_trip(d):
    d1, d2, cd, p1, p2, p3, wp = d
    c = CircuitParams(HW.E_C, HW.E_J, HW.E_J1, HW.E_J2, HW.N, d1, d2, cd, p1, p2, p3, wp)
    e = circuit_to_effective(c)
    back = circuit_to_effective(effective_to_drives(e.Delta, e.beta, e.eta, e.epsilon, HW))
    for k in ("Delta", "beta", "eta", "epsilon"):
        want, got = getattr(e, k), getattr(back, k)
        assert abs(got - want) <= 1e-9 * max(abs(want), 1e-12), k


def test_round_trip_on_random_targets(rng):
    hw = HardwareParams(TWO_PI * 0.2, TWO_PI * 40, TWO_PI * 25, TWO_PI * 20, 2)
    for _ in range(100):
        Delta = rng.uniform(-5, 5)
        beta = complex(*rng.uniform(-0.1, 0.1, 2))
        eta = complex(*rng.uniform(-0.003, 0.003, 2))
        eps = complex(*rng.uniform(-0.5, 0.5, 2))
        e = circuit_to_effective(effective_to_drives(Delta, beta, eta, eps, hw))
        assert _rel(e.Delta, Delta) <= 1e-9
        assert _rel(e.beta, beta) <= 1e-9
        assert _rel(e.eta, eta) <= 1e-9
        assert _rel(e.epsilon, eps) <= 1e-9


def test_zero_eta_uses_no_second_flux_drive():
    c = effective_to_drives(0.3, 0.05 + 0.02j, 0.0, 0.1 - 0.2j, HW)
    assert c.delta2 == 0.0
    e = circuit_to_effective(c)
    assert e.xi == 0 and e.epsilon == pytest.approx(0.1 - 0.2j, rel=1e-12)


def test_symmetric_cat_needs_only_the_two_photon_drive():
    Delta, beta, eta, eps = acs_to_effective(AcsParams(1.5, -1.5), HW)
    assert eta == 0 and eps == 0
    assert abs(beta) > 0
    c = acs_to_circuit(AcsParams(1.5, -1.5), HW)
    assert c.delta2 == 0 and c.charge_drive == 0 and c.delta1 > 0


def test_infeasible_targets_name_their_constraint():
    sym = HardwareParams(1.0, 30.0, 20.0, 20.0, 1)
    with pytest.raises(InfeasibleTargetError) as exc:
        effective_to_drives(0.0, 0.01, 0.001, 0.0, sym)
    assert exc.value.constraint == "eta_requires_asymmetry"
    with pytest.raises(InfeasibleTargetError) as exc:
        effective_to_drives(0.0, 10.0, 0.0, 0.0, HW)
    assert exc.value.constraint == "delta1_bound"
    with pytest.raises(InfeasibleTargetError) as exc:
        effective_to_drives(0.0, 0.0, 1.0, 0.0, HW)
    assert exc.value.constraint == "delta2_bound"
    with pytest.raises(InfeasibleTargetError) as exc:
        effective_to_drives(1e4, 0.0, 0.0, 0.0, HW)
    assert exc.value.constraint == "pump_frequency"


def test_validation():
    with pytest.raises(ValueError):
        HardwareParams(0.0, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        HardwareParams(1.0, 1.0, 1.0, 1.0, 0)
    with pytest.raises(ValueError):
        CircuitParams(1.0, 1.0, 1.0, 1.0, 1, -0.1, 0.0, 0.0, 0, 0, 0, 1.0)


def test_json_roundtrips():
    assert CircuitParams.from_json(REF.to_json()) == REF
    e = circuit_to_effective(REF)
    assert EffectiveParams.from_json(e.to_json()) == e
