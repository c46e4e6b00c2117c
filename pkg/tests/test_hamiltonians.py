import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kerrcat.errors import DegenerateSelectorError, TruncationError
from kerrcat.fock import TruncatedSpace, coherent, fock, ladder_operators
from kerrcat.hamiltonians import (
    AcsParams,
    ControlHamiltonian,
    MultiQubitSpec,
    NoiseParams,
    build_acs_hamiltonian,
    build_control_hamiltonian,
    build_drive_hamiltonian,
    displaced_hamiltonian,
    effective_loss_hamiltonian,
    metapotential,
    parse_complex,
    to_drive_form,
)

wells = st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False)


def test_parse_complex_forms():
    assert abs(parse_complex("2@90deg") - 2j) < 1e-12
    assert abs(parse_complex("1@3.14159265358979rad") + 1) < 1e-12
    assert parse_complex([1, -2]) == 1 - 2j
    assert parse_complex("[0.5, 0.25]") == 0.5 + 0.25j
    assert parse_complex("1+2i") == 1 + 2j
    with pytest.raises(ValueError):
        parse_complex([1, 2, 3])


def test_params_validation_and_json():
    with pytest.raises(ValueError):
        AcsParams(1, 2, K=0)
    with pytest.raises(ValueError):
        NoiseParams(kappa=-1)
    p = AcsParams(1 + 1j, -2, K=0.5)
    assert AcsParams.from_json(p.to_json()) == p


def test_collided_origin_is_pure_kerr():
    H = build_acs_hamiltonian(20, AcsParams(0, 0))
    assert abs(H[2, 2] - 2.0) < 1e-14
    a, ad = ladder_operators(20)
    assert np.allclose(H, ad @ ad @ a @ a)


@settings(max_examples=25, deadline=None)
@given(wells, wells)
def test_wells_are_zero_energy_eigenstates(a0, a1):
    p = AcsParams(a0, a1)
    space = TruncatedSpace.for_amplitude(p.max_amplitude, margin=10)
    H = build_acs_hamiltonian(space, p)
    assert np.allclose(H, H.conj().T)
    for al in (a0, a1):
        assert np.linalg.norm(H @ coherent(space, al)) < 1e-5 * max(1.0, abs(al) ** 4)


def test_truncation_guard():
    with pytest.raises(TruncationError):
        build_acs_hamiltonian(20, AcsParams(4, 0))


def test_drive_form_examples():
    d = to_drive_form(AcsParams(2, 2))
    assert d.beta == 4 and d.eta == -4 and d.epsilon == -16
    d = to_drive_form(AcsParams(1.5j, -1.5j))
    assert d.eta == 0 and d.epsilon == 0 and abs(d.beta - 2.25) < 1e-12


@settings(max_examples=20, deadline=None)
@given(wells, wells, st.floats(0.2, 3.0))
def test_drive_form_equals_factored_form(a0, a1, K):
    p = AcsParams(a0, a1, K)
    space = TruncatedSpace.for_amplitude(p.max_amplitude)
    H1 = build_acs_hamiltonian(space, p)
    H2 = build_drive_hamiltonian(space, to_drive_form(p))
    assert np.linalg.norm(H1 - H2) <= 1e-10 * max(1.0, np.linalg.norm(H1))


def test_drive_form_paper_pair():
    p = AcsParams(4 * np.exp(2j * np.pi / 3), 3 * np.exp(-1j * np.pi / 4))
    space = TruncatedSpace(80)
    H1 = build_acs_hamiltonian(space, p)
    assert np.linalg.norm(H1 - build_drive_hamiltonian(space, to_drive_form(p))) <= 1e-10 * np.linalg.norm(H1)


def test_displaced_hamiltonian_kills_single_photon_term_at_wells():
    p = AcsParams(1.0 + 0.5j, -1.2)
    space = TruncatedSpace(30)
    for al in (p.alpha0, p.alpha1):
        _, rec = displaced_hamiltonian(space, p, al)
        assert abs(rec.single) < 1e-8
        assert abs(rec.constant) < 1e-8
        assert abs(rec.kerr - p.K) < 1e-8
    _, rec0 = displaced_hamiltonian(space, p, 0)
    d = to_drive_form(p)
    assert abs(rec0.two_photon - d.beta) < 1e-10
    assert abs(rec0.cubic - d.eta) < 1e-10
    assert abs(rec0.single - d.epsilon) < 1e-10


def test_effective_loss_hamiltonian():
    p = AcsParams(1.0, -1.0)
    space = TruncatedSpace(30)
    Hd, _ = displaced_hamiltonian(space, p, 0.3)
    assert np.array_equal(effective_loss_hamiltonian(space, p, NoiseParams(), 0.3), Hd)
    Hl = effective_loss_hamiltonian(space, p, NoiseParams(kappa=2.0), 0.3)
    a, ad = ladder_operators(space)
    diff = Hl - Hd
    assert abs(diff[1, 0] - (-1j * 0.3)) < 1e-12  # -i kappa alpha / 2 on a^dag
    assert abs(diff[1, 1] - diff[0, 0] + 1j) < 1e-12  # -i kappa / 2 on a^dag a
    assert not np.allclose(Hl, Hl.conj().T)


def test_metapotential_quartic_bowl_and_minima():
    xs = np.linspace(-2, 2, 5)
    V = metapotential(AcsParams(0, 0), xs, xs)
    X, P = np.meshgrid(xs, xs)
    assert np.allclose(V, (X**2 + P**2) ** 2 / 4)
    p = AcsParams(4 * np.exp(-2j * np.pi / 3), 3 * np.exp(1j * np.pi / 4))
    for al in (p.alpha0, p.alpha1):
        z = np.sqrt(2) * al
        assert abs(metapotential(p, [z.real], [z.imag])[0, 0]) < 1e-9
        h = 1e-3
        ring = metapotential(p, [z.real + h, z.real - h, z.real], [z.imag])
        assert np.all(ring >= -1e-12)


@settings(max_examples=15, deadline=None)
@given(wells, wells, st.floats(0, 2 * np.pi))
def test_spectrum_invariant_under_rotation(a0, a1, phi):
    p = AcsParams(a0, a1)
    q = AcsParams(a0 * np.exp(1j * phi), a1 * np.exp(1j * phi))
    space = TruncatedSpace.for_amplitude(p.max_amplitude, margin=10)
    e1 = np.linalg.eigvalsh(build_acs_hamiltonian(space, p))[:6]
    e2 = np.linalg.eigvalsh(build_acs_hamiltonian(space, q))[:6]
    assert np.allclose(e1, e2, atol=1e-8 * max(1.0, e1[-1]))


def _spec(**kw):
    base = dict(n_modes=2, m_controls=1, alpha0=2, alpha1=-2, alpha2=2, alpha3=-2, alpha4=2, alpha5=-2, dim=25)
    base.update(kw)
    return MultiQubitSpec(**base)


def test_control_spec_validation():
    with pytest.raises(DegenerateSelectorError):
        _spec(alpha1=2)
    with pytest.raises(ValueError):
        _spec(m_controls=2)


def test_control_hamiltonian_annihilates_product_cats():
    spec = _spec(alpha2=1.5 + 0.5j, alpha3=-1.0 - 1.0j)
    H = build_control_hamiltonian(spec, check=False)
    assert np.allclose((H - H.conj().T).toarray(), 0)
    c = lambda z: coherent(spec.dim, z, check=False)
    pairs = [(spec.alpha0, spec.alpha4), (spec.alpha0, spec.alpha5), (spec.alpha1, spec.alpha2), (spec.alpha1, spec.alpha3)]
    scale = np.linalg.norm(H.toarray(), 2)
    for x, y in pairs:
        v = np.kron(c(x), c(y))
        assert np.linalg.norm(H @ v) <= 1e-6 * scale
    # the other branch is not a zero mode
    assert np.linalg.norm(H @ np.kron(c(spec.alpha0), c(spec.alpha2))) > 1e-2


def test_control_selector_toffoli_structure():
    spec = MultiQubitSpec(3, 2, 1.5, -1.5, 0.5, -0.5, 1.5, -1.5, dim=12)
    ch = ControlHamiltonian(spec)
    c = lambda z: coherent(spec.dim, z, check=False)
    S = ch.selector
    for x, y, want in [(1.5, 1.5, 0), (1.5, -1.5, 0), (-1.5, 1.5, 0), (-1.5, -1.5, 1)]:
        v = np.kron(np.kron(c(x), c(y)), fock(spec.dim, 0))
        assert abs(np.vdot(v, S @ v) - want) < 1e-3


def test_control_matrix_moves_only_target_wells():
    spec = _spec()
    ch = ControlHamiltonian(spec)
    H = ch.matrix(0.5, -0.5)
    c = lambda z: coherent(spec.dim, z, check=False)
    assert np.linalg.norm(H @ np.kron(c(-2), c(0.5))) < 1e-6 * np.linalg.norm(H.toarray(), 2)
    assert np.linalg.norm(H @ np.kron(c(2), c(2))) < 1e-6 * np.linalg.norm(H.toarray(), 2)
