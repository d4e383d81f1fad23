import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from esdlab import linalg, measures, states
from esdlab import tomography as tomo
from esdlab.errors import DimensionError, ParameterError, PhysicalityError

BELL = states.two_qubit_pure(1 / np.sqrt(2))


def same_ray(a, b):
    return abs(abs(np.vdot(a, b)) - 1) < 1e-12


@pytest.mark.parametrize("label", tomo.BASIS_ORDER)
def test_table_settings_give_basis_projectors(label):
    phi = tomo.analyzed_state(tomo.BASIS_SETTINGS[label])
    assert same_ray(phi, tomo.BASIS_STATES[label])


def test_basis_states_are_pauli_eigenvectors():
    for axis, (plus, minus) in tomo._AXES.items():
        s = linalg.pauli(axis)
        np.testing.assert_allclose(s @ tomo.BASIS_STATES[plus], tomo.BASIS_STATES[plus], atol=1e-15)
        np.testing.assert_allclose(s @ tomo.BASIS_STATES[minus], -tomo.BASIS_STATES[minus], atol=1e-15)


@given(q=st.floats(-360, 360), h=st.floats(-360, 360))
def test_waveplates_unitary(q, h):
    for m in (tomo.jones_qwp(q), tomo.jones_hwp(h)):
        np.testing.assert_allclose(m @ m.conj().T, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(tomo.jones_hwp(h) @ tomo.jones_hwp(h), np.eye(2), atol=1e-12)


def test_two_qwp_make_a_half_wave():
    # up to global phase, a QWP squared is a HWP at the same angle
    m = tomo.jones_qwp(30) @ tomo.jones_qwp(30)
    h = tomo.jones_hwp(30)
    ratio = m[np.abs(h) > 1e-9] / h[np.abs(h) > 1e-9]
    np.testing.assert_allclose(ratio, ratio[0], atol=1e-12)


def test_setting_angles_wrap():
    assert tomo.WaveplateSetting(225, -45) == tomo.WaveplateSetting(45, 135)


def test_settings_layout():
    s = tomo.two_qubit_settings()
    assert len(s) == 36 and s[0] == ("H", "H") and s[1] == ("H", "R") and s[6] == ("R", "H")


def test_stokes_from_probs():
    s = tomo.single_qubit_stokes_from_probs(1, 0, 0.5, 0.5, 0.5, 0.5)
    assert (s.s1, s.s2, s.s3) == (0, 0, 1)
    with pytest.raises(ParameterError):
        tomo.single_qubit_stokes_from_probs(0.6, 0.6, 0.5, 0.5, 0.5, 0.5)


def test_noiseless_counts_are_exact():
    recs = tomo.simulate_counts(BELL, flux=1000, noise=None)
    table = {r.label: r.counts for r in recs}
    assert table["HH"] == pytest.approx(500) and table["HV"] == pytest.approx(0, abs=1e-12)
    assert table["DD"] == pytest.approx(500) and table["RR"] == pytest.approx(0, abs=1e-10)
    assert table["RL"] == pytest.approx(500)


def test_poisson_counts_are_seeded():
    a = [r.counts for r in tomo.simulate_counts(BELL, flux=1e3, seed=5)]
    b = [r.counts for r in tomo.simulate_counts(BELL, flux=1e3, seed=5)]
    c = [r.counts for r in tomo.simulate_counts(BELL, flux=1e3, seed=6)]
    assert a == b and a != c
    assert all(float(x).is_integer() for x in a)


def test_simulate_rejects_bad_input():
    with pytest.raises(ParameterError):
        tomo.simulate_counts(BELL, flux=0)
    with pytest.raises(ParameterError):
        tomo.simulate_counts(BELL, noise="gauss")
    with pytest.raises(DimensionError):
        tomo.simulate_counts(BELL, settings=[("H",)])


def test_record_validation():
    with pytest.raises(PhysicalityError):
        tomo.MeasurementRecord((), np.eye(2), 1.0)
    with pytest.raises(ParameterError):
        tomo.MeasurementRecord((), np.diag([1.0, 0.0]), -1.0)


@settings(max_examples=100)
@given(seed=st.integers(0, 2**32 - 1))
def test_linear_inversion_exact_without_noise(seed):
    rho = states.random_density((2, 2), np.random.default_rng(seed))
    est = tomo.linear_inversion_2q(tomo.simulate_counts(rho, noise=None))
    assert np.max(np.abs(est - rho.mat)) < 1e-10


def test_linear_inversion_can_go_negative_with_noise():
    recs = tomo.simulate_counts(BELL, flux=1e3, seed=7)
    est = tomo.linear_inversion_2q(recs)
    assert np.trace(est).real == pytest.approx(1.0)
    assert np.linalg.eigvalsh(est).min() < 0
    fit = tomo.mle_fit(recs)
    assert np.linalg.eigvalsh(fit.rho_mle.mat).min() >= -1e-12
    assert measures.fidelity(fit.rho_mle, BELL) > 0.99


def test_linear_inversion_needs_all_settings():
    recs = tomo.simulate_counts(BELL, noise=None)[:-1]
    with pytest.raises(ParameterError):
        tomo.linear_inversion_2q(recs)


def test_t_matrix_basics():
    np.testing.assert_allclose(tomo.t_matrix_to_rho([1, 1, 0, 0]).mat, np.eye(2) / 2)
    with pytest.raises(ParameterError):
        tomo.t_matrix_to_rho(np.zeros(16))
    with pytest.raises(DimensionError):
        tomo.t_matrix(np.ones(5))


@given(t=st.lists(st.floats(-3, 3), min_size=16, max_size=16))
def test_t_matrix_is_always_physical(t):
    if np.allclose(t, 0, atol=1e-3):
        return
    rho = tomo.t_matrix_to_rho(t)
    assert abs(np.trace(rho.mat) - 1) < 1e-12
    assert np.linalg.eigvalsh(rho.mat).min() > -1e-12


@given(seed=st.integers(0, 2**32 - 1))
def test_t_params_round_trip(seed):
    rho = states.random_density((2, 2), np.random.default_rng(seed))
    back = tomo.t_matrix_to_rho(tomo.rho_to_t_params(rho.mat, floor=0.0))
    np.testing.assert_allclose(back.mat, rho.mat, atol=1e-10)


def test_single_qubit_closed_form_t():
    s = states.StokesVector(1, 0, 0, 0.6)
    t = tomo.single_qubit_t_from_stokes(s)
    np.testing.assert_allclose(t, [2, 1, 0, 0])
    np.testing.assert_allclose(tomo.t_matrix_to_rho(t).mat, states.stokes_to_density(s).mat, atol=1e-10)
    s = states.StokesVector(1, 0.3, -0.2, 0.4)
    np.testing.assert_allclose(tomo.t_matrix_to_rho(tomo.single_qubit_t_from_stokes(s)).mat,
                               states.stokes_to_density(s).mat, atol=1e-10)
    with pytest.raises(ParameterError):
        tomo.single_qubit_t_from_stokes(states.StokesVector(1, 0, 0, 1))


@pytest.mark.parametrize("rho", [BELL, states.x_state(0.2, 0.4),
                                 states.random_density((2, 2), np.random.default_rng(11))])
def test_mle_recovers_state_without_noise(rho):
    fit = tomo.tomography_pipeline(rho, noise=None)
    assert measures.fidelity(fit.rho_mle, rho) >= 0.99999
    assert fit.likelihood < 1e-6
    assert all(b <= a + 1e-12 for a, b in zip(fit.history, fit.history[1:]))


def test_mle_needs_enough_records():
    with pytest.raises(ParameterError):
        tomo.mle_fit(tomo.simulate_counts(BELL, noise=None)[:10])


def test_pcc():
    assert tomo.pcc([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)
    assert tomo.pcc([1, 2, 3], [-1, -2, -3]) == pytest.approx(-1.0)
    x, y = np.array([1, 2, 3.0]), np.array([2, 4, 6.1])
    assert tomo.pcc(x, y) == pytest.approx(np.corrcoef(x, y)[0, 1], abs=1e-15)
    assert tomo.pcc(x, y) == pytest.approx(0.9999009, abs=1e-7)
    with pytest.raises(ParameterError):
        tomo.pcc([1, 1, 1], [1, 2, 3])
    with pytest.raises(ParameterError):
        tomo.pcc([1], [1])


@given(x=st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=20), a=st.floats(0.1, 10), b=st.floats(-5, 5))
def test_pcc_affine_invariance(x, a, b):
    x = np.array(x)
    y = np.sin(x) + x
    if np.ptp(x) < 1e-3 or np.ptp(y) < 1e-3:
        return
    assert abs(tomo.pcc(x, y) - tomo.pcc(a * x + b, y)) < 1e-9


def test_sellmeier_and_phase_matching():
    no, ne = tomo.sellmeier_bbo(0.81)
    assert ne < no
    assert tomo.n_e_theta(no, ne, 0.0) == pytest.approx(no)
    assert tomo.n_e_theta(no, ne, np.pi / 2) == pytest.approx(ne)
    theta = tomo.phase_match_angle(0.405)
    assert np.rad2deg(theta) == pytest.approx(28.82, abs=0.01)
    assert abs(tomo.phase_match_residual(theta, 0.405)) < 1e-12
    with pytest.raises(ParameterError):
        tomo.sellmeier_bbo(5.0)


def test_phase_match_angle_falls_with_wavelength():
    angles = [tomo.phase_match_angle(lam) for lam in (0.4, 0.45, 0.5, 0.6)]
    assert all(a > b for a, b in zip(angles, angles[1:]))


def test_coherence_and_decoherence():
    l_c, tau_c = tomo.coherence(405, 1.2)
    assert tau_c == pytest.approx(455.94, abs=0.01)
    assert tomo.coherence(810, 10)[0] == pytest.approx(65.61)
    f = tomo.decoherence_factor(210, 455)
    assert 0.5 * f == pytest.approx(0.3151566, abs=1e-7)
    out = tomo.decohere_corner(BELL, f)
    assert out.mat[0, 3] == pytest.approx(0.5 * f)
    assert out.mat[0, 0] == pytest.approx(0.5)
    with pytest.raises(ParameterError):
        tomo.coherence(-1, 1)
    with pytest.raises(DimensionError):
        tomo.decohere_corner(states.random_density((2,), np.random.default_rng(0)), 0.5)
