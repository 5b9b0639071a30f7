import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hybridopto.cooling import (
    LinearizedParams,
    MomentState,
    build_linearized_system,
    evolve_moments,
    relaxation_time,
    spectral_abscissa,
    stability_spectrum,
    steady_state_moments,
)
from hybridopto.errors import IntegrationError, NoSteadyStateError, ParameterError
from hybridopto.presets import fig5_params, single_cavity_variant

# Regression fixtures from numpy's eigensolver and scipy's Lyapunov solver.
FIG5_ABSCISSA = -6.378287259564987e-04
FIG5_STEADY_NB = 194.00135743110545


def uncoupled(**kw):
    base = dict(delta=1.0, delta_C=0.5, delta_at=2.0, kappa_A=0.3, kappa_C=0.2, gamma_at=0.7,
                gamma_m=0.01, g_at=0.0, J=0.0, G=0.0, n_th=100.0)
    base.update(kw)
    return LinearizedParams(**base)


def test_uncoupled_drift_is_diagonal():
    s = build_linearized_system(uncoupled())
    assert np.count_nonzero(s.M - np.diag(np.diag(s.M))) == 0
    expect = [-(0.3 + 1j), -(0.005 + 1j), -(0.2 + 0.5j), -(0.7 + 2j)]
    assert np.allclose(np.diag(s.M)[:4], expect)
    ev = stability_spectrum(s)
    assert sorted(ev, key=lambda z: (z.real, z.imag)) == pytest.approx(
        sorted(np.concatenate([expect, np.conj(expect)]), key=lambda z: (z.real, z.imag)))


@given(
    vals=st.lists(st.floats(-50, 50), min_size=7, max_size=7),
    rates=st.lists(st.floats(0, 100), min_size=4, max_size=4),
    n_th=st.floats(0, 1e5),
    flip=st.booleans(),
    printed=st.booleans(),
)
def test_particle_hole_symmetry_and_psd_diffusion(vals, rates, n_th, flip, printed):
    d, dc, dat, g_at, J, G, _ = vals
    p = LinearizedParams(delta=d, delta_C=dc, delta_at=dat, kappa_A=rates[0], kappa_C=rates[1],
                         gamma_at=rates[2], gamma_m=rates[3], g_at=g_at, J=J, G=G, n_th=n_th,
                         detuning_convention="laser_minus_cavity" if flip else "cavity_minus_laser",
                         dissipator_convention="printed" if printed else "amplitude")
    s = build_linearized_system(p)
    A, B = s.M[:4, :4], s.M[:4, 4:]
    assert np.array_equal(s.M[4:, 4:], A.conj())
    assert np.array_equal(s.M[4:, :4], B.conj())
    assert np.array_equal(s.D, s.D.conj().T)
    assert np.all(np.linalg.eigvalsh(s.D) >= 0)


def test_fig5_spectrum_fixture():
    s = build_linearized_system(fig5_params())
    ev = stability_spectrum(s)
    assert len(ev) == 8 and np.all(np.diff(ev.real) <= 0)
    assert ev[0].real == pytest.approx(FIG5_ABSCISSA, rel=1e-8)
    assert spectral_abscissa(s) < 0


def test_fig5_literal_detuning_sign_is_unstable():
    s = build_linearized_system(fig5_params().replace(detuning_convention="cavity_minus_laser"))
    assert spectral_abscissa(s) > 0
    with pytest.raises(NoSteadyStateError) as exc:
        steady_state_moments(s)
    assert np.all(np.real(exc.value.eigenvalues) >= 0)


def test_fig5_without_feedback_spectrum():
    # J = 0 with G = 50 kept: the strongly driven bare cavity cannot hold the mirror.
    s = build_linearized_system(fig5_params().replace(J=0.0))
    ev = stability_spectrum(s)
    assert ev[0].real > 0


def test_fig5_steady_state_fixture():
    ss = steady_state_moments(build_linearized_system(fig5_params()))
    assert ss.n_b == pytest.approx(FIG5_STEADY_NB, rel=1e-9)
    assert ss.hermiticity_error() < 1e-9


def test_uncoupled_thermal_steady_state_exact():
    ss = steady_state_moments(build_linearized_system(uncoupled()))
    assert ss.n_b == pytest.approx(100.0, rel=1e-12)
    for m in "acd":
        assert abs(ss.occupancy(m)) < 1e-12


def test_vacuum_steady_state():
    ss = steady_state_moments(build_linearized_system(uncoupled(n_th=0.0)))
    assert np.max(np.abs(ss.normal)) < 1e-12
    # With G != 0 the counter-rotating terms populate the modes even from vacuum input.
    driven = steady_state_moments(build_linearized_system(fig5_params().replace(n_th=0.0)))
    assert driven.n_b > 0


def test_thermal_linearity():
    p = fig5_params()
    vac = steady_state_moments(build_linearized_system(p.replace(n_th=0.0))).C
    a = steady_state_moments(build_linearized_system(p.replace(n_th=10.0))).C - vac
    b = steady_state_moments(build_linearized_system(p.replace(n_th=30.0))).C - vac
    assert np.allclose(b, 3 * a, rtol=1e-8, atol=1e-8 * np.max(np.abs(b)))


def test_uncoupled_thermal_fixed_point():
    init = MomentState.from_occupancies(n_b=100.0)
    tr = evolve_moments(build_linearized_system(uncoupled()), init, 500.0, samples=11)
    assert np.max(np.abs(tr.n_b - 100.0)) < 1e-8


def test_vacuum_stays_vacuum():
    tr = evolve_moments(build_linearized_system(uncoupled(n_th=0.0)), MomentState.from_occupancies(), 200.0,
                        samples=5)
    assert np.max(np.abs(tr.C[:, 4:, 4:])) == 0.0


def test_uncoupled_relaxation_matches_exponential():
    init = MomentState.from_occupancies(n_b=0.0, n_a=3.0)
    tr = evolve_moments(build_linearized_system(uncoupled(n_th=0.0)), init, 10.0, samples=6)
    # rtol applies to the norm of the whole covariance matrix, so compare absolutely
    assert tr.occupancy("a") == pytest.approx(3.0 * np.exp(-2 * 0.3 * tr.times), abs=1e-5)


def test_fig5_trajectory_cools_and_converges():
    s = build_linearized_system(fig5_params())
    t_end = 50 * relaxation_time(s)
    tr = evolve_moments(s, MomentState.from_occupancies(n_b=1e4), t_end, samples=51)
    assert tr.n_b[0] == 1e4
    assert tr.n_b[-1] < tr.n_b[0] * 0.05
    assert tr.n_b[-1] == pytest.approx(FIG5_STEADY_NB, rel=1e-6)
    assert tr.hermiticity_drift() < 1e-8 * (1 + 1e4)
    assert tr.min_occupancy() >= -1e-6
    assert tr.backend in ("compiled", "python")


def test_single_cavity_no_cooling():
    s = build_linearized_system(single_cavity_variant(fig5_params()))
    tr = evolve_moments(s, MomentState.from_occupancies(n_b=1e4), 4e4, samples=41)
    assert np.max(np.abs(tr.n_b - 1e4)) / 1e4 < 0.1


def test_tolerance_halving_within_error_estimate():
    s = build_linearized_system(fig5_params())
    init = MomentState.from_occupancies(n_b=1e4)
    a = evolve_moments(s, init, 2000.0, rtol=1e-6)
    b = evolve_moments(s, init, 2000.0, rtol=5e-7)
    assert abs(a.n_b[-1] - b.n_b[-1]) < a.error_estimate


def test_dt_control_and_times():
    s = build_linearized_system(uncoupled())
    init = MomentState.from_occupancies(n_b=1.0)
    tr = evolve_moments(s, init, 1.0, 0.25)
    assert np.allclose(tr.times, [0, 0.25, 0.5, 0.75, 1.0])
    tr = evolve_moments(s, init, 1.0, times=[0.0, 0.3, 1.0])
    assert len(tr) == 3 and tr[1].t == 0.3
    assert [st.t for st in tr] == [0.0, 0.3, 1.0]


def test_moment_views():
    st_ = MomentState.from_occupancies(n_a=1.0, n_b=2.0, n_c=3.0, n_d=4.0)
    m = st_.moments()
    assert len(m) == 20 and m["b+b"] == 2.0 and m["ab"] == 0
    assert np.array_equal(st_.first_moments, np.zeros(4))
    assert st_.occupancy("d") == 4.0


def test_integration_failure_names_time():
    # An exploding drift overflows to non-finite values.
    p = uncoupled(kappa_A=0.0, G=0.0).replace(delta=0.0)
    s = build_linearized_system(p)
    s.M[0, 0] = 50.0
    with pytest.raises(IntegrationError) as exc:
        evolve_moments(s, MomentState.from_occupancies(n_a=1.0), 100.0)
    assert "t = " in str(exc.value) and 0 < exc.value.t_reached < 100


def test_max_steps_exceeded():
    s = build_linearized_system(fig5_params())
    with pytest.raises(IntegrationError):
        evolve_moments(s, MomentState.from_occupancies(n_b=1.0), 1e3, max_steps=5)


def test_parameter_validation():
    with pytest.raises(ParameterError) as exc:
        uncoupled(kappa_A=-1.0, detuning_convention="sideways")
    assert set(exc.value.fields) == {"kappa_A", "detuning_convention"}
    with pytest.raises(ParameterError) as exc:
        LinearizedParams.from_dict({"delta": 1.0, "foo": 2})
    assert "foo" in exc.value.fields and "G" in exc.value.fields
    with pytest.raises(ParameterError):
        evolve_moments(build_linearized_system(uncoupled()), MomentState.from_occupancies(), -1.0)
    with pytest.raises(ParameterError):
        MomentState.from_occupancies(n_b=-1.0)


def test_from_dict_round_trip():
    p = fig5_params()
    assert LinearizedParams.from_dict(p.to_dict()) == p


def test_printed_dissipator_halves_optical_rates():
    p = uncoupled(dissipator_convention="printed")
    s = build_linearized_system(p)
    assert s.M[0, 0].real == -0.15 and s.M[1, 1].real == -0.005
    assert s.D[0, 0] == 0.3
