import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import spectral_solution
from timebin_sim.analysis import decompose_bins
from timebin_sim.errors import (
    InvalidParameterError,
    StepTooCoarseError,
    UnequalVelocitiesError,
    WindowOverflowError,
)
from timebin_sim.params import derive, paper_rb85
from timebin_sim.propagation import (
    COMOVING,
    InputPulse,
    TimeGrid,
    default_steps,
    intensity,
    relative_l2,
    solve_analytic,
    solve_closed_form,
    solve_numeric,
)

T = 2e-9


def equal_velocity(beta_length, v=1e4):
    d = derive(replace(paper_rb85(), v1=v, v2=v))
    return replace(d, beta=beta_length / d.length)


def setup(derived, **pulse_kw):
    pulse = InputPulse.gaussian(T, **pulse_kw)
    return pulse, TimeGrid.for_pulse(derived, pulse)


def test_decoupled_limit_is_pure_advection(preset_derived):
    d = replace(preset_derived, beta=0.0)
    pulse, grid = setup(d)
    out = solve_numeric(d, pulse, grid).output
    np.testing.assert_allclose(out.e1, pulse(out.times - d.length / d.v1), atol=1e-12)
    assert np.abs(out.e2).max() == 0.0


def test_complete_conversion():
    d = equal_velocity(math.pi / 2)
    pulse, grid = setup(d)
    out = solve_numeric(d, pulse, grid).output
    assert np.abs(out.e1).max() < 1e-3
    np.testing.assert_allclose(np.abs(out.e2), np.abs(pulse(out.times - d.length / d.v1)), atol=1e-3)


def test_preset_splits_and_advances(preset_run, preset_derived, preset_pulse, preset_grid):
    ref = solve_numeric(replace(preset_derived, beta=0.0), preset_pulse, preset_grid).output
    bins = decompose_bins(preset_run.output)
    t_ref = ref.times[np.argmax(np.abs(ref.e1))]
    assert bins.n_peaks >= 2
    assert min(bins.peak_times) < t_ref
    assert 0 < bins.entropy < 1
    # reference peak sits at the slow-field transit time
    assert t_ref == pytest.approx(preset_derived.length / preset_derived.v1, abs=preset_grid.dt)


def test_numeric_matches_spectral_oracle(preset_derived, preset_pulse, preset_grid):
    e1, e2 = spectral_solution(preset_derived, preset_pulse, preset_grid.times, preset_derived.length)
    fine = solve_numeric(preset_derived, preset_pulse, preset_grid, n_z=1600).output
    err = np.sqrt(np.sum(np.abs(fine.e1 - e1) ** 2 + np.abs(fine.e2 - e2) ** 2) / np.sum(np.abs(e1) ** 2 + np.abs(e2) ** 2))
    assert err < 1e-5


def test_analytic_matches_spectral_oracle(preset_derived, preset_pulse, preset_grid):
    z = 0.7 * preset_derived.length
    e1, e2 = spectral_solution(preset_derived, preset_pulse, preset_grid.times, z)
    a = solve_analytic(preset_derived, preset_pulse, preset_grid, z)
    err = np.sqrt(np.sum(np.abs(a.e1 - e1) ** 2 + np.abs(a.e2 - e2) ** 2) / np.sum(np.abs(e1) ** 2 + np.abs(e2) ** 2))
    assert err < 1e-7


def test_analytic_second_channel(preset_derived, preset_grid):
    pulse = InputPulse.gaussian(T, channel=2)
    z = preset_derived.length
    e1, e2 = spectral_solution(preset_derived, pulse, preset_grid.times, z)
    a = solve_analytic(preset_derived, pulse, preset_grid, z)
    np.testing.assert_allclose(a.e1, e1, atol=1e-7)
    np.testing.assert_allclose(a.e2, e2, atol=1e-7)


def test_analytic_at_entrance_is_input(preset_derived, preset_pulse, preset_grid):
    a = solve_analytic(preset_derived, preset_pulse, preset_grid, 0.0)
    np.testing.assert_array_equal(a.e1, preset_pulse(preset_grid.times))
    assert not a.e2.any()


def test_analytic_zero_coupling_is_advection(preset_derived, preset_pulse, preset_grid):
    d = replace(preset_derived, beta=0.0)
    a = solve_analytic(d, preset_pulse, preset_grid, d.length)
    np.testing.assert_array_equal(a.e1, preset_pulse(a.times - d.length / d.v1))


def test_analytic_rejects_outside_medium(preset_derived, preset_pulse, preset_grid):
    with pytest.raises(InvalidParameterError):
        solve_analytic(preset_derived, preset_pulse, preset_grid, 2 * preset_derived.length)


@pytest.mark.parametrize("beta_z,expect", [(0.0, (1.0, 0.0)), (math.pi, (-1.0, 0.0)), (math.pi / 4, (0.5**0.5, 0.5**0.5))])
def test_closed_form_rotation(beta_z, expect):
    d = equal_velocity(beta_z)
    pulse, grid = setup(d)
    s = solve_closed_form(d, pulse, grid, d.length)
    base = pulse(grid.times)
    np.testing.assert_allclose(s.e1, expect[0] * base, atol=1e-15)
    np.testing.assert_allclose(np.abs(s.e2), expect[1] * np.abs(base), atol=1e-15)
    np.testing.assert_allclose(s.times, grid.times + d.length / d.v1)


def test_closed_form_requires_equal_velocities(preset_derived, preset_pulse, preset_grid):
    with pytest.raises(UnequalVelocitiesError):
        solve_closed_form(preset_derived, preset_pulse, preset_grid, preset_derived.length)


@pytest.mark.parametrize("beta_length", [0.0, math.pi / 4, math.pi / 2, math.pi, 3.4])
def test_oracle_triangle_equal_velocities(beta_length):
    d = equal_velocity(beta_length)
    pulse, grid = setup(d)
    closed = solve_closed_form(d, pulse, grid, d.length)
    numeric = solve_numeric(d, pulse, grid).output
    analytic = solve_analytic(d, pulse, grid, d.length)
    assert relative_l2(numeric, closed) < 1e-3
    assert relative_l2(analytic, closed) < 1e-3
    assert relative_l2(numeric, analytic) < 1e-3


def test_exact_coupling_step_is_exact_for_equal_velocities():
    d = equal_velocity(3.4)
    pulse, grid = setup(d)
    closed = solve_closed_form(d, pulse, grid, d.length)
    numeric = solve_numeric(d, pulse, grid, n_z=7, coupling="exact").output
    assert relative_l2(numeric, closed) < 1e-13


def test_second_order_convergence():
    d = equal_velocity(3.4)
    pulse, grid = setup(d)
    closed = solve_closed_form(d, pulse, grid, d.length)
    errors = [relative_l2(solve_numeric(d, pulse, grid, n_z=100 * 2**k).output, closed) for k in range(4)]
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    np.testing.assert_allclose(orders, 2.0, atol=0.05)


def test_flux_conserved(preset_run):
    assert len(preset_run.states) == 5
    assert preset_run.flux_drift() < 1e-10


def test_intensity_matches_flux(preset_run):
    for state, flux in zip(preset_run.states, preset_run.flux):
        i1, i2 = intensity(state)
        assert (i1.sum() + i2.sum()) * state.dt == pytest.approx(flux, rel=1e-14)


def test_intensity_of_input_peaks_at_one(preset_run):
    i1, i2 = intensity(preset_run.states[0])
    assert i1.max() == pytest.approx(1.0, abs=1e-6)
    assert not i2.any()


def test_snapshots_available(preset_run, preset_derived):
    assert preset_run.at(preset_derived.length / 2).z == pytest.approx(preset_derived.length / 2)
    assert preset_run.states[0].z == 0.0 and preset_run.output.z == preset_derived.length


def test_linearity(preset_derived, preset_grid):
    rng = np.random.default_rng(3)
    t = np.linspace(-5 * T, 5 * T, 801)
    f = InputPulse.sampled(t, np.exp(-2 * (t / T) ** 2) * (1 + 0.3j * t / T))
    g = InputPulse.sampled(t, np.exp(-2 * ((t - 1e-9) / (1.5 * T)) ** 2))
    a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
    mix = InputPulse.sampled(t, a * f.samples + b * g.samples)
    run = lambda p: solve_numeric(preset_derived, p, preset_grid, n_z=200).output
    sf, sg, sm = run(f), run(g), run(mix)
    np.testing.assert_allclose(sm.e1, a * sf.e1 + b * sg.e1, atol=1e-10)
    np.testing.assert_allclose(sm.e2, a * sf.e2 + b * sg.e2, atol=1e-10)


def test_step_too_coarse(preset_derived, preset_pulse, preset_grid):
    with pytest.raises(StepTooCoarseError):
        solve_numeric(preset_derived, preset_pulse, preset_grid, n_z=5)


def test_window_too_small(preset_derived, preset_pulse):
    with pytest.raises(WindowOverflowError):
        solve_numeric(preset_derived, preset_pulse, TimeGrid(-5 * T, 5 * T, 1024))


def test_heavy_tail_reaches_edge(preset_derived):
    t = np.linspace(-10 * T, 10 * T, 512)
    pulse = InputPulse.sampled(t, 1 / (1 + (t / T) ** 2))
    grid = TimeGrid(t[0], t[-1] + preset_derived.walkoff_time, 2048)
    with pytest.raises(WindowOverflowError, match="edge"):
        solve_numeric(preset_derived, pulse, grid)


def test_default_steps(preset_derived):
    assert default_steps(preset_derived) == 200
    d = replace(preset_derived, beta=50 / preset_derived.length)
    assert default_steps(d) == 1000


def test_comoving_frame_keeps_retarded_times(preset_derived, preset_pulse):
    grid = TimeGrid.for_pulse(preset_derived, preset_pulse, frame=COMOVING)
    out = solve_numeric(preset_derived, preset_pulse, grid).output
    np.testing.assert_array_equal(out.times, grid.times)


def test_deterministic(preset_derived, preset_pulse, preset_grid):
    a = solve_numeric(preset_derived, preset_pulse, preset_grid).output
    b = solve_numeric(preset_derived, preset_pulse, preset_grid).output
    assert np.array_equal(a.e1, b.e1) and np.array_equal(a.e2, b.e2)


def test_larger_velocity_ratio_does_not_shrink_separation():
    seps = []
    for ratio in (2, 3, 4, 5):
        d = derive(replace(paper_rb85(), v1=1e4 / ratio, v2=1e4))
        d = replace(d, beta=3.44 / d.length)
        pulse, grid = setup(d)
        seps.append(decompose_bins(solve_numeric(d, pulse, grid).output).separation)
    assert all(b >= a for a, b in zip(seps, seps[1:]))


@settings(max_examples=15, deadline=None)
@given(v1=st.floats(min_value=2e3, max_value=2e4), v2=st.floats(min_value=2e3, max_value=2e4),
       beta_length=st.floats(min_value=0.0, max_value=4.0), channel=st.sampled_from([1, 2]))
def test_flux_conserved_random(v1, v2, beta_length, channel):
    d = derive(replace(paper_rb85(), v1=v1, v2=v2))
    d = replace(d, beta=beta_length / d.length)
    pulse, grid = setup(d, channel=channel)
    grid = replace(grid, n_t=1024)
    assert solve_numeric(d, pulse, grid, n_z=100).flux_drift() < 1e-10
