import math
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from timebin_sim.errors import InvalidParameterError
from timebin_sim.params import C_LIGHT, FAIL, PASS, WARN, PhysicalParams, derive, paper_rb85, validate

GAMMA = 2 * math.pi * 3e6


def test_optical_depth_close_to_quoted(preset_derived):
    assert preset_derived.alpha == pytest.approx(15.279, rel=1e-4)
    assert abs(preset_derived.alpha - 16) / 16 < 0.10


def test_coupling_from_velocities(preset_derived):
    beta = 10 * GAMMA / math.sqrt(3e3 * 1e4)
    assert preset_derived.beta == pytest.approx(beta, rel=1e-12)
    assert preset_derived.beta == pytest.approx(3.441e4, rel=1e-3)
    assert preset_derived.beta_length == pytest.approx(3.44, abs=0.01)


def test_absorption_and_bandwidth(preset_derived):
    assert preset_derived.k2 * preset_derived.length == pytest.approx(0.1885, rel=1e-3)
    # fast field fine, slow field well above the quoted 0.2
    assert preset_derived.k1 * preset_derived.length == pytest.approx(0.628, rel=1e-3)
    assert preset_derived.eit_width * 2e-9 == pytest.approx(0.9645, rel=1e-3)


def test_walkoff(preset_derived):
    assert preset_derived.walkoff_time == pytest.approx(23.333e-9, rel=1e-4)


def test_velocity_round_trip(preset_params):
    as_couplings = preset_params.with_couplings()
    for i in (1, 2):
        v = preset_params.group_velocity(i)
        back = C_LIGHT * preset_params.omega**2 / as_couplings.coupling(i)
        assert back == pytest.approx(v, rel=1e-12)
    a, b = derive(preset_params), derive(as_couplings)
    assert b.beta == pytest.approx(a.beta, rel=1e-12)
    assert b.k1 == pytest.approx(a.k1, rel=1e-12)


@pytest.mark.parametrize("field,value", [("gamma", 0.0), ("omega", -1.0), ("length", float("nan")), ("density", 0)])
def test_rejects_non_positive(field, value):
    with pytest.raises(InvalidParameterError):
        replace(paper_rb85(), **{field: value})


def test_requires_exactly_one_representation():
    p = paper_rb85()
    with pytest.raises(InvalidParameterError):
        replace(p, coupling_1=1e20)
    with pytest.raises(InvalidParameterError):
        replace(p, v2=None)


def test_rejects_superluminal():
    with pytest.raises(InvalidParameterError):
        replace(paper_rb85(), v1=C_LIGHT)


positive = st.floats(min_value=1e-3, max_value=1e3)


@settings(max_examples=60)
@given(scale=st.floats(min_value=0.2, max_value=5.0), g1=positive, g2=positive, omega=positive)
def test_drive_scaling(scale, g1, g2, omega):
    base = PhysicalParams(gamma=GAMMA, omega=omega * GAMMA, density=1e18, length=1e-4,
                          wavelength=8e-7, pulse_duration=2e-9,
                          coupling_1=g1 * 1e24, coupling_2=g2 * 1e24)
    try:
        scaled = replace(base, omega=base.omega * scale)
        d0, d1 = derive(base), derive(scaled)
    except InvalidParameterError:
        return  # velocity reached c
    assert d1.beta == pytest.approx(d0.beta / scale, rel=1e-12)
    assert d1.v1 == pytest.approx(d0.v1 * scale**2, rel=1e-12)
    assert d1.k2 == pytest.approx(d0.k2 / scale**2, rel=1e-12)
    assert d1.alpha == d0.alpha


@settings(max_examples=60)
@given(v1=st.floats(min_value=1.0, max_value=1e7), v2=st.floats(min_value=1.0, max_value=1e7), omega=positive)
def test_identities(v1, v2, omega):
    d = derive(replace(paper_rb85(), v1=v1, v2=v2, omega=omega * GAMMA))
    assert d.k1 * d.v1 == pytest.approx(GAMMA, rel=1e-12)
    assert d.k2 * d.v2 == pytest.approx(GAMMA, rel=1e-12)
    assert d.beta == pytest.approx(omega * GAMMA / math.sqrt(v1 * v2), rel=1e-12)
    assert min(d.beta, d.k1, d.k2, d.alpha, d.eit_width) > 0


def test_validate_preset(preset_params, preset_derived):
    report = validate(preset_derived, preset_params, strictness=3)
    assert len(report.checks) == 8
    a = report.by_name("omega_vs_alpha")
    assert a.status == PASS and a.ratio == pytest.approx(6.545, rel=1e-3)
    b1 = report.by_name("pulse_fits_window_i1")
    assert b1.lhs == pytest.approx(0.06) and b1.rhs == pytest.approx(0.2558, rel=1e-3)
    assert b1.status == FAIL
    assert report.by_name("absorption_small_i1").status == WARN
    assert report.by_name("absorption_small_i2").status == PASS
    assert report.by_name("eit_bandwidth").status == FAIL
    assert report.overall == FAIL


def test_light_speed_pulse_too_long():
    p = paper_rb85()
    fast = replace(p, v1=0.999999 * C_LIGHT, v2=0.999999 * C_LIGHT)
    report = validate(derive(fast), fast)
    assert report.by_name("pulse_shorter_than_medium_i1").status == FAIL
    assert report.by_name("pulse_shorter_than_medium_i2").status == FAIL


_RANK = {PASS: 0, WARN: 1, FAIL: 2}


@settings(max_examples=40)
@given(s1=st.floats(min_value=0.5, max_value=20), s2=st.floats(min_value=0.5, max_value=20),
       omega=st.floats(min_value=1, max_value=100))
def test_strictness_monotone(s1, s2, omega):
    lo, hi = sorted((s1, s2))
    p = replace(paper_rb85(), omega=omega * GAMMA)
    d = derive(p)
    weak, strong = validate(d, p, lo), validate(d, p, hi)
    for a, b in zip(weak.checks, strong.checks):
        assert _RANK[b.status] >= _RANK[a.status]
        if a.status == FAIL:
            assert b.status == FAIL
