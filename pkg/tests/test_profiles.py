import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sp_integrate

from relchannel.geometry import Event
from relchannel.profiles import (
    DetectorSpec,
    ProfileKind,
    build_test_function,
    evaluate,
    fourier_transform,
    shape_for,
)

GAUSS = ProfileKind.TRUNCATED_GAUSSIAN
BUMP = ProfileKind.SMOOTH_BUMP

# Frozen oracles.  Bump values from mpmath at 30 digits; the Gaussian from a
# 64^4-node tensor Gauss-Legendre sum over the truncated 4-box.
BUMP_CHI_0 = 1.20690032243787617533623799633
BUMP_RAD_0 = 1.19900390701921390337984738580
BUMP_CHI_3 = 0.53795621797988463232685851459
BUMP_CHI_40 = 3.49964138961119991183779158142e-4
BUMP_RAD_5 = 0.209518160446542694196982810352
GAUSS_FHAT_00_DIRECT = 2.2992230412776014  # lambda=1.3, tau=0.7, sigma=0.4


def spec(kind=GAUSS, **kw):
    base = dict(label="A", position=(0.2, -0.1, 0.4), switch_center=0.3, switch_timescale=0.7,
                coupling=1.3, spatial_width=0.4, profile_kind=kind)
    base.update(kw)
    return DetectorSpec(**base)


@pytest.mark.parametrize("field, value", [
    ("switch_timescale", 0.0), ("switch_timescale", -1.0), ("spatial_width", 0.0),
    ("coupling", -0.1), ("switch_center", math.inf),
])
def test_spec_validation_names_field(field, value):
    with pytest.raises(ValueError, match=field):
        spec(**{field: value})


def test_label_must_be_a_or_b():
    with pytest.raises(ValueError):
        spec(label="C")


@pytest.mark.parametrize("kind", [GAUSS, BUMP])
def test_zero_coupling_is_zero_function(kind):
    f = build_test_function(spec(kind, coupling=0.0))
    assert evaluate(f, Event(0.3, (0.2, -0.1, 0.4))) == 0.0
    assert fourier_transform(f, 1.0, [0.5, 0.0, 0.2]) == 0


@pytest.mark.parametrize("kind", [GAUSS, BUMP])
def test_peak_value_is_coupling(kind):
    f = build_test_function(spec(kind))
    assert evaluate(f, Event(0.3, (0.2, -0.1, 0.4))) == pytest.approx(1.3, rel=1e-15)


def test_bump_is_zero_on_and_outside_boundary():
    f = build_test_function(spec(BUMP))
    assert evaluate(f, Event(0.3 + 0.7, (0.2, -0.1, 0.4))) == 0.0
    assert evaluate(f, Event(0.3, (0.6, -0.1, 0.4))) == 0.0
    assert evaluate(f, Event(5.0, (0.0, 0.0, 0.0))) == 0.0


def test_gaussian_negligible_at_support_edge():
    f = build_test_function(spec(GAUSS))
    edge = Event(0.3 + f.temporal_halfwidth * (1 - 1e-12), (0.2, -0.1, 0.4))
    assert evaluate(f, edge) <= 1e-13 * f.coupling
    assert evaluate(f, Event(0.3 + 1.01 * f.temporal_halfwidth, (0.2, -0.1, 0.4))) == 0.0


def test_support_window():
    g = build_test_function(spec(GAUSS))
    b = build_test_function(spec(BUMP))
    assert (g.temporal_halfwidth, g.radius) == pytest.approx((8 * 0.7, 8 * 0.4))
    assert (b.temporal_halfwidth, b.radius) == pytest.approx((0.7, 0.4))


@settings(max_examples=50)
@given(t=st.floats(-3, 3), x=st.floats(-1, 1), y=st.floats(-1, 1), z=st.floats(-1, 1),
       kind=st.sampled_from([GAUSS, BUMP]))
def test_factorisation_and_spherical_symmetry(t, x, y, z, kind):
    f = build_test_function(spec(kind))
    rel = np.array([x, y, z])
    rho = np.linalg.norm(rel)
    p = f.position + rel
    expected = f.coupling * f.temporal(t) * f.radial(rho)
    assert evaluate(f, Event(t, p)) == pytest.approx(expected, rel=1e-14, abs=1e-300)
    rotated = f.position + np.array([rho, 0.0, 0.0])
    assert evaluate(f, Event(t, rotated)) == pytest.approx(expected, rel=1e-12, abs=1e-300)


@settings(max_examples=30)
@given(alpha=st.floats(0, 10), k0=st.floats(-5, 5), kx=st.floats(-5, 5), kind=st.sampled_from([GAUSS, BUMP]))
def test_coupling_scales_everything(alpha, k0, kx, kind):
    f = build_test_function(spec(kind))
    g = build_test_function(spec(kind, coupling=1.3 * alpha))
    e = Event(0.5, (0.3, 0.0, 0.3))
    assert evaluate(g, e) == pytest.approx(alpha * evaluate(f, e), rel=1e-13, abs=1e-300)
    k = [kx, 0.5, -0.2]
    assert fourier_transform(g, k0, k) == pytest.approx(alpha * fourier_transform(f, k0, k), rel=1e-13, abs=1e-300)


@pytest.mark.parametrize("kind", [GAUSS, BUMP])
def test_reality_symmetry(kind):
    f = build_test_function(spec(kind))
    rng = np.random.default_rng(5)
    for _ in range(10):
        k0, k = rng.normal() * 4, rng.normal(size=3) * 4
        assert fourier_transform(f, -k0, -k) == pytest.approx(np.conj(fourier_transform(f, k0, k)), rel=1e-13)


def test_gaussian_fhat_at_origin_matches_direct_quadrature():
    f = build_test_function(spec(GAUSS))
    assert fourier_transform(f, 0.0, [0, 0, 0]).real == pytest.approx(GAUSS_FHAT_00_DIRECT, rel=1e-12)


def test_bump_shape_transforms_against_mpmath():
    s = shape_for(BUMP)
    assert s.temporal_transform(0.0) == pytest.approx(BUMP_CHI_0, rel=1e-14)
    assert s.radial_transform(0.0) == pytest.approx(BUMP_RAD_0, rel=1e-14)
    assert s.temporal_transform(3.0) == pytest.approx(BUMP_CHI_3, rel=1e-13)
    assert s.temporal_transform(40.0) == pytest.approx(BUMP_CHI_40, rel=1e-9)
    assert s.radial_transform(5.0) == pytest.approx(BUMP_RAD_5, rel=1e-13)


def _direct_transform(f, k0, kmag):
    # Independent reference: scipy.quad on the temporal and radial factors.
    w = lambda t: f.temporal(t)
    ht = f.temporal_halfwidth
    re = sp_integrate.quad(lambda t: w(t) * math.cos(k0 * t), f.t0 - ht, f.t0 + ht, limit=400, epsabs=1e-14)[0]
    im = sp_integrate.quad(lambda t: w(t) * math.sin(k0 * t), f.t0 - ht, f.t0 + ht, limit=400, epsabs=1e-14)[0]
    rad = 4 * math.pi * sp_integrate.quad(
        lambda r: r * r * f.radial(r) * np.sinc(kmag * r / math.pi), 0, f.radius, limit=400, epsabs=1e-14)[0]
    return f.coupling * complex(re, im) * rad


@pytest.mark.parametrize("kind", [GAUSS, BUMP])
def test_transform_matches_direct_quadrature_on_grid(kind):
    f = build_test_function(spec(kind, position=(0.0, 0.0, 0.0)))
    scale = abs(fourier_transform(f, 0.0, [0, 0, 0]))
    for k0 in (0.0, 1.5, 6.0):
        for kmag in (0.0, 2.0, 9.0):
            got = fourier_transform(f, k0, [0.0, 0.0, kmag])
            assert abs(got - _direct_transform(f, k0, kmag)) <= 1e-6 * scale


def test_shell_moment_antiderivative_is_odd_and_integrates_shell_moment():
    for kind in (GAUSS, BUMP):
        f = build_test_function(spec(kind))
        for s in (0.1, 0.35, 0.9, 3.0):
            ref = sp_integrate.quad(lambda u: float(f.shell_moment(u)), 0, s, limit=200, epsabs=1e-15)[0]
            assert float(f.shell_moment_antiderivative(s)) == pytest.approx(ref, rel=1e-10, abs=1e-15)
            assert f.shell_moment_antiderivative(-s) == -f.shell_moment_antiderivative(s)


def test_test_function_is_immutable():
    f = build_test_function(spec())
    with pytest.raises(AttributeError):
        f.normalization = "other"
