import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slicelab import (IntegrationConfig, SpecError, body_from_spec, contains_point, gauge, make_cross_polytope,
                      make_cube, make_custom, make_ellipsoid, make_lq_ball, radial, volume)
from slicelab.bodies import UnboundedBodyError, lq_volume, unit_ball_volume


def test_gauge_closed_forms():
    x = np.array([0.3, -0.4])
    assert gauge(make_cube(2, 2.0), x) == pytest.approx(0.2)
    assert gauge(make_cross_polytope(2), x) == pytest.approx(0.7)
    assert gauge(make_lq_ball(2, 2.0), x) == pytest.approx(0.5)
    assert gauge(make_lq_ball(2, 3.0), x) == pytest.approx((0.3**3 + 0.4**3) ** (1 / 3))
    assert gauge(make_ellipsoid([1.0, 2.0]), x) == pytest.approx(math.hypot(0.3, 0.2))


def test_gauge_vectorized_shape():
    pts = np.zeros((4, 5, 3))
    assert make_cube(3).gauge(pts).shape == (4, 5)


def test_radial_is_reciprocal_gauge():
    th = np.array([1.0, 1.0]) / math.sqrt(2)
    assert radial(make_cube(2), th) == pytest.approx(math.sqrt(2))
    with pytest.raises(ValueError):
        radial(make_cube(2), np.array([1.0, 1.0]))


def test_contains_point_boundary_and_tol():
    cube = make_cube(2)
    assert contains_point(cube, [1.0, 0.5])
    assert not contains_point(cube, [1.0 + 1e-6, 0.0])
    assert contains_point(cube, [1.0 + 1e-6, 0.0], tol=1e-5)
    with pytest.raises(ValueError):
        contains_point(cube, [0.0, 0.0], tol=-1.0)


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        make_cube(3).gauge([1.0, 2.0])


def test_lq_volume_closed_forms():
    assert lq_volume(2, 2.0) == pytest.approx(math.pi)
    assert lq_volume(3, 1.0) == pytest.approx(8 / 6)
    assert lq_volume(4, math.inf, 0.5) == pytest.approx(1.0)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)


@pytest.mark.parametrize("q", [1.0, 2.0, 4.0, math.inf])
@pytest.mark.parametrize("n", [2, 3, 5])
def test_polar_volume_matches_closed_form(q, n, cfg):
    est = volume(make_lq_ball(n, q), cfg)
    assert est.value == pytest.approx(lq_volume(n, q), rel=5e-3)
    assert est.exact == pytest.approx(lq_volume(n, q))


def test_ellipsoid_volume_with_rotation(cfg):
    c, s = math.cos(0.4), math.sin(0.4)
    body = make_ellipsoid([0.5, 2.0], [[c, -s], [s, c]])
    assert volume(body, cfg).value == pytest.approx(math.pi, rel=2e-3)


def test_custom_body_volume_and_checks(cfg):
    body = make_custom(2, lambda x: np.abs(x[..., 0]) + 2 * np.abs(x[..., 1]), 1.0, convex=True)
    assert volume(body, cfg).value == pytest.approx(1.0, rel=2e-3)
    with pytest.warns(RuntimeWarning):
        make_custom(2, lambda x: np.sum(x * x, axis=-1), 1.0)
    with pytest.warns(RuntimeWarning):
        slab = make_custom(2, lambda x: np.abs(x[..., 0]), 10.0)
    with pytest.raises(UnboundedBodyError):
        slab.radial(np.array([0.0, 1.0]))


def test_constructor_errors():
    with pytest.raises(ValueError):
        make_cube(0)
    with pytest.raises(ValueError):
        make_cube(2, -1.0)
    with pytest.raises(ValueError):
        make_lq_ball(2, 0.0)
    with pytest.raises(ValueError):
        make_ellipsoid([1.0, 2.0], [[1.0, 1.0], [0.0, 1.0]])


def test_lq_two_and_inf_are_ball_and_cube():
    z = np.random.default_rng(0).standard_normal((10, 3))
    np.testing.assert_allclose(make_lq_ball(3, 2.0).gauge(z), np.linalg.norm(z, axis=1))
    np.testing.assert_allclose(make_lq_ball(3, math.inf).gauge(z), np.abs(z).max(axis=1))


@pytest.mark.parametrize("spec", [
    {"type": "cube", "n": 3, "half_side": 0.5},
    {"type": "lq_ball", "n": 2, "q": 3.0, "scale": 1.5},
    {"type": "lq_ball", "n": 2, "q": "inf", "scale": 1.0},
    {"type": "cross_polytope", "n": 4, "scale": 2.0},
    {"type": "ellipsoid", "axes": [1.0, 2.0, 3.0]},
    {"type": "cube", "n": 2, "half_side": 1.0, "dilation": 2.0},
])
def test_spec_round_trip(spec):
    body = body_from_spec(spec)
    again = body_from_spec(body.to_spec())
    z = np.random.default_rng(1).standard_normal((8, body.dim))
    np.testing.assert_allclose(body.gauge(z), again.gauge(z))


@pytest.mark.parametrize("spec, field", [
    ({"type": "sphere", "n": 2}, "body.type"),
    ({"type": "cube"}, "missing"),
    ({"type": "cube", "n": 2, "side": 1}, "unknown"),
    ({"type": "cube", "n": 2, "half_side": -1}, "body"),
])
def test_spec_errors_name_the_field(spec, field):
    with pytest.raises(SpecError, match=field):
        body_from_spec(spec)


def test_scaled_body():
    body = make_cross_polytope(3).scaled(2.0)
    assert body.gauge([2.0, 0.0, 0.0]) == pytest.approx(1.0)
    assert body.exact_volume == pytest.approx(8 * 8 / 6)
    assert body.to_spec()["dilation"] == 2.0


@settings(max_examples=40, deadline=None)
@given(lam=st.floats(0.01, 100.0), seed=st.integers(0, 1000), which=st.integers(0, 4))
def test_gauge_is_positively_homogeneous_and_even(lam, seed, which):
    body = [make_cube(3), make_cross_polytope(3), make_lq_ball(3, 3.0), make_lq_ball(3, 0.5),
            make_ellipsoid([0.5, 1.0, 2.0])][which]
    x = np.random.default_rng(seed).standard_normal(3)
    assert body.gauge(lam * x) == pytest.approx(lam * body.gauge(x), rel=1e-12)
    assert body.gauge(-x) == pytest.approx(body.gauge(x), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 1000), which=st.integers(0, 3))
def test_convex_gauges_satisfy_triangle_inequality(seed, which):
    body = [make_cube(4), make_cross_polytope(4), make_lq_ball(4, 3.0), make_ellipsoid([0.5, 1, 2, 3])][which]
    x, y = np.random.default_rng(seed).standard_normal((2, 4))
    assert body.gauge(x + y) <= body.gauge(x) + body.gauge(y) + 1e-12


def test_volume_is_deterministic():
    cfg = IntegrationConfig(sphere_samples=4096, seed=11)
    body = make_lq_ball(3, 3.0)
    assert volume(body, cfg).value == volume(body, cfg).value


def test_support_points_lie_on_boundary():
    xi = np.array([0.6, 0.8, 0.0])
    for body in (make_cube(3), make_cross_polytope(3), make_lq_ball(3, 3.0), make_ellipsoid([1, 2, 3])):
        assert body.gauge(body.support_point(xi)) == pytest.approx(1.0)


def test_quasi_ball_is_not_convex():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        body = make_lq_ball(2, 0.5)
    assert not body.convex
