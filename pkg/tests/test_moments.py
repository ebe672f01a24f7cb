import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slicelab import (IntegrationConfig, euclidean_witness, gamma_ratio, lp_ball_witness, make_cube, make_density,
                      make_ellipsoid, make_lq_ball, min_moment, moment, moment_ratio)
from slicelab.bodies import unit_ball_volume

# frozen from tests/oracles/compute_oracles.py (scipy.integrate, independent of slicelab)
MOMENT_L3_DISK_P2_E1 = 1.0000000000000002
MOMENT_ELLIPSE_12_P3_DIAG = 4.216370213557839
MOMENT_CUBE3_RADIAL1_P2 = 2.937055225043759

ONE = make_density({"type": "constant"})


def test_disk_first_moment(cfg):
    assert moment(make_lq_ball(2, 2.0), ONE, 1.0, [1.0, 0.0], cfg).value == pytest.approx(4 / 3, rel=1e-3)


@pytest.mark.parametrize("p", [1.0, 2.0, 5.0])
@pytest.mark.parametrize("n", [2, 3, 4])
def test_half_cube_axis_moment(n, p, cfg):
    xi = np.eye(n)[0]
    assert moment(make_cube(n, 0.5), ONE, p, xi, cfg).value == pytest.approx(2.0**-p / (p + 1), rel=1e-3)


def test_l3_disk_second_moment(cfg):
    assert moment(make_lq_ball(2, 3.0), ONE, 2.0, [1.0, 0.0], cfg).value == pytest.approx(MOMENT_L3_DISK_P2_E1,
                                                                                           rel=1e-3)


def test_ellipse_third_moment_diagonal(cfg):
    xi = np.array([1.0, 1.0]) / math.sqrt(2)
    got = moment(make_ellipsoid([1.0, 2.0]), ONE, 3.0, xi, cfg).value
    assert got == pytest.approx(MOMENT_ELLIPSE_12_P3_DIAG, rel=1e-3)


def test_cube_radial_density_moment(cfg):
    xi = np.array([1.0, 2.0, 2.0]) / 3.0
    f = make_density({"type": "radial_power", "alpha": 1.0})
    assert moment(make_cube(3), f, 2.0, xi, cfg).value == pytest.approx(MOMENT_CUBE3_RADIAL1_P2, rel=1e-3)


def test_moment_rejects_bad_inputs(cfg):
    with pytest.raises(ValueError):
        moment(make_cube(2), ONE, 0.0, [1.0, 0.0], cfg)
    with pytest.raises(ValueError):
        moment(make_cube(2), ONE, 1.0, [1.0, 1.0], cfg)


def test_min_moment_finds_short_axis(cfg):
    body = make_ellipsoid([1.0, 0.5, 2.0])
    res = min_moment(body, ONE, 2.0, cfg)
    assert abs(res.direction[1]) == pytest.approx(1.0, abs=1e-3)
    exact = unit_ball_volume(3) * 1.0 * 0.5 * 2.0 * 0.25 / 5
    assert res.value.value == pytest.approx(exact, rel=1e-3)
    assert res.start_values


def test_min_moment_is_deterministic(cfg):
    body = make_lq_ball(3, 3.0)
    a = min_moment(body, ONE, 1.0, cfg)
    b = min_moment(body, ONE, 1.0, cfg)
    assert np.array_equal(a.direction, b.direction)
    assert a.value.value == b.value.value


def test_min_moment_zero_density(cfg):
    with pytest.raises(ValueError):
        min_moment(make_cube(2), make_density({"type": "constant", "c": 0.0}), 1.0, cfg)


def test_gamma_ratio_ball_closed_form(cfg):
    n, p = 3, 2.0
    vol = unit_ball_volume(n)
    exact = (1.0 / ((n + 2) * vol ** (p / n))) ** (1 / p)
    assert gamma_ratio(make_lq_ball(n, 2.0), ONE, p, cfg) == pytest.approx(exact, rel=1e-3)


def test_moment_ratio_ball_with_euclidean_witness(cfg):
    n, p = 3, 2.0
    rep = moment_ratio(make_lq_ball(n, 2.0), ONE, p, [euclidean_witness(n, p), lp_ball_witness(n, p)], cfg)
    exact = math.sqrt(1.0 / (n + 2)) / (math.sqrt(p) * unit_ball_volume(n) ** (1 / n))
    assert rep.ratio == pytest.approx(exact, rel=1e-3)
    assert rep.best_witness.startswith("euclidean")
    assert rep.scaling == pytest.approx(1.0, abs=1e-6)


def test_moment_ratio_witness_exponent_checked(cfg):
    with pytest.raises(ValueError):
        moment_ratio(make_cube(2), ONE, 2.0, [euclidean_witness(2, 3.0)], cfg)
    with pytest.raises(ValueError):
        moment_ratio(make_cube(2), ONE, 2.0, [], cfg)


@settings(max_examples=10, deadline=None)
@given(lam=st.floats(0.3, 3.0), p=st.sampled_from([1.0, 2.0, 3.0]))
def test_moment_scaling_law(lam, p):
    # M_{lam K}(xi) = lam^{n+p} M_K(xi) for the constant density
    cfg = IntegrationConfig(sphere_samples=4096, seed=1)
    body = make_lq_ball(3, 3.0)
    xi = np.array([0.6, 0.0, 0.8])
    base = moment(body, ONE, p, xi, cfg).value
    big = moment(body.scaled(lam), ONE, p, xi, cfg).value
    assert big == pytest.approx(lam ** (3 + p) * base, rel=1e-9)
