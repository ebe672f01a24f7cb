import math

import numpy as np
import pytest
from scipy import special

from slicelab import (IntegrationConfig, SpecError, body_integrate, make_cross_polytope, make_cube, make_density,
                      make_ellipsoid, make_lq_ball, profile_g, section_integrate, sphere_area, sphere_integrate,
                      spherical_constant)
from slicelab.quad import (DegenerateDensityError, clear_caches, config_from_spec, orthonormal_complement,
                           sphere_rule)

# frozen from tests/oracles/compute_oracles.py (scipy.integrate, independent of slicelab)
GAUSS_MASS_L3_DISK = 2.6988272604337644
GAUSS_SECTION_L3_BALL3_S03 = 2.545180597856863
SECTION_CROSS3_DIAG_S02 = 1.3010764773832475


def test_sphere_area():
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert sphere_area(1) == pytest.approx(2.0)


def test_spherical_constant_p2_closed_form():
    # int (x, theta)^2 dtheta = |x|^2 s_{n-1} / n
    for n in range(1, 8):
        assert spherical_constant(n, 2.0) == pytest.approx(n / sphere_area(n))


def test_spherical_constant_large_arguments_finite():
    c = spherical_constant(200, 50.0)
    assert math.isfinite(c) and c > 0
    with pytest.raises(ValueError):
        spherical_constant(3, 0.0)


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("p", [1.0, 2.0, 3.5])
def test_spherical_identity(n, p):
    cfg = IntegrationConfig(sphere_samples=2**16, seed=5)
    x = np.random.default_rng(n).standard_normal(n)
    est = sphere_integrate(lambda th: np.abs(th @ x) ** p, n, cfg)
    assert spherical_constant(n, p) * est.value == pytest.approx(np.linalg.norm(x) ** p, rel=1e-3)


def test_sphere_rule_one_dimension_is_exact():
    rule = sphere_rule(1, 16, "qmc", 0, 4)
    assert rule.kind == "exact"
    assert rule.estimate(np.ones(len(rule))).value == pytest.approx(2.0)


@pytest.mark.parametrize("method", ["qmc", "mc"])
def test_sphere_integrate_polynomial(method):
    cfg = IntegrationConfig(method=method, sphere_samples=2**15, seed=2)
    # int theta_1^2 theta_2^2 over S^2 = 4 pi / 15
    est = sphere_integrate(lambda th: th[:, 0] ** 2 * th[:, 1] ** 2, 3, cfg)
    assert est.value == pytest.approx(4 * math.pi / 15, rel=5e-3 if method == "mc" else 1e-3)
    assert est.std_error > 0


def test_sphere_rule_points_are_unit_and_antipodal():
    rule = sphere_rule(4, 1024, "qmc", 1, 4)
    np.testing.assert_allclose(np.linalg.norm(rule.points, axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(rule.points[rule.mates], -rule.points, atol=1e-15)


def test_cubed_layout_integrates_constant():
    rule = sphere_rule(4, 4096, "qmc", 1, 4, layout="cubed")
    assert rule.estimate(np.ones(len(rule))).value == pytest.approx(sphere_area(4), rel=1e-2)
    np.testing.assert_allclose(np.linalg.norm(rule.points, axis=1), 1.0, atol=1e-12)


def test_body_integrate_gaussian_on_l3_disk(cfg):
    f = make_density({"type": "gaussian", "sigma": 1.0})
    assert body_integrate(make_lq_ball(2, 3.0), f, cfg).value == pytest.approx(GAUSS_MASS_L3_DISK, rel=1e-4)


def test_body_integrate_gaussian_on_ball_closed_form(cfg):
    # int_{B_2^n} exp(-|x|^2/2) = s_{n-1} 2^{n/2-1} gamma_lower(n/2, 1/2)
    n = 4
    exact = sphere_area(n) * 2 ** (n / 2 - 1) * special.gammainc(n / 2, 0.5) * math.gamma(n / 2)
    f = make_density({"type": "gaussian"})
    assert body_integrate(make_lq_ball(n, 2.0), f, cfg).value == pytest.approx(exact, rel=1e-3)


def test_body_integrate_exp_l1_on_cross_polytope(cfg):
    # int_{|x|_1 <= 1} exp(-|x|_1) = 2^n gamma_lower(n, 1) / (n - 1)!
    n = 3
    exact = 2**n * special.gammainc(n, 1.0)
    f = make_density({"type": "exp_l1"})
    assert body_integrate(make_cross_polytope(n), f, cfg).value == pytest.approx(exact, rel=2e-3)


def test_homogeneous_density_uses_exact_radial_part(cfg):
    # int_{B_2^3} |x| = 4 pi / 4 = pi
    f = make_density({"type": "radial_power", "alpha": 1.0})
    assert body_integrate(make_lq_ball(3, 2.0), f, cfg).value == pytest.approx(math.pi, rel=1e-9)


def test_section_of_cube_and_ball(cfg):
    one = make_density({"type": "constant"})
    assert section_integrate(make_cube(3, 0.5), one, np.eye(3)[0], 0.2, cfg).value == pytest.approx(1.0, rel=1e-3)
    s = 0.6
    v = section_integrate(make_lq_ball(3, 2.0), one, np.array([0.0, 0.6, 0.8]), s, cfg).value
    assert v == pytest.approx(math.pi * (1 - s * s), rel=1e-3)
    assert section_integrate(make_cube(3), one, np.eye(3)[0], 5.0, cfg).value == 0.0


def test_central_hexagon_of_cube(cfg):
    xi = np.ones(3) / math.sqrt(3)
    v = section_integrate(make_cube(3), make_density({"type": "constant"}), xi, 0.0, cfg).value
    assert v == pytest.approx(3 * math.sqrt(3), rel=1e-3)


def test_gaussian_section_of_l3_ball(cfg):
    f = make_density({"type": "gaussian"})
    v = section_integrate(make_lq_ball(3, 3.0), f, np.eye(3)[2], 0.3, cfg).value
    assert v == pytest.approx(GAUSS_SECTION_L3_BALL3_S03, rel=1e-3)


def test_off_center_cross_polytope_section(cfg):
    xi = np.array([1.0, 1.0, 0.0]) / math.sqrt(2)
    v = section_integrate(make_cross_polytope(3), make_density({"type": "constant"}), xi, 0.2, cfg).value
    assert v == pytest.approx(SECTION_CROSS3_DIAG_S02, rel=2e-3)


def test_profile_of_ellipse():
    cfg = IntegrationConfig(seed=1)
    body = make_ellipsoid([1.0, 2.0])
    prof = profile_g(body, make_density({"type": "constant"}), np.array([0.0, 1.0]), cfg)
    assert prof.sup.value == pytest.approx(2.0, rel=1e-6)
    assert prof.argmax == pytest.approx(0.0, abs=1e-3)
    assert prof(np.array([1.0]))[0] == pytest.approx(math.sqrt(1 - 0.25), rel=1e-6)


def test_profile_degenerate_density():
    f = make_density({"type": "constant", "c": 0.0})
    with pytest.raises(DegenerateDensityError):
        profile_g(make_cube(2), f, np.array([1.0, 0.0]), IntegrationConfig())


def test_orthonormal_complement():
    xi = np.array([0.3, -0.5, 0.1, 0.8])
    xi /= np.linalg.norm(xi)
    B = orthonormal_complement(xi)
    np.testing.assert_allclose(B.T @ B, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(B.T @ xi, 0.0, atol=1e-12)


def test_config_validation():
    with pytest.raises(SpecError):
        IntegrationConfig(method="simpson")
    with pytest.raises(SpecError):
        IntegrationConfig(sphere_samples=0)
    with pytest.raises(SpecError):
        IntegrationConfig(rel_tol_target=1.5)
    with pytest.raises(SpecError, match="unknown"):
        config_from_spec({"samples": 3})
    cfg = IntegrationConfig(seed=9)
    assert config_from_spec(cfg.to_spec()) == cfg


def test_tolerance_status_reported():
    cfg = IntegrationConfig(sphere_samples=64, replicates=4, rel_tol_target=1e-9, seed=1)
    est = body_integrate(make_lq_ball(3, 3.0), make_density({"type": "gaussian"}), cfg)
    assert est.status == "tolerance_not_met"


def test_cold_cache_reproducibility(cfg):
    f = make_density({"type": "gaussian"})
    body = make_lq_ball(3, 3.0)
    a = body_integrate(body, f, cfg).value
    clear_caches()
    assert body_integrate(body, f, cfg).value == a


def _slab_integral(body, f, xi, cfg, nodes):
    """int_{-h}^{h} section(t) dt by Gauss-Legendre on 8 panels."""
    from slicelab.quad import section_extent, sections

    h = section_extent(body, xi)
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(-h, h, 9)
    t = np.concatenate([(a + b) / 2 + (b - a) / 2 * x for a, b in zip(edges[:-1], edges[1:])])
    wt = np.concatenate([(b - a) / 2 * w for a, b in zip(edges[:-1], edges[1:])])
    vals, errs, _ = sections(body, f, xi, t, cfg)
    return float(wt @ vals), float(wt @ errs)


def test_fubini_consistency_on_random_instances():
    """Integrated sections equal the body integral within 2 combined errors.

    The error estimates are standard errors, so about 5% of instances may land
    outside 2 errors by chance; the test bounds that count by the binomial
    tail (P(X > 7) < 0.005 for 50 trials) and requires every instance within 4 errors.
    """
    from slicelab.suite import random_body, random_density_spec
    from slicelab.quad import stream

    cfg = IntegrationConfig(section_samples=4096, seed=8)
    rng = stream(8, "fubini-test")
    outside, far = [], []
    for i in range(50):
        n = int(rng.choice([2, 3, 4]))
        body = random_body(rng, n)
        f = make_density(random_density_spec(rng))
        z = rng.standard_normal(n)
        xi = z / np.linalg.norm(z)
        fine, fine_err = _slab_integral(body, f, xi, cfg, 12)
        coarse, _ = _slab_integral(body, f, xi, cfg, 6)
        whole = body_integrate(body, f, cfg)
        err = fine_err + abs(fine - coarse) + whole.std_error + 1e-12 * abs(whole.value)
        dev = abs(fine - whole.value) / err
        if dev > 2:
            outside.append((i, body.to_spec(), fine, whole.value, err))
        if dev > 4:
            far.append((i, body.to_spec(), fine, whole.value, err))
    assert len(outside) <= 7, outside
    assert not far, far
