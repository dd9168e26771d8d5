"""Star-shaped domain calculus and anchoring-data checks."""

import numpy as np
import pytest

from boojum.errors import OutOfBandError, ParameterError
from boojum.geometry import (
    StarDomain,
    TubularBand,
    decompose,
    fourier_data,
    local_polar,
    recompose,
    tangential_data,
    unit_disc,
)

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="module")
def star():
    return StarDomain(const=1.0, cos_coeffs=(0.15,), sin_coeffs=(0.0, 0.08))


def test_unit_disc_basics(disc):
    assert disc.is_disc
    assert disc.min_radius == pytest.approx(1.0)
    t = np.linspace(0.0, TWO_PI, 17)
    assert np.allclose(disc.rho(t), 1.0)
    assert np.allclose(disc.drho(t), 0.0)
    p = disc.boundary_point(np.pi / 3)
    assert np.allclose(p, [0.5, np.sqrt(3) / 2])


def test_boundary_velocity_matches_finite_differences(star):
    rng = np.random.default_rng(7)
    dt = 1e-6
    for t in rng.uniform(0.0, TWO_PI, size=12):
        v_fd = (star.boundary_point(t + dt) - star.boundary_point(t - dt)) / (2 * dt)
        assert np.allclose(star.boundary_velocity(t), v_fd, atol=1e-6)
        a_fd = (star.boundary_velocity(t + dt) - star.boundary_velocity(t - dt)) / (
            2 * dt
        )
        assert np.allclose(star.boundary_acceleration(t), a_fd, atol=1e-5)


def test_tangent_normal_frame(star):
    rng = np.random.default_rng(3)
    for t in rng.uniform(0.0, TWO_PI, size=10):
        tau = star.tangent(t)
        nu = star.outward_normal(t)
        assert np.hypot(*tau) == pytest.approx(1.0, abs=1e-12)
        assert np.hypot(*nu) == pytest.approx(1.0, abs=1e-12)
        assert abs(np.dot(tau, nu)) < 1e-12
        # outward means pointing away from the star center
        assert np.dot(nu, star.boundary_point(t)) > 0.0


def test_tangent_phase_consistency(star):
    rng = np.random.default_rng(11)
    for t in rng.uniform(0.0, TWO_PI, size=10):
        ph = star.tangent_phase(t)
        tau = star.tangent(t)
        assert np.allclose([np.cos(ph), np.sin(ph)], tau, atol=1e-12)
    # total turning of the tangent around a simple closed curve is one turn
    t = np.linspace(0.0, TWO_PI, 20001)
    turn = np.trapezoid(star.tangent_phase_rate(t), t)
    assert turn == pytest.approx(TWO_PI, rel=1e-6)


def test_tangent_phase_rate_matches_finite_differences(star):
    dt = 1e-6
    for t in np.linspace(0.3, 5.9, 7):
        fd = (star.tangent_phase(t + dt) - star.tangent_phase(t - dt)) / (2 * dt)
        assert star.tangent_phase_rate(t) == pytest.approx(fd, abs=1e-5)


def test_metric_and_arclength(disc, star):
    # metric = speed |gamma'|; disc arclength of a half turn is pi
    assert disc.arclength(0.0, np.pi) == pytest.approx(np.pi, rel=1e-10)
    t = np.linspace(0.0, TWO_PI, 9)
    assert np.all(star.metric(t) > 0.0)
    # short-span quadrature against a dense trapezoid reference
    ts = np.linspace(0.7, 1.9, 200001)
    ref = np.trapezoid(star.metric(ts), ts)
    assert star.arclength(0.7, 1.9) == pytest.approx(ref, rel=1e-9)


def test_contains_and_distance_on_disc(disc):
    rng = np.random.default_rng(5)
    r = np.sqrt(rng.uniform(0.0, 0.9, size=20))
    th = rng.uniform(0.0, TWO_PI, size=20)
    pts = np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
    assert np.all(disc.contains(pts))
    for p in pts:
        assert disc.dist_to_boundary(p) == pytest.approx(1.0 - np.hypot(*p), abs=1e-9)
    assert not disc.contains(np.array([1.2, 0.0]))
    # center: nearest boundary point is ambiguous but the distance is not
    assert disc.dist_to_boundary(np.zeros(2)) == pytest.approx(1.0)


def test_project_recovers_boundary_parameter(star):
    rng = np.random.default_rng(13)
    for t in rng.uniform(0.0, TWO_PI, size=10):
        x = 0.93 * star.boundary_point(t)
        t_hat = star.project(x)
        gap = abs((t_hat - t + np.pi) % TWO_PI - np.pi)
        assert gap < 0.05


def test_star_domain_rejects_nonstar_coefficients():
    with pytest.raises(ParameterError):
        StarDomain(const=1.0, cos_coeffs=(1.2,))


def test_tangential_data_winding(disc, star):
    for dom in (disc, star):
        data = tangential_data(dom)
        assert data.degree == 1
        assert data.sampled_winding() == 1
        t = np.linspace(0.0, TWO_PI, 33)
        g = data.g(t)
        assert np.allclose(np.hypot(g[:, 0], g[:, 1]), 1.0, atol=1e-12)
        gp = data.g_perp(t)
        assert np.allclose(np.sum(g * gp, axis=1), 0.0, atol=1e-12)


def test_fourier_data_phase_and_winding(disc):
    data = fourier_data(disc, degree=2, phase_const=0.3, cos_coeffs=(0.2,))
    assert data.sampled_winding() == 2
    dt = 1e-6
    for t in np.linspace(0.1, 6.1, 8):
        fd = (data.phase(t + dt) - data.phase(t - dt)) / (2 * dt)
        assert data.phase_rate(t) == pytest.approx(fd, abs=1e-5)
        g = data.g(t)
        assert np.allclose(g, [np.cos(data.phase(t)), np.sin(data.phase(t))])


def test_decompose_recompose_roundtrip():
    rng = np.random.default_rng(2)
    u = rng.standard_normal((40, 2))
    th = rng.uniform(0.0, TWO_PI, size=40)
    g = np.stack([np.cos(th), np.sin(th)], axis=1)
    par, perp = decompose(u, g)
    assert np.allclose(recompose(par, perp, g), u, atol=1e-14)
    # parallel part of g itself is 1, perpendicular part 0
    par_g, perp_g = decompose(g, g)
    assert np.allclose(par_g, 1.0) and np.allclose(perp_g, 0.0)


def test_local_polar(disc):
    r, phi = local_polar(disc, 0.0, np.array([0.9, 0.0]))
    assert r == pytest.approx(0.1, abs=1e-12)
    # interior points read an angle between ~0 (ahead along the tangent)
    # and ~pi (behind); straight inward is pi/2
    _, phi_in = local_polar(disc, 0.0, np.array([0.8, 0.0]))
    assert phi_in == pytest.approx(np.pi / 2, abs=1e-9)


def test_tubular_band(disc, tdata):
    band = TubularBand(disc, tdata, width=0.2)
    x = np.array([0.95, 0.0])
    t_hat = band.project_param(x)
    g = band.extend_g(x)
    assert np.allclose(g, tdata.g(t_hat), atol=1e-12)
    gp = band.extend_g_perp(x)
    assert abs(np.dot(g, gp)) < 1e-12
    with pytest.raises(OutOfBandError):
        band.extend_g(np.array([0.1, 0.0]))
