"""Renormalized-energy values against closed forms, and expansion fits."""

import numpy as np
import pytest

from boojum.energy import Assembly
from boojum.errors import DivergenceError, FitError, ParameterError
from boojum.geometry import fourier_data, tangential_data, unit_disc
from boojum.mesh import triangulate
from boojum.renorm import compare_configs, fit_expansion, w_boundary, w_interior

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="module")
def renorm_asm():
    dom = unit_disc()
    return Assembly(triangulate(dom, 0.02), tangential_data(dom))


def test_w_boundary_antipodal_closed_form():
    # frozen value: -pi * ln 2
    val = w_boundary((1.0, 0.0), (-1.0, 0.0))
    assert val == pytest.approx(-2.177586090303602, abs=1e-12)
    assert val == pytest.approx(-np.pi * np.log(2.0), abs=1e-12)


def test_w_boundary_symmetry_and_rotation():
    rng = np.random.default_rng(21)
    for _ in range(8):
        a, b = rng.uniform(0.0, TWO_PI, size=2)
        if abs(a - b) < 1e-3:
            continue
        q1 = (np.cos(a), np.sin(a))
        q2 = (np.cos(b), np.sin(b))
        assert w_boundary(q1, q2) == w_boundary(q2, q1)
        # rotating both points together leaves the value unchanged
        c = rng.uniform(0.0, TWO_PI)
        r1 = (np.cos(a + c), np.sin(a + c))
        r2 = (np.cos(b + c), np.sin(b + c))
        assert w_boundary(r1, r2) == pytest.approx(w_boundary(q1, q2), abs=1e-12)


def test_w_boundary_separation_grid_argmin_at_pi():
    seps = TWO_PI * np.arange(1, 64) / 64.0
    vals = [w_boundary((1.0, 0.0), (np.cos(t), np.sin(t))) for t in seps]
    assert seps[int(np.argmin(vals))] == pytest.approx(np.pi, abs=1e-12)


def test_w_boundary_input_validation():
    with pytest.raises(ParameterError):
        w_boundary((0.5, 0.0), (-1.0, 0.0))
    with pytest.raises(DivergenceError):
        w_boundary((1.0, 0.0), (1.0, 0.0))


def test_w_interior_center_is_zero(renorm_asm):
    # the centered defect on the disc has zero renormalized energy; the
    # tolerance is five mesh widths
    assert abs(w_interior(renorm_asm, (0.0, 0.0))) <= 5 * 0.02


def test_w_interior_matches_disc_closed_form(renorm_asm):
    # on the unit disc with tangential anchoring, W(p) = -pi ln(1 - |p|^2)
    for p in ((0.3, 0.0), (0.0, 0.5), (-0.35, 0.25)):
        exact = -np.pi * np.log(1.0 - (p[0] ** 2 + p[1] ** 2))
        assert w_interior(renorm_asm, p) == pytest.approx(exact, abs=5e-3)


def test_w_interior_rotation_invariance(renorm_asm):
    a = w_interior(renorm_asm, (0.4, 0.0))
    b = w_interior(renorm_asm, (0.0, 0.4))
    assert a == pytest.approx(b, abs=2e-3)


def test_w_interior_grows_toward_boundary(renorm_asm):
    vals = [w_interior(renorm_asm, (x, 0.0)) for x in (0.0, 0.3, 0.6)]
    assert vals[0] < vals[1] < vals[2]


def test_w_interior_preconditions(renorm_asm):
    with pytest.raises(ParameterError):
        w_interior(renorm_asm, (0.999, 0.0))  # too close to the boundary
    dom = unit_disc()
    asm2 = Assembly(triangulate(dom, 0.05), fourier_data(dom, degree=2))
    with pytest.raises(ParameterError):
        w_interior(asm2, (0.0, 0.0))


def test_fit_expansion_exact_line():
    eps = np.array([0.2, 0.1, 0.05, 0.025])
    x = np.abs(np.log(eps))
    en = 2.5 * x + 0.7
    fit = fit_expansion(eps, en)
    assert fit.slope == pytest.approx(2.5, abs=1e-12)
    assert fit.intercept == pytest.approx(0.7, abs=1e-12)
    assert fit.max_residual < 1e-12
    assert fit.predicted_slope is None


def test_fit_expansion_models():
    eps = [0.2, 0.1, 0.05]
    en = [1.0, 2.0, 3.0]
    fit = fit_expansion(eps, en, model="pi_D_logeps", degree=2)
    assert fit.predicted_slope == pytest.approx(2 * np.pi)
    fit2 = fit_expansion(eps, en, model="pi_s_D_logeps", degree=1, s=0.5)
    assert fit2.predicted_slope == pytest.approx(np.pi / 2)
    with pytest.raises(ParameterError):
        fit_expansion(eps, en, model="exponential")


def test_fit_expansion_rejects_bad_input():
    with pytest.raises(FitError):
        fit_expansion([0.1], [1.0])
    with pytest.raises(FitError):
        fit_expansion([0.2, 1.5], [1.0, 2.0])
    with pytest.raises(FitError):
        fit_expansion([0.2, 0.1], [1.0, 2.0, 3.0])


def test_compare_configs_ranking(renorm_asm):
    rows = compare_configs(
        renorm_asm,
        [
            ("interior", (0.0, 0.0)),
            ("boundary", ((1.0, 0.0), (-1.0, 0.0))),
            ("interior", (0.5, 0.0)),
            ("boundary", ((1.0, 0.0), (np.cos(0.5), np.sin(0.5)))),
        ],
    )
    # the antipodal boundary pair wins: -pi ln 2 < 0 = W(center)
    assert rows[0]["kind"] == "boundary"
    assert rows[0]["w"] == pytest.approx(-np.pi * np.log(2.0), abs=1e-12)
    ws = [r["w"] for r in rows]
    assert ws == sorted(ws)
    assert all("core constants" in r["caveat"] for r in rows)
    with pytest.raises(ParameterError):
        compare_configs(renorm_asm, [("edge", (0.0, 0.0))])
