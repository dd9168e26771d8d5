"""Triangulation, locator, and mesh/field serialization checks."""

import numpy as np
import pytest

from boojum.errors import ParameterError
from boojum.geometry import StarDomain
from boojum.mesh import annulus, load_field, load_mesh, save_field, save_mesh, triangulate

TWO_PI = 2.0 * np.pi


def test_disc_mesh_validates(mesh_coarse, disc):
    mesh_coarse.validate(euler=1)
    areas = mesh_coarse.signed_areas()
    assert np.all(areas > 0.0)
    # total area approximates the disc from inside
    assert 0.97 * np.pi < areas.sum() < np.pi
    assert mesh_coarse.max_edge_length() < 2.0 * 0.1


def test_boundary_loop_structure(mesh_coarse, disc):
    loop = mesh_coarse.boundary_loop
    tb = mesh_coarse.boundary_param
    assert len(loop) == len(tb)
    # vertices of the loop sit on the boundary curve at their recorded parameter
    pts = mesh_coarse.vertices[loop]
    on = disc.boundary_point(tb)
    assert np.allclose(pts, on, atol=1e-12)
    # parameters strictly increase once around
    assert np.all(np.diff(tb) > 0.0)
    assert tb[0] >= 0.0 and tb[-1] < TWO_PI
    flags = mesh_coarse.is_boundary
    assert flags[loop].all()
    assert flags.sum() == len(loop)


def test_star_mesh_validates():
    dom = StarDomain(const=1.0, cos_coeffs=(0.12,), sin_coeffs=(0.0, 0.07))
    mesh = triangulate(dom, 0.08)
    mesh.validate(euler=1)
    assert np.all(mesh.signed_areas() > 0.0)
    r = np.hypot(*mesh.vertices[mesh.boundary_loop].T)
    assert np.allclose(r, dom.rho(mesh.boundary_param), atol=1e-12)


def test_edge_array_is_unique_undirected(mesh_coarse):
    edges = mesh_coarse.edge_array()
    assert edges.shape[1] == 2
    assert np.all(edges[:, 0] < edges[:, 1])
    key = edges[:, 0].astype(np.int64) * mesh_coarse.n_vertices + edges[:, 1]
    assert len(np.unique(key)) == len(key)
    # Euler: V - E + F = 1 for a disc (F counts triangles only)
    assert mesh_coarse.n_vertices - len(edges) + len(mesh_coarse.triangles) == 1


def test_locator_finds_points_and_reproduces_linears(mesh_coarse):
    rng = np.random.default_rng(4)
    r = np.sqrt(rng.uniform(0.0, 0.92, size=30))
    th = rng.uniform(0.0, TWO_PI, size=30)
    pts = np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
    loc = mesh_coarse.locator()
    tri, bary = loc.locate(pts)
    assert np.all(tri >= 0)
    assert np.allclose(bary.sum(axis=1), 1.0, atol=1e-12)
    vals = 0.7 * mesh_coarse.vertices[:, 0] - 1.3 * mesh_coarse.vertices[:, 1] + 0.2
    interp = loc.interpolate(vals, pts)
    exact = 0.7 * pts[:, 0] - 1.3 * pts[:, 1] + 0.2
    assert np.allclose(interp, exact, atol=1e-12)


def test_vector_interpolation(mesh_coarse):
    loc = mesh_coarse.locator()
    u = np.stack(
        [mesh_coarse.vertices[:, 0], 2.0 * mesh_coarse.vertices[:, 1]], axis=1
    )
    pts = np.array([[0.1, 0.2], [-0.4, 0.3]])
    out = loc.interpolate(u, pts)
    assert np.allclose(out, [[0.1, 0.4], [-0.4, 0.6]], atol=1e-12)


def test_save_load_roundtrip(tmp_path, mesh_coarse):
    mp = tmp_path / "mesh.txt"
    save_mesh(mp, mesh_coarse)
    back = load_mesh(mp)
    assert np.array_equal(back.vertices, mesh_coarse.vertices)
    assert np.array_equal(back.triangles, mesh_coarse.triangles)
    assert np.array_equal(back.boundary_loop, mesh_coarse.boundary_loop)
    assert np.array_equal(back.boundary_param, mesh_coarse.boundary_param)
    rng = np.random.default_rng(0)
    u = rng.standard_normal((mesh_coarse.n_vertices, 2))
    fp = tmp_path / "field.txt"
    save_field(fp, u)
    assert np.array_equal(load_field(fp), u)
    # identical content twice: serialization is deterministic
    save_mesh(tmp_path / "mesh2.txt", mesh_coarse)
    assert (tmp_path / "mesh2.txt").read_bytes() == mp.read_bytes()


def test_annulus_mesh():
    mesh = annulus(0.25, 1.0, 0.05)
    mesh.validate(euler=0)
    assert np.all(mesh.signed_areas() > 0.0)
    r = np.hypot(*mesh.vertices.T)
    assert r.min() == pytest.approx(0.25, abs=1e-12)
    assert r.max() == pytest.approx(1.0, abs=1e-12)
    area = mesh.signed_areas().sum()
    assert area == pytest.approx(np.pi * (1.0 - 0.25**2), rel=0.02)


def test_triangulate_rejects_bad_h(disc):
    with pytest.raises(ParameterError):
        triangulate(disc, 0.0)
    with pytest.raises(ParameterError):
        triangulate(disc, -0.1)
