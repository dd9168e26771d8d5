"""Triangulations of star-shaped domains and mesh utilities.

Meshes are built on concentric rings: ring spacing close to the target edge
length h, per-ring vertex counts growing with circumference, consecutive rings
stitched by an angular merge.  Star domains reuse the disc construction
through the radial map (r, theta) -> (r * rho(theta), theta).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .errors import ParameterError
from .geometry import TWO_PI, StarDomain

__all__ = [
    "Mesh",
    "triangulate",
    "annulus",
    "save_mesh",
    "load_mesh",
    "save_field",
    "load_field",
    "TriLocator",
]


@dataclass
class Mesh:
    """Triangle mesh with an oriented boundary cycle.

    Attributes
    ----------
    vertices : (n, 2) float array
    triangles : (m, 3) int array, counterclockwise
    boundary_loop : (b,) int array
        Boundary vertex indices in positively oriented cycle order.
    boundary_param : (b,) float array
        Curve parameter t of each boundary_loop vertex.
    domain : StarDomain or None
        Present for meshes built by `triangulate`; snapshots drop it.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_loop: np.ndarray
    boundary_param: np.ndarray
    domain: Optional[StarDomain] = None
    _locator: Optional["TriLocator"] = field(default=None, repr=False)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def boundary_edges(self) -> np.ndarray:
        loop = self.boundary_loop
        return np.stack([loop, np.roll(loop, -1)], axis=1)

    @property
    def is_boundary(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.boundary_loop] = True
        return mask

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def edge_array(self) -> np.ndarray:
        """Unique undirected edges as a (k, 2) index array."""
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0)

    def max_edge_length(self) -> float:
        e = self.edge_array()
        d = self.vertices[e[:, 0]] - self.vertices[e[:, 1]]
        return float(np.hypot(d[:, 0], d[:, 1]).max())

    def locator(self) -> "TriLocator":
        if self._locator is None:
            self._locator = TriLocator(self)
        return self._locator

    def validate(self, euler: int = 1) -> None:
        areas = self.signed_areas()
        if not np.all(areas > 0.0):
            raise ParameterError("triangulation contains non-positive triangles")
        v = self.n_vertices
        f = len(self.triangles)
        e = len(self.edge_array())
        if v - e + f != euler:
            raise ParameterError(
                f"Euler check failed: V-E+F = {v - e + f}, expected {euler}"
            )


def _stitch_band(ids_in, ang_in, ids_out, ang_out):
    """Triangulate the band between two concentric vertex rings.

    Walks both rings by increasing angle; each advance emits one triangle with
    counterclockwise orientation.  Produces len(ids_in) + len(ids_out)
    triangles for any pair of ring sizes.
    """
    m_p, m_q = len(ids_in), len(ids_out)
    tris = []
    i = j = 0
    while i < m_p or j < m_q:
        can_p, can_q = i < m_p, j < m_q
        if can_p and can_q:
            next_p = ang_in[i + 1] if i + 1 < m_p else ang_in[0] + TWO_PI
            next_q = ang_out[j + 1] if j + 1 < m_q else ang_out[0] + TWO_PI
            advance_inner = next_p <= next_q
        else:
            advance_inner = can_p
        cur_p = ids_in[i % m_p]
        cur_q = ids_out[j % m_q]
        if advance_inner:
            tris.append((cur_p, cur_q, ids_in[(i + 1) % m_p]))
            i += 1
        else:
            tris.append((cur_p, cur_q, ids_out[(j + 1) % m_q]))
            j += 1
    return tris


def _disc_rings(h: float):
    """Ring radii/angles and triangles of the unit-disc reference mesh."""
    n = max(2, int(round(1.0 / h)))
    coords = [np.zeros((1, 2))]
    ring_ids = [np.array([0])]
    ring_angles = [np.array([0.0])]
    params_of_last = None
    count = 1
    for k in range(1, n + 1):
        m = 6 * k
        ang = TWO_PI * np.arange(m) / m
        r = k / n
        coords.append(np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1))
        ring_ids.append(np.arange(count, count + m))
        ring_angles.append(ang)
        count += m
        params_of_last = ang
    tris = []
    # center fan
    ids1 = ring_ids[1]
    m1 = len(ids1)
    for j in range(m1):
        tris.append((0, ids1[j], ids1[(j + 1) % m1]))
    for k in range(2, n + 1):
        tris.extend(
            _stitch_band(ring_ids[k - 1], ring_angles[k - 1], ring_ids[k], ring_angles[k])
        )
    vertices = np.concatenate(coords)
    triangles = np.asarray(tris, dtype=np.int32)
    return vertices, triangles, ring_ids[-1], params_of_last


def triangulate(domain: StarDomain, h: float) -> Mesh:
    """Mesh a star domain with target edge length h.

    The unit-disc ring mesh is built at a spacing reduced by the maximal
    stretch of the radial map, then mapped by x -> rho(theta) * x.
    """
    if h <= 0:
        raise ParameterError("mesh spacing must be positive")
    ts = np.linspace(0.0, TWO_PI, 2048, endpoint=False)
    stretch = float(np.max(domain.metric(ts))) if not domain.is_disc else 1.0
    verts, tris, loop, params = _disc_rings(h / max(stretch, 1.0))
    if not domain.is_disc:
        theta = np.arctan2(verts[:, 1], verts[:, 0])
        scale = domain.rho(theta)
        verts = verts * scale[:, None]
    mesh = Mesh(
        vertices=verts,
        triangles=tris,
        boundary_loop=np.asarray(loop, dtype=np.int64),
        boundary_param=np.asarray(params, dtype=float),
        domain=domain,
    )
    mesh.validate(euler=1)
    return mesh


def annulus(r_in: float, r_out: float, h: float) -> Mesh:
    """Ring mesh of the annulus r_in < |x| < r_out.

    Helper for quadrature checks on fields with known annular energy; the
    recorded boundary cycle is the outer circle only.
    """
    if not (0 < r_in < r_out):
        raise ParameterError("need 0 < r_in < r_out")
    n = max(2, int(round((r_out - r_in) / h)))
    radii = np.linspace(r_in, r_out, n + 1)
    coords, ring_ids, ring_angles = [], [], []
    count = 0
    for r in radii:
        m = max(8, int(round(TWO_PI * r / h)))
        ang = TWO_PI * np.arange(m) / m
        coords.append(np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1))
        ring_ids.append(np.arange(count, count + m))
        ring_angles.append(ang)
        count += m
    tris = []
    for k in range(1, len(radii)):
        tris.extend(
            _stitch_band(ring_ids[k - 1], ring_angles[k - 1], ring_ids[k], ring_angles[k])
        )
    mesh = Mesh(
        vertices=np.concatenate(coords),
        triangles=np.asarray(tris, dtype=np.int32),
        boundary_loop=np.asarray(ring_ids[-1], dtype=np.int64),
        boundary_param=ring_angles[-1].astype(float),
        domain=None,
    )
    mesh.validate(euler=0)
    return mesh


# ---------------------------------------------------------------------------
# snapshots

def save_mesh(path, mesh: Mesh) -> None:
    """Plain-text mesh snapshot (vertices, triangles, oriented boundary)."""
    with open(path, "w") as f:
        f.write(f"VERTICES {mesh.n_vertices}\n")
        for x, y in mesh.vertices:
            f.write(f"{x:.17g} {y:.17g}\n")
        f.write(f"TRIANGLES {len(mesh.triangles)}\n")
        for i, j, k in mesh.triangles:
            f.write(f"{i} {j} {k}\n")
        edges = mesh.boundary_edges
        f.write(f"BOUNDARY {len(edges)}\n")
        for (i, j), t in zip(edges, mesh.boundary_param):
            f.write(f"{i} {j} {t:.17g}\n")


def load_mesh(path) -> Mesh:
    with open(path) as f:
        tokens = f.read().split()
    pos = 0

    def expect(word):
        nonlocal pos
        if tokens[pos] != word:
            raise ParameterError(f"malformed mesh snapshot: expected {word}")
        pos += 1
        n = int(tokens[pos])
        pos += 1
        return n

    nv = expect("VERTICES")
    verts = np.array(tokens[pos : pos + 2 * nv], dtype=float).reshape(nv, 2)
    pos += 2 * nv
    nt = expect("TRIANGLES")
    tris = np.array(tokens[pos : pos + 3 * nt], dtype=np.int32).reshape(nt, 3)
    pos += 3 * nt
    nb = expect("BOUNDARY")
    rows = np.array(tokens[pos : pos + 3 * nb], dtype=float).reshape(nb, 3)
    loop = rows[:, 0].astype(np.int64)
    params = rows[:, 2].astype(float)
    return Mesh(
        vertices=verts,
        triangles=tris,
        boundary_loop=loop,
        boundary_param=params,
        domain=None,
    )


def save_field(path, u: np.ndarray) -> None:
    u = np.asarray(u, dtype=float)
    with open(path, "w") as f:
        f.write(f"{len(u)}\n")
        for ux, uy in u:
            f.write(f"{ux:.17g} {uy:.17g}\n")


def load_field(path) -> np.ndarray:
    with open(path) as f:
        tokens = f.read().split()
    n = int(tokens[0])
    return np.array(tokens[1 : 1 + 2 * n], dtype=float).reshape(n, 2)


# ---------------------------------------------------------------------------
# point location / interpolation

class TriLocator:
    """Containing-triangle lookup via a centroid tree plus barycentric tests."""

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        p = mesh.vertices[mesh.triangles]
        self.centroids = p.mean(axis=1)
        self.tree = cKDTree(self.centroids)
        self.p0 = p[:, 0]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        # rows of the inverse affine map (for barycentric coordinates)
        self.inv11 = d2[:, 1] / det
        self.inv12 = -d2[:, 0] / det
        self.inv21 = -d1[:, 1] / det
        self.inv22 = d1[:, 0] / det

    def _bary(self, tri_idx, pts):
        d = pts - self.p0[tri_idx]
        l1 = self.inv11[tri_idx] * d[:, 0] + self.inv12[tri_idx] * d[:, 1]
        l2 = self.inv21[tri_idx] * d[:, 0] + self.inv22[tri_idx] * d[:, 1]
        return np.stack([1.0 - l1 - l2, l1, l2], axis=1)

    def locate(self, pts, clamp: bool = True):
        """Triangle index and barycentric coordinates for each query point.

        Points slightly outside the mesh (within roundoff or a curved-boundary
        sliver) are clamped onto the nearest candidate triangle when `clamp`;
        otherwise their triangle index is -1.
        """
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        k = min(24, len(self.centroids))
        _, cand = self.tree.query(pts, k=k)
        cand = np.atleast_2d(cand)
        n = len(pts)
        tri_out = np.full(n, -1, dtype=np.int64)
        bary_out = np.zeros((n, 3))
        best_short = np.full(n, np.inf)
        best_tri = np.zeros(n, dtype=np.int64)
        best_bary = np.zeros((n, 3))
        remaining = np.arange(n)
        for col in range(cand.shape[1]):
            if len(remaining) == 0:
                break
            tri_idx = cand[remaining, col]
            b = self._bary(tri_idx, pts[remaining])
            short = -b.min(axis=1)
            better = short < best_short[remaining]
            idx_b = remaining[better]
            best_short[idx_b] = short[better]
            best_tri[idx_b] = tri_idx[better]
            best_bary[idx_b] = b[better]
            inside = short <= 1e-12
            hit = remaining[inside]
            tri_out[hit] = tri_idx[inside]
            bary_out[hit] = b[inside]
            remaining = remaining[~inside]
        if clamp and len(remaining):
            b = np.clip(best_bary[remaining], 0.0, None)
            b /= b.sum(axis=1, keepdims=True)
            tri_out[remaining] = best_tri[remaining]
            bary_out[remaining] = b
        return tri_out, bary_out

    def interpolate(self, values, pts):
        """P1 interpolation of per-vertex values at query points."""
        tri_idx, bary = self.locate(pts)
        vv = values[self.mesh.triangles[tri_idx]]
        if vv.ndim == 3:
            return np.einsum("pk,pkc->pc", bary, vv)
        return np.einsum("pk,pk->p", bary, vv)
