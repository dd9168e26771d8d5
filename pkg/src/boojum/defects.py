"""Defect detection, winding numbers, and the degree bookkeeping audit.

The bad set collects vertices with depressed modulus and, in weak mode,
boundary vertices where the anchoring mismatch is large.  Its connected
components are merged into disjoint balls, each ball gets a surrounding
polygonal loop from the mesh, and the charge is read off as a winding
number: the plain phase winding for interior balls, and the winding of the
squared normalized field, continued across the boundary gap by the squared
anchoring direction, for boundary balls.  The audit checks that interior
charges plus half the boundary indices add up to the anchoring degree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .energy import Assembly, EnergyBreakdown, EnergyParams, local_energy
from .errors import (
    ClusterOverflowError,
    IndeterminateOrientationError,
    InconsistentIndexError,
    NonIntegerWindingError,
    NormalizationError,
    ParameterError,
    TopologyAuditError,
    TopologyError,
)
from .geometry import TWO_PI

__all__ = [
    "DefectBall",
    "DefectRecord",
    "DefectReport",
    "EtaReport",
    "bad_set",
    "cluster_bad_balls",
    "degree",
    "boundary_index",
    "super_index",
    "orientation",
    "analyze",
    "eta_diagnostic",
]

MODULUS_FLOOR = 0.5
MISMATCH_CEIL = 0.25
LOOP_MODULUS_FLOOR = 0.25
WINDING_TOL = 0.1


def _wrap_pi(a):
    return np.pi - np.mod(np.pi - np.asarray(a, dtype=float), TWO_PI)


def bad_set(asm: Assembly, u: np.ndarray, params: EnergyParams):
    """Vertex masks of the defective region.

    Returns (interior_mask over all vertices, mismatch_mask over the boundary
    ordering).  The mismatch mask is empty in strong mode, where the
    constraint holds exactly.
    """
    mod = np.hypot(u[:, 0], u[:, 1])
    interior = mod < MODULUS_FLOOR
    if params.weak:
        ub = u[asm.bidx]
        mis = np.abs(ub[:, 0] * asm.bg_perp[:, 0] + ub[:, 1] * asm.bg_perp[:, 1])
        mismatch = mis > MISMATCH_CEIL
    else:
        mismatch = np.zeros(len(asm.bidx), dtype=bool)
    return interior, mismatch


@dataclass
class DefectBall:
    kind: str  # "interior" | "boundary"
    center: np.ndarray
    radius: float
    vertex_ids: np.ndarray
    t_center: Optional[float] = None


def cluster_bad_balls(
    asm: Assembly,
    u: np.ndarray,
    params: EnergyParams,
    lam: float = 4.0,
    max_merges: int = 8,
) -> List[DefectBall]:
    """Group the bad set into disjoint balls at the core scale.

    Components within lam*epsilon of the boundary are classified as boundary
    defects and recentered on it; ball centers closer than lam*epsilon are
    merged.  A component whose diameter exceeds 8*lam*scale*max_merges
    signals that the field has no isolated-defect structure.
    """
    mesh = asm.mesh
    eps = params.epsilon
    scale_b = eps**params.s if params.weak else eps
    interior_mask, mismatch_mask = bad_set(asm, u, params)
    flagged = interior_mask.copy()
    flagged[asm.bidx[mismatch_mask]] = True
    ids = np.nonzero(flagged)[0]
    if len(ids) == 0:
        return []

    # connected components of the flagged subgraph
    remap = -np.ones(mesh.n_vertices, dtype=np.int64)
    remap[ids] = np.arange(len(ids))
    edges = mesh.edge_array()
    keep = flagged[edges[:, 0]] & flagged[edges[:, 1]]
    e = remap[edges[keep]]
    g = sp.coo_matrix(
        (np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(len(ids), len(ids))
    )
    n_comp, labels = connected_components(g, directed=False)

    is_bvert = np.zeros(mesh.n_vertices, dtype=bool)
    is_bvert[asm.bidx] = True
    domain = asm.data.domain

    def make_ball(vids: np.ndarray) -> DefectBall:
        pts = mesh.vertices[vids]
        centroid = pts.mean(axis=0)
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        gap = domain.rho(theta) - np.hypot(pts[:, 0], pts[:, 1])
        near = bool(np.any(is_bvert[vids])) or float(gap.min()) <= lam * eps
        if near:
            t_c = domain.project(centroid)
            return DefectBall(
                kind="boundary",
                center=domain.boundary_point(t_c),
                radius=lam * scale_b,
                vertex_ids=vids,
                t_center=t_c,
            )
        return DefectBall(
            kind="interior", center=centroid, radius=lam * eps, vertex_ids=vids
        )

    balls = [make_ball(ids[labels == k]) for k in range(n_comp)]

    # merge balls whose centers are within one core length
    changed = True
    while changed and len(balls) > 1:
        changed = False
        for i in range(len(balls)):
            for j in range(i + 1, len(balls)):
                if np.linalg.norm(balls[i].center - balls[j].center) <= lam * eps:
                    vids = np.union1d(balls[i].vertex_ids, balls[j].vertex_ids)
                    merged = make_ball(vids)
                    balls = [b for k, b in enumerate(balls) if k not in (i, j)]
                    balls.append(merged)
                    changed = True
                    break
            if changed:
                break

    for b in balls:
        pts = mesh.vertices[b.vertex_ids]
        diam = float(
            np.hypot(np.ptp(pts[:, 0]), np.ptp(pts[:, 1]))
        )  # bounding-box bound on the diameter
        scale = scale_b if b.kind == "boundary" else eps
        if diam > 8.0 * lam * scale * max_merges:
            raise ClusterOverflowError(
                f"bad-set component of diameter {diam:.3g} exceeds the defect scale"
            )
    balls.sort(key=lambda b: (0 if b.kind == "interior" else 1, b.center[0], b.center[1]))
    return balls


def _boundary_edge_set(mesh) -> set:
    loop = mesh.boundary_loop
    nxt = np.roll(loop, -1)
    return set(zip(loop.tolist(), nxt.tolist()))


def _patch_cycle(mesh, center, radius: float) -> np.ndarray:
    """Outer cycle (CCW vertex list) of the sub-triangulation inside a disk."""
    pts = mesh.vertices
    inside = np.hypot(pts[:, 0] - center[0], pts[:, 1] - center[1]) <= radius
    tri_in = inside[mesh.triangles].all(axis=1)
    if not np.any(tri_in):
        raise ParameterError(f"no triangles inside loop of radius {radius:.3g}")
    tset = mesh.triangles[tri_in]
    directed = np.concatenate(
        [tset[:, [0, 1]], tset[:, [1, 2]], tset[:, [2, 0]]], axis=0
    )
    have = set(map(tuple, directed.tolist()))
    boundary = [e for e in have if (e[1], e[0]) not in have]
    succ = {}
    for a, b in boundary:
        if a in succ:
            raise TopologyError("pinched winding patch")
        succ[a] = b

    cycles = []
    seen = set()
    for a in list(succ):
        if a in seen:
            continue
        cyc = [a]
        seen.add(a)
        v = succ[a]
        while v != a:
            cyc.append(v)
            seen.add(v)
            v = succ[v]
        cycles.append(np.array(cyc, dtype=np.int64))

    def signed_area(cyc):
        p = pts[cyc]
        q = pts[np.roll(cyc, -1)]
        return 0.5 * float(np.sum(p[:, 0] * q[:, 1] - p[:, 1] * q[:, 0]))

    return max(cycles, key=signed_area)


def _loop_modulus_check(u: np.ndarray, cyc: np.ndarray) -> np.ndarray:
    z = u[cyc, 0] + 1j * u[cyc, 1]
    mods = np.abs(z)
    if mods.min() < LOOP_MODULUS_FLOOR:
        raise NormalizationError(
            f"field modulus {mods.min():.3g} on the winding loop (needs >= {LOOP_MODULUS_FLOOR})"
        )
    return z


def _to_integer(total_turns: float, what: str) -> int:
    k = round(total_turns)
    if abs(total_turns - k) > WINDING_TOL:
        raise NonIntegerWindingError(f"{what} {total_turns:.4f} is not near an integer")
    return int(k)


def degree(asm: Assembly, u: np.ndarray, center, radius: float) -> int:
    """Phase winding of u around a loop enclosing an interior ball."""
    mesh = asm.mesh
    cyc = _patch_cycle(mesh, np.asarray(center, dtype=float), radius)
    bset = _boundary_edge_set(mesh)
    heads = np.roll(cyc, -1)
    for a, b in zip(cyc.tolist(), heads.tolist()):
        if (a, b) in bset:
            raise TopologyError("interior winding loop touches the boundary")
    z = _loop_modulus_check(u, cyc)
    inc = np.angle(z[np.arange(1, len(z) + 1) % len(z)] * np.conj(z))
    return _to_integer(float(inc.sum()) / TWO_PI, "interior winding")


def orientation(u_val: np.ndarray, g_val: np.ndarray) -> int:
    """Sign of the component of u along the anchoring direction."""
    par = float(u_val[0] * g_val[0] + u_val[1] * g_val[1])
    if par == 0.0:
        raise IndeterminateOrientationError("field orthogonal to the anchoring direction")
    return 1 if par > 0.0 else -1


@dataclass
class _BoundaryIndexResult:
    index: int
    orient_enter: int
    orient_exit: int
    parity_ok: bool


def _boundary_index_once(
    asm: Assembly, u: np.ndarray, t_center: float, radius: float
) -> _BoundaryIndexResult:
    mesh = asm.mesh
    data = asm.data
    center = data.domain.boundary_point(t_center)
    cyc = _patch_cycle(mesh, center, radius)
    bset = _boundary_edge_set(mesh)
    n = len(cyc)
    heads = np.roll(cyc, -1)
    is_gap = np.array(
        [(a, b) in bset for a, b in zip(cyc.tolist(), heads.tolist())], dtype=bool
    )
    if not is_gap.any():
        raise ParameterError("boundary-index loop does not touch the boundary")
    if is_gap.all():
        raise ParameterError("boundary-index loop runs entirely along the boundary")
    # the gap must be one contiguous run of boundary edges
    runs = int(np.sum(is_gap & ~np.roll(is_gap, 1)))
    if runs != 1:
        raise TopologyError("boundary-index loop crosses the boundary more than twice")

    start = int(np.argmax(is_gap & ~np.roll(is_gap, 1)))  # first edge of the run
    order = np.roll(np.arange(n), -start)
    cyc = cyc[order]
    is_gap = is_gap[order]
    m = int(is_gap.sum())  # edges 0..m-1 are the gap, m..n-1 the arc
    enter = cyc[0]  # junction where the loop meets the boundary
    exit_ = cyc[m]  # junction where it leaves again

    bpos = np.full(mesh.n_vertices, -1, dtype=np.int64)
    bpos[mesh.boundary_loop] = np.arange(len(mesh.boundary_loop))
    t_of = lambda v: float(mesh.boundary_param[bpos[v]])

    arc = cyc[m:]
    z = _loop_modulus_check(u, np.concatenate([arc, [enter]]))
    inc = np.angle(z[1:] * np.conj(z[:-1]))
    arc_turn = 2.0 * float(inc.sum())

    gap_turn = 0.0
    for k in range(m):
        a, b = int(cyc[k]), int(cyc[k + 1])
        ta = t_of(a)
        dt = (t_of(b) - ta) % TWO_PI
        gap_turn += 2.0 * float(data.phase(ta + dt) - data.phase(ta))
    # junction correction: vanishes identically under the exact constraint
    beta = []
    for v in (exit_, enter):
        zv = u[v, 0] + 1j * u[v, 1]
        gp = asm.bg_perp[bpos[v]]
        mis = abs(u[v, 0] * gp[0] + u[v, 1] * gp[1])
        if mis > MISMATCH_CEIL:
            raise NormalizationError(
                f"anchoring mismatch {mis:.3g} at a loop junction (needs <= {MISMATCH_CEIL})"
            )
        beta.append(float(_wrap_pi(2.0 * np.angle(zv) - 2.0 * data.phase(t_of(v)))))
    gap_turn += beta[0] - beta[1]  # exit minus enter

    idx = _to_integer((arc_turn + gap_turn) / TWO_PI, "boundary index")
    o_enter = orientation(u[enter], asm.bg[bpos[enter]])
    o_exit = orientation(u[exit_], asm.bg[bpos[exit_]])
    parity_ok = (o_exit == o_enter) if idx % 2 == 0 else (o_exit == -o_enter)
    return _BoundaryIndexResult(idx, o_enter, o_exit, parity_ok)


def boundary_index(
    asm: Assembly,
    u: np.ndarray,
    t_center: float,
    radius: float,
    check_scale: Optional[float] = 1.5,
) -> int:
    """Half-integer defect index (in units of half turns) at a boundary point.

    The winding of the squared normalized field is taken along the part of
    the loop inside the domain and continued across the boundary gap by the
    squared anchoring direction.  With check_scale set, the value is
    recomputed on a dilated loop and a disagreement raises
    InconsistentIndexError.
    """
    res = _boundary_index_once(asm, u, t_center, radius)
    if check_scale is not None:
        try:
            res2 = _boundary_index_once(asm, u, t_center, check_scale * radius)
        except (ParameterError, TopologyError, NormalizationError):
            res2 = None
        if res2 is not None and res2.index != res.index:
            raise InconsistentIndexError(
                f"boundary index {res.index} at radius {radius:.3g} but "
                f"{res2.index} at {check_scale * radius:.3g}"
            )
    return res.index


def super_index(asm: Assembly, u: np.ndarray, t_center: float, radius: float) -> int:
    """Boundary index of a large loop enclosing several defects at once."""
    return _boundary_index_once(asm, u, t_center, radius).index


@dataclass
class DefectRecord:
    kind: str
    center: np.ndarray
    scale: float
    charge: int
    loop_radius: float
    t_center: Optional[float] = None
    orient_enter: Optional[int] = None
    orient_exit: Optional[int] = None
    parity_ok: Optional[bool] = None


@dataclass
class DefectReport:
    records: List[DefectRecord]
    declared_degree: int
    sum_interior: int
    sum_boundary: int
    identity_ok: bool

    @property
    def n_interior(self) -> int:
        return sum(1 for r in self.records if r.kind == "interior")

    @property
    def n_boundary(self) -> int:
        return sum(1 for r in self.records if r.kind == "boundary")


def analyze(
    asm: Assembly,
    u: np.ndarray,
    params: EnergyParams,
    lam: float = 4.0,
    max_merges: int = 8,
    strict: bool = True,
) -> DefectReport:
    """Detect, classify, and charge every defect, then audit the degree identity.

    Twice the anchoring degree must equal twice the interior charges plus the
    boundary indices; with strict=True a violation raises TopologyAuditError.
    """
    mesh = asm.mesh
    domain = asm.data.domain
    balls = cluster_bad_balls(asm, u, params, lam=lam, max_merges=max_merges)
    records: List[DefectRecord] = []
    centers = [b.center for b in balls]
    for i, ball in enumerate(balls):
        pts = mesh.vertices[ball.vertex_ids]
        extent = float(
            np.hypot(pts[:, 0] - ball.center[0], pts[:, 1] - ball.center[1]).max()
        )
        if ball.kind == "interior":
            r = min(2.0 * ball.radius, 0.9 * domain.min_radius)
            r = min(r, 0.9 * domain.dist_to_boundary(ball.center))
            for j, c in enumerate(centers):
                if j != i:
                    r = min(r, 0.45 * float(np.linalg.norm(ball.center - c)))
            if r < extent + 2.0 * asm.h_est:
                raise ClusterOverflowError(
                    "defects too crowded for disjoint winding loops"
                )
        else:
            # a boundary loop needs its junctions outside its own mismatch
            # arc and the whole loop clear of every other flagged set; the
            # loop may cut deep through the interior, where the field is
            # healthy, so only flagged vertices constrain it from above
            r_min = extent + 3.0 * asm.h_est
            r_max = 1.2 * domain.min_radius
            for j, other in enumerate(balls):
                if j == i:
                    continue
                q = mesh.vertices[other.vertex_ids]
                gap = float(
                    np.hypot(
                        q[:, 0] - ball.center[0], q[:, 1] - ball.center[1]
                    ).min()
                )
                r_max = min(r_max, gap - 2.0 * asm.h_est)
            if r_max < r_min:
                raise ClusterOverflowError(
                    "defects too crowded for disjoint winding loops"
                )
            r = min(r_max, max(r_min, min(2.0 * ball.radius, 0.5 * (r_min + r_max))))
        if ball.kind == "interior":
            d = degree(asm, u, ball.center, r)
            records.append(
                DefectRecord(
                    kind="interior",
                    center=ball.center,
                    scale=ball.radius,
                    charge=d,
                    loop_radius=r,
                )
            )
        else:
            res = _boundary_index_once(asm, u, ball.t_center, r)
            res2 = None
            try:
                res2 = _boundary_index_once(asm, u, ball.t_center, 1.5 * r)
            except (ParameterError, TopologyError, NormalizationError):
                pass
            if res2 is not None and res2.index != res.index:
                raise InconsistentIndexError(
                    f"boundary index changed from {res.index} to {res2.index} "
                    f"under loop dilation at t={ball.t_center:.4f}"
                )
            records.append(
                DefectRecord(
                    kind="boundary",
                    center=ball.center,
                    scale=ball.radius,
                    charge=res.index,
                    loop_radius=r,
                    t_center=ball.t_center,
                    orient_enter=res.orient_enter,
                    orient_exit=res.orient_exit,
                    parity_ok=res.parity_ok,
                )
            )

    sum_d = sum(r.charge for r in records if r.kind == "interior")
    sum_big = sum(r.charge for r in records if r.kind == "boundary")
    ok = 2 * sum_d + sum_big == 2 * asm.data.degree
    if strict and not ok:
        raise TopologyAuditError(
            f"degree audit failed: 2*{sum_d} + {sum_big} != 2*{asm.data.degree}"
        )
    return DefectReport(
        records=records,
        declared_degree=asm.data.degree,
        sum_interior=sum_d,
        sum_boundary=sum_big,
        identity_ok=ok,
    )


@dataclass
class EtaReport:
    hypothesis_met: bool
    local: EnergyBreakdown
    threshold: float
    r_outer: float
    r_inner: float
    modulus_min: Optional[float] = None
    modulus_ok: Optional[bool] = None
    mismatch_max: Optional[float] = None
    anchoring_ok: Optional[bool] = None
    quench_fraction: Optional[float] = None


def eta_diagnostic(
    asm: Assembly,
    u: np.ndarray,
    params: EnergyParams,
    x0,
    beta: float,
    gamma: float,
    eta: float,
) -> EtaReport:
    """Small-local-energy test: little energy near x0 forces a healthy field.

    When the energy in the window of radius 2*eps^beta stays below
    eta*|ln eps|, the field on the inner window of radius eps^gamma is
    checked for modulus >= 1/2 and (weak mode) anchoring mismatch <= 1/4.
    The admissible exponent ranges are 3/4 <= beta < gamma < 1 in strong
    mode and 3s/4 <= beta < gamma < s in weak mode.
    """
    cap = params.s if params.weak else 1.0
    if not (0.75 * cap <= beta < gamma < cap):
        raise ParameterError(
            f"exponents must satisfy {0.75 * cap:.3g} <= beta < gamma < {cap:.3g}"
        )
    eps = params.epsilon
    x0 = np.asarray(x0, dtype=float)
    r_out = 2.0 * eps**beta
    r_in = eps**gamma
    loc = local_energy(asm, u, params, x0, r_out)
    threshold = eta * abs(np.log(eps))
    met = loc.total <= threshold
    if not met:
        return EtaReport(False, loc, threshold, r_out, r_in)

    pts = asm.mesh.vertices
    near = np.hypot(pts[:, 0] - x0[0], pts[:, 1] - x0[1]) <= r_in
    mod_min = float(np.hypot(u[near, 0], u[near, 1]).min()) if near.any() else None
    mod_ok = None if mod_min is None else mod_min >= MODULUS_FLOOR
    mis_max = None
    anch_ok = None
    if params.weak:
        bnear = (
            np.hypot(
                pts[asm.bidx, 0] - x0[0], pts[asm.bidx, 1] - x0[1]
            )
            <= r_in
        )
        if bnear.any():
            ub = u[asm.bidx[bnear]]
            gp = asm.bg_perp[bnear]
            mis_max = float(np.abs(ub[:, 0] * gp[:, 0] + ub[:, 1] * gp[:, 1]).max())
            anch_ok = mis_max <= MISMATCH_CEIL
    inner = local_energy(asm, u, params, x0, r_in)
    quench = (inner.potential + inner.penalty) / max(threshold, 1e-300)
    return EtaReport(
        True, loc, threshold, r_out, r_in, mod_min, mod_ok, mis_max, anch_ok, quench
    )
