"""Field initialization and energy descent.

`init_field` builds a unit field carrying prescribed interior windings and
boundary half-integer turns: explicit angular carriers around each seed, one
harmonic single-valued phase correction matching the anchoring on the
boundary, and core cutoffs (a phase ramp at boundary seeds, a modulus ramp at
interior seeds).  `minimize` runs Barzilai-Borwein descent with an Armijo
halving safeguard; in strong mode iterates and gradients are projected onto
the tangency constraint.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .energy import (
    Assembly,
    EnergyBreakdown,
    EnergyParams,
    el_residual,
    eval_energy,
    eval_gradient,
)
from .errors import (
    DivergenceError,
    ParameterError,
    ResolutionError,
    SeedSeparationError,
    TopologyError,
)
from .geometry import TWO_PI, local_polar
from .mesh import Mesh, triangulate

logger = logging.getLogger(__name__)

__all__ = [
    "SeedSpec",
    "MinimizeOptions",
    "MinimizeResult",
    "init_field",
    "project_strong",
    "minimize",
    "continuation_minimize",
]


@dataclass(frozen=True)
class SeedSpec:
    """Initial-condition request.

    base="aligned" builds the seeded phase construction (the seed charges must
    balance the anchoring degree); base="random" draws independent uniform
    directions and pre-smooths them with a short descent at four times the
    core size.
    """

    base: str = "aligned"
    interior: Tuple[Tuple[float, float, int], ...] = ()
    boundary: Tuple[Tuple[float, int], ...] = ()
    smoothing_steps: int = 50

    def __post_init__(self):
        if self.base not in ("aligned", "random"):
            raise ParameterError(f"unknown seed base {self.base!r}")


def _wrap_pi(a):
    """Wrap to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(a, dtype=float), TWO_PI)


def _carrier_angle(domain, t_seed: float, pts: np.ndarray) -> np.ndarray:
    """Polar angle about a boundary seed, measured from the tangent there.

    The branch cut is placed along the outward radial ray through the seed,
    which stays outside a star-shaped domain, so the returned angle is
    continuous on the closed domain minus the seed point.
    """
    q = domain.boundary_point(t_seed)
    tau = domain.tangent(t_seed)
    inward = np.array([-tau[1], tau[0]])
    d = pts - q
    raw = np.arctan2(d @ inward, d @ tau)
    # the outward radial ray (direction +q) never re-enters a star domain
    cut = float(np.arctan2(q @ inward, q @ tau))
    return cut + np.mod(raw - cut, TWO_PI)


def _interior_angle(p: np.ndarray, pts: np.ndarray) -> np.ndarray:
    d = pts - p
    return np.arctan2(d[:, 1], d[:, 0])


def init_field(
    asm: Assembly,
    params: EnergyParams,
    seeds: SeedSpec,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """Construct the initial nodal field for the requested seeding."""
    if seeds.base == "random":
        rng = rng or np.random.default_rng(0)
        phi = rng.uniform(0.0, TWO_PI, size=asm.mesh.n_vertices)
        u = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        if not params.weak:
            u = project_strong(asm, u)
        if seeds.smoothing_steps > 0:
            smooth = MinimizeOptions(
                max_iters=seeds.smoothing_steps, grad_tol=0.0, record_trace=False
            )
            u = minimize(
                asm, u, params.with_epsilon(4.0 * params.epsilon), smooth
            ).u
        return u
    return _aligned_field(asm, params, seeds)


def _aligned_field(asm: Assembly, params: EnergyParams, seeds: SeedSpec) -> np.ndarray:
    data = asm.data
    domain = data.domain
    mesh = asm.mesh
    eps = params.epsilon
    core_b = eps**params.s if params.weak else eps

    d_sum = sum(d for _, _, d in seeds.interior)
    big_d_sum = sum(D for _, D in seeds.boundary)
    if 2 * d_sum + big_d_sum != 2 * data.degree:
        raise TopologyError(
            f"seed charges sum to {d_sum} + {big_d_sum}/2, anchoring degree is {data.degree}"
        )

    interior = [(np.array([x, y]), int(d)) for x, y, d in seeds.interior]
    boundary = sorted(((t % TWO_PI, int(D)) for t, D in seeds.boundary))
    _check_separation(domain, interior, boundary, eps, core_b)

    pts = mesh.vertices
    carrier = np.zeros(mesh.n_vertices)
    for p, d in interior:
        carrier += d * _interior_angle(p, pts)
    b_angles = []
    for t_seed, D in boundary:
        ang = _carrier_angle(domain, t_seed, pts)
        b_angles.append(ang)
        carrier += D * ang

    # boundary phase target: anchoring lifting plus a -pi*D ledge at each seed
    t_b = mesh.boundary_param
    offset = np.zeros_like(t_b)
    for t_seed, D in boundary:
        offset -= np.pi * D * (t_b > t_seed)
    target = data.phase(t_b) + offset

    # continuous single-valued correction on the boundary, then its harmonic
    # extension into the bulk; vertices sitting on a seed carry no usable data
    loop = mesh.boundary_loop
    seed_verts = _seed_vertices(mesh, domain, boundary)
    keep = ~np.isin(loop, seed_verts)
    chain = loop[keep]
    raw = target[keep] - carrier[chain]
    chi_b = np.empty_like(raw)
    chi_b[0] = _wrap_pi(raw[0])
    inc = _wrap_pi(np.diff(raw))
    chi_b[1:] = chi_b[0] + np.cumsum(inc)
    seam = _wrap_pi(raw[0] - raw[-1])
    if abs(chi_b[-1] + seam - chi_b[0]) > 1e-6:
        raise TopologyError("phase correction does not close around the boundary")

    chi = _harmonic_extension(asm, chain, chi_b)
    psi = carrier + chi
    u = np.stack([np.cos(psi), np.sin(psi)], axis=1)

    # boundary cores: pin the phase to the half-turn midpoint at the seed and
    # blend linearly in r to the exact outside phase at the window edge, so
    # the core carries an epsilon-independent cost
    cum = 0.0
    ledges = {}
    for t_seed, D in boundary:
        cum -= np.pi * D
        ledges[t_seed] = cum
    for (t_seed, D), ang in zip(boundary, b_angles):
        q = domain.boundary_point(t_seed)
        r = np.hypot(pts[:, 0] - q[0], pts[:, 1] - q[1])
        win = r < core_b
        if not np.any(win):
            continue
        phi_c = float(data.phase(t_seed)) + ledges[t_seed]
        dev = _wrap_pi(
            np.arctan2(u[win, 1], u[win, 0]) - (phi_c + D * ang[win])
        )
        psi_cap = (
            phi_c
            + 0.5 * np.pi * D
            + (r[win] / core_b) * (D * (ang[win] - 0.5 * np.pi) + dev)
        )
        u[win, 0] = np.cos(psi_cap)
        u[win, 1] = np.sin(psi_cap)

    # interior cores: modulus ramp
    for p, _ in interior:
        r = np.hypot(pts[:, 0] - p[0], pts[:, 1] - p[1])
        u *= np.minimum(r / eps, 1.0)[:, None]

    if not params.weak:
        u = project_strong(asm, u)
    return u


def _check_separation(domain, interior, boundary, eps: float, core_b: float) -> None:
    for i, (p, _) in enumerate(interior):
        if domain.dist_to_boundary(p) <= 4.0 * eps:
            raise SeedSeparationError(f"interior seed {i} within 4 eps of the boundary")
        for j, (q, _) in enumerate(interior[:i]):
            if np.linalg.norm(p - q) <= 4.0 * eps:
                raise SeedSeparationError(f"interior seeds {j} and {i} closer than 4 eps")
    bpts = [domain.boundary_point(t) for t, _ in boundary]
    for i in range(len(bpts)):
        for j in range(i):
            if np.linalg.norm(bpts[i] - bpts[j]) <= 4.0 * core_b:
                raise SeedSeparationError(
                    f"boundary seeds {j} and {i} closer than four core lengths"
                )
        for j, (p, _) in enumerate(interior):
            if np.linalg.norm(bpts[i] - p) <= 4.0 * eps:
                raise SeedSeparationError(
                    f"interior seed {j} within 4 eps of boundary seed {i}"
                )


def _seed_vertices(mesh: Mesh, domain, boundary) -> np.ndarray:
    """Boundary vertices coinciding with a seed (excluded from Dirichlet data)."""
    if not boundary:
        return np.empty(0, dtype=np.int64)
    pos = mesh.vertices[mesh.boundary_loop]
    hits = np.zeros(len(pos), dtype=bool)
    for t_seed, _ in boundary:
        q = domain.boundary_point(t_seed)
        hits |= np.hypot(pos[:, 0] - q[0], pos[:, 1] - q[1]) < 1e-9
    return mesh.boundary_loop[hits]


def _harmonic_extension(asm, fixed_idx, values) -> np.ndarray:
    """Solve the discrete Laplace equation with Dirichlet data at fixed_idx."""
    n = asm.mesh.n_vertices
    fixed = np.zeros(n, dtype=bool)
    fixed[fixed_idx] = True
    vals = np.zeros(n)
    vals[fixed_idx] = values
    K = asm.stiffness().tocsr()
    free = ~fixed
    Kff = K[free][:, free]
    rhs = -K[free][:, fixed] @ vals[fixed]
    out = vals.copy()
    out[free] = spla.spsolve(Kff.tocsc(), rhs)
    return out


def project_strong(asm: Assembly, u: np.ndarray, inplace: bool = False) -> np.ndarray:
    """Project boundary values onto the anchoring direction (tangency constraint)."""
    out = u if inplace else u.copy()
    ub = out[asm.bidx]
    par = ub[:, 0] * asm.bg[:, 0] + ub[:, 1] * asm.bg[:, 1]
    out[asm.bidx] = par[:, None] * asm.bg
    return out


@dataclass(frozen=True)
class MinimizeOptions:
    max_iters: int = 20000
    grad_tol: Optional[float] = None  # default 1e-6 * sqrt(n_vertices)
    step_rule: str = "bb"  # bb | backtracking | fixed
    fixed_step: float = 1e-3
    armijo: float = 1e-4
    max_backtracks: int = 40
    record_trace: bool = True
    check_resolution: bool = True

    def __post_init__(self):
        if self.step_rule not in ("bb", "backtracking", "fixed"):
            raise ParameterError(f"unknown step rule {self.step_rule!r}")


@dataclass
class MinimizeResult:
    u: np.ndarray
    converged: bool
    iterations: int
    residual: float
    energy: EnergyBreakdown
    trace: List[tuple] = field(default_factory=list)


def minimize(
    asm: Assembly,
    u0: np.ndarray,
    params: EnergyParams,
    opts: MinimizeOptions = MinimizeOptions(),
) -> MinimizeResult:
    """Descend the energy from u0 until the relative first variation is small."""
    if opts.check_resolution and asm.h_est > 0.5 * params.epsilon:
        raise ResolutionError(
            f"mesh spacing {asm.h_est:.4g} too coarse for epsilon {params.epsilon:.4g}"
        )
    tol = opts.grad_tol
    if tol is None:
        tol = 1e-6 * np.sqrt(asm.mesh.n_vertices)
    strong = not params.weak

    u = u0.copy()
    if strong:
        project_strong(asm, u, inplace=True)
    g = eval_gradient(asm, u, params)
    eb = eval_energy(asm, u, params)
    if not np.isfinite(eb.total):
        raise DivergenceError("non-finite energy at the initial iterate")
    res = float(np.linalg.norm(g)) / max(float(np.linalg.norm(u)), 1e-300)
    trace = []
    if opts.record_trace:
        trace.append((0, eb.total, eb.dirichlet, eb.potential, eb.penalty, res))
    if res <= tol:
        return MinimizeResult(u, True, 0, res, eb, trace)

    gnorm = float(np.linalg.norm(g))
    alpha = 1e-3 * max(float(np.linalg.norm(u)), 1.0) / gnorm
    it = 0
    converged = False
    for it in range(1, opts.max_iters + 1):
        gg = gnorm * gnorm
        accepted = False
        if opts.step_rule == "fixed":
            u_new = u - opts.fixed_step * g
            if strong:
                project_strong(asm, u_new, inplace=True)
            eb_new = eval_energy(asm, u_new, params)
            if not np.isfinite(eb_new.total) or not np.all(np.isfinite(u_new)):
                raise DivergenceError(f"non-finite energy at iteration {it}")
            accepted = True
        else:
            for _ in range(opts.max_backtracks):
                u_new = u - alpha * g
                if strong:
                    project_strong(asm, u_new, inplace=True)
                eb_new = eval_energy(asm, u_new, params)
                if np.isfinite(eb_new.total) and (
                    eb_new.total <= eb.total - opts.armijo * alpha * gg
                ):
                    accepted = True
                    break
                alpha *= 0.5
            if not accepted:
                logger.debug("line search stalled at iteration %d", it)
                break

        g_new = eval_gradient(asm, u_new, params)
        if opts.step_rule == "bb":
            s = u_new - u
            y = g_new - g
            sy = float(np.sum(s * y))
            if sy > 0.0:
                alpha = float(np.sum(s * s)) / sy
            else:
                alpha *= 4.0
            alpha = min(max(alpha, 1e-12), 1e3)
        elif opts.step_rule == "backtracking":
            alpha *= 2.0

        u, g, eb = u_new, g_new, eb_new
        gnorm = float(np.linalg.norm(g))
        res = gnorm / max(float(np.linalg.norm(u)), 1e-300)
        if opts.record_trace:
            trace.append((it, eb.total, eb.dirichlet, eb.potential, eb.penalty, res))
        if res <= tol:
            converged = True
            break
        if it % 1000 == 0:
            logger.debug("iter %d energy %.6f residual %.3e", it, eb.total, res)

    return MinimizeResult(u, converged, it, res, eb, trace)


@dataclass
class ContinuationRung:
    params: EnergyParams
    mesh: Mesh
    assembly: Assembly
    result: MinimizeResult


def continuation_minimize(
    domain,
    data_factory: Callable[[object], object],
    epsilons: Sequence[float],
    base_params: EnergyParams,
    seeds: SeedSpec,
    h_rule: Callable[[float], float],
    opts: MinimizeOptions = MinimizeOptions(),
    rng: Optional[np.random.Generator] = None,
) -> List[ContinuationRung]:
    """Warm-started descent down a decreasing ladder of core sizes.

    Each rung gets its own mesh at h_rule(eps); the previous solution is
    transferred by P1 interpolation (and re-projected in strong mode).
    """
    eps_sorted = list(epsilons)
    if any(b >= a for a, b in zip(eps_sorted, eps_sorted[1:])):
        raise ParameterError("continuation schedule must be strictly decreasing")
    rungs: List[ContinuationRung] = []
    prev: Optional[ContinuationRung] = None
    for eps in eps_sorted:
        mesh = triangulate(domain, h_rule(eps))
        asm = Assembly(mesh, data_factory(domain))
        params = base_params.with_epsilon(eps)
        if prev is None:
            u0 = init_field(asm, params, seeds, rng=rng)
        else:
            u0 = prev.mesh.locator().interpolate(prev.result.u, mesh.vertices)
            if not params.weak:
                project_strong(asm, u0, inplace=True)
        result = minimize(asm, u0, params, opts)
        rung = ContinuationRung(params=params, mesh=mesh, assembly=asm, result=result)
        rungs.append(rung)
        prev = rung
    return rungs
