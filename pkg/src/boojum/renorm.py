"""Renormalized interaction energies and energy-expansion fits.

The interior renormalized energy W(p) is computed from the harmonic
conjugate of the limiting phase: with L = ln|x - p| and a single-valued
harmonic correction psi solving a Neumann problem whose data is the
anchoring phase rate minus the normal derivative of L,

    W(p) = 1/2 * int_G L dL/dn ds
         + int_G (psi - psi(p)) dL/dn ds
         + 1/2 * int_Om |grad psi|^2.

The boundary-pair energy on the unit disc is the explicit -pi*ln|q1 - q2|.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .energy import Assembly
from .errors import DivergenceError, FitError, ParameterError
from .geometry import TWO_PI, _GL_NODES, _GL_WEIGHTS

__all__ = [
    "w_boundary",
    "w_interior",
    "FitResult",
    "fit_expansion",
    "compare_configs",
]

CORE_CAVEAT = (
    "leading-order ranking: core constants of unlike defect types are not included"
)


def w_boundary(q1, q2) -> float:
    """Renormalized energy of a pair of unit boundary defects on the unit disc."""
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    for q in (q1, q2):
        if abs(np.hypot(q[0], q[1]) - 1.0) > 1e-8:
            raise ParameterError(f"point {q} does not lie on the unit circle")
    d = float(np.hypot(q1[0] - q2[0], q1[1] - q2[1]))
    if d == 0.0:
        raise DivergenceError("coincident boundary defects")
    return -np.pi * np.log(d)


def _boundary_quadrature(asm: Assembly):
    """Gauss points along each boundary edge in parameter space."""
    t = asm.mesh.boundary_param
    t_next = np.roll(t, -1).copy()
    t_next[-1] += TWO_PI
    ta = t[:, None] + (t_next - t)[:, None] * _GL_NODES[None, :]
    wt = (t_next - t)[:, None] * _GL_WEIGHTS[None, :]
    return t, t_next, ta, wt


def _dnL(domain, tq: np.ndarray, p: np.ndarray):
    """Normal derivative of ln|x - p| on the exact curve, plus the metric."""
    b = domain.boundary_point(tq.ravel()).reshape(*tq.shape, 2)
    n = domain.outward_normal(tq.ravel()).reshape(*tq.shape, 2)
    J = domain.metric(tq)
    d = b - p
    r2 = d[..., 0] ** 2 + d[..., 1] ** 2
    dn = (d[..., 0] * n[..., 0] + d[..., 1] * n[..., 1]) / r2
    L = 0.5 * np.log(r2)
    return L, dn, J


def w_interior(asm: Assembly, p) -> float:
    """Renormalized energy of a single interior unit defect at p.

    Requires anchoring data of degree one (otherwise the conjugate Neumann
    problem is incompatible).  The Neumann solve is pinned to zero mean with
    a lumped-mass multiplier; the reported value is invariant under constant
    shifts of the correction by construction.
    """
    if asm.data.degree != 1:
        raise ParameterError("interior renormalized energy needs degree-one anchoring")
    p = np.asarray(p, dtype=float)
    domain = asm.data.domain
    if not domain.contains(p) or domain.dist_to_boundary(p) <= 2.0 * asm.h_est:
        raise ParameterError("defect position must lie well inside the domain")

    mesh = asm.mesh
    t, t_next, ta, wt = _boundary_quadrature(asm)
    L, dn, J = _dnL(domain, ta, p)
    lam = (ta - t[:, None]) / (t_next - t)[:, None]  # hat-function coordinate

    # Neumann load: anchoring phase rate minus the log flux, against each hat
    rate = asm.data.phase_rate(ta)
    dat = rate - dn * J
    n_b = len(t)
    load = np.zeros(mesh.n_vertices)
    head = np.sum(dat * lam * wt, axis=1)
    tail = np.sum(dat * (1.0 - lam) * wt, axis=1)
    loop = mesh.boundary_loop
    np.add.at(load, loop, tail)
    np.add.at(load, np.roll(loop, -1), head)
    total = float(load.sum())
    if abs(total) > 1e-10:
        raise ParameterError(
            f"incompatible conjugate data (flux {total:.3e}); is the defect inside?"
        )

    K = asm.stiffness().tocsr()
    mass = np.zeros(mesh.n_vertices)
    np.add.at(mass, asm.tri.ravel(), np.repeat(asm.area / 3.0, 3))
    aug = sp.bmat(
        [[K, mass[:, None]], [mass[None, :], None]], format="csc"
    )
    sol = spla.spsolve(aug, np.concatenate([load, [0.0]]))
    psi = sol[:-1]

    term1 = 0.5 * float(np.sum(L * dn * J * wt))
    psi_p = float(mesh.locator().interpolate(psi[:, None], p[None, :])[0, 0])
    psi_line = psi[loop][:, None] * (1.0 - lam) + psi[np.roll(loop, -1)][:, None] * lam
    term2 = float(np.sum((psi_line - psi_p) * dn * J * wt))
    term3 = 0.5 * float(psi @ (K @ psi))
    return term1 + term2 + term3


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    max_residual: float
    predicted_slope: Optional[float] = None


def fit_expansion(
    epsilons: Sequence[float],
    energies: Sequence[float],
    model: Optional[str] = None,
    degree: int = 1,
    s: float = 1.0,
) -> FitResult:
    """Least-squares line through (|ln eps|, E).

    The optional model name fixes the predicted slope: "pi_D_logeps" for the
    unconstrained-core expansion (pi * degree per log), "pi_s_D_logeps" for
    the penalized one (pi * s * degree per log).
    """
    eps = np.asarray(epsilons, dtype=float)
    en = np.asarray(energies, dtype=float)
    if len(eps) < 2 or len(eps) != len(en):
        raise FitError("need at least two (epsilon, energy) pairs")
    if np.any(eps <= 0.0) or np.any(eps >= 1.0):
        raise FitError("core sizes must lie in (0, 1)")
    predicted = None
    if model is not None:
        if model == "pi_D_logeps":
            predicted = np.pi * degree
        elif model == "pi_s_D_logeps":
            predicted = np.pi * s * degree
        else:
            raise ParameterError(f"unknown expansion model {model!r}")
    x = np.abs(np.log(eps))
    slope, intercept = np.polyfit(x, en, 1)
    resid = np.abs(slope * x + intercept - en)
    return FitResult(float(slope), float(intercept), float(resid.max()), predicted)


def compare_configs(asm: Assembly, candidates: Sequence[Tuple[str, object]]):
    """Rank defect configurations by renormalized interaction energy.

    Candidates are ("interior", p) or ("boundary", (q1, q2)) entries.  The
    returned rows are sorted by W and each carries the core-energy caveat.
    """
    rows = []
    for kind, payload in candidates:
        if kind == "interior":
            w = w_interior(asm, payload)
            desc = f"interior defect at ({payload[0]:.4g}, {payload[1]:.4g})"
        elif kind == "boundary":
            q1, q2 = payload
            w = w_boundary(q1, q2)
            desc = "boundary pair"
        else:
            raise ParameterError(f"unknown candidate kind {kind!r}")
        rows.append({"kind": kind, "description": desc, "w": w, "caveat": CORE_CAVEAT})
    rows.sort(key=lambda r: r["w"])
    return rows
