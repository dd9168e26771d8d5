"""Star-shaped planar domains and unit-vector boundary anchoring data.

A domain is described by a trigonometric radius profile rho(theta) > 0; its
boundary is parametrized by the polar angle t in [0, 2*pi).  Anchoring data
along the boundary is a unit vector field g(t) = (cos gamma(t), sin gamma(t))
given through a continuous phase lifting gamma with an integer winding number.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    DegeneratePointError,
    OutOfBandError,
    ParameterError,
)

TWO_PI = 2.0 * np.pi

# nodes/weights reused for per-edge Gauss-Legendre quadrature on [0, 1]
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_GL_NODES = 0.5 * (_GL_NODES + 1.0)
_GL_WEIGHTS = 0.5 * _GL_WEIGHTS


def _rot90(v: np.ndarray) -> np.ndarray:
    """Rotate vectors by +pi/2; works on (..., 2) arrays."""
    out = np.empty_like(v)
    out[..., 0] = -v[..., 1]
    out[..., 1] = v[..., 0]
    return out


@dataclass(frozen=True)
class StarDomain:
    """Star-shaped domain rho(theta) = const + sum_k a_k cos(k theta) + b_k sin(k theta).

    Parameters
    ----------
    const : float
        Constant Fourier term; 1.0 gives the unit disc when no modes are set.
    cos_coeffs, sin_coeffs : sequence of float
        Coefficients of cos(k*theta) / sin(k*theta) for k = 1, 2, ...

    The profile must stay positive; this is checked on a fine sample at
    construction time.
    """

    const: float = 1.0
    cos_coeffs: tuple = ()
    sin_coeffs: tuple = ()
    _min_rho: float = field(init=False, repr=False, default=0.0)

    def __post_init__(self):
        ts = np.linspace(0.0, TWO_PI, 4096, endpoint=False)
        r = self.rho(ts)
        if not np.all(r > 0.0):
            raise ParameterError("radius profile must be strictly positive")
        object.__setattr__(self, "_min_rho", float(r.min()))

    @property
    def is_disc(self) -> bool:
        return not self.cos_coeffs and not self.sin_coeffs and self.const == 1.0

    @property
    def min_radius(self) -> float:
        return self._min_rho

    def _modes(self, t, deriv: int):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        if deriv == 0:
            out = out + self.const
        for k, a in enumerate(self.cos_coeffs, start=1):
            if deriv == 0:
                out = out + a * np.cos(k * t)
            elif deriv == 1:
                out = out - a * k * np.sin(k * t)
            else:
                out = out - a * k * k * np.cos(k * t)
        for k, b in enumerate(self.sin_coeffs, start=1):
            if deriv == 0:
                out = out + b * np.sin(k * t)
            elif deriv == 1:
                out = out + b * k * np.cos(k * t)
            else:
                out = out - b * k * k * np.sin(k * t)
        return out

    def rho(self, t):
        return self._modes(t, 0)

    def drho(self, t):
        return self._modes(t, 1)

    def d2rho(self, t):
        return self._modes(t, 2)

    def boundary_point(self, t):
        """Boundary position(s) at parameter t; vectorized over t."""
        t = np.asarray(t, dtype=float)
        r = self.rho(t)
        return np.stack([r * np.cos(t), r * np.sin(t)], axis=-1)

    def boundary_velocity(self, t):
        """d/dt of boundary_point (not normalized)."""
        t = np.asarray(t, dtype=float)
        r, dr = self.rho(t), self.drho(t)
        c, s = np.cos(t), np.sin(t)
        return np.stack([dr * c - r * s, dr * s + r * c], axis=-1)

    def boundary_acceleration(self, t):
        t = np.asarray(t, dtype=float)
        r, dr, ddr = self.rho(t), self.drho(t), self.d2rho(t)
        c, s = np.cos(t), np.sin(t)
        ax = (ddr - r) * c - 2.0 * dr * s
        ay = (ddr - r) * s + 2.0 * dr * c
        return np.stack([ax, ay], axis=-1)

    def metric(self, t):
        """Arclength factor |x'(t)| = sqrt(rho^2 + rho'^2)."""
        t = np.asarray(t, dtype=float)
        return np.hypot(self.rho(t), self.drho(t))

    def tangent(self, t):
        """Unit tangent in the direction of increasing t (counterclockwise)."""
        v = self.boundary_velocity(t)
        return v / np.linalg.norm(v, axis=-1, keepdims=True)

    def outward_normal(self, t):
        """Unit outward normal (tangent rotated by -pi/2)."""
        return -_rot90(self.tangent(t))

    def tangent_phase(self, t):
        """Continuous lifting of the tangent direction angle.

        For rho > 0 the tangent angle is t + atan2(rho, rho') with the atan2
        term confined to (0, pi), so this expression is itself a continuous
        lifting with winding 1.
        """
        t = np.asarray(t, dtype=float)
        return t + np.arctan2(self.rho(t), self.drho(t))

    def tangent_phase_rate(self, t):
        """d/dt of tangent_phase."""
        t = np.asarray(t, dtype=float)
        r, dr, ddr = self.rho(t), self.drho(t), self.d2rho(t)
        return 1.0 + (dr * dr - r * ddr) / (r * r + dr * dr)

    def arclength(self, t0: float, t1: float) -> float:
        """Arclength of the boundary arc from t0 to t1 (Gauss quadrature)."""
        span = t1 - t0
        ts = t0 + span * _GL_NODES
        return float(span * np.dot(_GL_WEIGHTS, self.metric(ts)))

    def contains(self, x) -> np.ndarray:
        """Pointwise test r <= rho(theta); vectorized over (..., 2) arrays."""
        x = np.asarray(x, dtype=float)
        r = np.hypot(x[..., 0], x[..., 1])
        th = np.arctan2(x[..., 1], x[..., 0])
        return r <= self.rho(th)

    def project(self, x) -> float:
        """Parameter of the boundary point nearest to x.

        Coarse 128-point scan followed by Newton iterations on the stationarity
        condition <x - b(t), b'(t)> = 0.
        """
        x = np.asarray(x, dtype=float)
        if self.is_disc:
            if x[0] == 0.0 and x[1] == 0.0:
                raise DegeneratePointError("projection undefined at the center")
            return float(np.arctan2(x[1], x[0]) % TWO_PI)
        ts = np.linspace(0.0, TWO_PI, 128, endpoint=False)
        pts = self.boundary_point(ts)
        t = float(ts[np.argmin(np.sum((pts - x) ** 2, axis=-1))])
        for _ in range(40):
            b = self.boundary_point(t)
            v = self.boundary_velocity(t)
            a = self.boundary_acceleration(t)
            d = x - b
            f = -float(np.dot(d, v))
            fp = float(np.dot(v, v)) - float(np.dot(d, a))
            if fp <= 0.0:
                break
            step = f / fp
            t -= step
            if abs(step) < 1e-14:
                break
        return float(t % TWO_PI)

    def dist_to_boundary(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x[0] == 0.0 and x[1] == 0.0:
            # nearest-point parameter is ambiguous at the center, the distance isn't
            return self._min_rho
        t = self.project(x)
        return float(np.linalg.norm(x - self.boundary_point(t)))


def unit_disc() -> StarDomain:
    return StarDomain()


@dataclass(frozen=True)
class BoundaryData:
    """Unit anchoring field g on the boundary of a star domain.

    The field is stored through a continuous phase lifting: g(t) =
    (cos gamma(t), sin gamma(t)) with gamma(2*pi) - gamma(0) = 2*pi*degree.
    """

    domain: StarDomain
    degree: int
    phase_const: float = 0.0
    cos_coeffs: tuple = ()
    sin_coeffs: tuple = ()
    tangential: bool = False

    def __post_init__(self):
        gain = self.phase(TWO_PI) - self.phase(0.0)
        if abs(gain / TWO_PI - self.degree) > 1e-9:
            raise ParameterError(
                "phase lifting winding does not match the declared degree"
            )

    def phase(self, t):
        """Continuous phase lifting gamma(t); accepts unreduced parameters."""
        t = np.asarray(t, dtype=float)
        if self.tangential:
            base = self.domain.tangent_phase(t)
        else:
            base = self.degree * t
        out = base + self.phase_const
        for k, a in enumerate(self.cos_coeffs, start=1):
            out = out + a * np.cos(k * t)
        for k, b in enumerate(self.sin_coeffs, start=1):
            out = out + b * np.sin(k * t)
        return out

    def phase_rate(self, t):
        """d gamma / dt."""
        t = np.asarray(t, dtype=float)
        if self.tangential:
            out = self.domain.tangent_phase_rate(t)
        else:
            out = np.full_like(t, float(self.degree))
        for k, a in enumerate(self.cos_coeffs, start=1):
            out = out - a * k * np.sin(k * t)
        for k, b in enumerate(self.sin_coeffs, start=1):
            out = out + b * k * np.cos(k * t)
        return out

    def g(self, t):
        ph = self.phase(t)
        return np.stack([np.cos(ph), np.sin(ph)], axis=-1)

    def g_perp(self, t):
        """g rotated by +pi/2."""
        return _rot90(self.g(t))

    def sampled_winding(self, samples: int = 4096) -> int:
        """Winding of g from summed wrapped phase increments on a fine sample."""
        ts = np.linspace(0.0, TWO_PI, samples + 1)
        ph = np.arctan2(*self.g(ts)[:, ::-1].T)
        inc = np.diff(ph)
        inc = np.mod(inc + np.pi, TWO_PI) - np.pi
        total = inc.sum() / TWO_PI
        return int(np.floor(total + 0.5))


def tangential_data(domain: StarDomain) -> BoundaryData:
    """Anchoring along the positively oriented tangent (degree 1)."""
    return BoundaryData(domain=domain, degree=1, tangential=True)


def fourier_data(
    domain: StarDomain,
    degree: int,
    phase_const: float = 0.0,
    cos_coeffs: Sequence[float] = (),
    sin_coeffs: Sequence[float] = (),
) -> BoundaryData:
    return BoundaryData(
        domain=domain,
        degree=degree,
        phase_const=phase_const,
        cos_coeffs=tuple(cos_coeffs),
        sin_coeffs=tuple(sin_coeffs),
    )


@dataclass(frozen=True)
class TubularBand:
    """Collar {x : dist(x, boundary) < width} used to extend g off the boundary."""

    domain: StarDomain
    data: BoundaryData
    width: float

    @classmethod
    def default(cls, domain: StarDomain, data: BoundaryData) -> "TubularBand":
        return cls(domain=domain, data=data, width=0.2 * domain.min_radius)

    def project_param(self, x) -> float:
        t = self.domain.project(x)
        d = float(np.linalg.norm(np.asarray(x, float) - self.domain.boundary_point(t)))
        if d >= self.width:
            raise OutOfBandError(
                f"point at distance {d:.3g} from the boundary (band width {self.width:.3g})"
            )
        return t

    def extend_g(self, x) -> np.ndarray:
        """g evaluated at the nearest boundary point of an in-band x."""
        return self.data.g(self.project_param(x))

    def extend_g_perp(self, x) -> np.ndarray:
        return self.data.g_perp(self.project_param(x))


def local_polar(domain: StarDomain, t0: float, x) -> tuple:
    """Polar coordinates of x about the boundary point at parameter t0.

    The angle is measured from the positively oriented tangent at t0 and is
    wrapped to [-pi/2, 3*pi/2) so that interior points near the boundary read
    as theta in (theta1, theta2) with theta1 ~ 0 and theta2 ~ pi.

    Returns
    -------
    (r, theta) : floats
    """
    x = np.asarray(x, dtype=float)
    x0 = domain.boundary_point(t0)
    d = x - x0
    r = float(np.hypot(d[0], d[1]))
    if r == 0.0:
        raise DegeneratePointError("local polar angle undefined at the base point")
    tau = domain.tangent(t0)
    inward = _rot90(tau)
    theta = float(np.arctan2(np.dot(d, inward), np.dot(d, tau)))
    if theta < -0.5 * np.pi:
        theta += TWO_PI
    return r, theta


def decompose(u, g):
    """Split field values into components along g and along g rotated by +pi/2.

    Parameters
    ----------
    u, g : (..., 2) arrays

    Returns
    -------
    (u_par, u_perp) : arrays with u = u_par * g + u_perp * g_perp exactly.
    """
    u = np.asarray(u, dtype=float)
    g = np.asarray(g, dtype=float)
    gp = _rot90(g)
    u_par = np.sum(u * g, axis=-1)
    u_perp = np.sum(u * gp, axis=-1)
    return u_par, u_perp


def recompose(u_par, u_perp, g):
    g = np.asarray(g, dtype=float)
    gp = _rot90(g)
    return u_par[..., None] * g + u_perp[..., None] * gp
