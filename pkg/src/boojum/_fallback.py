"""Pure-numpy assembly kernels (fallback when the compiled core is absent).

Same contract as boojum._accel: `bulk_energy` returns the Dirichlet and
potential parts; `bulk_gradient` additionally accumulates the first variation
into a caller-zeroed (n, 2) array.
"""

from __future__ import annotations

import numpy as np


def _p1_gradients(tri, gx, gy, u):
    u0 = u[tri[:, 0]]
    u1 = u[tri[:, 1]]
    u2 = u[tri[:, 2]]
    dx = gx[:, 0, None] * u0 + gx[:, 1, None] * u1 + gx[:, 2, None] * u2
    dy = gy[:, 0, None] * u0 + gy[:, 1, None] * u1 + gy[:, 2, None] * u2
    return u0, u1, u2, dx, dy


def bulk_energy(tri, area, gx, gy, u, inv_eps2):
    u0, u1, u2, dx, dy = _p1_gradients(tri, gx, gy, u)
    dirichlet = 0.5 * float(np.dot(area, np.sum(dx * dx + dy * dy, axis=1)))
    pot = np.zeros(len(tri))
    for a, b in ((u0, u1), (u1, u2), (u2, u0)):
        m = 0.5 * (a + b)
        s = 1.0 - np.sum(m * m, axis=1)
        pot += s * s
    potential = 0.25 * inv_eps2 * float(np.dot(area / 3.0, pot))
    return dirichlet, potential


def bulk_gradient(tri, area, gx, gy, u, inv_eps2, grad):
    n = len(u)
    u0, u1, u2, dx, dy = _p1_gradients(tri, gx, gy, u)
    dirichlet = 0.5 * float(np.dot(area, np.sum(dx * dx + dy * dy, axis=1)))

    contrib = np.empty((len(tri), 3, 2))
    for slot in range(3):
        contrib[:, slot] = (area * gx[:, slot])[:, None] * dx
        contrib[:, slot] += (area * gy[:, slot])[:, None] * dy

    pot = np.zeros(len(tri))
    pairs = ((0, 1, u0, u1), (1, 2, u1, u2), (2, 0, u2, u0))
    for sa, sb, a, b in pairs:
        m = 0.5 * (a + b)
        s = 1.0 - np.sum(m * m, axis=1)
        pot += s * s
        q = (area * inv_eps2 / 6.0) * s
        contrib[:, sa] -= q[:, None] * m
        contrib[:, sb] -= q[:, None] * m
    potential = 0.25 * inv_eps2 * float(np.dot(area / 3.0, pot))

    for slot in range(3):
        idx = tri[:, slot]
        grad[:, 0] += np.bincount(idx, weights=contrib[:, slot, 0], minlength=n)
        grad[:, 1] += np.bincount(idx, weights=contrib[:, slot, 1], minlength=n)
    return dirichlet, potential
