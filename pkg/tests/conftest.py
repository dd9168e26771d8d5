"""Shared fixtures: meshes, assemblies, and a pair of converged reference runs.

Everything expensive is session-scoped so the unit tests stay fast; the
acceptance ladders live in test_acceptance.py with their own fixtures.
"""

import numpy as np
import pytest

from boojum.geometry import unit_disc, tangential_data
from boojum.mesh import triangulate
from boojum.energy import Assembly, EnergyParams
from boojum.minimizer import SeedSpec, MinimizeOptions, init_field, minimize


@pytest.fixture(scope="session")
def disc():
    return unit_disc()


@pytest.fixture(scope="session")
def tdata(disc):
    return tangential_data(disc)


@pytest.fixture(scope="session")
def mesh_coarse(disc):
    return triangulate(disc, 0.1)


@pytest.fixture(scope="session")
def mesh_fine(disc):
    return triangulate(disc, 0.025)


@pytest.fixture(scope="session")
def asm_coarse(mesh_coarse, tdata):
    return Assembly(mesh_coarse, tdata)


@pytest.fixture(scope="session")
def asm_fine(mesh_fine, tdata):
    return Assembly(mesh_fine, tdata)


@pytest.fixture(scope="session")
def weak_run(asm_fine):
    """Converged weak-anchoring minimizer at eps=0.1, s=0.5, antipodal seeding."""
    params = EnergyParams(epsilon=0.1, mode="weak", s=0.5)
    seeds = SeedSpec(boundary=((0.0, 1), (np.pi, 1)))
    u0 = init_field(asm_fine, params, seeds)
    res = minimize(asm_fine, u0, params, MinimizeOptions(max_iters=20000))
    assert res.converged
    return params, res


@pytest.fixture(scope="session")
def strong_run(asm_fine):
    """Converged strong-anchoring minimizer at eps=0.1 with one interior vortex."""
    params = EnergyParams(epsilon=0.1, mode="strong")
    seeds = SeedSpec(interior=((0.0, 0.0, 1),))
    u0 = init_field(asm_fine, params, seeds)
    res = minimize(asm_fine, u0, params, MinimizeOptions(max_iters=20000))
    assert res.converged
    return params, res
