import numpy as np
import pytest

from dgfv import basis, euler
from dgfv.euler import GasModel


@pytest.fixture
def gas():
    return GasModel()


def random_prims(rng, shape, rho_range=(0.5, 2.0), p_range=(0.5, 2.0), vmax=1.0, dim=1):
    """Seeded random physical primitive fields: rho, vel, p."""
    rho = rng.uniform(*rho_range, size=shape)
    p = rng.uniform(*p_range, size=shape)
    vel = rng.uniform(-vmax, vmax, size=(dim,) + tuple(np.shape(rho)))
    return rho, vel, p


def random_state(rng, shape=(), dim=1, gas=GasModel(), **kw):
    rho, vel, p = random_prims(rng, shape, dim=dim, **kw)
    return euler.prim_to_cons(rho, vel, p, gas)


def operators(kind, degree):
    return basis.make_operators(kind, degree)
