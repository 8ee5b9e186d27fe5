import numpy as np
import pytest
from hypothesis import strategies as st

from tilthex.allocation import ActuatorGeometry, build_matrices
from tilthex.vehicle import VehicleParams


def unit_quats():
    """Strategy producing well-conditioned unit quaternions."""
    comp = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)
    return (
        st.tuples(comp, comp, comp, comp)
        .map(np.array)
        .filter(lambda q: np.linalg.norm(q) > 1e-2)
        .map(lambda q: q / np.linalg.norm(q))
    )


def vec3(limit=10.0):
    comp = st.floats(-limit, limit, allow_nan=False, allow_infinity=False)
    return st.tuples(comp, comp, comp).map(np.array)


@pytest.fixture(scope="session")
def params():
    return VehicleParams()


@pytest.fixture(scope="session")
def geometry():
    return ActuatorGeometry()


@pytest.fixture(scope="session")
def alloc_mats(geometry):
    return build_matrices(geometry)
