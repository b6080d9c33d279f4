import numpy as np
import pytest

from fraclayer.core import GridFunction, Potential, SpectralMeasure
from fraclayer.layer_solver import SolverConfig, continuation_solve


def arctan_layer(x):
    return (2.0 / np.pi) * np.arctan(x)


@pytest.fixture(scope="session")
def pn_measure():
    return SpectralMeasure.single(0.5)


@pytest.fixture(scope="session")
def pn_potential():
    return Potential.peierls_nabarro()


@pytest.fixture(scope="session")
def pn_profile(pn_measure, pn_potential):
    """Converged half-Laplacian layer on a medium grid, shared across tests."""
    cfg = SolverConfig(
        delta_schedule=(1e-2, 1e-3, 0.0),
        R_schedule=(25.0, 50.0),
        tol=5e-5,
        h_target=0.05,
    )
    return continuation_solve(cfg, pn_measure, pn_potential)


@pytest.fixture(scope="session")
def quartic_mix_profile():
    m = SpectralMeasure.from_config([[0.3, 0.5], [0.7, 0.5]])
    p = Potential.quartic()
    cfg = SolverConfig(
        delta_schedule=(1e-2, 0.0),
        R_schedule=(20.0, 40.0),
        tol=1e-4,
        h_target=0.05,
    )
    return continuation_solve(cfg, m, p)


@pytest.fixture()
def arctan_grid():
    return GridFunction.from_callable(arctan_layer, 200.0, 4096, tail="layer")
