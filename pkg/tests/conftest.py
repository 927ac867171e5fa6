import numpy as np
import pytest

from spdctomo.fileio import compensator_from_config, crystal_from_config
from spdctomo.tomography import DensityMatrix

# Reference MLE reconstructions of the two benchmark sidebands (the phase-0
# and phase -0.4*pi states), used as regression targets for purity and
# fidelity.  Tabulated with the frequency-arm photon in the first ket slot;
# swap_arms() converts to this package's angular-arm-first convention.
RHO_BENCH_ZERO = np.array(
    [
        [0.0068, -0.0356 - 0.0127j, -0.0370 + 0.0004j, -0.0003 + 0.0005j],
        [-0.0356 + 0.0127j, 0.4615, 0.4369 - 0.0258j, 0.0095 + 0.0225j],
        [-0.0370 - 0.0004j, 0.4369 + 0.0258j, 0.5275, 0.0057 + 0.0243j],
        [-0.0003 - 0.0005j, 0.0095 - 0.0225j, 0.0057 - 0.0243j, 0.0042],
    ]
)

RHO_BENCH_TILTED = np.array(
    [
        [0.0073, -0.0170 + 0.0146j, 0.0074 + 0.0108j, -0.0028 - 0.0030j],
        [-0.0170 - 0.0146j, 0.4840, 0.1430 - 0.4071j, -0.0010 - 0.0128j],
        [0.0074 - 0.0108j, 0.1430 + 0.4071j, 0.5043, 0.0181 - 0.0024j],
        [-0.0028 + 0.0030j, -0.0010 + 0.0128j, 0.0181 + 0.0024j, 0.0044],
    ]
)


@pytest.fixture(scope="session")
def bbo():
    return crystal_from_config("bbo_type2_406nm")


@pytest.fixture(scope="session")
def quartz():
    return compensator_from_config("quartz_comp_6p5mm")


@pytest.fixture(scope="session")
def rho_bench_zero():
    return DensityMatrix(RHO_BENCH_ZERO)


@pytest.fixture(scope="session")
def rho_bench_tilted():
    return DensityMatrix(RHO_BENCH_TILTED)


def random_physical_state(rng):
    """Full-rank random density matrix (Ginibre ensemble)."""
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho).real)
