import hypothesis
import numpy as np
import pytest

import channelsim as cs

hypothesis.settings.register_profile(
    "default", max_examples=25, deadline=None, derandomize=True
)
hypothesis.settings.load_profile("default")


@pytest.fixture(scope="session")
def small_grid():
    return cs.build_grid(96, 48, 0.25, 0.25, -12.0, -6.0)


@pytest.fixture(scope="session")
def small_packet(small_grid):
    spec = cs.PacketSpec(xc=-4.0, yc=0.0, sx=1.0, sy=1.0, k0=1.0)
    return cs.init_gaussian(small_grid, spec)


def random_field(grid, seed):
    rng = np.random.default_rng(seed)
    data = rng.standard_normal((grid.ny, grid.nx)) + 1j * rng.standard_normal((grid.ny, grid.nx))
    return cs.Field(grid, data)
