import numpy as np
import pytest

import bresse_lab as bl


@pytest.fixture
def params():
    return bl.BeamParameters()


@pytest.fixture
def grid():
    return bl.build_grid(1.0, 40)


def sine_state(grid, amp=1.0, mode=1, velocity=False):
    """Smooth zero-boundary state: identical sine profile in all three fields."""
    f = amp * np.sin(mode * np.pi * grid.nodes / grid.length)
    z = np.zeros(grid.n)
    if velocity:
        return bl.StateZ(z.copy(), z.copy(), z.copy(), f.copy(), f.copy(),
                         f.copy())
    return bl.StateZ(f.copy(), f.copy(), f.copy(), z.copy(), z.copy(),
                     z.copy())


def random_state(grid, rng, scale=0.5, n_modes=3):
    """Random smooth state from low sine modes in all six fields."""
    x = grid.nodes / grid.length
    fields = []
    for _ in range(6):
        coef = rng.normal(scale=scale, size=n_modes)
        fields.append(sum(c * np.sin((m + 1) * np.pi * x)
                          for m, c in enumerate(coef)))
    return bl.StateZ(*fields)
