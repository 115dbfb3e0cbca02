import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from controller.gram_controller import GramController  # noqa: E402
from controller.solution_controller import SolutionController  # noqa: E402
from controller.spectrum_controller import SpectrumController  # noqa: E402
from models.strip_domain_model import StripDomainModel  # noqa: E402


@pytest.fixture
def domain():
    return StripDomainModel(1, [1.0], 4.0)


@pytest.fixture
def domain_2d():
    return StripDomainModel(2, [1.0, 2.0], 4.0)


@pytest.fixture
def spectrum():
    return SpectrumController()


@pytest.fixture
def solutions(spectrum):
    return SolutionController(spectrum)


@pytest.fixture
def gram():
    return GramController()


@pytest.fixture
def out_dir(tmp_path):
    return str(tmp_path / "reports")


def sample_on_grid(u, grid, element=0):
    """Closed-form values on every node of a grid."""
    from controller.solution_controller import as_span
    from models.field_model import SolutionFieldModel
    axes = (grid.t_nodes, grid.x0_nodes) + grid.cross_nodes
    mesh = np.meshgrid(*axes, indexing='ij')
    return SolutionFieldModel(grid, as_span(u).evaluate_array(mesh[0], mesh[1], *mesh[2:], element=element))


@pytest.fixture
def sampled():
    return sample_on_grid
