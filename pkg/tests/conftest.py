import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from potens.geometry import ExteriorMap, disk_map, ellipse_map


@pytest.fixture(scope="session")
def disk():
    return disk_map()


@pytest.fixture(scope="session")
def ellipse_half():
    return ellipse_map(0.5)


@pytest.fixture(scope="session")
def ellipse_quarter():
    return ellipse_map(0.25)


@pytest.fixture(scope="session")
def custom_map():
    emap = ExteriorMap(1.0, (0j, 0.2, 0.1j))
    emap.validate()
    return emap


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
