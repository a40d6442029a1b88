import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import cuspflow as cf


@pytest.fixture(scope="session")
def fig8():
    T = cf.load_triangulation(cf.bundled_path("figure8.tri"))
    cf.validate(T)
    return T


@pytest.fixture(scope="session")
def fig8_C(fig8):
    return cf.build_cusp_matrix(fig8)
