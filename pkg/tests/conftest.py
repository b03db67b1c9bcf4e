import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from modules.fock_numeric import Ensemble, FockSpace, PhasePoint  # noqa: E402
from modules.poly_dsl import parse_poly  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def harmonic():
    return parse_poly("0.5*pi1^2 + 0.5*phi1^2")


@pytest.fixture
def quartic():
    return parse_poly("0.5*pi1^2 + 0.5*phi1^2 + 0.1*phi1^4")


@pytest.fixture
def space_1x30():
    return FockSpace(1, 30)


@pytest.fixture
def two_point_ensemble():
    return Ensemble(
        (PhasePoint([0.6], [0.2]), PhasePoint([-0.3], [0.5])),
        np.array([0.5, 0.5]),
    )
