import numpy as np
import pytest

from bisac import BistaticScenario, OfdmNumerology, ScenarioEnsemble


@pytest.fixture
def num():
    """Default frame numerology: 70 x 50 grid, 200 kHz, 1 us CP, 30 GHz."""
    return OfdmNumerology()


@pytest.fixture
def ensemble():
    return ScenarioEnsemble()


@pytest.fixture
def reference_scenario():
    """Symmetric scene used throughout: equal legs of sqrt(25000) m."""
    return BistaticScenario(
        tx_pos=np.array([-40.0, 0.0]),
        rx_pos=np.array([0.0, 40.0]),
        target_pos=np.array([90.0, -90.0]),
        speed=0.0,
        delta=0.0,
    )
