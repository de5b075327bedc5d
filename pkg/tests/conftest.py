import numpy as np
import pytest

from rankwalk import RegressionData, ScoreVector


@pytest.fixture
def worked():
    """Three collinear design points under a tent-shaped response.

    With weights (-1, 0, 1) the loss is the residual range; it is minimized
    at beta = 0 with value 1, and small enough to recheck everything by hand.
    """
    data = RegressionData(np.array([[0.0], [1.0], [2.0]]), np.array([0.0, 1.0, 0.0]))
    return data, ScoreVector(np.array([-1.0, 0.0, 1.0]))
