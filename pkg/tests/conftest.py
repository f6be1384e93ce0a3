import numpy as np
import pytest

from vrrt.kinematics import RobotModel, default_robot
from vrrt.rendering import RenderParams, default_camera


@pytest.fixture(scope="session")
def model():
    return default_robot()


@pytest.fixture(scope="session")
def camera(model):
    return default_camera(model)


@pytest.fixture(scope="session")
def render_params():
    return RenderParams()


@pytest.fixture(scope="session")
def two_link():
    return RobotModel(
        link_lengths=np.array([1.0, 0.7]),
        joint_lower=np.array([-np.pi, -np.pi]),
        joint_upper=np.array([np.pi, np.pi]),
        blobs_per_link=4,
    )
