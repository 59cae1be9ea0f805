import math

import numpy as np
import pytest

from hybridfive import MechanismDims, TaskSpec, forward_effector
from hybridfive.sampledata import load_sample_mechanism, load_sample_task


@pytest.fixture(scope="session")
def demo_dims() -> MechanismDims:
    return load_sample_mechanism()


@pytest.fixture(scope="session")
def demo_task() -> TaskSpec:
    return load_sample_task()


def make_roundtrip_task(dims, profile_fn, k=72, cv_speed=2.0 * math.pi, branch=1):
    """Task generated from a machine's own forward kinematics."""
    theta2 = np.arange(k) * (2.0 * math.pi / k)
    theta5 = profile_fn(theta2)
    points = [
        forward_effector(dims, float(t2), float(t5), branch=branch)
        for t2, t5 in zip(theta2, theta5)
    ]
    task = TaskSpec(
        samples=tuple((float(t2), pt) for t2, pt in zip(theta2, points)),
        cv_speed=cv_speed,
    )
    return task, theta5
