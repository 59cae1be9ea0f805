#!/usr/bin/env python3
"""Regenerate the bundled demo data in src/hybridfive/data/.

The demo machine is the reference five-bar (p=150, q=250, r=300, s=150 mm,
CV pivot at the origin, servo pivot at (250, 0)). Its demo task is produced
from the machine's own forward kinematics with a smooth servo profile
    theta5(theta2) = -1.2 + 0.15 sin(theta2 + 2.5)
on the positive assembly branch, so the task is exactly traceable (zero
structural error, fully mobile) and the servo motor loafs while the CV
motor carries the bulk of the load. Gains are tuned so the ten-cycle
closed-loop run is stable and cycle-periodic.
"""

import math
from pathlib import Path

import numpy as np

from hybridfive.control import ControllerGains, PlantConfig, save_gains_pair
from hybridfive.mechanism import MechanismDims, TaskSpec, forward_effector
from hybridfive.motion import write_profile_csv

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "hybridfive" / "data"

PROFILE_OFFSET = -1.2
PROFILE_AMPLITUDE = 0.15
PROFILE_PHASE = 2.5
TASK_POINTS = 72
PROFILE_POINTS = 360
CV_SPEED = 2.0 * math.pi  # rad/s: 60 rpm, 4096 counts/s at 4096 counts/rev


def servo_angle(theta2):
    return PROFILE_OFFSET + PROFILE_AMPLITUDE * np.sin(theta2 + PROFILE_PHASE)


def main() -> None:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    dims = MechanismDims(
        p=150.0, q=250.0, r=300.0, s=150.0,
        cv_ground=(0.0, 0.0), servo_ground=(250.0, 0.0),
    )
    dims.save(DATA_DIR / "sample_mechanism.json")

    theta2 = np.arange(TASK_POINTS) * (2.0 * math.pi / TASK_POINTS)
    points = [
        forward_effector(dims, float(t2), float(t5), branch=1)
        for t2, t5 in zip(theta2, servo_angle(theta2))
    ]
    task = TaskSpec(
        samples=tuple((float(t2), pt) for t2, pt in zip(theta2, points)),
        cv_speed=CV_SPEED,
    )
    task.save(DATA_DIR / "sample_task.json")

    fine = np.arange(PROFILE_POINTS) * (2.0 * math.pi / PROFILE_POINTS)
    write_profile_csv(servo_angle(fine), DATA_DIR / "servo_profile.csv")

    PlantConfig().save(DATA_DIR / "plant.json")
    gains = ControllerGains(K_P=512.0, K_I=0.0, K_D=0.0, K_V=2000.0, K_F=1600.0)
    save_gains_pair(gains, gains, DATA_DIR / "gains.json")
    print(f"wrote demo data to {DATA_DIR}")


if __name__ == "__main__":
    main()
