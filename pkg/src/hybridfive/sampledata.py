"""Paths to the bundled demo data.

The demo machine (p=150, q=250, r=300, s=150 mm, CV pivot at the origin,
servo pivot at (250, 0)) ships with a task generated from its own forward
kinematics, a matching servo displacement profile, and plant/gains configs
tuned for it at 60 rpm. See scripts/make_sample_data.py for regeneration.
"""

from __future__ import annotations

from pathlib import Path

from .control import ControllerGains, PlantConfig, load_gains_pair
from .mechanism import MechanismDims, TaskSpec
from .motion import read_profile_csv

_DATA_DIR = Path(__file__).parent / "data"


def data_dir() -> Path:
    return _DATA_DIR


def sample_mechanism_path() -> Path:
    return _DATA_DIR / "sample_mechanism.json"


def sample_task_path() -> Path:
    return _DATA_DIR / "sample_task.json"


def sample_profile_path() -> Path:
    return _DATA_DIR / "servo_profile.csv"


def sample_plant_path() -> Path:
    return _DATA_DIR / "plant.json"


def sample_gains_path() -> Path:
    return _DATA_DIR / "gains.json"


def load_sample_mechanism() -> MechanismDims:
    return MechanismDims.load(sample_mechanism_path())


def load_sample_task() -> TaskSpec:
    return TaskSpec.load(sample_task_path())


def load_sample_profile():
    return read_profile_csv(sample_profile_path())


def load_sample_plant() -> PlantConfig:
    return PlantConfig.load(sample_plant_path())


def load_sample_gains() -> tuple[ControllerGains, ControllerGains]:
    return load_gains_pair(sample_gains_path())
