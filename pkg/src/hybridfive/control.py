"""Discrete-time closed-loop simulation of the two-axis machine.

Each axis runs the same sampled controller

    V = (K_P e + K_I sum(e) + K_D (e - e_prev) - K_V (p - p_prev)
         + K_F (d - d_prev)) / divisor * 10/2048

clamped to +/-10 V, with positions fed back through resolver quantization.
The CV axis follows a constant-velocity ramp demand, the servo axis follows
a periodic displacement profile. The two axes interact through the
linkage's off-diagonal inertia terms (the machine's cross-coupling).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import InertialParams, bias_forces, effector_position, mass_matrix
from .mechanism import MechanismDims, forward_effector
from .motion import MotionProfile

TWO_PI = 2.0 * math.pi

VOLT_LIMIT = 10.0
DAC_SCALE = 10.0 / 2048.0


class UnstableSimulation(RuntimeError):
    """Position error diverged; carries the sample index where it happened."""

    def __init__(self, message: str, sample_index: int):
        super().__init__(message)
        self.sample_index = sample_index


@dataclass(frozen=True)
class ControllerGains:
    """Integer-scaled controller gains; each term is divided by ``divisor``."""

    K_P: float
    K_I: float = 0.0
    K_D: float = 0.0
    K_V: float = 0.0
    K_F: float = 0.0
    divisor: float = 256.0

    def __post_init__(self):
        for name in ("K_P", "K_I", "K_D", "K_V", "K_F", "divisor"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.K_P < 0.0:
            raise ValueError("K_P must be >= 0")
        if not self.divisor > 0.0:
            raise ValueError("divisor must be > 0")

    def to_dict(self) -> dict:
        return {
            "K_P": self.K_P,
            "K_I": self.K_I,
            "K_D": self.K_D,
            "K_V": self.K_V,
            "K_F": self.K_F,
            "divisor": self.divisor,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ControllerGains":
        return cls(**{key: float(value) for key, value in data.items()})


@dataclass(frozen=True)
class AxisParams:
    """Per-axis drive constants."""

    amp_gain: float = 0.5  # Nm/V
    rotor_inertia: float = 1e-4  # kg m^2
    friction: float = 0.01  # Nm s/rad, viscous

    def __post_init__(self):
        if not self.rotor_inertia > 0.0:
            raise ValueError("rotor_inertia must be > 0")

    def to_dict(self) -> dict:
        return {
            "amp_gain": self.amp_gain,
            "rotor_inertia": self.rotor_inertia,
            "friction": self.friction,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AxisParams":
        return cls(**{key: float(value) for key, value in data.items()})


@dataclass(frozen=True)
class PlantConfig:
    """Drives, linkage inertia, sampling and feedback resolution."""

    cv: AxisParams = field(default_factory=AxisParams)
    servo: AxisParams = field(default_factory=AxisParams)
    inertial: InertialParams = field(default_factory=InertialParams)
    sample_period: float = 0.001  # s
    resolver_resolution: int = 4096  # counts per revolution

    def __post_init__(self):
        if not self.sample_period > 0.0:
            raise ValueError("sample_period must be > 0")
        if self.resolver_resolution < 1:
            raise ValueError("resolver_resolution must be >= 1")

    def to_dict(self) -> dict:
        return {
            "cv": self.cv.to_dict(),
            "servo": self.servo.to_dict(),
            "inertial": self.inertial.to_dict(),
            "sample_period": self.sample_period,
            "resolver_resolution": self.resolver_resolution,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PlantConfig":
        return cls(
            cv=AxisParams.from_dict(data.get("cv", {})),
            servo=AxisParams.from_dict(data.get("servo", {})),
            inertial=InertialParams.from_dict(data.get("inertial", {})),
            sample_period=float(data.get("sample_period", 0.001)),
            resolver_resolution=int(data.get("resolver_resolution", 4096)),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "PlantConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class AxisLogSample:
    """One logged controller sample for one axis."""

    t: float
    d_i: int
    p_i: int
    e_i: int
    demand_cps: float
    measured_cps: float
    v_out: float


@dataclass
class AxisLog:
    """Column arrays of logged samples for one axis."""

    t: np.ndarray
    demand: np.ndarray
    measured: np.ndarray
    error: np.ndarray
    demand_cps: np.ndarray
    measured_cps: np.ndarray
    volts: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def sample(self, i: int) -> AxisLogSample:
        return AxisLogSample(
            t=float(self.t[i]),
            d_i=int(self.demand[i]),
            p_i=int(self.measured[i]),
            e_i=int(self.error[i]),
            demand_cps=float(self.demand_cps[i]),
            measured_cps=float(self.measured_cps[i]),
            v_out=float(self.volts[i]),
        )


@dataclass
class SimLog:
    """Logged samples for both axes of one run.

    ``theta`` and ``omega`` hold the unquantized state (n, 2) when the run
    was made with ``record_state=True``; otherwise they are None.
    """

    cv: AxisLog
    servo: AxisLog
    theta: np.ndarray | None = None
    omega: np.ndarray | None = None


def quantize(angle: float, resolution: int = 4096) -> int:
    """Angle to accumulated resolver counts (floor; no wrap across turns)."""
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    return math.floor(angle / TWO_PI * resolution)


def controller_step(
    gains: ControllerGains,
    e_i: float,
    error_sum: float,
    e_prev: float,
    p_i: float,
    p_prev: float,
    d_i: float,
    d_prev: float,
) -> float:
    """One controller evaluation; inputs in resolver counts, output in volts."""
    raw = (
        gains.K_P * e_i
        + gains.K_I * error_sum
        + gains.K_D * (e_i - e_prev)
        - gains.K_V * (p_i - p_prev)
        + gains.K_F * (d_i - d_prev)
    ) / gains.divisor
    volts = raw * DAC_SCALE
    return max(-VOLT_LIMIT, min(VOLT_LIMIT, volts))


def simulate(
    dims: MechanismDims,
    plant: PlantConfig,
    gains_cv: ControllerGains,
    gains_servo: ControllerGains,
    servo_profile: MotionProfile,
    cycles: int,
    cv_demand_cps: float = 4096.0,
    coupled: bool = True,
    initial_branch: int = 1,
    initial_rates: tuple[float, float] = (0.0, 0.0),
    max_error_counts: float = 1e6,
    record_state: bool = False,
) -> SimLog:
    """Fixed-step closed-loop run over a number of demand cycles.

    Demands: the CV axis ramps at ``cv_demand_cps`` counts per second; the
    servo axis follows ``servo_profile`` indexed by the CV demand phase
    (linearly interpolated between profile samples). Positions are quantized
    before feedback. Integration is semi-implicit Euler at the sample
    period, with the coupled accelerations solved from the linkage mass
    matrix plus the rotor inertias; ``coupled=False`` drops the linkage
    terms entirely, leaving two independent rotor axes.

    Raises:
        UnstableSimulation: some axis error exceeded ``max_error_counts``.
    """
    if cycles < 1:
        raise ValueError("cycles must be >= 1")
    res = plant.resolver_resolution
    dt = plant.sample_period
    cycle_seconds = res / cv_demand_cps if cv_demand_cps > 0.0 else 1.0
    n_samples = int(round(cycles * cycle_seconds / dt))

    values = servo_profile.values
    k = len(values)

    theta = np.array([0.0, float(values[0])])
    omega = np.array([float(initial_rates[0]), float(initial_rates[1])])
    rotor = np.array([plant.cv.rotor_inertia, plant.servo.rotor_inertia])
    friction = np.array([plant.cv.friction, plant.servo.friction])
    amp = np.array([plant.cv.amp_gain, plant.servo.amp_gain])
    gains = (gains_cv, gains_servo)

    effector_ref = forward_effector(dims, theta[0], theta[1], branch=initial_branch)

    columns = {
        axis: {name: np.empty(n_samples) for name in
               ("t", "demand", "measured", "error", "demand_cps", "measured_cps", "volts")}
        for axis in (0, 1)
    }

    error_sum = [0.0, 0.0]
    e_prev = [0.0, 0.0]
    p_prev = [0, 0]
    d_prev = [0, 0]
    theta_hist = np.empty((n_samples, 2)) if record_state else None
    omega_hist = np.empty((n_samples, 2)) if record_state else None

    for i in range(n_samples):
        if record_state:
            theta_hist[i] = theta
            omega_hist[i] = omega
        t = i * dt
        demand_angle_cv = cv_demand_cps * t / res * TWO_PI
        phase = (cv_demand_cps * t / res) % 1.0 if cv_demand_cps > 0.0 else 0.0
        position = phase * k
        low = int(position) % k
        frac = position - int(position)
        demand_angle_servo = values[low] * (1.0 - frac) + values[(low + 1) % k] * frac

        demands = (
            quantize(demand_angle_cv, res),
            quantize(demand_angle_servo, res),
        )
        measured = (quantize(theta[0], res), quantize(theta[1], res))

        volts = [0.0, 0.0]
        for axis in (0, 1):
            d_i = demands[axis]
            p_i = measured[axis]
            if i == 0:
                d_prev[axis] = d_i
                p_prev[axis] = p_i
            e_i = d_i - p_i
            if abs(e_i) > max_error_counts:
                raise UnstableSimulation(
                    f"axis {('cv', 'servo')[axis]} error {e_i} counts at sample {i}",
                    sample_index=i,
                )
            g = gains[axis]
            error_sum[axis] += e_i
            if g.K_I > 0.0:
                windup_limit = 2048.0 * g.divisor / g.K_I
                error_sum[axis] = max(-windup_limit, min(windup_limit, error_sum[axis]))
            volts[axis] = controller_step(
                g, e_i, error_sum[axis], e_prev[axis], p_i, p_prev[axis], d_i, d_prev[axis]
            )

            log = columns[axis]
            log["t"][i] = t
            log["demand"][i] = d_i
            log["measured"][i] = p_i
            log["error"][i] = e_i
            log["demand_cps"][i] = (d_i - d_prev[axis]) / dt if i > 0 else 0.0
            log["measured_cps"][i] = (p_i - p_prev[axis]) / dt if i > 0 else 0.0
            log["volts"][i] = volts[axis]

            e_prev[axis] = e_i
            p_prev[axis] = p_i
            d_prev[axis] = d_i

        torque = amp * np.array(volts)
        if coupled:
            matrix = mass_matrix(dims, plant.inertial, theta[0], theta[1], effector_ref)
            matrix = matrix + np.diag(rotor)
            bias = bias_forces(
                dims, plant.inertial, theta[0], theta[1], omega[0], omega[1], effector_ref
            )
        else:
            matrix = np.diag(rotor)
            bias = np.zeros(2)
        accel = np.linalg.solve(matrix, torque - bias - friction * omega)
        omega = omega + accel * dt
        theta = theta + omega * dt
        if coupled:
            effector_ref = effector_position(dims, theta[0], theta[1], effector_ref)

    logs = []
    for axis in (0, 1):
        log = columns[axis]
        logs.append(
            AxisLog(
                t=log["t"],
                demand=log["demand"],
                measured=log["measured"],
                error=log["error"],
                demand_cps=log["demand_cps"],
                measured_cps=log["measured_cps"],
                volts=log["volts"],
            )
        )
    return SimLog(cv=logs[0], servo=logs[1], theta=theta_hist, omega=omega_hist)


def load_gains_pair(path) -> tuple[ControllerGains, ControllerGains]:
    """Read ``{"cv": {...}, "servo": {...}}`` controller gains from JSON."""
    data = json.loads(Path(path).read_text())
    return ControllerGains.from_dict(data["cv"]), ControllerGains.from_dict(data["servo"])


def save_gains_pair(gains_cv: ControllerGains, gains_servo: ControllerGains, path) -> None:
    payload = {"cv": gains_cv.to_dict(), "servo": gains_servo.to_dict()}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def write_axis_log_csv(log: AxisLog, path) -> None:
    """Write one axis log as CSV (LF endings, full precision)."""
    with open(path, "w", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(
            ["t", "demand_counts", "measured_counts", "error_counts",
             "demand_cps", "measured_cps", "volts"]
        )
        for i in range(len(log)):
            writer.writerow(
                [
                    repr(float(log.t[i])),
                    int(log.demand[i]),
                    int(log.measured[i]),
                    int(log.error[i]),
                    repr(float(log.demand_cps[i])),
                    repr(float(log.measured_cps[i])),
                    repr(float(log.volts[i])),
                ]
            )


def read_axis_log_csv(path) -> AxisLog:
    """Read back an axis log written by write_axis_log_csv."""
    rows = []
    with open(Path(path), newline="") as handle:
        reader = csv.reader(handle)
        next(reader)
        for row in reader:
            rows.append([float(cell) for cell in row])
    data = np.array(rows)
    return AxisLog(
        t=data[:, 0],
        demand=data[:, 1],
        measured=data[:, 2],
        error=data[:, 3],
        demand_cps=data[:, 4],
        measured_cps=data[:, 5],
        volts=data[:, 6],
    )
