"""Inverse dynamics of the two-input five-bar.

The four moving links are modelled as uniform slender rods (one shared
mass-per-length knob) with an optional point mass at the end effector.
Kinetic energy is assembled exactly from endpoint velocities, the mass
matrix is extracted from its quadratic form, and the configuration
derivatives are taken by central differences with a 1e-6 step. Geometry
stays in millimetres; energies and torques come out in SI (J, Nm).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .mechanism import ClosureTrace, MechanismDims, crank_tip
from .motion import MotionProfile, differentiate

MM_TO_M = 1e-3

# Central-difference step (radians) for configuration derivatives.
FD_STEP = 1e-6


class ImmobileTrace(ValueError):
    """Torques are undefined for a trace with immobile samples."""


@dataclass(frozen=True)
class InertialParams:
    """Mass model: uniform rods, optional effector point mass, gravity vector."""

    mass_per_length: float = 1.0  # kg/m
    point_mass: float = 0.0  # kg, at the end effector
    gravity: tuple[float, float] = (0.0, 0.0)  # m/s^2, zero for a horizontal plane

    def __post_init__(self):
        if not self.mass_per_length > 0.0:
            raise ValueError("mass_per_length must be > 0")
        if self.point_mass < 0.0:
            raise ValueError("point_mass must be >= 0")
        object.__setattr__(
            self, "gravity", (float(self.gravity[0]), float(self.gravity[1]))
        )

    def to_dict(self) -> dict:
        return {
            "mass_per_length": self.mass_per_length,
            "point_mass": self.point_mass,
            "gravity": list(self.gravity),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "InertialParams":
        return cls(
            mass_per_length=float(data.get("mass_per_length", 1.0)),
            point_mass=float(data.get("point_mass", 0.0)),
            gravity=tuple(data.get("gravity", (0.0, 0.0))),
        )


@dataclass(frozen=True)
class TorqueProfile:
    """Per-sample motor torques over one cycle, in Nm."""

    theta2: np.ndarray
    tau_cv: np.ndarray
    tau_servo: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta2", np.asarray(self.theta2, dtype=float))
        object.__setattr__(self, "tau_cv", np.asarray(self.tau_cv, dtype=float))
        object.__setattr__(self, "tau_servo", np.asarray(self.tau_servo, dtype=float))

    def cv_summary(self) -> tuple[float, float, float]:
        return torque_summary(self.tau_cv)

    def servo_summary(self) -> tuple[float, float, float]:
        return torque_summary(self.tau_servo)


def torque_summary(samples) -> tuple[float, float, float]:
    """(min, max, RMS) of a torque sample sequence."""
    values = np.asarray(samples, dtype=float)
    if values.size == 0:
        raise ValueError("torque summary needs at least one sample")
    rms = math.sqrt(float(np.mean(values * values)))
    return float(values.min()), float(values.max()), rms


def effector_position(
    dims: MechanismDims, theta2: float, theta5: float, ref: tuple[float, float] | None = None
) -> tuple[float, float]:
    """Effector position for given crank angles, nearest the reference point.

    With no reference the positive assembly branch is taken. A slightly
    over-stretched configuration is clamped to the line between the crank
    tips so the energy stays defined through tangency.
    """
    ax, ay = crank_tip(dims.cv_ground, dims.p, theta2)
    bx, by = crank_tip(dims.servo_ground, dims.s, theta5)
    dx, dy = bx - ax, by - ay
    d = math.hypot(dx, dy)
    q, r = dims.q, dims.r
    if d < 1e-12:
        raise ValueError("crank tips coincide; effector position undefined")
    a = (d * d + q * q - r * r) / (2.0 * d)
    h_sq = q * q - a * a
    h = math.sqrt(h_sq) if h_sq > 0.0 else 0.0
    ex, ey = dx / d, dy / d
    plus = (ax + a * ex - h * ey, ay + a * ey + h * ex)
    if ref is None:
        return plus
    minus = (ax + a * ex + h * ey, ay + a * ey - h * ex)
    d_plus = (plus[0] - ref[0]) ** 2 + (plus[1] - ref[1]) ** 2
    d_minus = (minus[0] - ref[0]) ** 2 + (minus[1] - ref[1]) ** 2
    return plus if d_plus <= d_minus else minus


def kinetic_energy(
    dims: MechanismDims,
    inertial: InertialParams,
    theta2: float,
    theta5: float,
    omega2: float,
    omega5: float,
    ref: tuple[float, float] | None = None,
) -> float:
    """Total kinetic energy (J) of the four moving links at one state."""
    ax, ay = crank_tip(dims.cv_ground, dims.p, theta2)
    bx, by = crank_tip(dims.servo_ground, dims.s, theta5)
    cx, cy = effector_position(dims, theta2, theta5, ref)

    vax = -dims.p * omega2 * math.sin(theta2)
    vay = dims.p * omega2 * math.cos(theta2)
    vbx = -dims.s * omega5 * math.sin(theta5)
    vby = dims.s * omega5 * math.cos(theta5)

    # Effector velocity from the two rigid-link constraints:
    # (C-A).(vC-vA) = 0 and (C-B).(vC-vB) = 0.
    r1x, r1y = cx - ax, cy - ay
    r2x, r2y = cx - bx, cy - by
    det = r1x * r2y - r1y * r2x
    rhs1 = r1x * vax + r1y * vay
    rhs2 = r2x * vbx + r2y * vby
    if abs(det) > 1e-9 * max(1.0, abs(r1x), abs(r1y), abs(r2x), abs(r2y)) ** 2:
        vcx = (rhs1 * r2y - rhs2 * r1y) / det
        vcy = (r1x * rhs2 - r2x * rhs1) / det
    else:
        # Stretched/folded: the constraint rows are parallel; least squares.
        matrix = np.array([[r1x, r1y], [r2x, r2y]])
        vc, *_ = np.linalg.lstsq(matrix, np.array([rhs1, rhs2]), rcond=None)
        vcx, vcy = float(vc[0]), float(vc[1])

    mpl = inertial.mass_per_length
    energy = 0.0
    for (v1x, v1y), (v2x, v2y), length in (
        ((0.0, 0.0), (vax, vay), dims.p),
        ((vax, vay), (vcx, vcy), dims.q),
        ((vcx, vcy), (vbx, vby), dims.r),
        ((0.0, 0.0), (vbx, vby), dims.s),
    ):
        mass = mpl * length * MM_TO_M
        # Uniform rod with endpoint velocities v1, v2: T = m/6 (v1.v1 + v1.v2 + v2.v2)
        energy += (
            mass
            / 6.0
            * (v1x * v1x + v1y * v1y + v1x * v2x + v1y * v2y + v2x * v2x + v2y * v2y)
        )
    energy += 0.5 * inertial.point_mass * (vcx * vcx + vcy * vcy)
    return energy * MM_TO_M * MM_TO_M  # velocities above are mm/s


def potential_energy(
    dims: MechanismDims,
    inertial: InertialParams,
    theta2: float,
    theta5: float,
    ref: tuple[float, float] | None = None,
) -> float:
    """Gravitational potential energy (J); zero for the default zero gravity."""
    gx, gy = inertial.gravity
    if gx == 0.0 and gy == 0.0:
        return 0.0
    ax, ay = crank_tip(dims.cv_ground, dims.p, theta2)
    bx, by = crank_tip(dims.servo_ground, dims.s, theta5)
    cx, cy = effector_position(dims, theta2, theta5, ref)
    ox, oy = dims.cv_ground
    sx, sy = dims.servo_ground
    mpl = inertial.mass_per_length
    value = 0.0
    for (x1, y1), (x2, y2), length in (
        ((ox, oy), (ax, ay), dims.p),
        ((ax, ay), (cx, cy), dims.q),
        ((cx, cy), (bx, by), dims.r),
        ((sx, sy), (bx, by), dims.s),
    ):
        mass = mpl * length * MM_TO_M
        value -= mass * (gx * (x1 + x2) / 2.0 + gy * (y1 + y2) / 2.0) * MM_TO_M
    value -= inertial.point_mass * (gx * cx + gy * cy) * MM_TO_M
    return value


def mass_matrix(
    dims: MechanismDims,
    inertial: InertialParams,
    theta2: float,
    theta5: float,
    ref: tuple[float, float] | None = None,
) -> np.ndarray:
    """Configuration-dependent 2x2 mass matrix for coordinates (theta2, theta5).

    Kinetic energy is an exact quadratic form in the rates, so the matrix is
    recovered from three energy evaluations at unit rates.
    """
    t10 = kinetic_energy(dims, inertial, theta2, theta5, 1.0, 0.0, ref)
    t01 = kinetic_energy(dims, inertial, theta2, theta5, 0.0, 1.0, ref)
    t11 = kinetic_energy(dims, inertial, theta2, theta5, 1.0, 1.0, ref)
    coupling = t11 - t10 - t01
    return np.array([[2.0 * t10, coupling], [coupling, 2.0 * t01]])


def bias_forces(
    dims: MechanismDims,
    inertial: InertialParams,
    theta2: float,
    theta5: float,
    omega2: float,
    omega5: float,
    ref: tuple[float, float] | None = None,
) -> np.ndarray:
    """Velocity-product and gravity generalized forces (everything but M qdd)."""
    if ref is None:
        ref = effector_position(dims, theta2, theta5)
    rates = np.array([omega2, omega5])
    dm = [
        (
            mass_matrix(dims, inertial, theta2 + FD_STEP * (k == 0), theta5 + FD_STEP * (k == 1), ref)
            - mass_matrix(dims, inertial, theta2 - FD_STEP * (k == 0), theta5 - FD_STEP * (k == 1), ref)
        )
        / (2.0 * FD_STEP)
        for k in (0, 1)
    ]
    m_dot = dm[0] * rates[0] + dm[1] * rates[1]
    # dT/dq_k = 0.5 * rates . dM/dq_k . rates
    dt_dq = np.array([0.5 * rates @ dm[k] @ rates for k in (0, 1)])
    bias = m_dot @ rates - dt_dq
    gx, gy = inertial.gravity
    if gx != 0.0 or gy != 0.0:
        dv_dq = np.array(
            [
                (
                    potential_energy(dims, inertial, theta2 + FD_STEP * (k == 0),
                                     theta5 + FD_STEP * (k == 1), ref)
                    - potential_energy(dims, inertial, theta2 - FD_STEP * (k == 0),
                                       theta5 - FD_STEP * (k == 1), ref)
                )
                / (2.0 * FD_STEP)
                for k in (0, 1)
            ]
        )
        bias = bias + dv_dq
    return bias


def torque_at_state(
    dims: MechanismDims,
    inertial: InertialParams,
    theta2: float,
    theta5: float,
    omega2: float,
    omega5: float,
    alpha2: float,
    alpha5: float,
    ref: tuple[float, float] | None = None,
) -> tuple[float, float]:
    """Generalized motor torques (Nm) for one instantaneous state."""
    if ref is None:
        ref = effector_position(dims, theta2, theta5)
    matrix = mass_matrix(dims, inertial, theta2, theta5, ref)
    bias = bias_forces(dims, inertial, theta2, theta5, omega2, omega5, ref)
    tau = matrix @ np.array([alpha2, alpha5]) + bias
    return float(tau[0]), float(tau[1])


def inverse_dynamics(
    dims: MechanismDims,
    inertial: InertialParams,
    trace: ClosureTrace,
    cv_speed: float,
) -> TorqueProfile:
    """Motor torque profiles along a fully mobile traced cycle.

    The CV axis turns at constant speed; the servo rates come from periodic
    central differences of the traced servo profile.

    Raises:
        ImmobileTrace: the trace contains immobile samples.
    """
    if trace.m > 0:
        raise ImmobileTrace(f"trace has {trace.m} immobile samples")
    theta5 = trace.theta5_values()
    profile = MotionProfile(values=theta5, cv_speed=cv_speed)
    omega5, alpha5 = differentiate(profile)

    tau_cv = np.empty(trace.k)
    tau_servo = np.empty(trace.k)
    for i, pose in enumerate(trace.poses):
        tau_cv[i], tau_servo[i] = torque_at_state(
            dims,
            inertial,
            pose.theta2,
            pose.theta5,
            cv_speed,
            float(omega5[i]),
            0.0,
            float(alpha5[i]),
            ref=(pose.x_a, pose.y_a),
        )
    return TorqueProfile(
        theta2=np.array([pose.theta2 for pose in trace.poses]),
        tau_cv=tau_cv,
        tau_servo=tau_servo,
    )


def write_torque_csv(profile: TorqueProfile, path) -> None:
    """Write ``theta2_deg,tau_cv,tau_servo`` rows (LF endings, full precision)."""
    with open(path, "w", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["theta2_deg", "tau_cv", "tau_servo"])
        for theta2, tau_c, tau_s in zip(profile.theta2, profile.tau_cv, profile.tau_servo):
            writer.writerow(
                [repr(math.degrees(theta2)), repr(float(tau_c)), repr(float(tau_s))]
            )
