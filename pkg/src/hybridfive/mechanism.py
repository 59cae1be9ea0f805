"""Planar five-bar geometry: dyad solves, closure tracking, mobility counting.

The machine has two fixed pivots. A constant-velocity crank of length ``p``
drives the input dyad (links ``p``, ``q``); a servo crank of length ``s``
drives the closing dyad (links ``s``, ``r``). The end effector is the common
revolute joint of ``q`` and ``r``. Lengths are millimetres, angles radians.

All functions here are pure; the dataclasses are frozen and safe to share
between concurrent evaluators.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import motion

TWO_PI = 2.0 * math.pi

# Relative tolerance for geometric residuals and reach tests.
GEOM_RTOL = 1e-9

Point = tuple[float, float]


class DegenerateTarget(ValueError):
    """Desired point coincides with the input-crank tip; aim direction undefined."""


class DegenerateDyad(ValueError):
    """Closing-dyad circles are concentric with equal radii (infinite closures)."""


def wrap_angle(angle: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    wrapped = math.remainder(angle, TWO_PI)
    if wrapped <= -math.pi:
        wrapped += TWO_PI
    return wrapped


@dataclass(frozen=True)
class MechanismDims:
    """Link lengths and ground pivots of one candidate machine.

    The virtual ground length ``t`` is derived from the two pivots rather
    than stored.
    """

    p: float
    q: float
    r: float
    s: float
    cv_ground: Point = (0.0, 0.0)
    servo_ground: Point = (0.0, 0.0)

    def __post_init__(self):
        for name in ("p", "q", "r", "s"):
            value = getattr(self, name)
            if not value > 0.0:
                raise ValueError(f"link length {name} must be > 0, got {value!r}")
        object.__setattr__(self, "cv_ground", _as_point(self.cv_ground))
        object.__setattr__(self, "servo_ground", _as_point(self.servo_ground))

    @property
    def t(self) -> float:
        """Virtual ground length: distance between the two pivots."""
        return math.hypot(
            self.servo_ground[0] - self.cv_ground[0],
            self.servo_ground[1] - self.cv_ground[1],
        )

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "r": self.r,
            "s": self.s,
            "cv_ground": list(self.cv_ground),
            "servo_ground": list(self.servo_ground),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MechanismDims":
        return cls(
            p=float(data["p"]),
            q=float(data["q"]),
            r=float(data["r"]),
            s=float(data["s"]),
            cv_ground=_as_point(data["cv_ground"]),
            servo_ground=_as_point(data["servo_ground"]),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "MechanismDims":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class TaskSpec:
    """Desired end-effector points indexed by CV input angle, plus CV speed.

    ``samples`` holds ``(theta2, (x_d, y_d))`` entries with strictly
    increasing ``theta2`` in [0, 2*pi); the curve is treated as closed, so
    the last sample wraps back to the first.
    """

    samples: tuple[tuple[float, Point], ...]
    cv_speed: float

    def __post_init__(self):
        samples = tuple((float(t2), _as_point(pt)) for t2, pt in self.samples)
        object.__setattr__(self, "samples", samples)
        if len(samples) < 3:
            raise ValueError(f"need at least 3 precision points, got {len(samples)}")
        if not self.cv_speed > 0.0:
            raise ValueError(f"cv_speed must be > 0, got {self.cv_speed!r}")
        angles = [t2 for t2, _ in samples]
        if angles[0] < 0.0 or angles[-1] >= TWO_PI:
            raise ValueError("theta2 samples must lie in [0, 2*pi)")
        for a, b in zip(angles, angles[1:]):
            if not b > a:
                raise ValueError("theta2 samples must be strictly increasing")

    @property
    def k(self) -> int:
        return len(self.samples)

    def theta2_values(self) -> np.ndarray:
        return np.array([t2 for t2, _ in self.samples])

    def desired_points(self) -> np.ndarray:
        return np.array([[pt[0], pt[1]] for _, pt in self.samples])

    def to_dict(self) -> dict:
        return {
            "cv_speed": self.cv_speed,
            "samples": [
                {"theta2": t2, "x_d": pt[0], "y_d": pt[1]} for t2, pt in self.samples
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TaskSpec":
        samples = tuple(
            (float(e["theta2"]), (float(e["x_d"]), float(e["y_d"])))
            for e in data["samples"]
        )
        return cls(samples=samples, cv_speed=float(data["cv_speed"]))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "TaskSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class PoseSample:
    """Solved state of the machine at one CV input angle."""

    theta2: float
    theta3: float
    theta4: float
    theta5: float
    x_a: float
    y_a: float
    structural_error: float
    mobile: bool


@dataclass(frozen=True)
class ClosureTrace:
    """One full cycle of solved poses plus the immobile-sample count."""

    poses: tuple[PoseSample, ...]
    m: int
    branch_id: int

    def __post_init__(self):
        immobile = sum(1 for pose in self.poses if not pose.mobile)
        if immobile != self.m:
            raise ValueError(f"m={self.m} disagrees with {immobile} immobile poses")

    @property
    def k(self) -> int:
        return len(self.poses)

    def theta5_values(self) -> np.ndarray:
        return np.array([pose.theta5 for pose in self.poses])

    def structural_errors(self) -> np.ndarray:
        return np.array([pose.structural_error for pose in self.poses])

    def actual_points(self) -> np.ndarray:
        return np.array([[pose.x_a, pose.y_a] for pose in self.poses])


def crank_tip(ground: Point, length: float, angle: float) -> Point:
    """Tip of a crank of the given length anchored at ground."""
    if not length > 0.0:
        raise ValueError(f"crank length must be > 0, got {length!r}")
    return (ground[0] + length * math.cos(angle), ground[1] + length * math.sin(angle))


def solve_input_dyad(
    dims: MechanismDims, theta2: float, desired: Point
) -> tuple[float, Point, float]:
    """Aim link q from the input-crank tip at the desired point.

    Returns ``(theta3, actual, structural_error)``: ``theta3`` is the
    direction from the crank tip toward the desired point, ``actual`` is the
    reachable end-effector position at distance ``q`` along that direction,
    and ``structural_error`` is the shortfall/overshoot of the reach.

    Raises:
        DegenerateTarget: the desired point sits on the crank tip itself.
    """
    ax, ay = crank_tip(dims.cv_ground, dims.p, theta2)
    vx = desired[0] - ax
    vy = desired[1] - ay
    dist = math.hypot(vx, vy)
    if dist < 1e-9:
        raise DegenerateTarget(
            f"desired point {desired} coincides with the crank tip at theta2={theta2}"
        )
    theta3 = math.atan2(vy, vx)
    actual = (ax + dims.q * vx / dist, ay + dims.q * vy / dist)
    return theta3, actual, abs(dist - dims.q)


def solve_closing_dyad(dims: MechanismDims, effector: Point) -> list[float]:
    """Servo-crank angles that let links s and r close onto the effector.

    Returns 0, 1 or 2 candidate angles (circle-circle intersection of radius
    ``s`` about the servo pivot with radius ``r`` about the effector). An
    empty list marks an immobile position.

    Raises:
        DegenerateDyad: effector on the servo pivot with r == s, so every
            angle closes.
    """
    ox, oy = dims.servo_ground
    dx = effector[0] - ox
    dy = effector[1] - oy
    d = math.hypot(dx, dy)
    r, s = dims.r, dims.s
    tol = GEOM_RTOL * max(1.0, r, s)
    if d < tol:
        if abs(r - s) <= tol:
            raise DegenerateDyad("effector sits on the servo pivot with r == s")
        return []
    if d > r + s + tol or d < abs(r - s) - tol:
        return []
    a = (d * d + s * s - r * r) / (2.0 * d)
    h_sq = s * s - a * a
    h = math.sqrt(h_sq) if h_sq > 0.0 else 0.0
    ex, ey = dx / d, dy / d
    first = math.atan2(a * ey + h * ex, a * ex - h * ey)
    if h <= tol:
        return [first]
    second = math.atan2(a * ey - h * ex, a * ex + h * ey)
    return [first, second]


def forward_effector(
    dims: MechanismDims, theta2: float, theta5: float, branch: int = 1
) -> Point:
    """End-effector position for given crank angles on one assembly branch.

    ``branch`` (+1 or -1) picks the side of the line between the two crank
    tips. Raises ValueError when the cranks are too far apart or too close
    for links q and r to assemble.
    """
    ax, ay = crank_tip(dims.cv_ground, dims.p, theta2)
    bx, by = crank_tip(dims.servo_ground, dims.s, theta5)
    dx, dy = bx - ax, by - ay
    d = math.hypot(dx, dy)
    q, r = dims.q, dims.r
    tol = GEOM_RTOL * max(1.0, q, r)
    if d > q + r + tol or d < abs(q - r) - tol or d < tol:
        raise ValueError(
            f"cranks at theta2={theta2}, theta5={theta5} cannot assemble (gap {d})"
        )
    a = (d * d + q * q - r * r) / (2.0 * d)
    h_sq = q * q - a * a
    h = math.sqrt(h_sq) if h_sq > 0.0 else 0.0
    ex, ey = dx / d, dy / d
    sign = 1.0 if branch >= 0 else -1.0
    return (ax + a * ex - sign * h * ey, ay + a * ey + sign * h * ex)


def track_closure(dims: MechanismDims, task: TaskSpec, n_harmonics: int = 10) -> ClosureTrace:
    """Solve the whole cycle, resolving the two-closure ambiguity by continuity.

    Both starting closures are tracked independently; at each sample the
    candidate nearest the previous servo angle is kept, accumulated without
    wrapping so the profile stays continuous. Samples with no closure are
    held at the closest-approach angle (pointing at the effector) and marked
    immobile. Of the two tracked branches, the one with the lower
    0.75*swept + 0.5*harmonic partial score wins; ties go to the lower swept
    term.
    """
    theta2 = task.theta2_values()
    desired = task.desired_points()
    k = task.k

    theta3, actual, errors = _input_dyad_chain(dims, theta2, desired)
    cand_a, cand_b, n_cand, proj = _closing_candidates(dims, actual)

    two_branches = n_cand[0] == 2
    theta5_a, mobile = _track_branch(cand_a, cand_b, n_cand, proj, start=0)
    if two_branches:
        theta5_b, _ = _track_branch(cand_a, cand_b, n_cand, proj, start=1)
        score_a = _branch_score(theta5_a, dims.s, n_harmonics)
        score_b = _branch_score(theta5_b, dims.s, n_harmonics)
        if (score_b[0] < score_a[0]) or (
            score_b[0] == score_a[0] and score_b[1] < score_a[1]
        ):
            branch_id, theta5 = 1, theta5_b
        else:
            branch_id, theta5 = 0, theta5_a
    else:
        branch_id, theta5 = 0, theta5_a

    # theta4 is the direction of link r from the effector to the servo-crank tip.
    sx, sy = dims.servo_ground
    bx = sx + dims.s * np.cos(theta5)
    by = sy + dims.s * np.sin(theta5)
    theta4 = np.arctan2(by - actual[:, 1], bx - actual[:, 0])

    poses = tuple(
        PoseSample(
            theta2=float(theta2[i]),
            theta3=float(theta3[i]),
            theta4=float(theta4[i]),
            theta5=float(theta5[i]),
            x_a=float(actual[i, 0]),
            y_a=float(actual[i, 1]),
            structural_error=float(errors[i]),
            mobile=bool(mobile[i]),
        )
        for i in range(k)
    )
    return ClosureTrace(poses=poses, m=int(np.sum(~mobile)), branch_id=branch_id)


def _as_point(value) -> Point:
    x, y = value
    return (float(x), float(y))


def _input_dyad_chain(dims, theta2: np.ndarray, desired: np.ndarray):
    """Vectorised solve_input_dyad over a whole cycle."""
    cx, cy = dims.cv_ground
    ax = cx + dims.p * np.cos(theta2)
    ay = cy + dims.p * np.sin(theta2)
    vx = desired[:, 0] - ax
    vy = desired[:, 1] - ay
    dist = np.hypot(vx, vy)
    if np.any(dist < 1e-9):
        bad = int(np.argmax(dist < 1e-9))
        raise DegenerateTarget(
            f"desired point {tuple(desired[bad])} coincides with the crank tip "
            f"at sample {bad}"
        )
    theta3 = np.arctan2(vy, vx)
    actual = np.column_stack((ax + dims.q * vx / dist, ay + dims.q * vy / dist))
    errors = np.abs(dist - dims.q)
    return theta3, actual, errors


def _closing_candidates(dims, effectors: np.ndarray):
    """Vectorised solve_closing_dyad over a whole cycle.

    Returns the two candidate angle arrays, the per-sample candidate count
    (0, 1 or 2) and the closest-approach angle used for immobile samples.
    """
    ox, oy = dims.servo_ground
    r, s = dims.r, dims.s
    dx = effectors[:, 0] - ox
    dy = effectors[:, 1] - oy
    d = np.hypot(dx, dy)
    tol = GEOM_RTOL * max(1.0, r, s)

    on_pivot = d < tol
    if np.any(on_pivot) and abs(r - s) <= tol:
        bad = int(np.argmax(on_pivot))
        raise DegenerateDyad(f"effector sits on the servo pivot at sample {bad}")

    reachable = (~on_pivot) & (d <= r + s + tol) & (d >= abs(r - s) - tol)
    d_safe = np.where(on_pivot, 1.0, d)
    a = (d_safe * d_safe + s * s - r * r) / (2.0 * d_safe)
    h = np.sqrt(np.clip(s * s - a * a, 0.0, None))
    ex = dx / d_safe
    ey = dy / d_safe
    cand_a = np.arctan2(a * ey + h * ex, a * ex - h * ey)
    cand_b = np.arctan2(a * ey - h * ex, a * ex + h * ey)
    n_cand = np.where(reachable, np.where(h <= tol, 1, 2), 0)
    proj = np.arctan2(dy, dx)
    return cand_a, cand_b, n_cand, proj


def _track_branch(cand_a, cand_b, n_cand, proj, start: int):
    """Follow one closure branch around the cycle by angular continuity."""
    k = len(n_cand)
    theta5 = np.empty(k)
    mobile = np.ones(k, dtype=bool)
    prev = None
    for i in range(k):
        count = n_cand[i]
        if count == 0:
            target = proj[i]
            mobile[i] = False
        elif prev is None:
            target = cand_b[i] if (start == 1 and count == 2) else cand_a[i]
        elif count == 1:
            target = cand_a[i]
        else:
            da = wrap_angle(cand_a[i] - prev)
            db = wrap_angle(cand_b[i] - prev)
            target = cand_a[i] if abs(da) <= abs(db) else cand_b[i]
        theta5[i] = target if prev is None else prev + wrap_angle(target - prev)
        prev = theta5[i]
    return theta5, mobile


def _branch_score(theta5: np.ndarray, s: float, n_harmonics: int) -> tuple[float, float]:
    """(0.75*swept + 0.5*harmonic, swept) used to pick the better branch.

    Mirrors the objective module's swept and harmonic terms; kept local so
    geometry does not depend on the objective layer.
    """
    centered = theta5 - theta5.mean()
    swept = s * math.sqrt(float(np.sum(centered * centered)))
    n = max(1, min(n_harmonics, (len(theta5) - 1) // 2))
    mags = motion.fourier(theta5, n).magnitudes()
    harmonic = float(np.sum(mags ** np.arange(2, n + 2)))
    return 0.75 * swept + 0.5 * harmonic, swept
