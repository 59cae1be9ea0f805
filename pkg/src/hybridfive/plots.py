"""Static SVG report figures.

Figures are rendered headless straight to SVG files. Text is kept as text
(not outlined paths) and the hash salt and date metadata are pinned so that
identical runs produce byte-identical files.
"""

from __future__ import annotations

import math

import matplotlib
from matplotlib.figure import Figure

from .control import AxisLog
from .dynamics import TorqueProfile
from .mechanism import ClosureTrace, TaskSpec

_SVG_RC = {"svg.fonttype": "none", "svg.hashsalt": "hybridfive"}


def _save_svg(fig: Figure, path) -> None:
    with matplotlib.rc_context(_SVG_RC):
        fig.savefig(path, format="svg", metadata={"Date": None})


def plot_effector_trace(trace: ClosureTrace, task: TaskSpec, path) -> None:
    """Actual end-effector curve over one cycle against the desired points."""
    fig = Figure(figsize=(6.0, 6.0))
    ax = fig.subplots()
    actual = trace.actual_points()
    desired = task.desired_points()
    closed_x = list(actual[:, 0]) + [actual[0, 0]]
    closed_y = list(actual[:, 1]) + [actual[0, 1]]
    ax.plot(closed_x, closed_y, "-", color="tab:blue", label="actual")
    ax.plot(desired[:, 0], desired[:, 1], "x", color="tab:red", label="desired")
    ax.set_xlabel("x [mm]")
    ax.set_ylabel("y [mm]")
    ax.set_title("end-effector trace")
    ax.set_aspect("equal", adjustable="datalim")
    ax.legend(loc="best")
    _save_svg(fig, path)


def plot_torque_profile(profile: TorqueProfile, path) -> None:
    """Motor torque requirement of both axes over one cycle."""
    fig = Figure(figsize=(7.0, 4.5))
    ax = fig.subplots()
    degrees = [math.degrees(t) for t in profile.theta2]
    ax.plot(degrees, profile.tau_cv, "-", color="tab:blue", label="tau_cv")
    ax.plot(degrees, profile.tau_servo, "-", color="tab:orange", label="tau_servo")
    ax.set_xlabel("theta2 [deg]")
    ax.set_ylabel("torque [Nm]")
    ax.set_title("motor torque requirement")
    ax.legend(loc="best")
    _save_svg(fig, path)


def plot_axis_error(log: AxisLog, axis_name: str, path) -> None:
    """Position error of one axis over the whole simulated run."""
    fig = Figure(figsize=(7.0, 4.5))
    ax = fig.subplots()
    ax.plot(log.t, log.error, "-", color="tab:blue")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("position error [counts]")
    ax.set_title(f"{axis_name} axis position error")
    _save_svg(fig, path)
