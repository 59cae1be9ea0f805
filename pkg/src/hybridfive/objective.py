"""The four-component synthesis objective and its weighted-sum combiner.

Components, all to be minimised:

* error     -- squared sum of per-sample structural errors
* harmonic  -- harmonic magnitudes raised to increasing powers, so high-order
               content is punished progressively harder
* swept     -- servo link length times the root-sum-square of the servo
               displacement (a kinematic proxy for servo effort)
* mobility  -- cube of the immobile-sample count
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mechanism import ClosureTrace, MechanismDims, TaskSpec, track_closure
from .motion import HarmonicSpectrum, fourier

DEFAULT_N_HARMONICS = 10


@dataclass(frozen=True)
class ObjectiveWeights:
    """Non-negative weights for the four objective components."""

    w_error: float = 1.0
    w_mob: float = 1.0
    w_swept: float = 0.75
    w_harm: float = 0.5

    def __post_init__(self):
        for name in ("w_error", "w_mob", "w_swept", "w_harm"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")

    def to_dict(self) -> dict:
        return {
            "w_error": self.w_error,
            "w_mob": self.w_mob,
            "w_swept": self.w_swept,
            "w_harm": self.w_harm,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ObjectiveWeights":
        return cls(**{key: float(value) for key, value in data.items()})


@dataclass(frozen=True)
class ObjectiveBreakdown:
    """The four component values and their weighted sum."""

    error: float
    harmonic: float
    swept: float
    mobility: float
    total: float

    def to_dict(self) -> dict:
        return {
            "error": self.error,
            "harmonic": self.harmonic,
            "swept": self.swept,
            "mobility": self.mobility,
            "total": self.total,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ObjectiveBreakdown":
        return cls(
            error=float(data["error"]),
            harmonic=float(data["harmonic"]),
            swept=float(data["swept"]),
            mobility=float(data["mobility"]),
            total=float(data["total"]),
        )


def obj_error(trace: ClosureTrace) -> float:
    """Squared sum of the structural errors around the cycle."""
    return float(np.sum(trace.structural_errors())) ** 2


def obj_harm(spectrum: HarmonicSpectrum) -> float:
    """Sum of harmonic magnitudes, harmonic i raised to the power i+1."""
    mags = spectrum.magnitudes()
    return float(np.sum(mags ** np.arange(2, spectrum.n + 2)))


def obj_swept(trace: ClosureTrace, s: float, centered: bool = True) -> float:
    """Servo link length times the root-sum-square servo displacement.

    With ``centered`` (default) the displacement is measured about the mean
    servo angle, which makes the term independent of the angular datum; the
    raw-angle reading is kept as an option.
    """
    theta5 = trace.theta5_values()
    if centered:
        theta5 = theta5 - theta5.mean()
    return s * math.sqrt(float(np.sum(theta5 * theta5)))


def obj_mob(m: int) -> float:
    """Cubed count of immobile closure samples."""
    if m < 0:
        raise ValueError(f"immobile count must be >= 0, got {m}")
    return float(m) ** 3


def evaluate_trace(
    trace: ClosureTrace,
    s: float,
    weights: ObjectiveWeights | None = None,
    n_harmonics: int = DEFAULT_N_HARMONICS,
    swept_centered: bool = True,
) -> ObjectiveBreakdown:
    """Combine the four components for an already-tracked cycle."""
    weights = weights or ObjectiveWeights()
    error = obj_error(trace)
    harmonic = obj_harm(fourier(trace.theta5_values(), n_harmonics))
    swept = obj_swept(trace, s, centered=swept_centered)
    mobility = obj_mob(trace.m)
    total = (
        weights.w_error * error
        + weights.w_mob * mobility
        + weights.w_swept * swept
        + weights.w_harm * harmonic
    )
    return ObjectiveBreakdown(
        error=error, harmonic=harmonic, swept=swept, mobility=mobility, total=total
    )


def evaluate(
    dims: MechanismDims,
    task: TaskSpec,
    weights: ObjectiveWeights | None = None,
    n_harmonics: int = DEFAULT_N_HARMONICS,
    swept_centered: bool = True,
) -> ObjectiveBreakdown:
    """Track the closure for a candidate machine and score it.

    Deterministic: identical inputs give bit-identical breakdowns.
    Geometric errors from the tracking propagate unchanged.
    """
    trace = track_closure(dims, task, n_harmonics=n_harmonics)
    return evaluate_trace(
        trace,
        dims.s,
        weights=weights,
        n_harmonics=n_harmonics,
        swept_centered=swept_centered,
    )
