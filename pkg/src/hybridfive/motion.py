"""Motion profiles over one machine cycle.

Numerical differentiation, harmonic decomposition and the resolver-count
unit conversions used when talking to the servo hardware (4096 counts per
revolution by default).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

TWO_PI = 2.0 * math.pi

RESOLVER_COUNTS_PER_REV = 4096


class ProfileTooShort(ValueError):
    """Fewer than four samples; periodic differences are not defined."""


class HarmonicOverflow(ValueError):
    """Requested more harmonics than the sample count can resolve."""


@dataclass(frozen=True)
class MotionProfile:
    """Angles sampled at uniform CV-input spacing over one closed cycle."""

    values: np.ndarray
    cv_speed: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or len(values) < 4:
            raise ProfileTooShort(f"need at least 4 samples, got {values.shape}")
        if not self.cv_speed > 0.0:
            raise ValueError(f"cv_speed must be > 0, got {self.cv_speed!r}")

    @property
    def k(self) -> int:
        return len(self.values)

    @property
    def dt(self) -> float:
        """Time step between samples at the given CV speed."""
        return TWO_PI / (self.cv_speed * self.k)

    def theta2_grid(self) -> np.ndarray:
        return np.arange(self.k) * (TWO_PI / self.k)


@dataclass(frozen=True)
class HarmonicSpectrum:
    """Cosine/sine coefficient pairs for harmonics 1..n (no DC term)."""

    coefficients: tuple[tuple[float, float], ...]

    def __post_init__(self):
        coeffs = tuple((float(a), float(b)) for a, b in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if len(coeffs) < 1:
            raise ValueError("spectrum needs at least one harmonic")

    @property
    def n(self) -> int:
        return len(self.coefficients)

    def magnitudes(self) -> np.ndarray:
        coeffs = np.asarray(self.coefficients)
        return np.hypot(coeffs[:, 0], coeffs[:, 1])


def differentiate(profile: MotionProfile) -> tuple[np.ndarray, np.ndarray]:
    """Velocity and acceleration of a periodic profile by central differences.

    The time step follows from the CV speed: one cycle of k samples takes
    2*pi/cv_speed seconds. Returns (velocity, acceleration) in rad/s and
    rad/s^2.
    """
    values = profile.values
    dt = profile.dt
    ahead = np.roll(values, -1)
    behind = np.roll(values, 1)
    velocity = (ahead - behind) / (2.0 * dt)
    acceleration = (ahead - 2.0 * values + behind) / (dt * dt)
    return velocity, acceleration


def fourier(profile, n: int) -> HarmonicSpectrum:
    """Leading Fourier coefficients of a periodic profile.

    ``profile`` may be a MotionProfile or a plain value sequence. For
    harmonic j in 1..n:

        a_j = (2/k) * sum_i values[i] * cos(j * 2*pi*i/k)
        b_j = (2/k) * sum_i values[i] * sin(j * 2*pi*i/k)

    The mean (DC) term is excluded; a pure sinusoid of amplitude A comes
    back with magnitude A.

    Raises:
        HarmonicOverflow: when n >= k/2 (unresolvable harmonics).
    """
    values = profile.values if isinstance(profile, MotionProfile) else np.asarray(
        profile, dtype=float
    )
    k = len(values)
    if n < 1:
        raise ValueError(f"need at least one harmonic, got n={n}")
    if 2 * n >= k:
        raise HarmonicOverflow(f"n={n} harmonics need more than {k} samples")
    orders = np.arange(1, n + 1)
    angles = np.outer(orders, np.arange(k)) * (TWO_PI / k)
    a = (2.0 / k) * (np.cos(angles) @ values)
    b = (2.0 / k) * (np.sin(angles) @ values)
    return HarmonicSpectrum(coefficients=tuple(zip(a.tolist(), b.tolist())))


def counts_to_degrees(counts: float, resolution: int = RESOLVER_COUNTS_PER_REV) -> float:
    """Resolver counts to degrees."""
    return counts * 360.0 / resolution

def counts_per_sec_to_rad_per_sec(
    cps: float, resolution: int = RESOLVER_COUNTS_PER_REV
) -> float:
    """Resolver counts per second to radians per second."""
    return cps * TWO_PI / resolution


def counts_per_sec_to_rpm(cps: float, resolution: int = RESOLVER_COUNTS_PER_REV) -> float:
    """Resolver counts per second to revolutions per minute."""
    return cps * 60.0 / resolution


def write_profile_csv(values, path) -> None:
    """Write a profile as ``theta2_deg,value`` rows (LF endings, full precision)."""
    values = np.asarray(values, dtype=float)
    k = len(values)
    with open(path, "w", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["theta2_deg", "value"])
        for i, value in enumerate(values):
            writer.writerow([repr(i * 360.0 / k), repr(float(value))])


def read_profile_csv(path) -> np.ndarray:
    """Read back a ``theta2_deg,value`` profile written by write_profile_csv."""
    with open(Path(path), newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if header[:2] != ["theta2_deg", "value"]:
            raise ValueError(f"unexpected profile header {header!r} in {path}")
        return np.array([float(row[1]) for row in reader])
