import math

import numpy as np
import pytest

from hybridfive import (
    HarmonicOverflow,
    HarmonicSpectrum,
    MotionProfile,
    ProfileTooShort,
    counts_per_sec_to_rad_per_sec,
    counts_per_sec_to_rpm,
    counts_to_degrees,
    differentiate,
    fourier,
)
from hybridfive.motion import read_profile_csv, write_profile_csv

TWO_PI = 2.0 * math.pi


def smooth_profile(rng, k, max_order=2):
    """Random band-limited profile with unit-scale coefficients."""
    theta = np.arange(k) * TWO_PI / k
    values = np.full(k, rng.uniform(-1.0, 1.0))
    for j in range(1, max_order + 1):
        values = values + rng.uniform(-1.0, 1.0) * np.sin(j * theta + rng.uniform(0, TWO_PI))
    return values


class TestMotionProfile:
    def test_too_short_rejected(self):
        with pytest.raises(ProfileTooShort):
            MotionProfile(values=np.zeros(3), cv_speed=1.0)

    def test_time_step(self):
        profile = MotionProfile(values=np.zeros(360), cv_speed=TWO_PI)
        assert profile.dt == pytest.approx(1.0 / 360.0)


class TestDifferentiate:
    def test_constant_profile(self):
        profile = MotionProfile(values=np.full(32, 1.7), cv_speed=3.0)
        velocity, acceleration = differentiate(profile)
        assert np.all(velocity == 0.0)
        assert np.all(acceleration == 0.0)

    def test_sinusoid_matches_analytic_derivative(self):
        k = 360
        theta = np.arange(k) * TWO_PI / k
        profile = MotionProfile(values=np.sin(theta), cv_speed=TWO_PI)
        velocity, acceleration = differentiate(profile)
        scale = TWO_PI
        assert np.max(np.abs(velocity - scale * np.cos(theta))) < 1e-3 * scale
        assert np.max(np.abs(acceleration + scale**2 * np.sin(theta))) < 2e-3 * scale**2

    def test_matches_fourth_order_oracle_on_random_smooth_profiles(self):
        # Fourth-order periodic central differences as the independent check;
        # on a band-limited profile the second-order scheme agrees to 1e-6
        # of the peak derivative when the grid is fine enough.
        rng = np.random.default_rng(11)
        k = 8192
        for _ in range(5):
            values = smooth_profile(rng, k)
            profile = MotionProfile(values=values, cv_speed=TWO_PI)
            velocity, acceleration = differentiate(profile)
            dt = profile.dt
            v_oracle = (
                -np.roll(values, -2) + 8 * np.roll(values, -1)
                - 8 * np.roll(values, 1) + np.roll(values, 2)
            ) / (12.0 * dt)
            a_oracle = (
                -np.roll(values, -2) + 16 * np.roll(values, -1) - 30 * values
                + 16 * np.roll(values, 1) - np.roll(values, 2)
            ) / (12.0 * dt * dt)
            assert np.max(np.abs(velocity - v_oracle)) < 1e-6 * np.max(np.abs(v_oracle))
            assert np.max(np.abs(acceleration - a_oracle)) < 1e-6 * np.max(np.abs(a_oracle))

    def test_shift_invariance(self):
        rng = np.random.default_rng(5)
        values = smooth_profile(rng, 64)
        base = MotionProfile(values=values, cv_speed=2.0)
        shifted = MotionProfile(values=values + 4.25, cv_speed=2.0)
        for a, b in zip(differentiate(base), differentiate(shifted)):
            assert np.allclose(a, b, atol=1e-9)


class TestFourier:
    def test_constant_profile_has_empty_spectrum(self):
        spectrum = fourier(MotionProfile(values=np.full(64, 2.5), cv_speed=1.0), 5)
        assert np.max(spectrum.magnitudes()) < 1e-12

    def test_single_harmonic(self):
        k = 360
        theta = np.arange(k) * TWO_PI / k
        spectrum = fourier(MotionProfile(values=3.0 * np.sin(theta), cv_speed=1.0), 4)
        coeffs = np.asarray(spectrum.coefficients)
        assert coeffs[0, 1] == pytest.approx(3.0, abs=1e-9)
        others = np.abs(coeffs).sum() - abs(coeffs[0, 1])
        assert others < 1e-9

    def test_matches_literal_dft_sum(self):
        rng = np.random.default_rng(23)
        for _ in range(10):
            k = int(rng.integers(24, 101))
            values = rng.uniform(-2.0, 2.0, size=k)
            n = int(rng.integers(1, k // 2))
            spectrum = fourier(values, n)
            for j, (a, b) in enumerate(spectrum.coefficients, start=1):
                a_ref = sum(
                    values[i] * math.cos(j * TWO_PI * i / k) for i in range(k)
                ) * 2.0 / k
                b_ref = sum(
                    values[i] * math.sin(j * TWO_PI * i / k) for i in range(k)
                ) * 2.0 / k
                assert a == pytest.approx(a_ref, abs=1e-9)
                assert b == pytest.approx(b_ref, abs=1e-9)

    def test_recovers_synthesized_spectrum(self):
        # Parseval-style closure: build a profile from known coefficients,
        # read the same coefficients back.
        rng = np.random.default_rng(8)
        k = 240
        theta = np.arange(k) * TWO_PI / k
        n = 6
        a_true = rng.uniform(-1.5, 1.5, size=n)
        b_true = rng.uniform(-1.5, 1.5, size=n)
        values = np.full(k, 0.7)
        for j in range(1, n + 1):
            values = values + a_true[j - 1] * np.cos(j * theta) + b_true[j - 1] * np.sin(j * theta)
        spectrum = fourier(values, n)
        for j, (a, b) in enumerate(spectrum.coefficients, start=1):
            assert a == pytest.approx(a_true[j - 1], abs=1e-9)
            assert b == pytest.approx(b_true[j - 1], abs=1e-9)

    def test_overflow_guard(self):
        with pytest.raises(HarmonicOverflow):
            fourier(np.zeros(16), 8)

    def test_spectrum_needs_at_least_one_harmonic(self):
        with pytest.raises(ValueError):
            HarmonicSpectrum(coefficients=())


class TestCountConversions:
    @pytest.mark.parametrize(
        "counts,expected",
        [(1135, 99.76), (19, 1.67), (115, 10.11)],
    )
    def test_counts_to_degrees_goldens(self, counts, expected):
        assert abs(counts_to_degrees(counts) - expected) < 0.005

    def test_cps_to_rad_per_sec_goldens(self):
        assert abs(counts_per_sec_to_rad_per_sec(3072) - 4.71) < 0.005
        assert abs(counts_per_sec_to_rad_per_sec(-12288) - (-18.85)) < 0.005

    def test_cps_to_rpm_golden(self):
        assert counts_per_sec_to_rpm(4096) == pytest.approx(60.0)

    def test_full_circle(self):
        assert counts_to_degrees(4096) == pytest.approx(360.0)

    def test_linearity_on_integers(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            a = int(rng.integers(-20000, 20000))
            b = int(rng.integers(-20000, 20000))
            for fn in (counts_to_degrees, counts_per_sec_to_rad_per_sec, counts_per_sec_to_rpm):
                assert fn(a + b) == pytest.approx(fn(a) + fn(b), abs=1e-9)


def test_profile_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(4)
    values = rng.uniform(-3.0, 3.0, size=72)
    path = tmp_path / "profile.csv"
    write_profile_csv(values, path)
    text = path.read_text()
    assert text.startswith("theta2_deg,value\n")
    assert "\r" not in text
    again = read_profile_csv(path)
    assert np.array_equal(values, again)
