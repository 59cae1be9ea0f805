import math

import numpy as np
import pytest

from hybridfive import (
    ImmobileTrace,
    InertialParams,
    MechanismDims,
    TaskSpec,
    inverse_dynamics,
    torque_at_state,
    torque_summary,
    track_closure,
)
from hybridfive.dynamics import kinetic_energy, mass_matrix, write_torque_csv

TWO_PI = 2.0 * math.pi


def analytic_state(t, speed, offset, amp, phase):
    """A smooth two-axis trajectory with exact rates and accelerations."""
    theta2 = speed * t
    theta5 = offset + amp * math.sin(speed * t + phase)
    omega5 = amp * speed * math.cos(speed * t + phase)
    alpha5 = -amp * speed * speed * math.sin(speed * t + phase)
    return theta2, theta5, speed, omega5, 0.0, alpha5


class TestTorqueSummary:
    def test_constant(self):
        assert torque_summary([2.5] * 7) == pytest.approx((2.5, 2.5, 2.5))
        assert torque_summary([-2.5] * 7) == pytest.approx((-2.5, -2.5, 2.5))

    def test_symmetric_pair(self):
        assert torque_summary([-1.0, 1.0]) == pytest.approx((-1.0, 1.0, 1.0))

    def test_matches_literal_recomputation(self):
        rng = np.random.default_rng(31)
        values = rng.uniform(-3.0, 3.0, size=97)
        low, high, rms = torque_summary(values)
        assert low == min(values)
        assert high == max(values)
        literal = math.sqrt(sum(v * v for v in values) / len(values))
        assert rms == pytest.approx(literal, rel=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            torque_summary([])


class TestInertialParams:
    def test_defaults(self):
        params = InertialParams()
        assert params.mass_per_length == 1.0
        assert params.point_mass == 0.0
        assert params.gravity == (0.0, 0.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            InertialParams(mass_per_length=0.0)
        with pytest.raises(ValueError):
            InertialParams(point_mass=-1.0)


class TestTorqueAtState:
    def test_rest_zero_gravity_gives_zero_torque(self, demo_dims):
        tau = torque_at_state(demo_dims, InertialParams(), 0.3, -1.2, 0.0, 0.0, 0.0, 0.0)
        assert tau == (0.0, 0.0)

    def test_power_balance_along_seeded_trajectories(self, demo_dims):
        # tau . qdot must equal dT/dt; the oracle differentiates the exact
        # kinetic energy along the trajectory with a 4th-order stencil.
        inertial = InertialParams()
        rng = np.random.default_rng(13)
        for _ in range(10):
            speed = rng.uniform(3.0, 9.0)
            offset = rng.uniform(-1.4, -1.0)
            amp = rng.uniform(0.05, 0.2)
            phase = rng.uniform(0.0, TWO_PI)
            t0 = rng.uniform(0.05, 0.9)

            def total_energy(t):
                th2, th5, w2, w5, _, _ = analytic_state(t, speed, offset, amp, phase)
                return kinetic_energy(demo_dims, inertial, th2, th5, w2, w5)

            h = 1e-4
            oracle = (
                -total_energy(t0 + 2 * h)
                + 8.0 * total_energy(t0 + h)
                - 8.0 * total_energy(t0 - h)
                + total_energy(t0 - 2 * h)
            ) / (12.0 * h)

            th2, th5, w2, w5, a2, a5 = analytic_state(t0, speed, offset, amp, phase)
            tau = torque_at_state(demo_dims, inertial, th2, th5, w2, w5, a2, a5)
            power = tau[0] * w2 + tau[1] * w5
            assert power == pytest.approx(oracle, rel=1e-6)

    def test_mass_scaling_is_exactly_linear(self, demo_dims):
        base = InertialParams(mass_per_length=1.0)
        doubled = InertialParams(mass_per_length=2.0)
        rng = np.random.default_rng(29)
        for _ in range(10):
            state = rng.uniform(-1.0, 1.0, size=6) * np.array([3.0, 0.3, 6.0, 2.0, 20.0, 20.0])
            state[1] -= 1.2
            tau_one = torque_at_state(demo_dims, base, *state)
            tau_two = torque_at_state(demo_dims, doubled, *state)
            for a, b in zip(tau_one, tau_two):
                assert b == pytest.approx(2.0 * a, rel=1e-12, abs=1e-15)

    def test_gravity_load_at_rest(self, demo_dims):
        # Hanging load: torque must hold the weight; compare against the
        # potential-energy gradient by finite differences.
        inertial = InertialParams(gravity=(0.0, -9.81), point_mass=0.5)
        from hybridfive.dynamics import potential_energy

        th2, th5 = 0.7, -1.1
        tau = torque_at_state(demo_dims, inertial, th2, th5, 0.0, 0.0, 0.0, 0.0)
        h = 1e-6
        dv2 = (
            potential_energy(demo_dims, inertial, th2 + h, th5)
            - potential_energy(demo_dims, inertial, th2 - h, th5)
        ) / (2 * h)
        dv5 = (
            potential_energy(demo_dims, inertial, th2, th5 + h)
            - potential_energy(demo_dims, inertial, th2, th5 - h)
        ) / (2 * h)
        assert tau[0] == pytest.approx(dv2, rel=1e-6, abs=1e-9)
        assert tau[1] == pytest.approx(dv5, rel=1e-6, abs=1e-9)


class TestMassMatrix:
    def test_symmetric_positive_definite(self, demo_dims):
        rng = np.random.default_rng(3)
        for _ in range(20):
            th2 = rng.uniform(0.0, TWO_PI)
            th5 = rng.uniform(-1.5, -0.9)
            matrix = mass_matrix(demo_dims, InertialParams(), th2, th5)
            assert matrix[0, 1] == pytest.approx(matrix[1, 0], rel=1e-12)
            eigs = np.linalg.eigvalsh(matrix)
            assert np.all(eigs > 0.0)

    def test_quadratic_form_reproduces_energy(self, demo_dims):
        inertial = InertialParams()
        rng = np.random.default_rng(4)
        for _ in range(10):
            th2 = rng.uniform(0.0, TWO_PI)
            th5 = rng.uniform(-1.5, -0.9)
            w = rng.uniform(-5.0, 5.0, size=2)
            matrix = mass_matrix(demo_dims, inertial, th2, th5)
            direct = kinetic_energy(demo_dims, inertial, th2, th5, w[0], w[1])
            assert direct == pytest.approx(0.5 * w @ matrix @ w, rel=1e-9)


class TestInverseDynamics:
    def test_immobile_trace_rejected(self):
        dims = MechanismDims(p=150.0, q=250.0, r=20.0, s=20.0, servo_ground=(250.0, 0.0))
        samples = tuple((i * 0.5, (-4000.0, 4000.0)) for i in range(6))
        trace = track_closure(dims, TaskSpec(samples=samples, cv_speed=1.0))
        assert trace.m > 0
        with pytest.raises(ImmobileTrace):
            inverse_dynamics(dims, InertialParams(), trace, 1.0)

    def test_demo_task_torques_and_hybrid_trend(self, demo_dims, demo_task):
        trace = track_closure(demo_dims, demo_task)
        profile = inverse_dynamics(demo_dims, InertialParams(), trace, demo_task.cv_speed)
        assert len(profile.tau_cv) == demo_task.k
        lo_cv, hi_cv, rms_cv = profile.cv_summary()
        lo_sv, hi_sv, rms_sv = profile.servo_summary()
        assert lo_cv < 0 < hi_cv
        assert rms_sv < rms_cv

    def test_csv_export(self, tmp_path, demo_dims, demo_task):
        trace = track_closure(demo_dims, demo_task)
        profile = inverse_dynamics(demo_dims, InertialParams(), trace, demo_task.cv_speed)
        path = tmp_path / "torque.csv"
        write_torque_csv(profile, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "theta2_deg,tau_cv,tau_servo"
        assert len(lines) == demo_task.k + 1
        first = lines[1].split(",")
        assert float(first[0]) == 0.0
        assert float(first[1]) == pytest.approx(profile.tau_cv[0])
