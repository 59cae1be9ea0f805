"""Command-line front end: synthesis, analysis and closed-loop simulation.

Every command writes its outputs plus a manifest.json into --out; rerunning
with the same inputs and seed reproduces every output byte for byte.

Exit codes: 0 ok, 2 bad input, 3 infeasible run, 4 unstable simulation.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, dynamics, plots
from .control import (
    PlantConfig,
    UnstableSimulation,
    load_gains_pair,
    simulate,
    write_axis_log_csv,
)
from .mechanism import MechanismDims, TaskSpec, track_closure
from .motion import MotionProfile, differentiate, read_profile_csv
from .objective import DEFAULT_N_HARMONICS, ObjectiveWeights, evaluate_trace
from .synthesis import (
    DescentConfig,
    DesignBounds,
    GAConfig,
    InfeasiblePopulation,
    synthesize,
    write_history_csv,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_UNSTABLE = 4


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except UnstableSimulation as exc:
        print(f"error: unstable simulation: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except InfeasiblePopulation as exc:
        print(f"error: infeasible run: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except FileNotFoundError as exc:
        print(f"error: cannot read {exc.filename}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: bad input: {exc}", file=sys.stderr)
        return EXIT_INPUT


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridfive",
        description="Synthesis, analysis and simulation of hybrid five-bar machines.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(required=True)

    synth = sub.add_parser("synth", help="dimensional synthesis (GA + hill climb)")
    synth.add_argument("task", help="task JSON (precision points + CV speed)")
    synth.add_argument("--config", help="synthesis config JSON", default=None)
    synth.add_argument("--seed", type=int, default=None, help="GA seed override")
    synth.add_argument("--weights", default=None, help="objective weights e,m,s,h")
    synth.add_argument("--out", default=".", help="output directory")
    synth.set_defaults(handler=_cmd_synth)

    analyze = sub.add_parser("analyze", help="score a mechanism against a task")
    analyze.add_argument("mechanism", help="mechanism JSON")
    analyze.add_argument("task", help="task JSON")
    analyze.add_argument("--weights", default=None, help="objective weights e,m,s,h")
    analyze.add_argument("--out", default=".", help="output directory")
    analyze.set_defaults(handler=_cmd_analyze)

    sim = sub.add_parser("simulate", help="closed-loop two-axis simulation")
    sim.add_argument("mechanism", help="mechanism JSON")
    sim.add_argument("plant", help="plant config JSON")
    sim.add_argument("gains", help="controller gains JSON (cv + servo)")
    sim.add_argument("profile", help="servo demand profile CSV")
    sim.add_argument("--cycles", type=int, default=10, help="demand cycles to run")
    sim.add_argument(
        "--cv-cps", type=float, default=4096.0,
        help="CV demand ramp rate in counts per second",
    )
    sim.add_argument("--out", default=".", help="output directory")
    sim.set_defaults(handler=_cmd_simulate)
    return parser


def _cmd_synth(args) -> int:
    task = TaskSpec.load(args.task)
    config = json.loads(Path(args.config).read_text()) if args.config else {}

    ga_kwargs = dict(config.get("ga", {}))
    if args.seed is not None:
        ga_kwargs["rng_seed"] = args.seed
    ga_config = GAConfig(**ga_kwargs)
    bounds = (
        DesignBounds.from_dict(config["bounds"]) if "bounds" in config else DesignBounds()
    )
    weights = _resolve_weights(args.weights, config.get("weights"))
    n_harmonics = _clamp_harmonics(int(config.get("n_harmonics", DEFAULT_N_HARMONICS)), task.k)
    descent_kwargs = dict(config.get("descent", {}))
    descent = DescentConfig(bounds=bounds, **descent_kwargs)

    out = _ensure_out(args.out)
    result = synthesize(
        task,
        bounds=bounds,
        ga_config=ga_config,
        weights=weights,
        descent_config=descent,
        n_harmonics=n_harmonics,
    )
    result.refined_dims.save(out / "mechanism.json")
    write_history_csv(result.history, out / "history.csv")
    _write_manifest(
        out,
        command="synth",
        inputs={"task": str(args.task), "config": str(args.config) if args.config else None},
        seed=ga_config.rng_seed,
        overrides={
            "weights": weights.to_dict(),
            "n_harmonics": n_harmonics,
            "ga": ga_kwargs,
            "bounds": bounds.to_dict(),
        },
    )
    print(
        f"synth done: total {result.refined_total!r} "
        f"(error {result.refined_breakdown.error!r}, m^3 {result.refined_breakdown.mobility!r})"
    )
    return EXIT_OK


def _cmd_analyze(args) -> int:
    dims = MechanismDims.load(args.mechanism)
    task = TaskSpec.load(args.task)
    weights = _resolve_weights(args.weights, None)
    out = _ensure_out(args.out)

    n_harmonics = _clamp_harmonics(DEFAULT_N_HARMONICS, task.k)
    trace = track_closure(dims, task, n_harmonics=n_harmonics)
    breakdown = evaluate_trace(trace, dims.s, weights=weights, n_harmonics=n_harmonics)

    payload = breakdown.to_dict()
    payload["m"] = trace.m
    (out / "objective.json").write_text(json.dumps(payload, indent=2) + "\n")

    theta5 = trace.theta5_values()
    profile = MotionProfile(values=theta5, cv_speed=task.cv_speed)
    velocity, acceleration = differentiate(profile)
    _write_profiles_csv(out / "profiles.csv", task, theta5, velocity, acceleration)

    plots.plot_effector_trace(trace, task, out / "effector.svg")

    if trace.m == 0:
        torque = dynamics.inverse_dynamics(dims, dynamics.InertialParams(), trace, task.cv_speed)
        dynamics.write_torque_csv(torque, out / "torque.csv")
        plots.plot_torque_profile(torque, out / "torque.svg")
    else:
        print(
            f"warning: {trace.m} immobile samples; torque outputs omitted",
            file=sys.stderr,
        )

    _write_manifest(
        out,
        command="analyze",
        inputs={"mechanism": str(args.mechanism), "task": str(args.task)},
        seed=None,
        overrides={"weights": weights.to_dict()},
    )
    print(f"analyze done: total {breakdown.total!r}, m={trace.m}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    dims = MechanismDims.load(args.mechanism)
    plant = PlantConfig.load(args.plant)
    gains_cv, gains_servo = load_gains_pair(args.gains)
    values = read_profile_csv(args.profile)
    if args.cycles < 1:
        raise ValueError("--cycles must be >= 1")
    # Profile phase follows the CV demand ramp: 4096 cps = one turn per second.
    profile = MotionProfile(values=values, cv_speed=2.0 * math.pi)
    out = _ensure_out(args.out)

    log = simulate(
        dims, plant, gains_cv, gains_servo, profile,
        cycles=args.cycles, cv_demand_cps=args.cv_cps,
    )
    write_axis_log_csv(log.cv, out / "cv_log.csv")
    write_axis_log_csv(log.servo, out / "servo_log.csv")
    plots.plot_axis_error(log.cv, "cv", out / "error_cv.svg")
    plots.plot_axis_error(log.servo, "servo", out / "error_servo.svg")

    _write_manifest(
        out,
        command="simulate",
        inputs={
            "mechanism": str(args.mechanism),
            "plant": str(args.plant),
            "gains": str(args.gains),
            "profile": str(args.profile),
        },
        seed=None,
        overrides={"cycles": args.cycles, "cv_cps": args.cv_cps},
    )
    peak_cv = int(np.max(np.abs(log.cv.error)))
    peak_servo = int(np.max(np.abs(log.servo.error)))
    print(f"simulate done: peak error cv {peak_cv} counts, servo {peak_servo} counts")
    return EXIT_OK


def _clamp_harmonics(n: int, k: int) -> int:
    """Keep the harmonic count resolvable for a k-point task."""
    return max(1, min(n, (k - 1) // 2))


def _resolve_weights(flag: str | None, config_value: dict | None) -> ObjectiveWeights:
    if flag is not None:
        parts = [float(part) for part in flag.split(",")]
        if len(parts) != 4:
            raise ValueError("--weights needs four comma-separated values: e,m,s,h")
        return ObjectiveWeights(
            w_error=parts[0], w_mob=parts[1], w_swept=parts[2], w_harm=parts[3]
        )
    if config_value:
        return ObjectiveWeights.from_dict(config_value)
    return ObjectiveWeights()


def _ensure_out(out) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_profiles_csv(path, task: TaskSpec, theta5, velocity, acceleration) -> None:
    theta2 = task.theta2_values()
    with open(path, "w", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["theta2_deg", "theta5", "velocity", "acceleration"])
        for i in range(len(theta5)):
            writer.writerow(
                [
                    repr(math.degrees(float(theta2[i]))),
                    repr(float(theta5[i])),
                    repr(float(velocity[i])),
                    repr(float(acceleration[i])),
                ]
            )


def _write_manifest(out: Path, command: str, inputs: dict, seed, overrides: dict) -> None:
    manifest = {
        "command": command,
        "inputs": inputs,
        "seed": seed,
        "config_overrides": overrides,
        "out_dir": str(out),
        "version": __version__,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


if __name__ == "__main__":
    sys.exit(main())
