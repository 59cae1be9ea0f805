"""Synthesis, analysis and closed-loop simulation of hybrid five-bar machines."""

__version__ = "0.1.0"

from .mechanism import (
    ClosureTrace,
    DegenerateDyad,
    DegenerateTarget,
    MechanismDims,
    PoseSample,
    TaskSpec,
    crank_tip,
    forward_effector,
    solve_closing_dyad,
    solve_input_dyad,
    track_closure,
)
from .motion import (
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
from .objective import (
    ObjectiveBreakdown,
    ObjectiveWeights,
    evaluate,
    evaluate_trace,
    obj_error,
    obj_harm,
    obj_mob,
    obj_swept,
)
from .synthesis import (
    DescentConfig,
    DesignBounds,
    GAConfig,
    InfeasiblePopulation,
    SynthesisResult,
    ga_run,
    linear_scale,
    roulette_select,
    steepest_descent,
    synthesize,
)
from .dynamics import (
    ImmobileTrace,
    InertialParams,
    TorqueProfile,
    inverse_dynamics,
    torque_at_state,
    torque_summary,
)
from .control import (
    AxisLogSample,
    AxisParams,
    ControllerGains,
    PlantConfig,
    SimLog,
    UnstableSimulation,
    controller_step,
    quantize,
    simulate,
)
