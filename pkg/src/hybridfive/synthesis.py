"""Two-stage dimensional synthesis: binary GA followed by steepest descent.

The GA is the classic generational kind: Gray-coded fixed-point genes,
roulette-wheel selection on linearly scaled fitness, one-point crossover,
per-bit mutation and single-individual elitism. Every stochastic draw comes
from one seeded generator, so runs are reproducible bit for bit. The winner
is then polished by a finite-difference steepest-descent search.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .mechanism import MechanismDims, TaskSpec
from .objective import DEFAULT_N_HARMONICS, ObjectiveBreakdown, ObjectiveWeights, evaluate

GENE_ORDER = ("p", "q", "r", "s", "servo_x", "servo_y", "cv_x", "cv_y")


class InfeasiblePopulation(RuntimeError):
    """Every individual in every generation failed to evaluate."""


@dataclass(frozen=True)
class GAConfig:
    """Control parameters of the genetic stage."""

    population_size: int = 40
    crossover_rate: float = 0.85
    mutation_rate: float = 0.03
    generations: int = 200
    rng_seed: int = 0
    bits_per_gene: int = 16
    scaling_multiple: float = 2.0

    def __post_init__(self):
        if self.population_size < 4 or self.population_size % 2 != 0:
            raise ValueError("population_size must be even and >= 4")
        for name in ("crossover_rate", "mutation_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {rate}")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")
        if self.bits_per_gene < 2:
            raise ValueError("bits_per_gene must be >= 2")
        if self.scaling_multiple < 1.0:
            raise ValueError("scaling_multiple must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "GAConfig":
        return cls(**data)


@dataclass(frozen=True)
class DesignBounds:
    """Per-gene (lower, upper) search bounds.

    A gene with lower == upper is pinned to that value and excluded from the
    chromosome; by default the CV pivot is pinned at the origin.
    """

    p: tuple[float, float] = (10.0, 500.0)
    q: tuple[float, float] = (10.0, 500.0)
    r: tuple[float, float] = (10.0, 500.0)
    s: tuple[float, float] = (10.0, 500.0)
    servo_x: tuple[float, float] = (-500.0, 500.0)
    servo_y: tuple[float, float] = (-500.0, 500.0)
    cv_x: tuple[float, float] = (0.0, 0.0)
    cv_y: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        for name in GENE_ORDER:
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValueError(f"bounds for {name} must satisfy lower <= upper")
            object.__setattr__(self, name, (float(lo), float(hi)))

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in GENE_ORDER])

    def free_genes(self) -> list[int]:
        """Indices of genes that actually vary."""
        return [i for i, name in enumerate(GENE_ORDER) if
                getattr(self, name)[0] < getattr(self, name)[1]]

    def to_dict(self) -> dict:
        return {name: list(getattr(self, name)) for name in GENE_ORDER}

    @classmethod
    def from_dict(cls, data: dict) -> "DesignBounds":
        kwargs = {name: tuple(value) for name, value in data.items()}
        return cls(**kwargs)


@dataclass(frozen=True)
class DescentConfig:
    """Knobs of the steepest-descent refinement stage."""

    bounds: DesignBounds = field(default_factory=DesignBounds)
    fd_step_rel: float = 1e-4
    alpha_init: float = 1.0
    alpha_min: float = 1e-10
    rel_improvement_tol: float = 1e-9
    max_iterations: int = 500


@dataclass
class SynthesisResult:
    """Best individual found, its score, and the per-generation history."""

    best_dims: MechanismDims
    best_total: float
    best_breakdown: ObjectiveBreakdown | None
    history: list[float]
    refined_dims: MechanismDims | None = None
    refined_total: float | None = None
    refined_breakdown: ObjectiveBreakdown | None = None

    def to_dict(self) -> dict:
        return {
            "best_dims": self.best_dims.to_dict(),
            "best_total": self.best_total,
            "best_breakdown": self.best_breakdown.to_dict() if self.best_breakdown else None,
            "history": list(self.history),
            "refined_dims": self.refined_dims.to_dict() if self.refined_dims else None,
            "refined_total": self.refined_total,
            "refined_breakdown": (
                self.refined_breakdown.to_dict() if self.refined_breakdown else None
            ),
        }


def dims_from_genes(values: np.ndarray) -> MechanismDims:
    """Build a candidate machine from the 8 gene values (order as GENE_ORDER)."""
    p, q, r, s, servo_x, servo_y, cv_x, cv_y = (float(v) for v in values)
    return MechanismDims(
        p=p, q=q, r=r, s=s, cv_ground=(cv_x, cv_y), servo_ground=(servo_x, servo_y)
    )


def genes_from_dims(dims: MechanismDims) -> np.ndarray:
    return np.array(
        [
            dims.p,
            dims.q,
            dims.r,
            dims.s,
            dims.servo_ground[0],
            dims.servo_ground[1],
            dims.cv_ground[0],
            dims.cv_ground[1],
        ]
    )


def linear_scale(raw_fitnesses, scaling_multiple: float) -> np.ndarray:
    """Affine fitness scaling that preserves the mean.

    The map is chosen so the best individual gets scaling_multiple times the
    mean; when that would push any fitness negative it falls back to pinning
    the worst at zero instead. A uniform population maps to itself.
    """
    raw = np.asarray(raw_fitnesses, dtype=float)
    if len(raw) == 0:
        raise ValueError("need at least one individual")
    mean = raw.mean()
    best = raw.max()
    worst = raw.min()
    if best == worst:
        return raw.copy()
    slope = mean * (scaling_multiple - 1.0) / (best - mean)
    intercept = mean * (1.0 - slope)
    scaled = slope * raw + intercept
    if scaled.min() < 0.0:
        slope = mean / (mean - worst)
        scaled = slope * (raw - worst)
    return scaled


def roulette_select(scaled_fitnesses: np.ndarray, rng: np.random.Generator) -> int:
    """Draw an index with probability proportional to its fitness.

    Zero total fitness falls back to a uniform draw.
    """
    total = float(np.sum(scaled_fitnesses))
    if total <= 0.0:
        return int(rng.integers(len(scaled_fitnesses)))
    ticket = rng.random() * total
    cumulative = np.cumsum(scaled_fitnesses)
    return int(np.searchsorted(cumulative, ticket, side="right").clip(0, len(cumulative) - 1))


def ga_run(
    task: TaskSpec,
    bounds: DesignBounds,
    config: GAConfig,
    weights: ObjectiveWeights | None = None,
    n_harmonics: int = DEFAULT_N_HARMONICS,
    objective_fn: Callable[[MechanismDims], float] | None = None,
) -> SynthesisResult:
    """Run the generational GA and return the best individual ever seen.

    ``objective_fn`` replaces the full mechanism objective when given (used
    for surrogate problems in testing); it must map MechanismDims to a value
    to minimise. Candidates whose evaluation raises ValueError count as
    infeasible.

    Raises:
        InfeasiblePopulation: no candidate in any generation evaluated.
    """
    weights = weights or ObjectiveWeights()
    if objective_fn is None:
        def objective_fn(dims):
            return evaluate(dims, task, weights=weights, n_harmonics=n_harmonics).total

    rng = np.random.default_rng(config.rng_seed)
    free = bounds.free_genes()
    if not free:
        raise ValueError("all genes are pinned; nothing to search")
    n_bits = config.bits_per_gene * len(free)
    pop = (rng.random((config.population_size, n_bits)) < 0.5).astype(np.uint8)

    best_bits = None
    best_total = math.inf
    history: list[float] = []

    for _ in range(config.generations):
        totals = np.empty(config.population_size)
        for i in range(config.population_size):
            values = _decode(pop[i], bounds, free, config.bits_per_gene)
            try:
                totals[i] = objective_fn(dims_from_genes(values))
            except ValueError:
                totals[i] = math.inf
            if not np.isfinite(totals[i]):
                totals[i] = math.inf
        gen_best = int(np.argmin(totals))
        if totals[gen_best] < best_total:
            best_total = float(totals[gen_best])
            best_bits = pop[gen_best].copy()
        history.append(best_total)

        fitness = np.where(np.isfinite(totals), 1.0 / (1.0 + totals), 0.0)
        scaled = linear_scale(fitness, config.scaling_multiple)

        children = np.empty_like(pop)
        for pair in range(config.population_size // 2):
            first = pop[roulette_select(scaled, rng)].copy()
            second = pop[roulette_select(scaled, rng)].copy()
            if rng.random() < config.crossover_rate:
                point = int(rng.integers(1, n_bits))
                first[point:], second[point:] = second[point:].copy(), first[point:].copy()
            for child in (first, second):
                flips = rng.random(n_bits) < config.mutation_rate
                child ^= flips.astype(np.uint8)
            children[2 * pair] = first
            children[2 * pair + 1] = second
        if best_bits is not None:
            children[0] = best_bits
        pop = children

    if best_bits is None or not np.isfinite(best_total):
        raise InfeasiblePopulation("no feasible individual in any generation")

    best_values = _decode(best_bits, bounds, free, config.bits_per_gene)
    best_dims = dims_from_genes(best_values)
    breakdown = None
    try:
        breakdown = evaluate(best_dims, task, weights=weights, n_harmonics=n_harmonics)
    except ValueError:
        pass
    return SynthesisResult(
        best_dims=best_dims,
        best_total=best_total,
        best_breakdown=breakdown,
        history=history,
    )


def steepest_descent(
    start_dims: MechanismDims,
    task: TaskSpec,
    weights: ObjectiveWeights | None = None,
    step_config: DescentConfig | None = None,
    n_harmonics: int = DEFAULT_N_HARMONICS,
    objective_fn: Callable[[MechanismDims], float] | None = None,
) -> MechanismDims:
    """Refine a candidate by backtracking steepest descent.

    The gradient is taken by central differences of the smooth objective
    components (the cubed immobile count is piecewise constant, so it is
    left out of the gradient), with a per-gene step of fd_step_rel times the
    gene's bound range. A step is accepted only if the full objective,
    mobility included, strictly decreases; the step length is halved until
    that holds or it underflows. Returns the start if no descent direction
    is found.
    """
    weights = weights or ObjectiveWeights()
    cfg = step_config or DescentConfig()
    bounds = cfg.bounds.as_array()
    free = cfg.bounds.free_genes()
    if not free:
        return start_dims

    if objective_fn is None:
        def split_objective(values):
            try:
                breakdown = evaluate(
                    dims_from_genes(values),
                    task,
                    weights=weights,
                    n_harmonics=n_harmonics,
                )
            except ValueError:
                return math.inf, math.inf
            return breakdown.total, breakdown.total - weights.w_mob * breakdown.mobility
    else:
        def split_objective(values):
            try:
                value = objective_fn(dims_from_genes(values))
            except ValueError:
                return math.inf, math.inf
            return value, value

    x = genes_from_dims(start_dims)
    full, _ = split_objective(x)
    if not np.isfinite(full):
        return start_dims

    # Pinned genes are not searched: hold them at the start value rather
    # than clamping them to the pin (the start may legitimately differ).
    lower = bounds[:, 0].copy()
    upper = bounds[:, 1].copy()
    for g in range(len(GENE_ORDER)):
        if g not in free:
            lower[g] = upper[g] = x[g]

    steps = cfg.fd_step_rel * (bounds[:, 1] - bounds[:, 0])
    alpha = cfg.alpha_init
    for _ in range(cfg.max_iterations):
        gradient = np.zeros_like(x)
        for g in free:
            probe = x.copy()
            probe[g] = x[g] + steps[g]
            _, ahead = split_objective(probe)
            probe[g] = x[g] - steps[g]
            _, behind = split_objective(probe)
            if np.isfinite(ahead) and np.isfinite(behind):
                gradient[g] = (ahead - behind) / (2.0 * steps[g])
        if not np.any(gradient):
            break

        improved = False
        while alpha >= cfg.alpha_min:
            candidate = np.clip(x - alpha * gradient, lower, upper)
            cand_full, _ = split_objective(candidate)
            if cand_full < full:
                improved = True
                break
            alpha *= 0.5
        if not improved:
            break

        relative_gain = (full - cand_full) / max(1.0, abs(full))
        x, full = candidate, cand_full
        alpha = min(alpha * 2.0, 1e6)
        if relative_gain < cfg.rel_improvement_tol:
            break

    return dims_from_genes(x)


def synthesize(
    task: TaskSpec,
    bounds: DesignBounds | None = None,
    ga_config: GAConfig | None = None,
    weights: ObjectiveWeights | None = None,
    descent_config: DescentConfig | None = None,
    n_harmonics: int = DEFAULT_N_HARMONICS,
) -> SynthesisResult:
    """GA followed by steepest descent; fills the refined fields of the result."""
    bounds = bounds or DesignBounds()
    ga_config = ga_config or GAConfig()
    weights = weights or ObjectiveWeights()
    descent_config = descent_config or DescentConfig(bounds=bounds)

    result = ga_run(task, bounds, ga_config, weights=weights, n_harmonics=n_harmonics)
    refined = steepest_descent(
        result.best_dims,
        task,
        weights=weights,
        step_config=descent_config,
        n_harmonics=n_harmonics,
    )
    breakdown = evaluate(refined, task, weights=weights, n_harmonics=n_harmonics)
    if breakdown.total <= result.best_total:
        result.refined_dims = refined
        result.refined_breakdown = breakdown
        result.refined_total = breakdown.total
    else:
        result.refined_dims = result.best_dims
        result.refined_breakdown = result.best_breakdown
        result.refined_total = result.best_total
    return result


def write_history_csv(history, path) -> None:
    """Best-so-far objective per generation as ``generation,total`` rows."""
    with open(path, "w", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["generation", "total"])
        for generation, total in enumerate(history):
            writer.writerow([generation, repr(float(total))])


def _decode(bits: np.ndarray, bounds: DesignBounds, free: list[int], bits_per_gene: int) -> np.ndarray:
    """Gray-coded fixed-point chromosome to the 8 gene values."""
    span = bounds.as_array()
    values = span[:, 0].copy()
    denominator = float(2**bits_per_gene - 1)
    for slot, g in enumerate(free):
        gray = bits[slot * bits_per_gene : (slot + 1) * bits_per_gene]
        binary = np.bitwise_xor.accumulate(gray)
        integer = int(binary @ (1 << np.arange(bits_per_gene - 1, -1, -1)))
        lo, hi = span[g]
        values[g] = lo + (hi - lo) * integer / denominator
    return values
