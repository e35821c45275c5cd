"""Quantum-behaved particle swarm minimization over a bounded box.

Particles have no velocity; each moves around a stochastic attractor drawn
between its personal best and the global best,

    p_i = u * pbest_i + (1 - u) * gbest
    x_i = p_i +/- beta * |mbest - x_i| * ln(1/v)

with u, v uniform per dimension, mbest the mean of personal bests, and the
contraction-expansion coefficient beta annealed over the run. Bounds are
handled by reflection so particles do not pile up on the box faces. All
randomness flows from one seeded generator, so a (seed, config) pair fully
determines the trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoFeasiblePointError


@dataclass(frozen=True)
class SearchSpace:
    """Named per-dimension bounds, conventionally in log space."""

    names: tuple[str, ...]
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if not (len(self.names) == lower.size == upper.size):
            raise ValueError("names, lower and upper must have equal length")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("bounds must be finite")
        if not np.all(lower < upper):
            raise ValueError("each lower bound must be strictly below its upper bound")

    @property
    def dimension(self) -> int:
        return len(self.names)

    def values(self, theta: np.ndarray) -> dict[str, float]:
        """Map a log-space point to named linear-space values."""
        return {name: math.exp(float(v)) for name, v in zip(self.names, np.asarray(theta))}

    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)


@dataclass(frozen=True)
class SwarmConfig:
    """Swarm size, schedule and reproducibility knobs."""

    particle_count: int = 30
    max_iterations: int = 300
    beta_start: float = 1.0
    beta_end: float = 0.5
    seed: int = 0
    restarts: int = 3
    tolerance: float = 1e-8
    stall_iterations: int = 50

    def __post_init__(self) -> None:
        if self.particle_count < 2:
            raise ValueError("particle_count must be at least 2")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not (self.beta_start >= self.beta_end > 0.0):
            raise ValueError("need beta_start >= beta_end > 0")
        if self.restarts < 0:
            raise ValueError("restarts must be non-negative")
        if self.tolerance < 0.0:
            raise ValueError("tolerance must be non-negative")
        if self.stall_iterations < 1:
            raise ValueError("stall_iterations must be at least 1")


@dataclass
class SwarmState:
    """Mutable per-run optimizer state."""

    positions: np.ndarray
    values: np.ndarray
    pbest_positions: np.ndarray
    pbest_values: np.ndarray
    gbest_position: np.ndarray
    gbest_value: float
    evaluations: int = 0


@dataclass(frozen=True)
class OptimizationResult:
    theta: np.ndarray
    value: float
    trace: np.ndarray
    evaluations: int


def _evaluate(objective, point: np.ndarray) -> float:
    value = objective(point)
    try:
        value = float(value)
    except (TypeError, ValueError):
        return math.inf
    return value if math.isfinite(value) else math.inf


def _reflect_into_bounds(x: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Fold positions back into the box by reflection at the faces."""
    span = upper - lower
    # map to a 2*span sawtooth, then mirror the upper half
    y = np.mod(x - lower, 2.0 * span)
    y = np.where(y > span, 2.0 * span - y, y)
    return lower + y


def init_state(objective, space: SearchSpace, config: SwarmConfig, rng: np.random.Generator) -> SwarmState:
    positions = rng.uniform(space.lower, space.upper, size=(config.particle_count, space.dimension))
    # pin one particle to the box midpoint: the optimized result can then
    # never be worse than the default (mid-bounds) configuration
    positions[0] = space.midpoint()
    values = np.array([_evaluate(objective, p) for p in positions])
    best = int(np.argmin(values))
    return SwarmState(
        positions=positions,
        values=values,
        pbest_positions=positions.copy(),
        pbest_values=values.copy(),
        gbest_position=positions[best].copy(),
        gbest_value=float(values[best]),
        evaluations=len(values),
    )


def qbps_step(
    state: SwarmState,
    objective,
    beta: float,
    rng: np.random.Generator,
    space: SearchSpace,
) -> SwarmState:
    """Advance the swarm one iteration; bests only improve, never worsen."""
    n, d = state.positions.shape
    mbest = state.pbest_positions.mean(axis=0)
    u = rng.uniform(size=(n, d))
    v = rng.uniform(size=(n, d))
    sign = np.where(rng.uniform(size=(n, d)) < 0.5, 1.0, -1.0)
    attractor = u * state.pbest_positions + (1.0 - u) * state.gbest_position
    # v == 0 has measure zero but would give log(0); nudge for safety
    v = np.maximum(v, 1e-300)
    step = beta * np.abs(mbest - state.positions) * np.log(1.0 / v)
    proposals = _reflect_into_bounds(attractor + sign * step, space.lower, space.upper)
    for i in range(n):
        value = _evaluate(objective, proposals[i])
        state.positions[i] = proposals[i]
        state.values[i] = value
        if value < state.pbest_values[i]:
            state.pbest_values[i] = value
            state.pbest_positions[i] = proposals[i]
            if value < state.gbest_value:
                state.gbest_value = value
                state.gbest_position = proposals[i].copy()
    state.evaluations += n
    return state


def _run_once(objective, space: SearchSpace, config: SwarmConfig, rng: np.random.Generator):
    state = init_state(objective, space, config, rng)
    trace = [state.gbest_value]
    stall = 0
    for iteration in range(config.max_iterations):
        if config.max_iterations > 1:
            frac = iteration / (config.max_iterations - 1)
        else:
            frac = 0.0
        beta = config.beta_start + frac * (config.beta_end - config.beta_start)
        previous = state.gbest_value
        qbps_step(state, objective, beta, rng, space)
        trace.append(state.gbest_value)
        improved = previous - state.gbest_value
        stall = 0 if improved > config.tolerance else stall + 1
        if stall >= config.stall_iterations:
            break
    return state, trace


def optimize(objective, space: SearchSpace, config: SwarmConfig) -> OptimizationResult:
    """Minimize the objective; returns the best point, value and trace.

    Non-finite objective values are treated as +inf. The trace is the
    running best across all restarts, hence non-increasing. Raises
    NoFeasiblePointError when every evaluation came back non-finite.
    """
    best_theta: np.ndarray | None = None
    best_value = math.inf
    trace: list[float] = []
    evaluations = 0
    for run_index in range(config.restarts + 1):
        rng = np.random.default_rng((config.seed, run_index))
        state, run_trace = _run_once(objective, space, config, rng)
        evaluations += state.evaluations
        for value in run_trace:
            best_value_so_far = min(best_value, value)
            trace.append(best_value_so_far)
            best_value = best_value_so_far
        if state.gbest_value <= best_value:
            best_theta = state.gbest_position.copy()
    if best_theta is None or not math.isfinite(best_value):
        raise NoFeasiblePointError("objective was non-finite at every visited point")
    return OptimizationResult(best_theta, best_value, np.asarray(trace), evaluations)
