import math
import logging
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Tuple

import numpy as np

logger = logging.getLogger(__name__)

# Any state component beyond this magnitude counts as a diverged run
BLOWUP_THRESHOLD = 1e12
DEFAULT_DT = 0.001

# Remainders below this fraction of dt are absorbed into the last full step
_STEP_SLACK = 1e-7

Observer = Callable[[float, np.ndarray], bool]


@dataclass(frozen=True, eq=False)
class StateVector:
    """A time-stamped point of a trajectory"""
    t: float
    x: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        if x.ndim != 1 or x.size < 1:
            raise ValueError(f"State must be a non-empty 1-d vector, got shape {x.shape}")
        if not math.isfinite(self.t):
            raise ValueError(f"State time must be finite, got {self.t}")
        if not np.all(np.isfinite(x)):
            raise ValueError(f"State components must be finite at t={self.t}")
        x.setflags(write=False)
        object.__setattr__(self, 'x', x)
        object.__setattr__(self, 't', float(self.t))

    @property
    def dimension(self) -> int:
        return int(self.x.size)

    def __repr__(self) -> str:
        return f"StateVector(t={self.t!r}, x={self.x.tolist()!r})"


@dataclass(frozen=True, eq=False)
class VectorFieldSpec:
    """Autonomous right-hand side F: R^m -> R^m"""
    dimension: int
    evaluator: Callable[[np.ndarray], np.ndarray]
    name: str = "field"

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError(f"Field dimension must be at least 1, got {self.dimension}")

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Evaluate F and check the shape of the result"""
        value = np.asarray(self.evaluator(np.asarray(x, dtype=float)), dtype=float)
        if value.shape != (self.dimension,):
            raise ValueError(
                f"Field '{self.name}' returned shape {value.shape}, expected ({self.dimension},)"
            )
        return value


class IntegrationBlowupError(RuntimeError):
    """Raised when the state becomes non-finite or exceeds BLOWUP_THRESHOLD.

    samples holds the segment up to and including the last good state.
    """

    def __init__(self, message: str, last_state: StateVector, samples: Optional[List[StateVector]] = None):
        super().__init__(message)
        self.last_state = last_state
        self.samples = samples if samples is not None else [last_state]


def is_bounded(x: np.ndarray) -> bool:
    """True when every component is finite and within BLOWUP_THRESHOLD"""
    return bool(np.all(np.isfinite(x)) and np.max(np.abs(x), initial=0.0) <= BLOWUP_THRESHOLD)


def advance_rk4(evaluator: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step of length h on raw arrays"""
    k1 = evaluator(x)
    k2 = evaluator(x + 0.5 * h * k1)
    k3 = evaluator(x + 0.5 * h * k2)
    k4 = evaluator(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_step(field: VectorFieldSpec, state: StateVector, dt: float) -> StateVector:
    """Advance state by one RK4 step of length dt"""
    if not dt > 0:
        raise ValueError(f"Step size must be positive, got {dt}")
    if state.dimension != field.dimension:
        raise ValueError(
            f"State dimension {state.dimension} does not match field '{field.name}' ({field.dimension})"
        )
    x_new = advance_rk4(field.evaluate, state.x, dt)
    if not is_bounded(x_new):
        raise IntegrationBlowupError(
            f"RK4 step from t={state.t} left the bounded domain", state
        )
    return StateVector(state.t + dt, x_new)


def count_steps(span: float, dt: float) -> int:
    """Number of steps covering span with step dt, the last one possibly shortened"""
    return max(1, math.ceil(span / dt - _STEP_SLACK))


def iter_steps(t_start: float, t_end: float, dt: float) -> Iterator[Tuple[int, float, float]]:
    """Yield (k, t_k, h_k) so that t_k = t_start + k*dt and the last t_k is exactly t_end"""
    n_steps = count_steps(t_end - t_start, dt)
    for k in range(1, n_steps + 1):
        if k < n_steps:
            yield k, t_start + k * dt, dt
        else:
            yield k, t_end, t_end - (t_start + (k - 1) * dt)


def integrate_segment(
    field: VectorFieldSpec,
    state: StateVector,
    t_end: float,
    dt: float = DEFAULT_DT,
    sample_every: int = 1,
    observer: Optional[Observer] = None,
) -> List[StateVector]:
    """Integrate from state.t to t_end with fixed-step RK4.

    Samples are kept every sample_every steps; the start and end states are
    always included. observer(t, x) is called after every step, and a True
    return value stops the integration at that step (the stopping state
    becomes the last sample).
    """
    if not t_end > state.t:
        raise ValueError(f"Segment end {t_end} must be after its start {state.t}")
    if not dt > 0:
        raise ValueError(f"Step size must be positive, got {dt}")
    if sample_every < 1:
        raise ValueError(f"sample_every must be at least 1, got {sample_every}")
    if state.dimension != field.dimension:
        raise ValueError(
            f"State dimension {state.dimension} does not match field '{field.name}' ({field.dimension})"
        )

    # Validate the evaluator once, then call it directly
    field.evaluate(state.x)
    evaluator = field.evaluator

    samples = [state]
    x = np.array(state.x)
    t_prev = state.t
    n_steps = count_steps(t_end - state.t, dt)

    for k, t_k, h in iter_steps(state.t, t_end, dt):
        x_new = np.asarray(advance_rk4(evaluator, x, h), dtype=float)
        if not is_bounded(x_new):
            last_good = StateVector(t_prev, x)
            if samples[-1].t < t_prev:
                samples.append(last_good)
            raise IntegrationBlowupError(
                f"Field '{field.name}' blew up in the step after t={t_prev}", last_good, samples
            )
        x = x_new
        t_prev = t_k

        stop = observer(t_k, x) if observer is not None else False
        if stop or k % sample_every == 0 or k == n_steps:
            samples.append(StateVector(t_k, x))
        if stop:
            logger.debug(f"Observer stopped '{field.name}' at t={t_k}")
            break

    return samples
