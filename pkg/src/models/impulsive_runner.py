import math
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .dynamics import (
    DEFAULT_DT,
    IntegrationBlowupError,
    StateVector,
    VectorFieldSpec,
    integrate_segment,
)
from .impulse_maps import ImpulseBookkeeping, ImpulseMap
from .impulse_schedule import ImpulseSchedule
from .semi_invariant import ImpulseRecord, SemiInvariantSpec
from .systems import AuxiliaryQuadrature

logger = logging.getLogger(__name__)

DEFAULT_CONVERGENCE_TOL = 1e-10


class RunStatus(str, Enum):
    CONVERGED = "converged"
    HORIZON = "horizon"
    BLOWUP = "blowup"


@dataclass(frozen=True, eq=False)
class TrajectorySample:
    t: float
    x: np.ndarray
    norm_I: float
    n_impulses: int
    aux: Dict[str, float] = field(default_factory=dict)

    @property
    def log_norm_I(self) -> float:
        return math.log(self.norm_I) if self.norm_I > 0 else -math.inf

    def as_state(self) -> StateVector:
        return StateVector(self.t, self.x)


@dataclass
class TrajectoryRecord:
    """Samples, impulse records and final status of one controlled run"""
    system_name: str
    t0: float
    norm0: float
    samples: List[TrajectorySample] = field(default_factory=list)
    impulses: List[ImpulseRecord] = field(default_factory=list)
    status: RunStatus = RunStatus.HORIZON
    message: str = ""

    @property
    def impulse_counts(self) -> List[Tuple[float, int]]:
        """Cumulative impulse count n against impulse time t_n"""
        return [(record.t_n, record.n) for record in self.impulses]

    @property
    def final_norm(self) -> float:
        return self.samples[-1].norm_I if self.samples else self.norm0

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def norms(self) -> np.ndarray:
        return np.array([s.norm_I for s in self.samples])

    def states(self) -> np.ndarray:
        return np.array([s.x for s in self.samples])

    def aux_series(self, name: str) -> np.ndarray:
        return np.array([s.aux[name] for s in self.samples])

    def first_time_below(self, threshold: float) -> Optional[float]:
        for sample in self.samples:
            if sample.norm_I < threshold:
                return sample.t
        return None

    def segment_states(self, k: int) -> List[StateVector]:
        """Samples of the k-th free-flow segment (k = 0 before the first impulse)"""
        segment = [s.as_state() for s in self.samples if s.n_impulses == k]
        if not segment:
            raise IndexError(f"Run has no segment {k}")
        return segment


@dataclass(frozen=True)
class ControllerConfig:
    """Schedule, impulse map and the convergence-speed parameters of a run"""
    schedule: Optional[ImpulseSchedule]
    impulse_map: Optional[ImpulseMap]
    alpha: float
    kappa: Optional[float] = None
    delta: Optional[float] = None
    kappa_eff: Optional[float] = None
    ds_used: Optional[float] = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if (self.schedule is None) != (self.impulse_map is None):
            raise ValueError("Schedule and impulse map must be given together")

    @property
    def controlled(self) -> bool:
        return self.schedule is not None


class RunBlowupError(IntegrationBlowupError):
    """Blowup during an impulsive run; carries the partial record"""

    def __init__(self, message: str, last_state: StateVector, record: TrajectoryRecord):
        super().__init__(message, last_state)
        self.record = record


def _augment(field_spec: VectorFieldSpec, auxiliaries: Sequence[AuxiliaryQuadrature]) -> VectorFieldSpec:
    if not auxiliaries:
        return field_spec
    m = field_spec.dimension
    f = field_spec.evaluator
    integrands = [aux.integrand for aux in auxiliaries]

    def evaluator(z: np.ndarray) -> np.ndarray:
        x = z[:m]
        return np.concatenate((np.asarray(f(x), dtype=float), [g(x) for g in integrands]))

    return VectorFieldSpec(m + len(integrands), evaluator, name=f"{field_spec.name}+aux")


def run_impulsive(
    field_spec: VectorFieldSpec,
    spec: SemiInvariantSpec,
    schedule: Optional[ImpulseSchedule],
    impulse_map: Optional[ImpulseMap],
    x0: Sequence[float],
    t0: float,
    t_max: float,
    dt: float = DEFAULT_DT,
    convergence_tol: float = DEFAULT_CONVERGENCE_TOL,
    sample_every: int = 1,
    auxiliaries: Sequence[AuxiliaryQuadrature] = (),
) -> TrajectoryRecord:
    """Alternate free flow and impulses until t_max, convergence or blowup.

    A schedule of None (or one whose first time lies beyond t_max) gives the
    uncontrolled run. Both the pre- and post-impulse states are sampled at
    every impulse time.
    """
    if not t_max > t0:
        raise ValueError(f"t_max={t_max} must exceed t0={t0}")
    if (schedule is None) != (impulse_map is None):
        raise ValueError("Schedule and impulse map must be given together")
    if schedule is not None and schedule.t0 != t0:
        raise ValueError(f"Schedule starts at {schedule.t0}, run starts at {t0}")

    m = field_spec.dimension
    names = [aux.name for aux in auxiliaries]
    augmented = _augment(field_spec, auxiliaries)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (m,):
        raise ValueError(f"x0 has shape {x0.shape}, field '{field_spec.name}' needs ({m},)")

    norm0 = spec.norm_I(x0)
    record = TrajectoryRecord(system_name=spec.name, t0=t0, norm0=norm0)
    book = ImpulseBookkeeping(n=0, t_prev=t0, norm_prev_plus=norm0, x_prev_plus=x0.copy())

    def add_sample(state: StateVector):
        x = state.x[:m]
        aux = {name: float(value) for name, value in zip(names, state.x[m:])}
        record.samples.append(TrajectorySample(state.t, np.array(x), spec.norm_I(x), book.n, aux))

    converged = {"flag": False}

    def observer(t: float, z: np.ndarray) -> bool:
        if spec.norm_I(z[:m]) < convergence_tol:
            converged["flag"] = True
            return True
        return False

    state = StateVector(t0, np.concatenate((x0, np.zeros(len(names)))))
    add_sample(state)
    if norm0 < convergence_tol:
        record.status = RunStatus.CONVERGED
        return record

    def advance(state: StateVector, t_end: float) -> StateVector:
        try:
            segment = integrate_segment(augmented, state, t_end, dt, sample_every, observer)
        except IntegrationBlowupError as e:
            for sample in e.samples[1:]:
                add_sample(sample)
            record.status = RunStatus.BLOWUP
            record.message = str(e)
            logger.error(f"Run of '{spec.name}' blew up: {e}")
            raise RunBlowupError(str(e), e.last_state, record) from e
        for sample in segment[1:]:
            add_sample(sample)
        return segment[-1]

    times = schedule.times() if schedule is not None else iter(())
    for t_n in times:
        if t_n > t_max:
            break
        if t_n > state.t:
            state = advance(state, t_n)
            if converged["flag"]:
                record.status = RunStatus.CONVERGED
                logger.info(f"'{spec.name}' converged at t={state.t} after {book.n} impulses")
                return record

        x_minus = np.array(state.x[:m])
        x_plus, impulse = impulse_map.apply(x_minus, t_n, spec, book)
        record.impulses.append(impulse)
        logger.debug(
            f"Impulse {impulse.n} at t={t_n}: beta={impulse.beta_n:.6g} A={impulse.A_n:.6g} B={impulse.B_n:.6g}"
        )
        book.n = impulse.n
        book.t_prev = t_n
        book.norm_prev_plus = impulse.norm_after
        book.x_prev_plus = np.array(x_plus)

        state = StateVector(t_n, np.concatenate((x_plus, state.x[m:])))
        add_sample(state)
        if record.samples[-1].norm_I < convergence_tol:
            record.status = RunStatus.CONVERGED
            logger.info(f"'{spec.name}' converged at impulse {impulse.n} (t={t_n})")
            return record

    if state.t < t_max:
        state = advance(state, t_max)
        if converged["flag"]:
            record.status = RunStatus.CONVERGED
            return record

    record.status = RunStatus.HORIZON
    logger.info(f"'{spec.name}' reached t_max={t_max} with {book.n} impulses, ||I|| = {record.final_norm:.3e}")
    return record
