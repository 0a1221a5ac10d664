import math
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy import integrate

from .impulse_maps import RadialRescale, SyncRescale
from .impulse_schedule import FixedInterval, GeometricGrowth
from .impulsive_runner import ControllerConfig, TrajectoryRecord
from .semi_invariant import SemiInvariantSpec, quadratic_form, UndefinedVersorError
from .stability import lambda_H_max

logger = logging.getLogger(__name__)

GUARANTEED = "guaranteed"
NOT_GUARANTEED = "not guaranteed by this criterion"
INCONCLUSIVE = "inconclusive"
NOT_APPLICABLE = "not applicable"

SUFFICIENCY_NOTE = (
    "Only the sufficient direction of the convergence criteria can be checked "
    "on a finite run; a negative verdict does not mean the run diverges."
)

GROWTH_INTEGRAL = "growth_integral"

_RELATIVE_SLACK = 1e-9
_ROUNDOFF_SLACK = 64.0 * np.finfo(float).eps


@dataclass(frozen=True)
class CriterionVerdict:
    name: str
    applies: bool
    verdict: str
    value: Optional[float] = None
    detail: str = ""


@dataclass(frozen=True)
class GuaranteeReport:
    """Verdicts of the sufficient convergence criteria for one run"""
    bounded_gaps: CriterionVerdict
    partial_sums: CriterionVerdict
    schedule_bound: CriterionVerdict
    pathwise: CriterionVerdict
    lambda_bound: float
    notes: List[str] = field(default_factory=list)

    @property
    def verdicts(self) -> List[CriterionVerdict]:
        return [self.bounded_gaps, self.partial_sums, self.schedule_bound, self.pathwise]

    def to_text(self) -> str:
        lines = [f"M (max lambda_H over run) = {self.lambda_bound!r}"]
        for item in self.verdicts:
            value = "" if item.value is None else f" value={item.value!r}"
            lines.append(f"{item.name}: {item.verdict} (applies={item.applies}{value}) {item.detail}".rstrip())
        lines.extend(f"note: {note}" for note in self.notes)
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ParallelCriterion:
    """Cumulative integral of <i,Hi> and the norm it reconstructs"""
    times: np.ndarray
    integral: np.ndarray
    reconstruction: np.ndarray
    measured: np.ndarray
    slope: float

    @property
    def decaying(self) -> bool:
        return bool(self.slope < 0)

    @property
    def max_relative_error(self) -> float:
        positive = self.measured > 0
        if not np.any(positive):
            return 0.0
        gap = np.abs(self.reconstruction[positive] - self.measured[positive]) / self.measured[positive]
        return float(np.max(gap))


def _max_lambda(run: TrajectoryRecord, spec: SemiInvariantSpec) -> float:
    return max(lambda_H_max(spec, sample.x) for sample in run.samples)


def _check_bounded_gaps(run: TrajectoryRecord, controller: ControllerConfig) -> CriterionVerdict:
    name = "bounded gaps with B_q <= -eps"
    if not run.impulses:
        return CriterionVerdict(name, False, INCONCLUSIVE, detail="no impulses")
    if not isinstance(controller.schedule, FixedInterval):
        return CriterionVerdict(name, False, NOT_GUARANTEED, detail="impulse gaps are unbounded")
    eps = -max(record.B_n for record in run.impulses)
    structural = isinstance(controller.impulse_map, (RadialRescale, SyncRescale))
    if eps > 0 and structural:
        return CriterionVerdict(name, True, GUARANTEED, value=eps,
                                detail=f"Delta <= {controller.schedule.delta!r}")
    return CriterionVerdict(name, True, NOT_GUARANTEED, value=eps, detail="some B_q is not negative")


def _check_partial_sums(run: TrajectoryRecord, controller: ControllerConfig, M: float) -> CriterionVerdict:
    name = "partial sums of B plus M Delta_{n+1}"
    if controller.schedule is None or not run.impulses:
        return CriterionVerdict(name, False, INCONCLUSIVE, detail="no impulses")
    totals = np.cumsum([record.B_n for record in run.impulses])
    gaps = [controller.schedule.next_gap(record.t_n, record.n) for record in run.impulses]
    predicate = totals + M * np.asarray(gaps)
    if predicate.size < 3:
        return CriterionVerdict(name, True, INCONCLUSIVE, value=float(predicate[-1]), detail="too few impulses")
    slope = float(np.polyfit(np.arange(predicate.size), predicate, 1)[0])
    if slope < 0 and predicate[-1] < predicate[0]:
        return CriterionVerdict(name, True, GUARANTEED, value=float(predicate[-1]), detail=f"trend {slope:.6g}")
    return CriterionVerdict(name, True, NOT_GUARANTEED, value=float(predicate[-1]), detail=f"trend {slope:.6g}")


def _check_schedule_bound(
    run: TrajectoryRecord, controller: ControllerConfig, ds_bound: Optional[float]
) -> CriterionVerdict:
    name = "B = -alpha Delta with Delta_{n+1} <= kappa (t_n - t0) / M + C"
    if not isinstance(controller.impulse_map, (RadialRescale, SyncRescale)):
        return CriterionVerdict(name, False, NOT_APPLICABLE, detail="impulse map is not of the -alpha Delta form")
    if ds_bound is None or not ds_bound > 0:
        return CriterionVerdict(name, False, NOT_APPLICABLE, detail="no positive bound M >= D_S supplied")

    schedule = controller.schedule
    if isinstance(schedule, GeometricGrowth):
        implied = schedule.rate * ds_bound
    elif isinstance(schedule, FixedInterval):
        implied = 0.0
    else:
        return CriterionVerdict(name, False, NOT_APPLICABLE, detail="unknown schedule")

    kappa = controller.kappa if controller.kappa is not None else implied
    alpha = controller.alpha
    if implied > kappa * (1.0 + _RELATIVE_SLACK):
        return CriterionVerdict(name, True, NOT_GUARANTEED, value=implied,
                                detail=f"schedule needs kappa >= {implied!r} > {kappa!r}")
    if isinstance(schedule, GeometricGrowth):
        for record in run.impulses:
            gap = schedule.next_gap(record.t_n, record.n)
            bound = kappa * (record.t_n - schedule.t0) / ds_bound
            if gap > bound * (1.0 + _RELATIVE_SLACK) + 1e-12:
                return CriterionVerdict(name, True, NOT_GUARANTEED, value=implied,
                                        detail=f"gap after impulse {record.n} exceeds the bound")
    if 0 < kappa < alpha or (implied == 0.0 and alpha > 0):
        return CriterionVerdict(name, True, GUARANTEED, value=kappa, detail=f"kappa={kappa!r} < alpha={alpha!r}")
    return CriterionVerdict(name, True, NOT_GUARANTEED, value=kappa, detail=f"kappa={kappa!r} >= alpha={alpha!r}")


def _check_pathwise(run: TrajectoryRecord, M: float) -> CriterionVerdict:
    name = "pathwise ||I(t)|| <= ||I0|| exp(sum B + M (t - t_n))"
    sums = np.concatenate(([0.0], np.cumsum([record.B_n for record in run.impulses])))
    anchors = [run.t0] + [record.t_n for record in run.impulses]
    violations = 0
    worst = -math.inf
    for sample in run.samples:
        n = sample.n_impulses
        elapsed = sample.t - anchors[n]
        growth = math.exp(M * elapsed)
        bound = run.norm0 * math.exp(sums[n]) * growth
        slack = _RELATIVE_SLACK * bound + _ROUNDOFF_SLACK * (1.0 + float(np.max(np.abs(sample.x)))) * growth
        excess = sample.norm_I - bound
        worst = max(worst, excess / bound if bound > 0 else excess)
        if excess > slack:
            violations += 1
    if violations:
        return CriterionVerdict(name, True, NOT_GUARANTEED, value=float(violations),
                                detail=f"{violations} sample(s) above the bound")
    return CriterionVerdict(name, True, GUARANTEED, value=0.0, detail=f"worst relative margin {worst:.3e}")


def check_guarantees(
    run: TrajectoryRecord,
    spec: SemiInvariantSpec,
    controller: ControllerConfig,
    ds_bound: Optional[float] = None,
    lambda_bound: Optional[float] = None,
) -> GuaranteeReport:
    """Evaluate the sufficient convergence criteria on a finished run.

    lambda_bound defaults to the largest eigenvalue of H over the samples;
    ds_bound (M >= D_S) defaults to the D_S the controller used.
    """
    if not run.samples:
        raise ValueError("Run has no samples")
    M = lambda_bound if lambda_bound is not None else _max_lambda(run, spec)
    if ds_bound is None:
        ds_bound = controller.ds_used

    report = GuaranteeReport(
        bounded_gaps=_check_bounded_gaps(run, controller),
        partial_sums=_check_partial_sums(run, controller, M),
        schedule_bound=_check_schedule_bound(run, controller, ds_bound),
        pathwise=_check_pathwise(run, M),
        lambda_bound=M,
        notes=[SUFFICIENCY_NOTE],
    )
    for item in report.verdicts:
        logger.info(f"{item.name}: {item.verdict}")
    return report


def parallel_criterion(run: TrajectoryRecord, spec: SemiInvariantSpec) -> ParallelCriterion:
    """Cumulative integral of <i,Hi> along the run.

    Uses the integrator-accumulated growth integral when the run carried it,
    otherwise a trapezoid over the samples.
    """
    times = run.times()
    measured = run.norms()
    if run.samples and GROWTH_INTEGRAL in run.samples[0].aux:
        integral = run.aux_series(GROWTH_INTEGRAL)
    else:
        rates = []
        for sample in run.samples:
            try:
                rates.append(quadratic_form(spec, sample.x))
            except UndefinedVersorError:
                rates.append(0.0)
        integral = integrate.cumulative_trapezoid(rates, x=times, initial=0.0)
    reconstruction = run.norm0 * np.exp(integral)

    half = times.size // 2
    if times.size - half >= 2 and times[-1] > times[half]:
        slope = float(np.polyfit(times[half:], integral[half:], 1)[0])
    else:
        slope = 0.0
    return ParallelCriterion(times=times, integral=np.asarray(integral), reconstruction=reconstruction,
                             measured=measured, slope=slope)
