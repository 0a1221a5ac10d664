import math
import logging
import multiprocessing as mp
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .dynamics import (
    DEFAULT_DT,
    IntegrationBlowupError,
    StateVector,
    VectorFieldSpec,
    advance_rk4,
    is_bounded,
    iter_steps,
)
from .eigenvalues import max_real_eigenvalue, max_symmetric_eigenvalue
from .semi_invariant import SemiInvariantSpec, eval_H

logger = logging.getLogger(__name__)

DEFAULT_BURN_IN_FRACTION = 0.1
DEFAULT_REPORT_EVERY = 1.0
# Horizon used when a constant matrix is too large for the closed form
CONSTANT_MATRIX_HORIZON = 200.0


@dataclass(frozen=True, eq=False)
class OnSurfaceSystem:
    """Dynamics of the complement J and the linear factor L_S(J) on the surface I = 0"""
    p: int
    q: int
    eval_L_S: Callable[[np.ndarray], np.ndarray]
    eval_P_S: Callable[[np.ndarray], np.ndarray]
    name: str = "on-surface"
    constant: bool = False

    def __post_init__(self):
        if self.p < 1 or self.q < 0:
            raise ValueError(f"Invalid on-surface dimensions p={self.p}, q={self.q}")

    def eval_H_S(self, J: np.ndarray) -> np.ndarray:
        L = np.asarray(self.eval_L_S(np.asarray(J, dtype=float)), dtype=float)
        return (L + L.T) / 2.0


@dataclass(frozen=True, eq=False)
class StabilityEstimate:
    """Time-averaged stability exponent of a surface"""
    D_S: float
    T: float
    burn_in: float
    dt: float
    i0: np.ndarray
    J0: np.ndarray
    seed: Optional[int]
    convergence_series: List[Tuple[float, float]] = field(default_factory=list)

    @property
    def stable(self) -> bool:
        return self.D_S < 0


@dataclass(frozen=True)
class SweepPoint:
    """One grid point of a D_S sweep"""
    value: float
    D_S: float
    status: str = "ok"
    message: str = ""


def random_versor(p: int, seed: Optional[int]) -> np.ndarray:
    """Unit vector drawn from a seeded Gaussian"""
    rng = np.random.default_rng(seed)
    while True:
        v = rng.standard_normal(p)
        norm = float(np.linalg.norm(v))
        if norm > 1e-8:
            return v / norm


def estimate_Ds(
    system: OnSurfaceSystem,
    J0: Sequence[float],
    i0: Optional[Sequence[float]] = None,
    T: float = 200.0,
    burn_in: Optional[float] = None,
    dt: float = DEFAULT_DT,
    seed: Optional[int] = 0,
    report_every: float = DEFAULT_REPORT_EVERY,
) -> StabilityEstimate:
    """Time average of <i, H_S(J) i> along the on-surface flow.

    J follows dJ/dt = P_S(J), the versor follows di/dt = L_S i - i <i,H_S i>
    and is renormalized after every step. The integrand is carried as an
    extra RK4 component so that it shares the integrator's order.
    """
    if burn_in is None:
        burn_in = DEFAULT_BURN_IN_FRACTION * T
    if not T > burn_in >= 0:
        raise ValueError(f"Need T > burn_in >= 0, got T={T}, burn_in={burn_in}")
    if not dt > 0:
        raise ValueError(f"Step size must be positive, got {dt}")

    J = np.asarray(J0, dtype=float).reshape(-1)
    if J.size != system.q:
        raise ValueError(f"J0 has {J.size} components, '{system.name}' expects {system.q}")
    if i0 is None:
        i = random_versor(system.p, seed)
    else:
        i = np.asarray(i0, dtype=float).reshape(-1)
        if i.size != system.p:
            raise ValueError(f"i0 has {i.size} components, '{system.name}' expects {system.p}")
        if abs(float(np.linalg.norm(i)) - 1.0) > 1e-12:
            raise ValueError(f"i0 must be a unit vector, got norm {np.linalg.norm(i)}")
    i_start = i.copy()

    q, p = system.q, system.p
    L_S = system.eval_L_S
    P_S = system.eval_P_S

    def rhs(z: np.ndarray) -> np.ndarray:
        Jz = z[:q]
        iz = z[q:q + p]
        L = np.asarray(L_S(Jz), dtype=float)
        Li = L @ iz
        rate = float(iz @ Li)
        dJ = np.asarray(P_S(Jz), dtype=float) if q else np.empty(0)
        return np.concatenate((dJ, Li - iz * rate, (rate,)))

    z = np.concatenate((J, i, (0.0,)))
    series: List[Tuple[float, float]] = []

    def march(z: np.ndarray, t_start: float, t_end: float, report: bool) -> np.ndarray:
        next_report = t_start + report_every
        t_prev = t_start
        for _, t_k, h in iter_steps(t_start, t_end, dt):
            z_new = advance_rk4(rhs, z, h)
            if not is_bounded(z_new):
                raise IntegrationBlowupError(
                    f"On-surface flow of '{system.name}' blew up after t={t_prev}",
                    StateVector(t_prev, z[:q + p]),
                )
            versor_norm = float(np.linalg.norm(z_new[q:q + p]))
            z_new[q:q + p] /= versor_norm
            z = z_new
            t_prev = t_k
            if report and t_k >= next_report - 1e-9 * report_every and t_k < t_end:
                series.append((t_k, z[-1] / (t_k - t_start)))
                next_report += report_every
        return z

    if burn_in > 0:
        z = march(z, 0.0, burn_in, report=False)
        z[-1] = 0.0
    z = march(z, burn_in, T, report=True)

    D_S = float(z[-1] / (T - burn_in))
    series.append((T, D_S))
    logger.info(f"D_S of '{system.name}' over T={T} (burn-in {burn_in}): {D_S:.8f}")

    return StabilityEstimate(
        D_S=D_S, T=T, burn_in=burn_in, dt=dt, i0=i_start, J0=np.asarray(J0, dtype=float),
        seed=seed if i0 is None else None, convergence_series=series,
    )


def ds_constant_matrix(L: np.ndarray, seed: int = 0) -> float:
    """D_S for a constant L_S: the largest real part of its eigenvalues"""
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {L.shape}")
    if L.shape[0] <= 3:
        return max_real_eigenvalue(L)

    logger.info(f"Closed form unavailable for p={L.shape[0]}, time-averaging instead")
    frozen = np.array(L)
    system = OnSurfaceSystem(
        p=L.shape[0], q=0, eval_L_S=lambda J: frozen, eval_P_S=lambda J: np.empty(0),
        name="constant-matrix", constant=True,
    )
    return estimate_Ds(system, np.empty(0), T=CONSTANT_MATRIX_HORIZON, seed=seed).D_S


def lambda_H_max(spec: SemiInvariantSpec, x) -> float:
    """Largest eigenvalue of H(x)"""
    return max_symmetric_eigenvalue(eval_H(spec, x))


def _sweep_point(
    family: Callable[[float], OnSurfaceSystem],
    value: float,
    J0: Sequence[float],
    T: float,
    burn_in: Optional[float],
    dt: float,
    seed: Optional[int],
) -> SweepPoint:
    try:
        estimate = estimate_Ds(family(value), J0, T=T, burn_in=burn_in, dt=dt, seed=seed)
        return SweepPoint(value=value, D_S=estimate.D_S)
    except IntegrationBlowupError as e:
        logger.warning(f"Sweep point {value} blew up: {e}")
        return SweepPoint(value=value, D_S=math.nan, status="blowup", message=str(e))


def sweep_Ds(
    family: Callable[[float], OnSurfaceSystem],
    grid: Sequence[float],
    J0: Sequence[float],
    T: float = 200.0,
    burn_in: Optional[float] = None,
    dt: float = DEFAULT_DT,
    seed: Optional[int] = 0,
    workers: int = 1,
) -> List[SweepPoint]:
    """Estimate D_S at every grid value, in grid order.

    With workers > 1 the points run in a process pool, so family must be
    picklable (a module-level function or functools.partial of one).
    """
    if workers < 1:
        raise ValueError(f"workers must be at least 1, got {workers}")
    jobs = [(family, float(v), tuple(J0), T, burn_in, dt, seed) for v in grid]
    logger.info(f"Sweeping {len(jobs)} points with {workers} worker(s)")
    if workers == 1 or len(jobs) <= 1:
        return [_sweep_point(*job) for job in jobs]
    with mp.Pool(processes=min(workers, len(jobs))) as pool:
        return pool.starmap(_sweep_point, jobs)


def bracket_sign_change(points: Sequence[SweepPoint]) -> Optional[Tuple[float, float]]:
    """First pair of consecutive finite points where D_S changes sign"""
    finite = [pt for pt in points if math.isfinite(pt.D_S)]
    for left, right in zip(finite, finite[1:]):
        if (left.D_S > 0) != (right.D_S > 0):
            return left.value, right.value
    return None


def locate_sign_change(
    family: Callable[[float], OnSurfaceSystem],
    lo: float,
    hi: float,
    J0: Sequence[float],
    tol: float = 0.1,
    T: float = 200.0,
    burn_in: Optional[float] = None,
    dt: float = DEFAULT_DT,
    seed: Optional[int] = 0,
) -> float:
    """Bisect on the sign of D_S until the crossing is known to within tol"""
    def ds(value: float) -> float:
        return estimate_Ds(family(value), J0, T=T, burn_in=burn_in, dt=dt, seed=seed).D_S

    d_lo, d_hi = ds(lo), ds(hi)
    if (d_lo > 0) == (d_hi > 0):
        raise ValueError(f"D_S has the same sign at {lo} ({d_lo}) and {hi} ({d_hi})")
    while (hi - lo) / 2.0 > tol:
        mid = 0.5 * (lo + hi)
        d_mid = ds(mid)
        logger.debug(f"Bisection: D_S({mid}) = {d_mid}")
        if (d_mid > 0) == (d_lo > 0):
            lo, d_lo = mid, d_mid
        else:
            hi, d_hi = mid, d_mid
    return 0.5 * (lo + hi)


def largest_lyapunov_exponent(
    field: VectorFieldSpec,
    jacobian: Callable[[np.ndarray], np.ndarray],
    x0: Sequence[float],
    T: float = 200.0,
    burn_in: Optional[float] = None,
    dt: float = DEFAULT_DT,
    v0: Optional[Sequence[float]] = None,
    seed: Optional[int] = 0,
) -> float:
    """Largest Lyapunov exponent by tangent-vector renormalization.

    Accumulates ln||v|| after each RK4 step of (x, v) with dv/dt = Df(x) v,
    then rescales v to unit length.
    """
    if burn_in is None:
        burn_in = DEFAULT_BURN_IN_FRACTION * T
    if not T > burn_in >= 0:
        raise ValueError(f"Need T > burn_in >= 0, got T={T}, burn_in={burn_in}")
    m = field.dimension
    x = np.asarray(x0, dtype=float)
    v = random_versor(m, seed) if v0 is None else np.asarray(v0, dtype=float)
    v = v / np.linalg.norm(v)
    f = field.evaluator

    def rhs(z: np.ndarray) -> np.ndarray:
        xz, vz = z[:m], z[m:]
        return np.concatenate((f(xz), np.asarray(jacobian(xz), dtype=float) @ vz))

    z = np.concatenate((x, v))
    total = 0.0
    for t_start, t_end, accumulate in ((0.0, burn_in, False), (burn_in, T, True)):
        if t_end <= t_start:
            continue
        t_prev = t_start
        for _, t_k, h in iter_steps(t_start, t_end, dt):
            z_new = advance_rk4(rhs, z, h)
            if not is_bounded(z_new):
                raise IntegrationBlowupError(
                    f"Tangent flow of '{field.name}' blew up after t={t_prev}", StateVector(t_prev, z[:m])
                )
            growth = float(np.linalg.norm(z_new[m:]))
            if accumulate:
                total += math.log(growth)
            z_new[m:] /= growth
            z = z_new
            t_prev = t_k
    return total / (T - burn_in)
