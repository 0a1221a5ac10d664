import math
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import integrate

from .dynamics import StateVector, VectorFieldSpec

logger = logging.getLogger(__name__)

# The versor is undefined once ||I|| drops below this floor times p
VERSOR_FLOOR = 1e-300

QUADRATURE_RULES = ('simpson', 'trapezoid')

StateLike = Union[StateVector, np.ndarray, Sequence[float]]


class UndefinedVersorError(ValueError):
    """Raised when a quantity needs the versor of I while ||I|| is zero"""


def _coords(x: StateLike) -> np.ndarray:
    if isinstance(x, StateVector):
        return x.x
    return np.asarray(x, dtype=float)


@dataclass(frozen=True, eq=False)
class SemiInvariantSpec:
    """Semi-invariant I(x) of a field together with its linear factor L(x).

    The pair satisfies dI/dt = L(x) I(x) along every trajectory of the field;
    J(x) completes I to a full set of coordinates.
    """
    p: int
    eval_I: Callable[[np.ndarray], np.ndarray]
    eval_L: Callable[[np.ndarray], np.ndarray]
    eval_J: Callable[[np.ndarray], np.ndarray]
    field: VectorFieldSpec
    name: str = "semi-invariant"

    def __post_init__(self):
        if not 1 <= self.p <= self.field.dimension:
            raise ValueError(
                f"Semi-invariant dimension must be between 1 and {self.field.dimension}, got {self.p}"
            )

    @property
    def complement_dimension(self) -> int:
        return self.field.dimension - self.p

    def norm_I(self, x: StateLike) -> float:
        return float(np.linalg.norm(self.eval_I(_coords(x))))


@dataclass(frozen=True, eq=False)
class Decomposition:
    """I, its norm, its versor (None when undefined) and the complement J"""
    I: np.ndarray
    norm_I: float
    versor: Optional[np.ndarray]
    J: np.ndarray

    @property
    def versor_defined(self) -> bool:
        return self.versor is not None


@dataclass(frozen=True)
class ImpulseRecord:
    """Bookkeeping of one control impulse.

    beta_n is the free-flow log growth of ||I|| since the previous impulse,
    A_n the log jump applied by the impulse and B_n = A_n + beta_n.
    """
    n: int
    t_n: float
    delta_n: float
    beta_n: float
    A_n: float
    B_n: float
    norm_before: float
    norm_after: float
    beta_alt: Optional[float] = None
    control_exponent: Optional[float] = None
    skipped: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"Impulse index must be at least 1, got {self.n}")
        if not self.delta_n > 0:
            raise ValueError(f"Impulse gap must be positive, got {self.delta_n}")
        if self.norm_before < 0 or self.norm_after < 0:
            raise ValueError("Impulse norms must be non-negative")


def eval_H(spec: SemiInvariantSpec, x: StateLike) -> np.ndarray:
    """Symmetric part of L(x)"""
    L = np.asarray(spec.eval_L(_coords(x)), dtype=float)
    if L.shape != (spec.p, spec.p):
        raise ValueError(f"L(x) of '{spec.name}' has shape {L.shape}, expected ({spec.p}, {spec.p})")
    return (L + L.T) / 2.0


def decompose(spec: SemiInvariantSpec, x: StateLike) -> Decomposition:
    """Split a state into (I, ||I||, i, J)"""
    coords = _coords(x)
    I = np.asarray(spec.eval_I(coords), dtype=float)
    if I.shape != (spec.p,):
        raise ValueError(f"I(x) of '{spec.name}' has shape {I.shape}, expected ({spec.p},)")
    norm = float(np.linalg.norm(I))
    versor = I / norm if norm >= VERSOR_FLOOR * spec.p else None
    J = np.asarray(spec.eval_J(coords), dtype=float)
    return Decomposition(I=I, norm_I=norm, versor=versor, J=J)


def quadratic_form(spec: SemiInvariantSpec, x: StateLike) -> float:
    """<i, H(x) i>, the instantaneous log growth rate of ||I||"""
    parts = decompose(spec, x)
    if parts.versor is None:
        raise UndefinedVersorError(f"Versor of '{spec.name}' is undefined at ||I|| = {parts.norm_I}")
    i = parts.versor
    return float(i @ eval_H(spec, x) @ i)


def growth_rate(spec: SemiInvariantSpec) -> Callable[[np.ndarray], float]:
    """Integrand <i,Hi> that reads zero where the versor is undefined"""
    def integrand(x: np.ndarray) -> float:
        I = np.asarray(spec.eval_I(x), dtype=float)
        norm = float(np.linalg.norm(I))
        if norm < VERSOR_FLOOR * spec.p:
            return 0.0
        i = I / norm
        L = np.asarray(spec.eval_L(x), dtype=float)
        return float(i @ L @ i)
    return integrand


def beta_via_quadrature(
    segment: Sequence[StateVector], spec: SemiInvariantSpec, rule: str = 'simpson'
) -> float:
    """Integrate <i,Hi> over the sample times of one free-flow segment"""
    if rule not in QUADRATURE_RULES:
        raise ValueError(f"Unknown quadrature rule '{rule}', expected one of {QUADRATURE_RULES}")
    if len(segment) < 2:
        return 0.0
    times = np.array([s.t for s in segment])
    values = np.array([quadratic_form(spec, s) for s in segment])
    if rule == 'simpson' and len(segment) >= 3:
        return float(integrate.simpson(values, x=times))
    return float(integrate.trapezoid(values, x=times))


def beta_via_logratio(norm_start: float, norm_end: float) -> float:
    """ln(norm_end / norm_start), the authoritative segment growth"""
    if not (norm_start > 0 and norm_end > 0):
        raise ValueError(f"Norms must be positive, got {norm_start} and {norm_end}")
    return math.log(norm_end) - math.log(norm_start)


def make_impulse_record(
    n: int,
    t_prev: float,
    t_n: float,
    norm_prev_plus: float,
    norm_minus: float,
    A_n: float,
    **extras,
) -> ImpulseRecord:
    """Build the record of an impulse that multiplies ||I|| by exp(A_n)"""
    beta = beta_via_logratio(norm_prev_plus, norm_minus)
    return ImpulseRecord(
        n=n,
        t_n=t_n,
        delta_n=t_n - t_prev,
        beta_n=beta,
        A_n=A_n,
        B_n=A_n + beta,
        norm_before=norm_minus,
        norm_after=norm_minus * math.exp(A_n),
        **extras,
    )


def telescoping_residual(records: Sequence[ImpulseRecord], norm0: float) -> float:
    """Largest relative gap between ||I(t_n+)|| and ||I_0|| exp(sum of B_q)"""
    worst = 0.0
    total = 0.0
    for record in records:
        total += record.B_n
        predicted = norm0 * math.exp(total)
        if record.norm_after > 0:
            worst = max(worst, abs(predicted - record.norm_after) / record.norm_after)
    return worst


def semi_invariance_residual(
    field: VectorFieldSpec, spec: SemiInvariantSpec, x: StateLike, eps: float = 1e-4
) -> float:
    """Distance between dI/dt along F (central difference) and L(x) I(x)"""
    coords = _coords(x)
    velocity = field.evaluate(coords)
    forward = np.asarray(spec.eval_I(coords + eps * velocity), dtype=float)
    backward = np.asarray(spec.eval_I(coords - eps * velocity), dtype=float)
    derivative = (forward - backward) / (2.0 * eps)
    predicted = np.asarray(spec.eval_L(coords), dtype=float) @ np.asarray(spec.eval_I(coords), dtype=float)
    return float(np.linalg.norm(derivative - predicted))
