import math
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .semi_invariant import ImpulseRecord, SemiInvariantSpec, make_impulse_record
from .systems import S_IDX, V_IDX

logger = logging.getLogger(__name__)

SYNC_PARTNER_CONVENTIONS = ('previous', 'current')
GUARD_POLICIES = ('clamp', 'growth-only')


@dataclass
class ImpulseBookkeeping:
    """State carried from one impulse to the next"""
    n: int
    t_prev: float
    norm_prev_plus: float
    x_prev_plus: np.ndarray


class ImpulseMap:
    """Instantaneous state reset applied at each scheduled time"""
    kind = "impulse"
    alpha: float

    def apply(
        self, x_minus: np.ndarray, t_n: float, spec: SemiInvariantSpec, book: ImpulseBookkeeping
    ) -> Tuple[np.ndarray, ImpulseRecord]:
        raise NotImplementedError

    def _check_alpha(self):
        if not self.alpha > 0:
            raise ValueError(f"Convergence speed alpha must be positive, got {self.alpha}")


def _zero_impulse(x_minus: np.ndarray, t_n: float, book: ImpulseBookkeeping) -> Tuple[np.ndarray, ImpulseRecord]:
    record = ImpulseRecord(
        n=book.n + 1, t_n=t_n, delta_n=t_n - book.t_prev, beta_n=0.0, A_n=0.0, B_n=0.0,
        norm_before=0.0, norm_after=0.0, skipped=True,
    )
    return np.array(x_minus), record


def radial_rescale(
    x_minus: np.ndarray, t_n: float, spec: SemiInvariantSpec, book: ImpulseBookkeeping, alpha: float
) -> Tuple[np.ndarray, ImpulseRecord]:
    """x+ = exp(A_n) x- with A_n = -ln(||x-|| / ||x_{n-1}+||) - alpha Delta_n"""
    norm_minus = spec.norm_I(x_minus)
    if norm_minus == 0.0 or book.norm_prev_plus == 0.0:
        return _zero_impulse(x_minus, t_n, book)
    delta_n = t_n - book.t_prev
    A_n = -(math.log(norm_minus) - math.log(book.norm_prev_plus)) - alpha * delta_n
    x_plus = math.exp(A_n) * np.asarray(x_minus, dtype=float)
    record = make_impulse_record(book.n + 1, book.t_prev, t_n, book.norm_prev_plus, norm_minus, A_n)
    return x_plus, record


def sync_rescale(
    x_minus: np.ndarray,
    t_n: float,
    spec: SemiInvariantSpec,
    book: ImpulseBookkeeping,
    alpha: float,
    delta: Optional[float] = None,
    partner: str = 'previous',
) -> Tuple[np.ndarray, ImpulseRecord]:
    """Pull x toward its partner y: x+ = y + exp(A_n)(x- - y), y unchanged.

    With partner='previous' the reference separation is the stored
    ||I(t_{n-1}+)||; with partner='current' it is ||x(t_{n-1}+) - y(t_n)||.
    beta_alt holds the growth measured against the other reference.
    """
    if partner not in SYNC_PARTNER_CONVENTIONS:
        raise ValueError(f"Unknown partner convention '{partner}'")
    x_minus = np.asarray(x_minus, dtype=float)
    dim = x_minus.size // 2
    x, y = x_minus[:dim], x_minus[dim:2 * dim]
    norm_minus = spec.norm_I(x_minus)
    if norm_minus == 0.0 or book.norm_prev_plus == 0.0:
        return _zero_impulse(x_minus, t_n, book)

    delta_n = t_n - book.t_prev
    decay = alpha * (delta if delta is not None else delta_n)
    stale = float(np.linalg.norm(book.x_prev_plus[:dim] - y))
    if partner == 'previous':
        reference = book.norm_prev_plus
        beta_alt = math.log(norm_minus) - math.log(stale) if stale > 0 else None
    else:
        if stale == 0.0:
            return _zero_impulse(x_minus, t_n, book)
        reference = stale
        beta_alt = math.log(norm_minus) - math.log(stale)

    A_n = -decay - (math.log(norm_minus) - math.log(reference))
    x_plus = x_minus.copy()
    x_plus[:dim] = y + math.exp(A_n) * (x - y)
    record = make_impulse_record(
        book.n + 1, book.t_prev, t_n, book.norm_prev_plus, norm_minus, A_n, beta_alt=beta_alt,
    )
    return x_plus, record


def parallel_vaccination(
    x_minus: np.ndarray,
    t_n: float,
    spec: SemiInvariantSpec,
    book: ImpulseBookkeeping,
    alpha: float,
    guard: str = 'clamp',
) -> Tuple[np.ndarray, ImpulseRecord]:
    """Move a fraction of the susceptibles into V; E and I are untouched.

    The scaling exponent is -ln(||I(t_n-)|| / ||I(t_{n-1}+)||) - alpha Delta_n.
    guard='clamp' caps it at 0; guard='growth-only' vaccinates only when the
    infected norm grew since the previous impulse.
    """
    if guard not in GUARD_POLICIES:
        raise ValueError(f"Unknown guard policy '{guard}'")
    x_minus = np.asarray(x_minus, dtype=float)
    norm_minus = spec.norm_I(x_minus)
    if norm_minus == 0.0 or book.norm_prev_plus == 0.0:
        return _zero_impulse(x_minus, t_n, book)

    delta_n = t_n - book.t_prev
    exponent = -(math.log(norm_minus) - math.log(book.norm_prev_plus)) - alpha * delta_n
    skipped = False
    if guard == 'clamp':
        if exponent > 0:
            logger.warning(f"Vaccination exponent {exponent:.4g} at t={t_n} clamped to 0")
            exponent = 0.0
            skipped = True
    elif norm_minus <= book.norm_prev_plus:
        logger.info(f"Infected norm did not grow before t={t_n}; vaccination skipped")
        exponent = 0.0
        skipped = True

    x_plus = x_minus.copy()
    susceptible = x_minus[S_IDX]
    x_plus[S_IDX] = math.exp(exponent) * susceptible
    x_plus[V_IDX] = x_minus[V_IDX] + (susceptible - x_plus[S_IDX])
    record = make_impulse_record(
        book.n + 1, book.t_prev, t_n, book.norm_prev_plus, norm_minus, 0.0,
        control_exponent=exponent, skipped=skipped,
    )
    return x_plus, record


@dataclass(frozen=True)
class RadialRescale(ImpulseMap):
    alpha: float
    kind = "radial"

    def __post_init__(self):
        self._check_alpha()

    def apply(self, x_minus, t_n, spec, book):
        return radial_rescale(x_minus, t_n, spec, book, self.alpha)


@dataclass(frozen=True)
class SyncRescale(ImpulseMap):
    alpha: float
    delta: Optional[float] = None
    partner: str = 'previous'
    kind = "sync"

    def __post_init__(self):
        self._check_alpha()
        if self.partner not in SYNC_PARTNER_CONVENTIONS:
            raise ValueError(f"sync_partner must be one of {SYNC_PARTNER_CONVENTIONS}, got '{self.partner}'")

    def apply(self, x_minus, t_n, spec, book):
        return sync_rescale(x_minus, t_n, spec, book, self.alpha, self.delta, self.partner)


@dataclass(frozen=True)
class ParallelVaccination(ImpulseMap):
    alpha: float
    guard: str = 'clamp'
    kind = "parallel"

    def __post_init__(self):
        self._check_alpha()
        if self.guard not in GUARD_POLICIES:
            raise ValueError(f"guard must be one of {GUARD_POLICIES}, got '{self.guard}'")

    def apply(self, x_minus, t_n, spec, book):
        return parallel_vaccination(x_minus, t_n, spec, book, self.alpha, self.guard)
