import math
from dataclasses import dataclass
from typing import Iterator


@dataclass(frozen=True)
class ImpulseSchedule:
    """Strictly increasing impulse times t_1 < t_2 < ... after t0"""
    t0: float
    t1: float

    def __post_init__(self):
        if not (math.isfinite(self.t0) and math.isfinite(self.t1)):
            raise ValueError("Schedule times must be finite")
        if not self.t1 > self.t0:
            raise ValueError(f"First impulse t1={self.t1} must come after t0={self.t0}")

    def times(self) -> Iterator[float]:
        raise NotImplementedError

    def next_gap(self, t_n: float, n: int) -> float:
        """Delta_{n+1} = t_{n+1} - t_n for the impulse at t_n with index n"""
        raise NotImplementedError


@dataclass(frozen=True)
class FixedInterval(ImpulseSchedule):
    """t_n = t1 + (n - 1) delta"""
    delta: float = 0.1

    def __post_init__(self):
        super().__post_init__()
        if not self.delta > 0:
            raise ValueError(f"Impulse interval delta must be positive, got {self.delta}")

    def times(self) -> Iterator[float]:
        n = 0
        while True:
            yield self.t1 + n * self.delta
            n += 1

    def next_gap(self, t_n: float, n: int) -> float:
        return (self.t1 + n * self.delta) - t_n


@dataclass(frozen=True)
class GeometricGrowth(ImpulseSchedule):
    """t_{n+1} = t_n + rate (t_n - t0), so the gaps grow geometrically"""
    rate: float = 0.5

    def __post_init__(self):
        super().__post_init__()
        if not self.rate > 0:
            raise ValueError(f"Growth rate must be positive, got {self.rate}")

    def times(self) -> Iterator[float]:
        t = self.t1
        while True:
            yield t
            t = t + self.rate * (t - self.t0)

    def next_gap(self, t_n: float, n: int) -> float:
        return self.rate * (t_n - self.t0)
