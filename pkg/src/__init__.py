"""invariant-steer: impulsive control toward invariant manifolds"""

__version__ = "1.0.0"
