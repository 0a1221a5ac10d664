import logging
from dataclasses import dataclass, field, fields
from functools import partial
from typing import Callable, Dict, Iterator, Optional, Tuple

import numpy as np

from .dynamics import VectorFieldSpec
from .semi_invariant import SemiInvariantSpec
from .stability import OnSurfaceSystem

logger = logging.getLogger(__name__)

DAYS_PER_YEAR = 365.0


@dataclass(frozen=True)
class LorenzParams:
    sigma: float = 10.0
    r: float = 28.0
    b: float = 8.0 / 3.0


@dataclass(frozen=True)
class SeirParams:
    """Measles-like rates per year"""
    rho: float = 114.715
    sigma: float = DAYS_PER_YEAR / 8.5
    gamma: float = DAYS_PER_YEAR / 7.0

    def __post_init__(self):
        for name in ('rho', 'sigma', 'gamma'):
            if getattr(self, name) <= 0:
                raise ValueError(f"SEIR rate '{name}' must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class AuxiliaryQuadrature:
    """Named integrand accumulated alongside the state by the integrator"""
    name: str
    integrand: Callable[[np.ndarray], float]


@dataclass(frozen=True, eq=False)
class SystemPreset:
    """Field, semi-invariant and on-surface system of a bundled example"""
    name: str
    field: VectorFieldSpec
    semi_invariant: SemiInvariantSpec
    on_surface: OnSurfaceSystem
    x0: np.ndarray
    J0: np.ndarray
    labels: Tuple[str, ...]
    auxiliaries: Tuple[AuxiliaryQuadrature, ...] = ()
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    parameters: Dict[str, float] = field(default_factory=dict)

    def __iter__(self) -> Iterator:
        return iter((self.field, self.semi_invariant, self.on_surface))


def lorenz_rhs(x: np.ndarray, params: LorenzParams) -> np.ndarray:
    return np.array([
        params.sigma * (x[1] - x[0]),
        params.r * x[0] - x[1] - x[0] * x[2],
        x[0] * x[1] - params.b * x[2],
    ])


def lorenz_jacobian(x: np.ndarray, params: LorenzParams) -> np.ndarray:
    return np.array([
        [-params.sigma, params.sigma, 0.0],
        [params.r - x[2], -1.0, -x[0]],
        [x[1], x[0], -params.b],
    ])


def lorenz_preset(params: Optional[LorenzParams] = None) -> SystemPreset:
    """Single Lorenz system steered to the fixed point at the origin (I = x)"""
    params = params or LorenzParams()
    s, r, b = params.sigma, params.r, params.b

    field_spec = VectorFieldSpec(3, partial(lorenz_rhs, params=params), name="lorenz")

    def eval_L(x: np.ndarray) -> np.ndarray:
        return np.array([[-s, s, 0.0], [r, -1.0, -x[0]], [0.0, x[0], -b]])

    L_S = eval_L(np.zeros(3))
    spec = SemiInvariantSpec(
        p=3,
        eval_I=lambda x: np.array(x[:3], dtype=float),
        eval_L=eval_L,
        eval_J=lambda x: np.empty(0),
        field=field_spec,
        name="lorenz-origin",
    )
    on_surface = OnSurfaceSystem(
        p=3, q=0, eval_L_S=lambda J: L_S, eval_P_S=lambda J: np.empty(0),
        name="lorenz-origin", constant=True,
    )
    return SystemPreset(
        name="lorenz-origin",
        field=field_spec,
        semi_invariant=spec,
        on_surface=on_surface,
        x0=np.array([1.0, 1.0, 1.0]),
        J0=np.empty(0),
        labels=("x1", "x2", "x3"),
        jacobian=partial(lorenz_jacobian, params=params),
        parameters={"sigma": s, "r": r, "b": b},
    )


def coupled_lorenz_rhs(z: np.ndarray, params: LorenzParams, c: float) -> np.ndarray:
    x, y = z[:3], z[3:6]
    dy = lorenz_rhs(y, params)
    dy[0] += c * (x[0] - y[0])
    return np.concatenate((lorenz_rhs(x, params), dy))


def coupled_lorenz_L_S(J: np.ndarray, params: LorenzParams, c: float) -> np.ndarray:
    return np.array([
        [-params.sigma - c, params.sigma, 0.0],
        [params.r - J[2], -1.0, -J[0]],
        [J[1], J[0], -params.b],
    ])


def coupled_lorenz_preset(c: float = 5.0, params: Optional[LorenzParams] = None) -> SystemPreset:
    """Master x drives slave y through c (x1 - y1); I = x - y, J = y"""
    params = params or LorenzParams()
    s, r, b = params.sigma, params.r, params.b

    field_spec = VectorFieldSpec(6, partial(coupled_lorenz_rhs, params=params, c=c), name="coupled-lorenz")

    def eval_L(z: np.ndarray) -> np.ndarray:
        # Rows in terms of x and y: r - x3, -y1 and x2, y1 carry the bilinear terms once
        x, y = z[:3], z[3:6]
        return np.array([
            [-s - c, s, 0.0],
            [r - x[2], -1.0, -y[0]],
            [x[1], y[0], -b],
        ])

    spec = SemiInvariantSpec(
        p=3,
        eval_I=lambda z: np.asarray(z[:3], dtype=float) - np.asarray(z[3:6], dtype=float),
        eval_L=eval_L,
        eval_J=lambda z: np.array(z[3:6], dtype=float),
        field=field_spec,
        name="lorenz-sync",
    )
    on_surface = OnSurfaceSystem(
        p=3, q=3,
        eval_L_S=partial(coupled_lorenz_L_S, params=params, c=c),
        eval_P_S=partial(lorenz_rhs, params=params),
        name=f"lorenz-sync(c={c})",
    )
    return SystemPreset(
        name="lorenz-sync",
        field=field_spec,
        semi_invariant=spec,
        on_surface=on_surface,
        x0=np.array([3.0, 3.0, 3.0, 10.0, 10.0, 10.0]),
        J0=np.array([10.0, 10.0, 10.0]),
        labels=("x1", "x2", "x3", "y1", "y2", "y3"),
        parameters={"sigma": s, "r": r, "b": b, "c": c},
    )


# State layout of the SEIR+V model
V_IDX, S_IDX, E_IDX, I_IDX, R_IDX = range(5)
SEIR_LABELS = ("V", "S", "E", "I", "R")


def seir_rhs(x: np.ndarray, params: SeirParams) -> np.ndarray:
    V, S, E, I, R = x[:5]
    N = V + S + E + I + R
    infection = params.rho * S * I / N
    return np.array([
        0.0,
        -infection,
        infection - params.sigma * E,
        params.sigma * E - params.gamma * I,
        params.gamma * I,
    ])


def seir_L(x: np.ndarray, params: SeirParams) -> np.ndarray:
    N = float(np.sum(x[:5]))
    return np.array([
        [-params.sigma, params.rho * x[S_IDX] / N],
        [params.sigma, -params.gamma],
    ])


def seir_L_S(J: np.ndarray, params: SeirParams) -> np.ndarray:
    # J = (S, V, R); on the surface E = I = 0 so N = S + V + R
    N = float(np.sum(J))
    susceptible = J[0] / N if N > 0 else J[0]
    return np.array([
        [-params.sigma, params.rho * susceptible],
        [params.sigma, -params.gamma],
    ])


def seir_initial_state(v0: float = 0.3, i0: float = 2e-4) -> np.ndarray:
    """(V, S, E, I, R) with S = 1 - V - I"""
    if not 0 <= v0 < 1 or not 0 <= i0 < 1 - v0:
        raise ValueError(f"Invalid initial fractions V0={v0}, I0={i0}")
    state = np.zeros(5)
    state[V_IDX] = v0
    state[I_IDX] = i0
    state[S_IDX] = 1.0 - v0 - i0
    return state


def seir_preset(params: Optional[SeirParams] = None) -> SystemPreset:
    """SEIR with a vaccinated compartment; I = (E, I), J = (S, V, R), time in years"""
    params = params or SeirParams()
    field_spec = VectorFieldSpec(5, partial(seir_rhs, params=params), name="seir")
    spec = SemiInvariantSpec(
        p=2,
        eval_I=lambda x: np.array([x[E_IDX], x[I_IDX]], dtype=float),
        eval_L=partial(seir_L, params=params),
        eval_J=lambda x: np.array([x[S_IDX], x[V_IDX], x[R_IDX]], dtype=float),
        field=field_spec,
        name="seir-measles",
    )
    on_surface = OnSurfaceSystem(
        p=2, q=3,
        eval_L_S=partial(seir_L_S, params=params),
        eval_P_S=lambda J: np.zeros(3),
        name="seir-measles",
        constant=True,
    )
    x0 = seir_initial_state()
    sigma = params.sigma
    return SystemPreset(
        name="seir-measles",
        field=field_spec,
        semi_invariant=spec,
        on_surface=on_surface,
        x0=x0,
        J0=np.array([x0[S_IDX], x0[V_IDX], x0[R_IDX]]),
        labels=SEIR_LABELS,
        auxiliaries=(AuxiliaryQuadrature("cumulative_cases", lambda x: sigma * x[E_IDX]),),
        parameters={"rho": params.rho, "sigma": params.sigma, "gamma": params.gamma},
    )


def build_preset(name: str, **parameters: float) -> SystemPreset:
    """Build a bundled preset, overriding any of its model parameters"""
    if name == "lorenz-origin":
        return lorenz_preset(_params(LorenzParams, name, parameters))
    if name == "lorenz-sync":
        c = parameters.pop("c", 5.0)
        return coupled_lorenz_preset(c=c, params=_params(LorenzParams, name, parameters))
    if name == "seir-measles":
        return seir_preset(_params(SeirParams, name, parameters))
    raise ValueError(f"Unknown preset '{name}'")


def _params(cls, preset: str, overrides: Dict[str, float]):
    allowed = {f.name for f in fields(cls)}
    unknown = set(overrides) - allowed
    if unknown:
        raise ValueError(f"Preset '{preset}' has no parameter(s) {sorted(unknown)}")
    return cls(**overrides)


def _family_member(preset: str, param: str, fixed: Tuple[Tuple[str, float], ...], value: float) -> OnSurfaceSystem:
    parameters = dict(fixed)
    parameters[param] = value
    return build_preset(preset, **parameters).on_surface


def on_surface_family(preset: str, param: str, **fixed: float) -> Callable[[float], OnSurfaceSystem]:
    """Picklable map from a parameter value to the preset's on-surface system"""
    build_preset(preset, **dict(fixed, **{param: 1.0}))
    return partial(_family_member, preset, param, tuple(sorted(fixed.items())))
