import logging
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from .experiment_config import ConfigError, ExperimentConfig
from .guarantees import GROWTH_INTEGRAL, GuaranteeReport, check_guarantees
from .impulse_maps import ParallelVaccination, RadialRescale, SyncRescale
from .impulse_schedule import FixedInterval, GeometricGrowth
from .impulsive_runner import ControllerConfig, TrajectoryRecord, run_impulsive
from .preset_catalog import PresetCatalog
from .semi_invariant import growth_rate
from .stability import (
    StabilityEstimate,
    SweepPoint,
    bracket_sign_change,
    ds_constant_matrix,
    estimate_Ds,
    locate_sign_change,
    sweep_Ds,
)
from .systems import AuxiliaryQuadrature, SystemPreset, build_preset, on_surface_family

logger = logging.getLogger(__name__)


def _model_parameters(config: ExperimentConfig) -> Dict[str, float]:
    return {'c': config.c} if config.preset == 'lorenz-sync' else {}


@dataclass(frozen=True, eq=False)
class Experiment:
    """A preset wired to a controller, with times converted to model units"""
    config: ExperimentConfig
    system: SystemPreset
    controller: ControllerConfig
    time_scale: float

    @classmethod
    def from_config(cls, config: ExperimentConfig) -> "Experiment":
        system = build_preset(config.preset, **_model_parameters(config))
        scale = PresetCatalog.time_scale(config.preset)
        t0, t1 = config.t0 * scale, config.t1 * scale

        if not config.control:
            controller = ControllerConfig(schedule=None, impulse_map=None, alpha=config.alpha)
        elif config.preset == 'lorenz-origin':
            ds = ds_constant_matrix(system.on_surface.eval_L_S(system.J0))
            controller = ControllerConfig(
                schedule=GeometricGrowth(t0=t0, t1=t1, rate=config.kappa / ds),
                impulse_map=RadialRescale(alpha=config.alpha),
                alpha=config.alpha, kappa=config.kappa, ds_used=ds,
            )
        elif config.preset == 'lorenz-sync':
            delta = config.delta * scale
            controller = ControllerConfig(
                schedule=FixedInterval(t0=t0, t1=t1, delta=delta),
                impulse_map=SyncRescale(alpha=config.alpha, delta=delta, partner=config.sync_partner),
                alpha=config.alpha, delta=delta,
            )
        else:
            controller = ControllerConfig(
                schedule=GeometricGrowth(t0=t0, t1=t1, rate=config.kappa_eff),
                impulse_map=ParallelVaccination(alpha=config.alpha, guard=config.guard),
                alpha=config.alpha, kappa_eff=config.kappa_eff,
            )
        logger.info(f"Built experiment '{config.preset}' (controlled={controller.controlled})")
        return cls(config=config, system=system, controller=controller, time_scale=scale)

    @property
    def auxiliaries(self) -> List[AuxiliaryQuadrature]:
        extra = list(self.system.auxiliaries)
        if isinstance(self.controller.impulse_map, ParallelVaccination) or not self.controller.controlled:
            extra.append(AuxiliaryQuadrature(GROWTH_INTEGRAL, growth_rate(self.system.semi_invariant)))
        return extra

    def run(self) -> TrajectoryRecord:
        config = self.config
        return run_impulsive(
            self.system.field,
            self.system.semi_invariant,
            self.controller.schedule,
            self.controller.impulse_map,
            self.system.x0,
            t0=config.t0 * self.time_scale,
            t_max=config.t_max * self.time_scale,
            dt=config.dt * self.time_scale,
            convergence_tol=config.convergence_tol,
            sample_every=config.sample_every,
            auxiliaries=self.auxiliaries,
        )

    def check(self, run: TrajectoryRecord, ds_bound: Optional[float] = None,
              lambda_bound: Optional[float] = None) -> GuaranteeReport:
        return check_guarantees(run, self.system.semi_invariant, self.controller, ds_bound, lambda_bound)

    def closed_form_ds(self) -> Optional[float]:
        """D_S from eigenvalues when L_S is constant along the on-surface flow"""
        if not self.system.on_surface.constant:
            return None
        return ds_constant_matrix(self.system.on_surface.eval_L_S(self.system.J0))

    def estimate_ds(self) -> StabilityEstimate:
        config = self.config
        return estimate_Ds(
            self.system.on_surface,
            self.system.J0,
            T=config.horizon * self.time_scale,
            burn_in=config.burn_in * self.time_scale,
            dt=config.dt * self.time_scale,
            seed=config.seed,
        )

    def sweep_grid(self) -> np.ndarray:
        config = self.config
        count = int(round((config.stop - config.start) / config.step)) + 1
        return config.start + config.step * np.arange(count)

    def sweep(self) -> List[SweepPoint]:
        config = self.config
        fixed = {k: v for k, v in _model_parameters(config).items() if k != config.param}
        try:
            family = on_surface_family(config.preset, config.param, **fixed)
        except ValueError as e:
            raise ConfigError("param", str(e))
        grid = self.sweep_grid()
        for value in grid:
            try:
                family(float(value))
            except ValueError as e:
                raise ConfigError("start", f"{config.param}={value} is outside the model's range: {e}")
        return sweep_Ds(
            family,
            grid,
            self.system.J0,
            T=config.horizon * self.time_scale,
            burn_in=config.burn_in * self.time_scale,
            dt=config.dt * self.time_scale,
            seed=config.seed,
            workers=config.workers,
        )

    def locate_crossing(self, points: List[SweepPoint], tol: float = 0.1) -> Optional[float]:
        bracket = bracket_sign_change(points)
        if bracket is None:
            return None
        config = self.config
        fixed = {k: v for k, v in _model_parameters(config).items() if k != config.param}
        return locate_sign_change(
            on_surface_family(config.preset, config.param, **fixed),
            bracket[0], bracket[1], self.system.J0, tol=tol,
            T=config.horizon * self.time_scale,
            burn_in=config.burn_in * self.time_scale,
            dt=config.dt * self.time_scale,
            seed=config.seed,
        )
