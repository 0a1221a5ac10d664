from .dynamics import StateVector, VectorFieldSpec, IntegrationBlowupError, rk4_step, integrate_segment
from .semi_invariant import (
    SemiInvariantSpec, Decomposition, ImpulseRecord, UndefinedVersorError,
    eval_H, decompose, quadratic_form, beta_via_quadrature, beta_via_logratio, make_impulse_record,
)
from .stability import OnSurfaceSystem, StabilityEstimate, SweepPoint, estimate_Ds, ds_constant_matrix, lambda_H_max, sweep_Ds
from .impulse_schedule import ImpulseSchedule, FixedInterval, GeometricGrowth
from .impulse_maps import RadialRescale, SyncRescale, ParallelVaccination, radial_rescale, sync_rescale, parallel_vaccination
from .impulsive_runner import ControllerConfig, TrajectoryRecord, RunStatus, RunBlowupError, run_impulsive
from .guarantees import GuaranteeReport, check_guarantees, parallel_criterion
from .systems import SystemPreset, lorenz_preset, coupled_lorenz_preset, seir_preset, build_preset
from .preset_catalog import PresetCatalog
from .experiment_config import ConfigError, ExperimentConfig, parse_config
from .experiment import Experiment
from .run_store import RunManifest, RunStore, RunStoreError, emit_csv, read_manifest_metadata

__all__ = [
    'StateVector', 'VectorFieldSpec', 'IntegrationBlowupError', 'rk4_step', 'integrate_segment',
    'SemiInvariantSpec', 'Decomposition', 'ImpulseRecord', 'UndefinedVersorError',
    'eval_H', 'decompose', 'quadratic_form', 'beta_via_quadrature', 'beta_via_logratio', 'make_impulse_record',
    'OnSurfaceSystem', 'StabilityEstimate', 'SweepPoint', 'estimate_Ds', 'ds_constant_matrix', 'lambda_H_max', 'sweep_Ds',
    'ImpulseSchedule', 'FixedInterval', 'GeometricGrowth',
    'RadialRescale', 'SyncRescale', 'ParallelVaccination', 'radial_rescale', 'sync_rescale', 'parallel_vaccination',
    'ControllerConfig', 'TrajectoryRecord', 'RunStatus', 'RunBlowupError', 'run_impulsive',
    'GuaranteeReport', 'check_guarantees', 'parallel_criterion',
    'SystemPreset', 'lorenz_preset', 'coupled_lorenz_preset', 'seir_preset', 'build_preset',
    'PresetCatalog', 'ConfigError', 'ExperimentConfig', 'parse_config', 'Experiment',
    'RunManifest', 'RunStore', 'RunStoreError', 'emit_csv', 'read_manifest_metadata',
]
