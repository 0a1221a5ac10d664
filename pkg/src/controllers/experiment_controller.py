import math
import time
import logging
from pathlib import Path
from typing import Optional

from ..models import (
    ConfigError,
    Experiment,
    ExperimentConfig,
    IntegrationBlowupError,
    PresetCatalog,
    RunBlowupError,
    RunManifest,
    RunStore,
    RunStoreError,
    parallel_criterion,
    parse_config,
    read_manifest_metadata,
)
from ..models.run_store import MANIFEST_FILE

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


def _write_run(store: RunStore, experiment: Experiment, record, plot_script: bool = False):
    store.write_trajectory(record, experiment.system.labels)
    store.write_impulses(record)
    if experiment.config.preset == 'seir-measles':
        store.write_cases(record, experiment.system.parameters['sigma'], experiment.time_scale)
    if plot_script:
        store.write_plot_script(experiment.system.labels)


def _run_summary(experiment: Experiment, record) -> dict:
    summary = {
        'impulse_count': len(record.impulses),
        'final_normI': record.final_norm,
        'final_t': record.samples[-1].t if record.samples else math.nan,
    }
    if experiment.controller.ds_used is not None:
        summary['ds_used'] = experiment.controller.ds_used
    if record.samples and 'cumulative_cases' in record.samples[-1].aux:
        summary['cumulative_cases'] = record.samples[-1].aux['cumulative_cases']
    return summary


def simulate(config: ExperimentConfig, plot_script: bool = False) -> int:
    """Run one controlled (or uncontrolled) experiment and store it"""
    started = time.perf_counter()
    store = RunStore(config.output_dir)
    try:
        experiment = Experiment.from_config(config)
        record = experiment.run()
    except RunBlowupError as e:
        logger.error(f"❌ Simulation of '{config.preset}' diverged: {e}")
        try:
            _write_run(store, experiment, e.record)
            store.write_manifest(RunManifest(config, 'simulate', 'blowup', time.perf_counter() - started,
                                             {'impulse_count': len(e.record.impulses), 'error': str(e)}))
        except RunStoreError as store_error:
            logger.error(f"Could not store the partial run: {store_error}")
        return EXIT_NUMERICAL
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG

    try:
        _write_run(store, experiment, record, plot_script)
        report = experiment.check(record)
        store.write_report(report.to_text())
        summary = _run_summary(experiment, record)
        if experiment.config.preset == 'seir-measles' or not experiment.controller.controlled:
            criterion = parallel_criterion(record, experiment.system.semi_invariant)
            summary['growth_integral_slope'] = criterion.slope
            summary['growth_integral_decaying'] = criterion.decaying
            summary['reconstruction_error'] = criterion.max_relative_error
        store.write_manifest(RunManifest(config, 'simulate', record.status.value,
                                         time.perf_counter() - started, summary))
    except RunStoreError as e:
        logger.error(f"Could not store run: {e}")
        return EXIT_CONFIG

    logger.info(f"✅ {config.preset}: {record.status.value} with {len(record.impulses)} impulses "
                f"(||I|| = {record.final_norm:.3e})")
    print(f"{config.preset}: status={record.status.value} impulses={len(record.impulses)} "
          f"final_normI={record.final_norm!r} output={store.output_dir}")
    return EXIT_OK


def estimate_exponent(config: ExperimentConfig) -> int:
    """Estimate D_S by time averaging, with the closed form when available"""
    started = time.perf_counter()
    store = RunStore(config.output_dir)
    try:
        experiment = Experiment.from_config(config)
        estimate = experiment.estimate_ds()
    except IntegrationBlowupError as e:
        logger.error(f"❌ On-surface flow of '{config.preset}' diverged: {e}")
        return EXIT_NUMERICAL

    summary = {'D_S': estimate.D_S, 'seed': config.seed}
    closed = experiment.closed_form_ds()
    if closed is not None:
        summary['D_S_closed_form'] = closed
    try:
        store.write_convergence(estimate)
        store.write_manifest(RunManifest(config, 'ds', 'ok', time.perf_counter() - started, summary))
    except RunStoreError as e:
        logger.error(f"Could not store estimate: {e}")
        return EXIT_CONFIG

    line = f"{config.preset}: D_S={estimate.D_S!r}"
    if closed is not None:
        line += f" closed_form={closed!r}"
    print(line)
    return EXIT_OK


def sweep(config: ExperimentConfig) -> int:
    """Sweep D_S over a parameter grid and optionally bisect its sign change"""
    started = time.perf_counter()
    store = RunStore(config.output_dir)
    try:
        experiment = Experiment.from_config(config)
        points = experiment.sweep()
        summary = {'points': len(points), 'blowups': sum(p.status != 'ok' for p in points)}
        if config.bisect:
            crossing = experiment.locate_crossing(points)
            summary['sign_change'] = crossing if crossing is not None else 'none'
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except IntegrationBlowupError as e:
        logger.error(f"❌ Bisection diverged: {e}")
        return EXIT_NUMERICAL

    try:
        store.write_sweep(config.param, points)
        store.write_manifest(RunManifest(config, 'sweep', 'ok', time.perf_counter() - started, summary))
    except RunStoreError as e:
        logger.error(f"Could not store sweep: {e}")
        return EXIT_CONFIG

    for point in points:
        print(f"{config.param}={point.value!r} D_S={point.D_S!r} {point.status}")
    if 'sign_change' in summary:
        print(f"sign change near {config.param}={summary['sign_change']}")
    return EXIT_OK


def check(run_dir: Path, ds_bound: Optional[float] = None, lambda_bound: Optional[float] = None) -> int:
    """Re-evaluate the convergence criteria on a stored run"""
    run_dir = Path(run_dir)
    manifest = run_dir / MANIFEST_FILE
    try:
        config = parse_config(manifest)
        metadata = read_manifest_metadata(manifest)
        experiment = Experiment.from_config(config)
        store = RunStore(str(run_dir))
        record = store.load_record(
            experiment.system.semi_invariant, config.t0 * experiment.time_scale, metadata.get('status', 'horizon')
        )
        report = experiment.check(record, ds_bound, lambda_bound)
        store.write_report(report.to_text())
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except RunStoreError as e:
        logger.error(f"Could not read run: {e}")
        return EXIT_CONFIG

    print(report.to_text(), end="")
    return EXIT_OK


def list_presets() -> int:
    """Print the bundled presets"""
    print(PresetCatalog.get_preset_list())
    return EXIT_OK
