import math

import numpy as np
import pytest

from src.models.dynamics import VectorFieldSpec
from src.models.experiment import Experiment
from src.models.experiment_config import parse_config
from src.models.guarantees import (
    GUARANTEED,
    INCONCLUSIVE,
    NOT_APPLICABLE,
    NOT_GUARANTEED,
    SUFFICIENCY_NOTE,
    check_guarantees,
    parallel_criterion,
)
from src.models.impulse_maps import RadialRescale, SyncRescale
from src.models.impulse_schedule import FixedInterval, GeometricGrowth
from src.models.impulsive_runner import ControllerConfig, TrajectoryRecord, TrajectorySample, run_impulsive
from src.models.semi_invariant import SemiInvariantSpec
from src.models.stability import ds_constant_matrix


@pytest.fixture(scope="module")
def lorenz_runs():
    """Radial runs on lorenz-origin for kappa 3 and 7"""
    runs = {}
    for kappa in (3.0, 7.0):
        experiment = Experiment.from_config(parse_config(preset='lorenz-origin', overrides={'kappa': kappa}))
        runs[kappa] = (experiment, experiment.run())
    return runs


@pytest.fixture(scope="module")
def sync_experiment_run():
    """Fixed-interval synchronization run over five time units"""
    experiment = Experiment.from_config(parse_config(preset='lorenz-sync', overrides={'t_max': 5.0}))
    return experiment, experiment.run()


class TestLorenzOriginVerdicts:
    """Test verdict calibration on the radial controller"""

    def test_kappa_below_alpha_is_guaranteed(self, lorenz_runs):
        """Test that kappa = 3 < alpha = 5 satisfies the schedule bound"""
        experiment, run = lorenz_runs[3.0]
        report = experiment.check(run)
        assert report.schedule_bound.verdict == GUARANTEED
        assert report.schedule_bound.applies

    def test_kappa_above_alpha_is_not_guaranteed(self, lorenz_runs):
        """Test that kappa = 7 > alpha = 5 is outside the sufficient condition"""
        experiment, run = lorenz_runs[7.0]
        report = experiment.check(run)
        assert report.schedule_bound.verdict == NOT_GUARANTEED

    def test_unbounded_gaps(self, lorenz_runs):
        """Test that a geometric schedule cannot satisfy the bounded-gap criterion"""
        experiment, run = lorenz_runs[3.0]
        assert experiment.check(run).bounded_gaps.verdict == NOT_GUARANTEED

    def test_pathwise_bound_holds(self, lorenz_runs):
        """Test zero violations of the pathwise bound on both runs"""
        for experiment, run in lorenz_runs.values():
            report = experiment.check(run)
            assert report.pathwise.verdict == GUARANTEED
            assert report.lambda_bound > 0

    def test_missing_ds_bound(self, lorenz_runs):
        """Test that a non-positive D_S bound makes the schedule criterion inapplicable"""
        experiment, run = lorenz_runs[3.0]
        report = experiment.check(run, ds_bound=-1.0)
        assert report.schedule_bound.verdict == NOT_APPLICABLE


class TestSyncVerdicts:
    """Test verdicts on the fixed-interval synchronization controller"""

    def test_bounded_gaps_guaranteed(self, sync_experiment_run):
        """Test that B = -alpha delta with bounded gaps is guaranteed"""
        experiment, run = sync_experiment_run
        report = experiment.check(run)
        assert report.bounded_gaps.verdict == GUARANTEED
        assert report.bounded_gaps.value == pytest.approx(0.04, abs=1e-12)

    def test_pathwise_bound_holds(self, sync_experiment_run):
        """Test zero pathwise violations for the synchronization run"""
        experiment, run = sync_experiment_run
        assert experiment.check(run).pathwise.verdict == GUARANTEED

    def test_report_text(self, sync_experiment_run):
        """Test that the text report lists every verdict and the sufficiency note"""
        experiment, run = sync_experiment_run
        text = experiment.check(run).to_text()
        assert text.startswith("M (max lambda_H over run) = ")
        assert text.count("applies=") == 4
        assert SUFFICIENCY_NOTE in text


class TestPathwiseViolations:
    """Test detection of samples above the pathwise bound"""

    def test_growth_faster_than_M(self, lorenz):
        """Test that growth beyond exp(M t) is flagged"""
        samples = [
            TrajectorySample(t, np.array([math.exp(2.0 * t), 0.0, 0.0]), math.exp(2.0 * t), 0)
            for t in np.linspace(0.0, 1.0, 11)
        ]
        run = TrajectoryRecord(system_name="lorenz-origin", t0=0.0, norm0=1.0, samples=samples)
        controller = ControllerConfig(schedule=None, impulse_map=None, alpha=1.0)
        report = check_guarantees(run, lorenz.semi_invariant, controller, lambda_bound=1.0)
        assert report.pathwise.verdict == NOT_GUARANTEED
        assert report.pathwise.value == 10.0
        assert report.partial_sums.verdict == INCONCLUSIVE

    def test_empty_run_rejected(self, lorenz):
        """Test that a run without samples is rejected"""
        run = TrajectoryRecord(system_name="lorenz-origin", t0=0.0, norm0=1.0)
        controller = ControllerConfig(schedule=None, impulse_map=None, alpha=1.0)
        with pytest.raises(ValueError, match="no samples"):
            check_guarantees(run, lorenz.semi_invariant, controller)

    def test_direct_radial_controller(self, lorenz):
        """Test the schedule bound with an explicit D_S bound"""
        ds = ds_constant_matrix(lorenz.on_surface.eval_L_S(lorenz.J0))
        schedule = GeometricGrowth(t0=0.0, t1=0.01, rate=2.0 / ds)
        controller = ControllerConfig(schedule=schedule, impulse_map=RadialRescale(alpha=5.0), alpha=5.0, kappa=2.0)
        run = run_impulsive(lorenz.field, lorenz.semi_invariant, schedule, controller.impulse_map, lorenz.x0,
                            t0=0.0, t_max=2.0, dt=1e-3, sample_every=10)
        report = check_guarantees(run, lorenz.semi_invariant, controller, ds_bound=ds)
        assert report.schedule_bound.verdict == GUARANTEED

    def test_sync_map_on_fixed_schedule(self, coupled_lorenz):
        """Test that B_q <= -eps holds for the sync map with fixed gaps"""
        schedule = FixedInterval(t0=0.0, t1=0.1, delta=0.1)
        controller = ControllerConfig(schedule=schedule, impulse_map=SyncRescale(alpha=0.4, delta=0.1), alpha=0.4)
        run = run_impulsive(coupled_lorenz.field, coupled_lorenz.semi_invariant, schedule,
                            controller.impulse_map, coupled_lorenz.x0, t0=0.0, t_max=1.05, dt=1e-3)
        report = check_guarantees(run, coupled_lorenz.semi_invariant, controller)
        assert report.bounded_gaps.verdict == GUARANTEED
        assert report.schedule_bound.verdict == NOT_APPLICABLE


class TestParallelCriterion:
    """Test the growth-integral criterion for parallel impulses"""

    @pytest.mark.parametrize("control", [True, False])
    def test_reconstruction_matches_measured_norm(self, control):
        """Test ||I0|| exp(integral) against ||I(t)|| over the measles run"""
        config = parse_config(preset='seir-measles', overrides={'control': control})
        experiment = Experiment.from_config(config)
        run = experiment.run()
        criterion = parallel_criterion(run, experiment.system.semi_invariant)
        assert criterion.max_relative_error <= 1e-4
        assert criterion.times.shape == criterion.integral.shape

    def test_trapezoid_fallback(self, seir):
        """Test the sample-based integral when the run carried none"""
        record = run_impulsive(seir.field, seir.semi_invariant, None, None, seir.x0, t0=0.0, t_max=0.5,
                               dt=1e-4, sample_every=1)
        criterion = parallel_criterion(record, seir.semi_invariant)
        assert criterion.max_relative_error <= 1e-4
        assert criterion.integral[0] == 0.0

    def test_constant_linear_factor(self):
        """Test slope <i,Hi> for a fixed versor under a constant negative-definite L"""
        L = np.diag([-0.5, -2.0])
        field = VectorFieldSpec(2, lambda x: L @ x, name="linear")
        spec = SemiInvariantSpec(p=2, eval_I=lambda x: np.array(x, dtype=float), eval_L=lambda x: L,
                                 eval_J=lambda x: np.empty(0), field=field, name="linear")
        record = run_impulsive(field, spec, None, None, [1.0, 0.0], t0=0.0, t_max=2.0, dt=1e-3, sample_every=10)
        criterion = parallel_criterion(record, spec)
        assert criterion.slope == pytest.approx(-0.5, abs=1e-12)
        assert criterion.decaying
        assert criterion.max_relative_error <= 1e-9
