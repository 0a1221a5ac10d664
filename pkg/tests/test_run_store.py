import unittest
import tempfile
import shutil
import os
import sys
import math
from unittest.mock import patch

import numpy as np

# Add project root to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.models.experiment_config import parse_config
from src.models.impulse_maps import RadialRescale
from src.models.impulse_schedule import FixedInterval
from src.models.impulsive_runner import RunStatus, run_impulsive
from src.models.run_store import (
    IMPULSE_HEADER,
    MANIFEST_FILE,
    RunManifest,
    RunStore,
    RunStoreError,
    emit_csv,
    format_number,
    read_csv,
    read_manifest_metadata,
)
from src.models.stability import SweepPoint
from src.models.systems import lorenz_preset


class TestFormatting(unittest.TestCase):
    """Test number formatting and CSV emission"""

    def setUp(self):
        """Set up a scratch directory"""
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        """Clean up the scratch directory"""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_format_number(self):
        """Test round-trippable floats and plain integers"""
        self.assertEqual(format_number(0.1), "1.0000000000000001e-01")
        self.assertEqual(float(format_number(math.pi)), math.pi)
        self.assertEqual(format_number(7), "7")
        self.assertEqual(format_number(np.int64(3)), "3")
        self.assertEqual(format_number(True), "1")
        self.assertEqual(format_number(None), "")
        self.assertEqual(format_number(math.nan), "nan")
        self.assertEqual(format_number(-math.inf), "-inf")

    def test_emit_csv_uses_lf(self):
        """Test header row, LF line endings and text cells"""
        path = emit_csv(os.path.join(self.temp_dir, 'nested', 'out.csv'), ["c", "D_S", "status"],
                        [[0.5, -1.0, "ok"], [1.0, math.nan, "blowup"]])
        with open(path, 'rb') as handle:
            raw = handle.read()
        self.assertNotIn(b"\r\n", raw)
        self.assertEqual(raw.splitlines()[0], b"c,D_S,status")
        rows = read_csv(path)
        self.assertEqual(rows[1]["status"], "blowup")
        self.assertTrue(math.isnan(float(rows[1]["D_S"])))

    def test_read_missing_csv(self):
        """Test that a missing file raises RunStoreError"""
        with self.assertRaises(RunStoreError):
            read_csv(os.path.join(self.temp_dir, 'missing.csv'))


class TestRunStore(unittest.TestCase):
    """Test cases for RunStore class"""

    @classmethod
    def setUpClass(cls):
        """Run a short radial experiment on the Lorenz preset"""
        cls.preset = lorenz_preset()
        schedule = FixedInterval(t0=0.0, t1=0.1, delta=0.1)
        cls.record = run_impulsive(cls.preset.field, cls.preset.semi_invariant, schedule, RadialRescale(alpha=5.0),
                                   cls.preset.x0, t0=0.0, t_max=0.55, dt=1e-3, sample_every=10)

    def setUp(self):
        """Set up a store in a scratch directory"""
        self.temp_dir = tempfile.mkdtemp()
        self.store = RunStore(os.path.join(self.temp_dir, 'run'))

    def tearDown(self):
        """Clean up the scratch directory"""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_default_directory_from_environment(self):
        """Test that the store falls back to INVSTEER_OUT"""
        with patch.dict(os.environ, {'INVSTEER_OUT': self.temp_dir}):
            self.assertEqual(str(RunStore().output_dir), self.temp_dir)

    def test_manifest_written_atomically(self):
        """Test manifest contents and that no temporary file is left behind"""
        config = parse_config(preset='lorenz-origin', overrides={'output_dir': str(self.store.output_dir)})
        manifest = RunManifest(config=config, command='simulate', status='horizon', wall_clock_seconds=1.25,
                               summary={'impulses': 5, 'final_norm': 0.5})
        path = self.store.write_manifest(manifest)
        text = path.read_text()
        self.assertIn("preset = lorenz-origin\n", text)
        self.assertIn("run.status = horizon\n", text)
        self.assertIn("run.wall_clock_seconds = 1.250\n", text)
        self.assertEqual(os.listdir(self.store.output_dir), [MANIFEST_FILE])

        metadata = read_manifest_metadata(path)
        self.assertEqual(metadata['command'], 'simulate')
        self.assertEqual(metadata['impulses'], '5')
        self.assertEqual(metadata['final_norm'], '0.5')
        self.assertEqual(parse_config(path), config)

    def test_trajectory_and_impulses(self):
        """Test column layout of the trajectory and impulse files"""
        trajectory = self.store.write_trajectory(self.record, self.preset.labels)
        impulses, details = self.store.write_impulses(self.record)
        rows = read_csv(trajectory)
        self.assertEqual(list(rows[0]), ["t", "normI", "log_normI"] + list(self.preset.labels))
        self.assertEqual(len(rows), len(self.record.samples))
        impulse_rows = read_csv(impulses)
        self.assertEqual(list(impulse_rows[0]), IMPULSE_HEADER)
        self.assertEqual(len(impulse_rows), 5)
        self.assertEqual(len(read_csv(details)), 5)

    def test_load_record_rebuilds_counts(self):
        """Test that a stored run reloads with the same samples and impulse counts"""
        self.store.write_trajectory(self.record, self.preset.labels)
        self.store.write_impulses(self.record)
        loaded = self.store.load_record(self.preset.semi_invariant, t0=0.0, status='horizon')
        self.assertEqual(loaded.status, RunStatus.HORIZON)
        self.assertEqual([s.n_impulses for s in loaded.samples],
                         [s.n_impulses for s in self.record.samples])
        np.testing.assert_array_equal(loaded.states(), self.record.states())
        self.assertEqual([r.B_n for r in loaded.impulses], [r.B_n for r in self.record.impulses])

    def test_load_record_unknown_status(self):
        """Test that an unknown stored status falls back to horizon"""
        self.store.write_trajectory(self.record, self.preset.labels)
        self.store.write_impulses(self.record)
        loaded = self.store.load_record(self.preset.semi_invariant, t0=0.0, status='paused')
        self.assertEqual(loaded.status, RunStatus.HORIZON)

    def test_sweep_file_named_after_parameter(self):
        """Test ds_vs_<param>.csv with status column"""
        path = self.store.write_sweep('c', [SweepPoint(0.0, 0.9), SweepPoint(1.0, math.nan, 'blowup')])
        self.assertEqual(path.name, 'ds_vs_c.csv')
        rows = read_csv(path)
        self.assertEqual([row['status'] for row in rows], ['ok', 'blowup'])

    def test_plot_script(self):
        """Test that the plot script names the trajectory file"""
        text = self.store.write_plot_script(self.preset.labels).read_text()
        self.assertIn("'trajectory.csv' using 1:3", text)

    def test_unwritable_directory(self):
        """Test RunStoreError when the output path is a file"""
        blocker = os.path.join(self.temp_dir, 'blocker')
        with open(blocker, 'w') as handle:
            handle.write('x')
        store = RunStore(blocker)
        with self.assertRaises(RunStoreError):
            store.write_report("report\n")
        with self.assertRaises(RunStoreError):
            store.write_trajectory(self.record, self.preset.labels)


if __name__ == '__main__':
    unittest.main()
