import unittest
from unittest.mock import patch
import sys
import os

# Add project root to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.models.preset_catalog import PresetCatalog
from src.models.experiment_config import CONFIG_TYPES


class TestPresetCatalog(unittest.TestCase):
    """Test cases for PresetCatalog class"""

    def test_supported_presets(self):
        """Test the three bundled presets"""
        self.assertEqual(PresetCatalog.names(), ['lorenz-origin', 'lorenz-sync', 'seir-measles'])

    def test_every_preset_has_units_and_experiments(self):
        """Test that every preset has a time unit, a scale and a reproduction command"""
        commands = dict(PresetCatalog.EXPERIMENTS)
        for name in PresetCatalog.names():
            self.assertIn(name, PresetCatalog.TIME_UNITS)
            self.assertGreater(PresetCatalog.time_scale(name), 0)
            self.assertIn(name, commands)

    def test_get_preset_list_format(self):
        """Test that the preset list mentions every preset and description"""
        listing = PresetCatalog.get_preset_list()
        for name, description in PresetCatalog.SUPPORTED_PRESETS.items():
            self.assertIn(f"{name} - {description}", listing)
        self.assertIn("times in days", listing)

    def test_is_valid_preset(self):
        """Test valid and invalid preset names"""
        self.assertTrue(PresetCatalog.is_valid_preset('lorenz-sync'))
        self.assertTrue(PresetCatalog.is_valid_preset(' seir-measles '))
        self.assertFalse(PresetCatalog.is_valid_preset('rossler'))
        self.assertFalse(PresetCatalog.is_valid_preset(''))
        self.assertFalse(PresetCatalog.is_valid_preset(None))

    def test_defaults_cover_every_config_key(self):
        """Test that defaults name exactly the configurable keys"""
        for name in PresetCatalog.names():
            defaults = PresetCatalog.defaults_for(name)
            self.assertEqual(set(defaults) | {'preset'}, set(CONFIG_TYPES))

    def test_preset_overrides_common_defaults(self):
        """Test preset-specific values on top of the common ones"""
        defaults = PresetCatalog.defaults_for('seir-measles')
        self.assertEqual(defaults['alpha'], 0.002)
        self.assertEqual(defaults['param'], 'rho')
        self.assertEqual(defaults['seed'], 0)

    @patch.dict(os.environ, {'INVSTEER_OUT': '/data/experiments'})
    def test_output_dir_from_environment(self):
        """Test that the output root comes from INVSTEER_OUT"""
        defaults = PresetCatalog.defaults_for('lorenz-origin')
        self.assertEqual(defaults['output_dir'], os.path.join('/data/experiments', 'lorenz-origin'))

    def test_output_dir_default_root(self):
        """Test the runs/ fallback without INVSTEER_OUT"""
        with patch.dict(os.environ, {}, clear=True):
            defaults = PresetCatalog.defaults_for('lorenz-sync')
        self.assertEqual(defaults['output_dir'], os.path.join('runs', 'lorenz-sync'))

    def test_unknown_preset(self):
        """Test that defaults for an unknown preset raise"""
        with self.assertRaises(ValueError):
            PresetCatalog.defaults_for('rossler')

    def test_ignored_keys_are_config_keys(self):
        """Test that ignored keys are real settings"""
        for name in PresetCatalog.names():
            for key in PresetCatalog.ignored_keys(name):
                self.assertIn(key, CONFIG_TYPES)


if __name__ == '__main__':
    unittest.main()
