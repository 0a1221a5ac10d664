import os
from typing import Any, Dict, List, Tuple

DEFAULT_OUTPUT_ROOT = "runs"


class PresetCatalog:
    """Bundled experiment presets and their default settings"""

    SUPPORTED_PRESETS = {
        'lorenz-origin': 'Lorenz system steered to the origin by radial rescaling on a geometric schedule',
        'lorenz-sync': 'Coupled Lorenz pair synchronized by rescaling x - y at fixed intervals',
        'seir-measles': 'SEIR with vaccination compartment, pulse vaccination parallel to the disease-free surface',
    }

    # Times are in each preset's reporting unit; TIME_SCALE converts to model units
    TIME_UNITS = {'lorenz-origin': 'time', 'lorenz-sync': 'time', 'seir-measles': 'days'}
    TIME_SCALE = {'lorenz-origin': 1.0, 'lorenz-sync': 1.0, 'seir-measles': 1.0 / 365.0}

    COMMON_DEFAULTS: Dict[str, Any] = {
        'alpha': 5.0, 'kappa': 3.0, 'kappa_eff': 0.5, 'delta': 0.1, 'c': 5.0,
        'dt': 0.001, 't0': 0.0, 't1': 0.01, 't_max': 10.0, 'seed': 0,
        'convergence_tol': 1e-10, 'guard': 'clamp', 'control': True, 'sample_every': 10,
        'sync_partner': 'previous', 'horizon': 200.0, 'burn_in': 20.0,
        'param': 'c', 'start': 0.0, 'stop': 10.0, 'step': 0.25, 'workers': 1, 'bisect': False,
    }

    PRESET_DEFAULTS: Dict[str, Dict[str, Any]] = {
        'lorenz-origin': {'alpha': 5.0, 'kappa': 3.0, 't1': 0.01, 't_max': 10.0, 'horizon': 50.0, 'burn_in': 5.0},
        'lorenz-sync': {'alpha': 0.4, 'delta': 0.1, 'c': 5.0, 't1': 0.1, 't_max': 50.0},
        'seir-measles': {'alpha': 0.002, 'kappa_eff': 0.5, 't1': 100.0, 't_max': 1095.0, 'dt': 0.365,
                         'horizon': 3650.0, 'burn_in': 365.0, 'param': 'rho', 'start': 50.0,
                         'stop': 150.0, 'step': 10.0},
    }

    # Settings a preset never reads
    IGNORED_KEYS = {
        'lorenz-origin': ('kappa_eff', 'delta', 'c', 'guard', 'sync_partner'),
        'lorenz-sync': ('kappa', 'kappa_eff', 'guard'),
        'seir-measles': ('kappa', 'delta', 'c', 'sync_partner'),
    }

    # Commands that regenerate each published experiment
    EXPERIMENTS: Tuple[Tuple[str, str], ...] = (
        ('lorenz-origin', 'simulate lorenz-origin --kappa 3 ; simulate lorenz-origin --kappa 7'),
        ('lorenz-sync', 'sweep lorenz-sync ; simulate lorenz-sync --alpha 0.1 ; simulate lorenz-sync --alpha 0.4'),
        ('seir-measles', 'simulate seir-measles --kappa-eff 0.5|0.8|1.0|1.2 ; simulate seir-measles --no-control'),
    )

    @classmethod
    def names(cls) -> List[str]:
        return sorted(cls.SUPPORTED_PRESETS)

    @classmethod
    def get_preset_list(cls) -> str:
        """Formatted list of presets with descriptions and commands"""
        commands = dict(cls.EXPERIMENTS)
        lines = []
        for name in cls.names():
            lines.append(f"{name} - {cls.SUPPORTED_PRESETS[name]}")
            lines.append(f"    times in {cls.TIME_UNITS[name]}; reproduce with: {commands[name]}")
        return "\n".join(lines)

    @classmethod
    def is_valid_preset(cls, name: str) -> bool:
        if not name or not isinstance(name, str):
            return False
        return name.strip() in cls.SUPPORTED_PRESETS

    @classmethod
    def defaults_for(cls, name: str) -> Dict[str, Any]:
        """Preset defaults, including the output directory from INVSTEER_OUT"""
        if not cls.is_valid_preset(name):
            raise ValueError(f"Unknown preset '{name}'")
        values = dict(cls.COMMON_DEFAULTS)
        values.update(cls.PRESET_DEFAULTS[name])
        values['output_dir'] = os.path.join(os.getenv('INVSTEER_OUT', DEFAULT_OUTPUT_ROOT), name)
        return values

    @classmethod
    def ignored_keys(cls, name: str) -> Tuple[str, ...]:
        return cls.IGNORED_KEYS.get(name, ())

    @classmethod
    def time_scale(cls, name: str) -> float:
        return cls.TIME_SCALE[name]
