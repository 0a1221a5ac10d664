import logging
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from .impulse_maps import GUARD_POLICIES, SYNC_PARTNER_CONVENTIONS
from .preset_catalog import PresetCatalog

logger = logging.getLogger(__name__)

# Manifest metadata lives under this prefix and is skipped when parsing
RESERVED_PREFIX = "run."


class ConfigError(ValueError):
    """Invalid configuration; key names the offending setting"""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved settings of one experiment"""
    preset: str
    alpha: float
    kappa: float
    kappa_eff: float
    delta: float
    c: float
    dt: float
    t0: float
    t1: float
    t_max: float
    seed: int
    convergence_tol: float
    guard: str
    control: bool
    sample_every: int
    sync_partner: str
    horizon: float
    burn_in: float
    param: str
    start: float
    stop: float
    step: float
    workers: int
    bisect: bool
    output_dir: str

    def __post_init__(self):
        if not PresetCatalog.is_valid_preset(self.preset):
            raise ConfigError("preset", f"unknown preset '{self.preset}', expected one of {PresetCatalog.names()}")
        for key in ("alpha", "kappa", "kappa_eff", "delta", "dt", "convergence_tol", "step"):
            if not getattr(self, key) > 0:
                raise ConfigError(key, f"must be positive, got {getattr(self, key)}")
        if not self.t1 > self.t0:
            raise ConfigError("t1", f"must be greater than t0 ({self.t0}), got {self.t1}")
        if not self.t_max > self.t0:
            raise ConfigError("t_max", f"must be greater than t0 ({self.t0}), got {self.t_max}")
        if self.c < 0:
            raise ConfigError("c", f"coupling must be non-negative, got {self.c}")
        if self.seed < 0:
            raise ConfigError("seed", f"must be non-negative, got {self.seed}")
        if self.sample_every < 1:
            raise ConfigError("sample_every", f"must be at least 1, got {self.sample_every}")
        if self.workers < 1:
            raise ConfigError("workers", f"must be at least 1, got {self.workers}")
        if self.guard not in GUARD_POLICIES:
            raise ConfigError("guard", f"must be one of {GUARD_POLICIES}, got '{self.guard}'")
        if self.sync_partner not in SYNC_PARTNER_CONVENTIONS:
            raise ConfigError("sync_partner", f"must be one of {SYNC_PARTNER_CONVENTIONS}, got '{self.sync_partner}'")
        if not self.horizon > self.burn_in >= 0:
            raise ConfigError("burn_in", f"need horizon > burn_in >= 0, got horizon={self.horizon}, burn_in={self.burn_in}")
        if self.stop < self.start:
            raise ConfigError("stop", f"must not be below start ({self.start}), got {self.stop}")
        if not self.output_dir:
            raise ConfigError("output_dir", "must not be empty")

    def to_items(self) -> List[Tuple[str, str]]:
        """(key, text) pairs that parse back to the same config"""
        return [(f.name, format_value(getattr(self, f.name))) for f in fields(self)]

    def with_overrides(self, **overrides: Any) -> "ExperimentConfig":
        return replace(self, **overrides)


CONFIG_TYPES: Dict[str, type] = {f.name: f.type for f in fields(ExperimentConfig)}


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _convert(key: str, text: str) -> Any:
    kind = CONFIG_TYPES[key]
    text = text.strip()
    if kind is bool:
        lowered = text.lower()
        if lowered in ("true", "yes", "1", "on"):
            return True
        if lowered in ("false", "no", "0", "off"):
            return False
        raise ConfigError(key, f"expected true or false, got '{text}'")
    if kind is int:
        try:
            return int(text)
        except ValueError:
            raise ConfigError(key, f"expected an integer, got '{text}'")
    if kind is float:
        try:
            return float(text)
        except ValueError:
            raise ConfigError(key, f"expected a number, got '{text}'")
    return text


def read_config_file(path: Path) -> Dict[str, Any]:
    """Parse a flat `key = value` file with `#` comments"""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise ConfigError("config", f"cannot read {path}: {e}")

    values: Dict[str, Any] = {}
    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("config", f"{path}:{number}: expected 'key = value', got '{raw.strip()}'")
        key, text = (part.strip() for part in line.split("=", 1))
        if key.startswith(RESERVED_PREFIX):
            continue
        if key not in CONFIG_TYPES:
            raise ConfigError(key, f"unknown configuration key ({path}:{number})")
        values[key] = _convert(key, text)
    return values


def parse_config(
    config_path: Optional[Path] = None,
    overrides: Optional[Dict[str, Any]] = None,
    preset: Optional[str] = None,
) -> ExperimentConfig:
    """Resolve preset defaults < config file < command-line overrides"""
    file_values = read_config_file(config_path) if config_path else {}
    flag_values: Dict[str, Any] = {}
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in CONFIG_TYPES:
            raise ConfigError(key, "unknown configuration key")
        flag_values[key] = _convert(key, value) if isinstance(value, str) else value

    name = flag_values.get("preset") or preset or file_values.get("preset")
    if not name:
        raise ConfigError("preset", "no preset given")
    if not PresetCatalog.is_valid_preset(name):
        raise ConfigError("preset", f"unknown preset '{name}', expected one of {PresetCatalog.names()}")

    merged = dict(PresetCatalog.defaults_for(name))
    merged.update(file_values)
    merged.update(flag_values)
    merged["preset"] = name

    for key in PresetCatalog.ignored_keys(name):
        if key in file_values or key in flag_values:
            logger.warning(f"Key '{key}' has no effect for preset '{name}'")

    try:
        return ExperimentConfig(**merged)
    except TypeError as e:
        raise ConfigError("config", str(e))
