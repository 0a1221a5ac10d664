import os
import csv
import math
import logging
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from .. import __version__
from .experiment_config import ExperimentConfig, format_value, RESERVED_PREFIX
from .impulsive_runner import RunStatus, TrajectoryRecord, TrajectorySample
from .semi_invariant import ImpulseRecord, SemiInvariantSpec
from .stability import StabilityEstimate, SweepPoint

logger = logging.getLogger(__name__)

VERSION = __version__

TRAJECTORY_FILE = "trajectory.csv"
IMPULSES_FILE = "impulses.csv"
IMPULSE_DETAILS_FILE = "impulse_details.csv"
CASES_FILE = "cases.csv"
CONVERGENCE_FILE = "ds_convergence.csv"
GUARANTEES_FILE = "guarantees.txt"
MANIFEST_FILE = "manifest.txt"
PLOT_FILE = "plot.gp"

IMPULSE_HEADER = ["n", "t_n", "delta_n", "beta_n", "A_n", "B_n", "norm_before", "norm_after"]
IMPULSE_DETAILS_HEADER = ["n", "beta_alt", "control_exponent", "skipped"]
CASES_HEADER = ["t_days", "cumulative_cases", "new_cases_per_day", "S", "V", "E", "I", "R"]


class RunStoreError(OSError):
    """Failure reading or writing run artifacts"""


def format_number(value: Any) -> str:
    """17 significant digits in scientific notation; ints and flags as-is"""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".16e")


def emit_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write a CSV with a header row and LF line endings"""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_number(v) if not isinstance(v, str) else v for v in row])
    except OSError as e:
        raise RunStoreError(f"Cannot write {path}: {e}") from e
    logger.info(f"Wrote {path}")
    return path


def read_csv(path: Path) -> List[Dict[str, str]]:
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            return list(csv.DictReader(handle))
    except OSError as e:
        raise RunStoreError(f"Cannot read {path}: {e}") from e


@dataclass
class RunManifest:
    """Flat key-value record of one invocation"""
    config: ExperimentConfig
    command: str
    status: str
    wall_clock_seconds: float
    summary: Dict[str, Any] = field(default_factory=dict)
    version: str = VERSION

    def to_text(self) -> str:
        lines = [f"{key} = {value}" for key, value in self.config.to_items()]
        lines.append(f"{RESERVED_PREFIX}version = {self.version}")
        lines.append(f"{RESERVED_PREFIX}command = {self.command}")
        lines.append(f"{RESERVED_PREFIX}status = {self.status}")
        lines.append(f"{RESERVED_PREFIX}wall_clock_seconds = {self.wall_clock_seconds:.3f}")
        for key, value in self.summary.items():
            lines.append(f"{RESERVED_PREFIX}{key} = {format_value(value)}")
        return "\n".join(lines) + "\n"


def read_manifest_metadata(path: Path) -> Dict[str, str]:
    """The `run.` entries of a manifest, prefix stripped"""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise RunStoreError(f"Cannot read {path}: {e}") from e
    metadata = {}
    for line in lines:
        if "=" not in line:
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if key.startswith(RESERVED_PREFIX):
            metadata[key[len(RESERVED_PREFIX):]] = value
    return metadata


class RunStore:
    """Output directory of one experiment"""

    def __init__(self, output_dir: Optional[str] = None):
        self.output_dir = Path(output_dir or os.getenv('INVSTEER_OUT', 'runs'))

    def path(self, name: str) -> Path:
        return self.output_dir / name

    def write_text_atomic(self, name: str, text: str) -> Path:
        """Write via a temporary file in the same directory, then rename"""
        target = self.path(name)
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=self.output_dir, prefix=f".{name}.", suffix=".tmp")
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
                handle.write(text)
            os.replace(tmp, target)
        except OSError as e:
            raise RunStoreError(f"Cannot write {target}: {e}") from e
        logger.info(f"Wrote {target}")
        return target

    def write_manifest(self, manifest: RunManifest) -> Path:
        return self.write_text_atomic(MANIFEST_FILE, manifest.to_text())

    def write_trajectory(self, record: TrajectoryRecord, labels: Sequence[str]) -> Path:
        header = ["t", "normI", "log_normI"] + list(labels)
        rows = ([s.t, s.norm_I, s.log_norm_I] + list(s.x) for s in record.samples)
        return emit_csv(self.path(TRAJECTORY_FILE), header, rows)

    def write_impulses(self, record: TrajectoryRecord) -> List[Path]:
        rows = ([r.n, r.t_n, r.delta_n, r.beta_n, r.A_n, r.B_n, r.norm_before, r.norm_after]
                for r in record.impulses)
        details = ([r.n, r.beta_alt, r.control_exponent, r.skipped] for r in record.impulses)
        return [
            emit_csv(self.path(IMPULSES_FILE), IMPULSE_HEADER, rows),
            emit_csv(self.path(IMPULSE_DETAILS_FILE), IMPULSE_DETAILS_HEADER, details),
        ]

    def write_cases(self, record: TrajectoryRecord, sigma: float, time_scale: float) -> Path:
        """Day-denominated epidemic report of an SEIR run"""
        days_per_unit = 1.0 / time_scale
        rows = []
        for s in record.samples:
            V, S, E, I, R = s.x[:5]
            rows.append([s.t * days_per_unit, s.aux.get("cumulative_cases", math.nan),
                         sigma * E / days_per_unit, S, V, E, I, R])
        return emit_csv(self.path(CASES_FILE), CASES_HEADER, rows)

    def write_convergence(self, estimate: StabilityEstimate) -> Path:
        return emit_csv(self.path(CONVERGENCE_FILE), ["t", "omega"], estimate.convergence_series)

    def write_sweep(self, param: str, points: Sequence[SweepPoint]) -> Path:
        rows = ([p.value, p.D_S, p.status] for p in points)
        return emit_csv(self.path(f"ds_vs_{param}.csv"), [param, "D_S", "status"], rows)

    def write_report(self, text: str) -> Path:
        return self.write_text_atomic(GUARANTEES_FILE, text)

    def write_plot_script(self, labels: Sequence[str]) -> Path:
        """Companion gnuplot script for the trajectory and impulse files"""
        script = [
            "set datafile separator ','",
            "set key autotitle columnhead",
            "set xlabel 't'",
            "set ylabel 'log ||I||'",
            f"plot '{TRAJECTORY_FILE}' using 1:3 with lines, \\",
            f"     '{IMPULSES_FILE}' using 2:(log($8)) with points pt 7",
            "pause -1",
        ]
        if labels:
            script.insert(-1, f"# state columns: {', '.join(labels)}")
        return self.write_text_atomic(PLOT_FILE, "\n".join(script) + "\n")

    def load_record(self, spec: SemiInvariantSpec, t0: float, status: str = "horizon") -> TrajectoryRecord:
        """Rebuild a TrajectoryRecord from trajectory.csv and impulses.csv"""
        trajectory = read_csv(self.path(TRAJECTORY_FILE))
        impulse_rows = read_csv(self.path(IMPULSES_FILE))
        if not trajectory:
            raise RunStoreError(f"{self.path(TRAJECTORY_FILE)} has no samples")

        impulses = [
            ImpulseRecord(
                n=int(row["n"]), t_n=float(row["t_n"]), delta_n=float(row["delta_n"]),
                beta_n=float(row["beta_n"]), A_n=float(row["A_n"]), B_n=float(row["B_n"]),
                norm_before=float(row["norm_before"]), norm_after=float(row["norm_after"]),
            )
            for row in impulse_rows
        ]
        state_columns = [name for name in trajectory[0] if name not in ("t", "normI", "log_normI")]

        samples = []
        applied = 0
        seen_pre = False
        for row in trajectory:
            t = float(row["t"])
            x = np.array([float(row[name]) for name in state_columns])
            if applied < len(impulses) and t == impulses[applied].t_n:
                if seen_pre:
                    applied += 1
                    seen_pre = False
                else:
                    seen_pre = True
            samples.append(TrajectorySample(t, x, float(row["normI"]), applied))

        norm0 = samples[0].norm_I
        record = TrajectoryRecord(system_name=spec.name, t0=t0, norm0=norm0,
                                  samples=samples, impulses=impulses)
        try:
            record.status = RunStatus(status)
        except ValueError:
            logger.warning(f"Unknown stored status '{status}', treating the run as horizon")
        return record
