"""Result records: confidence intervals and CSV/JSON output."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import pandas as pd
from scipy.stats import norm

from .const import CONFIDENCE_LEVEL, CSV_COLUMNS, FLOAT_FORMAT, OUTPUT_FORMATS, SIGNIFICANT_DIGITS
from .exceptions import ConfigurationError
from .models import PilotPattern, ResultRecord

_LOGGER = logging.getLogger(__name__)


def confidence_z(level: float = CONFIDENCE_LEVEL) -> float:
    """Two-sided standard normal quantile."""
    return float(norm.ppf(0.5 + level / 2))


def wilson_interval(errors: int, total: int, level: float = CONFIDENCE_LEVEL) -> tuple[float, float]:
    """Centre and half-width of the Wilson score interval of errors/total."""
    if total <= 0:
        return 0.0, 0.0
    z = confidence_z(level)
    p = errors / total
    denominator = 1 + z * z / total
    centre = (p + z * z / (2 * total)) / denominator
    half = z * math.sqrt(p * (1 - p) / total + z * z / (4 * total * total)) / denominator
    return centre, half


def mean_interval(values: Sequence[float], level: float = CONFIDENCE_LEVEL) -> tuple[float, float]:
    """Sample mean and normal-approximation half-width."""
    data = np.asarray(values, dtype=float)
    if data.size < 2:
        return float(data.mean()) if data.size else 0.0, 0.0
    return float(data.mean()), confidence_z(level) * float(data.std(ddof=1)) / math.sqrt(data.size)


def _significant(value):
    if isinstance(value, float) and math.isfinite(value):
        return float(f"{value:.{SIGNIFICANT_DIGITS}g}")
    return value


def records_to_frame(records: Iterable[ResultRecord]) -> pd.DataFrame:
    """Tabulate records in the output column order."""
    return pd.DataFrame([asdict(record) for record in records], columns=list(CSV_COLUMNS))


def write_csv(records: Sequence[ResultRecord], path: Path) -> Path:
    records_to_frame(records).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def write_json(records: Sequence[ResultRecord], path: Path) -> Path:
    rows = []
    for record in records:
        fields = asdict(record)
        rows.append({column: _significant(fields[column]) for column in CSV_COLUMNS})
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(rows, handle, ensure_ascii=False, indent=2)
    return path


def write_results(
    records: Sequence[ResultRecord], out_dir: str | Path, experiment: str, fmt: str = "csv"
) -> list[Path]:
    """Write <out>/<experiment>.csv and/or .json; return the written paths."""
    if fmt not in OUTPUT_FORMATS:
        raise ConfigurationError(f"unknown output format {fmt}", "format")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("csv", "both"):
        written.append(write_csv(records, out / f"{experiment}.csv"))
    if fmt in ("json", "both"):
        written.append(write_json(records, out / f"{experiment}.json"))
    _LOGGER.info("Wrote %d records to %s", len(records), ", ".join(str(p) for p in written))
    return written


def write_pattern(pattern: PilotPattern, out_dir: str | Path) -> Path:
    """Dump the M x N role grid (rows l, columns k) as <out>/pattern_<variant>.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"pattern_{pattern.variant}.csv"
    frame = pd.DataFrame(pattern.roles(), columns=[f"k{k}" for k in range(pattern.N)])
    frame.index = [f"l{l}" for l in range(pattern.M)]
    frame.to_csv(path, index_label="l\\k")
    return path
