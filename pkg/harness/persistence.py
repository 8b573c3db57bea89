"""
Result export and import.

CSV columns (fixed order):
    parameter, seed, ham_index, ipc_1 .. ipc_6, ipc_linear, ipc_nonlinear,
    ipc_total, nrmse_lxx, nrmse_lxz, nrmse_mg, runtime_s, config_hash,
    grid_index
Missing values (task not run, IPC disabled) are written as NaN. Floats are
written with 17 significant digits and parsed back exactly. JSON mirrors
the records including the full IPC report.
"""

import json
import logging
from pathlib import Path
from typing import List, Sequence, Union

import pandas as pd

from errors import ExportError
from .models import CSV_COLUMNS, ResultRecord

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")


def _format_for(path: Path, fmt: str = None) -> str:
    fmt = (fmt or path.suffix.lstrip(".")).lower()
    if fmt not in FORMATS:
        raise ExportError(f"unsupported format {fmt!r}", path=str(path))
    return fmt


def export(records: Sequence[ResultRecord], fmt: str, path: Union[str, Path]) -> Path:
    """Write records as CSV or JSON; returns the written path."""
    path = Path(path)
    fmt = _format_for(path, fmt)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if fmt == "csv":
            frame = pd.DataFrame([r.to_row() for r in records], columns=CSV_COLUMNS)
            frame.to_csv(path, index=False, float_format="%.17g", na_rep="NaN")
        else:
            with open(path, "w") as f:
                json.dump({"records": [r.to_dict() for r in records]}, f, indent=2)
    except OSError as e:
        raise ExportError(f"could not write results ({e})", path=str(path)) from e
    logger.info(f"Exported {len(records)} records to {path}")
    return path


def load_records(path: Union[str, Path]) -> List[ResultRecord]:
    """Read records written by export()."""
    path = Path(path)
    fmt = _format_for(path)
    try:
        if fmt == "csv":
            frame = pd.read_csv(
                path, float_precision="round_trip", dtype={"config_hash": str},
                keep_default_na=False, na_values=["NaN"],
            )
            missing = [c for c in CSV_COLUMNS if c not in frame.columns]
            if missing:
                raise ExportError(f"missing columns {missing}", path=str(path))
            return [ResultRecord.from_row(row) for row in frame.to_dict(orient="records")]
        with open(path, "r") as f:
            data = json.load(f)
        return [ResultRecord.from_dict(item) for item in data["records"]]
    except (OSError, ValueError, KeyError) as e:
        raise ExportError(f"could not read results ({e})", path=str(path)) from e
