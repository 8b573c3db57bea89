"""
Ensemble aggregation and normalized curves.

Records are grouped by swept parameter; means carry standard errors
(sample std with ddof=1 over sqrt(n), zero for a single sample).
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from errors import ConfigError
from .models import CSV_COLUMNS, IPC_COLUMNS, NRMSE_COLUMNS, ResultRecord

logger = logging.getLogger(__name__)

METRICS = IPC_COLUMNS + NRMSE_COLUMNS
# Normalized curve name -> aggregated metric.
CURVES = {"memory": "ipc_linear", "nonlinearity": "ipc_nonlinear", "total": "ipc_total"}


def records_frame(records: Sequence[ResultRecord]) -> pd.DataFrame:
    return pd.DataFrame([r.to_row() for r in records], columns=CSV_COLUMNS)


def aggregate_records(records: Sequence[ResultRecord]) -> pd.DataFrame:
    """Per-parameter n, <metric>_mean and <metric>_se for every metric."""
    frame = records_frame(records)
    if frame.empty:
        columns = ["parameter", "n"] + [f"{m}_mean" for m in METRICS] + [f"{m}_se" for m in METRICS]
        return pd.DataFrame(columns=columns)
    grouped = frame.groupby("parameter", sort=True, dropna=False)[METRICS]
    counts = grouped.count()
    means = grouped.mean()
    se = grouped.std(ddof=1) / np.sqrt(counts)
    se = se.mask(counts == 1, 0.0)
    result = pd.concat(
        [grouped.size().rename("n"), means.add_suffix("_mean"), se.add_suffix("_se")],
        axis=1,
    )
    return result.reset_index()


@dataclass(frozen=True)
class Reference:
    """What normalized curves are divided by.

    kind: "parameter" (aggregate at a grid value), "records" (aggregate of a
    separate run, e.g. FRP), "max_memory" (grid point with the largest mean
    linear capacity) or "self" (pointwise, every curve becomes 1).
    """
    kind: str
    value: Optional[float] = None
    records: Tuple[ResultRecord, ...] = ()

    def __post_init__(self):
        if self.kind not in ("parameter", "records", "max_memory", "self"):
            raise ConfigError(f"unknown reference kind {self.kind!r}")
        if self.kind == "parameter" and self.value is None:
            raise ConfigError("parameter reference needs a value")
        if self.kind == "records" and not self.records:
            raise ConfigError("records reference needs records")

    @classmethod
    def at_parameter(cls, value: float) -> "Reference":
        return cls("parameter", value=float(value))

    @classmethod
    def from_records(cls, records: Sequence[ResultRecord]) -> "Reference":
        return cls("records", records=tuple(records))

    @classmethod
    def max_memory(cls) -> "Reference":
        return cls("max_memory")

    @classmethod
    def pointwise(cls) -> "Reference":
        return cls("self")


def _reference_row(aggregate: pd.DataFrame, reference: Reference) -> pd.Series:
    if reference.kind == "parameter":
        match = aggregate[np.isclose(aggregate["parameter"], reference.value)]
        if match.empty:
            raise ConfigError(f"no records at reference parameter {reference.value}")
        return match.iloc[0]
    if reference.kind == "records":
        pooled = records_frame(reference.records)[METRICS].mean()
        return pooled.add_suffix("_mean")
    return aggregate.loc[aggregate["ipc_linear_mean"].idxmax()]


def normalize_records(records: Sequence[ResultRecord], reference: Reference) -> pd.DataFrame:
    """memory, nonlinearity and total (with _se) divided by the reference means."""
    aggregate = aggregate_records(records)
    result = pd.DataFrame({"parameter": aggregate["parameter"]})
    for curve, metric in CURVES.items():
        means = aggregate[f"{metric}_mean"]
        if reference.kind == "self":
            denominator = means
        else:
            denominator = pd.Series(float(_reference_row(aggregate, reference)[f"{metric}_mean"]), index=means.index)
        if np.any(denominator == 0.0) or np.any(~np.isfinite(denominator)):
            raise ConfigError(f"reference {curve} is zero or undefined")
        result[curve] = means / denominator
        result[f"{curve}_se"] = aggregate[f"{metric}_se"] / denominator
    return result


def best_points(
    records: Sequence[ResultRecord],
    reference: Optional[Sequence[ResultRecord]] = None,
) -> Dict[str, Dict[str, float]]:
    """Best ensemble mean per metric (max for capacities, min for NRMSE).

    With reference records, relative_change = (best - ref) / ref against
    the reference's pooled mean.
    """
    aggregate = aggregate_records(records)
    pooled = records_frame(reference)[METRICS].mean() if reference else None
    summary: Dict[str, Dict[str, float]] = {}
    for metric in METRICS:
        column = aggregate[f"{metric}_mean"]
        if aggregate.empty or column.isna().all():
            continue
        index = column.idxmin() if metric.startswith("nrmse") else column.idxmax()
        entry = {
            "parameter": float(aggregate.loc[index, "parameter"]),
            "value": float(column[index]),
            "se": float(aggregate.loc[index, f"{metric}_se"]),
        }
        if pooled is not None and np.isfinite(pooled[metric]) and pooled[metric] != 0.0:
            entry["relative_change"] = (entry["value"] - float(pooled[metric])) / float(pooled[metric])
        summary[metric] = entry
    return summary


def sweep_table(records: List[ResultRecord]) -> pd.DataFrame:
    """Tidy per-parameter table of the headline metrics, ready for plotting."""
    aggregate = aggregate_records(records)
    columns = ["parameter", "n"]
    for metric in ["ipc_linear", "ipc_nonlinear", "ipc_total"] + NRMSE_COLUMNS:
        columns += [f"{metric}_mean", f"{metric}_se"]
    return aggregate[columns]
