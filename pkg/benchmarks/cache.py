"""
On-disk cache of benchmark series.

One sample per line (Lorenz: three space-separated columns), 17 significant
digits, file name keyed by a hash of the generating spec.
"""

import hashlib
import json
import logging
from dataclasses import asdict
from pathlib import Path
from typing import Union

import numpy as np

from errors import ConfigError, ExportError
from .systems import LorenzSpec, MackeyGlassSpec, integrate_lorenz, integrate_mackey_glass

logger = logging.getLogger(__name__)

SeriesSpec = Union[LorenzSpec, MackeyGlassSpec]


def spec_hash(spec: SeriesSpec, n_samples: int) -> str:
    """Stable hex key for (system, spec fields, length)."""
    payload = {"system": type(spec).__name__, "spec": asdict(spec), "n_samples": int(n_samples)}
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def generate_series(spec: SeriesSpec, n_samples: int) -> np.ndarray:
    if isinstance(spec, LorenzSpec):
        return integrate_lorenz(spec, n_samples)
    if isinstance(spec, MackeyGlassSpec):
        return integrate_mackey_glass(spec, n_samples)
    raise ConfigError(f"unknown series spec {type(spec).__name__}")


class SeriesCache:
    """
    Generated series stored under a cache directory.

    Files are named <system>_<hash prefix>.txt; a miss generates the series
    and writes it before returning.
    """

    def __init__(self, cache_dir: Union[str, Path] = "./qrc_output/cache"):
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)

    def path_for(self, spec: SeriesSpec, n_samples: int) -> Path:
        system = "lorenz" if isinstance(spec, LorenzSpec) else "mackey_glass"
        return self.cache_dir / f"{system}_{spec_hash(spec, n_samples)[:16]}.txt"

    def load_or_generate(self, spec: SeriesSpec, n_samples: int) -> np.ndarray:
        path = self.path_for(spec, n_samples)
        if path.exists():
            try:
                series = np.loadtxt(path, ndmin=2 if isinstance(spec, LorenzSpec) else 1)
                logger.debug(f"Loaded cached series {path.name}")
                return series
            except ValueError as e:
                logger.warning(f"Discarding unreadable cache file {path}: {e}")
        series = generate_series(spec, n_samples)
        self.save(series, path)
        return series

    def save(self, series: np.ndarray, path: Path) -> None:
        try:
            np.savetxt(path, series, fmt="%.17g")
            logger.info(f"Cached {len(series)} samples to {path}")
        except OSError as e:
            raise ExportError(f"could not write series cache ({e})", path=str(path)) from e
