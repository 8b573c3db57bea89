"""
Benchmark series (Lorenz-63, Mackey-Glass) and one-step prediction tasks.
"""

from .cache import SeriesCache, generate_series, spec_hash
from .systems import (
    LorenzSpec,
    MackeyGlassSpec,
    integrate_lorenz,
    integrate_mackey_glass,
    lorenz_derivative,
)
from .tasks import ScalingRecord, TaskDataset, make_task

__all__ = [
    'SeriesCache',
    'generate_series',
    'spec_hash',
    'LorenzSpec',
    'MackeyGlassSpec',
    'integrate_lorenz',
    'integrate_mackey_glass',
    'lorenz_derivative',
    'ScalingRecord',
    'TaskDataset',
    'make_task',
]
