"""
Information processing capacity with Legendre delay-product targets.
"""

from .capacity import capacity, compute_ipc, shuffle_cutoff
from .models import CutoffConfig, FamilyResult, IpcBudget, IpcReport, TargetSpec
from .targets import build_targets, enumerate_targets, legendre, legendre_table

__all__ = [
    'capacity',
    'compute_ipc',
    'shuffle_cutoff',
    'CutoffConfig',
    'FamilyResult',
    'IpcBudget',
    'IpcReport',
    'TargetSpec',
    'build_targets',
    'enumerate_targets',
    'legendre',
    'legendre_table',
]
