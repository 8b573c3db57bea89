"""
Linear readout: shot noise, least-squares training, prediction and NRMSE.
"""

from .trainer import (
    LeastSquaresSolver,
    NoiseSpec,
    TrainedReadout,
    add_shot_noise,
    nrmse,
    predict,
    train_readout,
)

__all__ = [
    'LeastSquaresSolver',
    'NoiseSpec',
    'TrainedReadout',
    'add_shot_noise',
    'nrmse',
    'predict',
    'train_readout',
]
