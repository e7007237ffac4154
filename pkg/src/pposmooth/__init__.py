"""pposmooth: PPO-family clipped surrogate objectives (flat, rollback,
smoothed) with a from-scratch actor-critic trainer, toy continuous-control
environments, and analysis tools."""

from ._kernels import BACKEND_NAME
from .clip import ClipSpec, SurrogateSample, Variant
from .trainer import RunRecord, TrainConfig, TrainingAborted, train

__all__ = [
    "BACKEND_NAME",
    "ClipSpec",
    "SurrogateSample",
    "Variant",
    "RunRecord",
    "TrainConfig",
    "TrainingAborted",
    "train",
]

__version__ = "0.1.0"
