"""Optimal, greedy and dilated quantization grids for one- and multi-dimensional laws."""

from .distributions import DistributionSpec, Kind, preset
from .dilation import DilationParams, admissible_interval, dilate, dilated_weights, theta_star
from .errors import NumericalError, QuantizationError, ValidationError
from .greedy import GreedySequence, build_greedy
from .optimal import lloyd, newton_lr
from .quantizer import DistortionReport, Grid, distortion, nearest, weights

__version__ = "0.1.0"

__all__ = [
    "DilationParams", "DistortionReport", "DistributionSpec", "GreedySequence", "Grid", "Kind",
    "NumericalError", "QuantizationError", "ValidationError", "admissible_interval",
    "build_greedy", "dilate", "dilated_weights", "distortion", "lloyd", "nearest", "newton_lr",
    "preset", "theta_star", "weights",
]
