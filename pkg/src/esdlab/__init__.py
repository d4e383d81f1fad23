"""Entanglement dynamics under amplitude damping: thresholds, local-unitary
manipulation, measure comparison and simulated tomography."""

from . import channels, esd, linalg, mcompare, measures, states, tomography
from .errors import (ConvergenceError, DimensionError, EsdlabError, ParameterError,
                     PhysicalityError)
from .states import DensityMatrix

__version__ = "0.1.0"

__all__ = [
    "channels", "esd", "linalg", "mcompare", "measures", "states", "tomography",
    "DensityMatrix", "EsdlabError", "DimensionError", "PhysicalityError",
    "ParameterError", "ConvergenceError", "__version__",
]
