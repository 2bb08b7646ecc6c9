"""Pseudo-spectral simulator and diagnostics for a damped two-fluid
plasma model coupled to Maxwell's equations on a periodic box."""

from .errors import BipemError
from .model import ModelParams, State
from .spectral import ScalarField, SpectralLayout, VectorField

__all__ = [
    "BipemError",
    "ModelParams",
    "State",
    "ScalarField",
    "SpectralLayout",
    "VectorField",
]

__version__ = "0.1.0"
