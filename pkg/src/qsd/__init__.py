"""Quantum and semiclassical Smoluchowski dynamics of a Brownian particle."""
from .kernels import BACKEND
from .model import ArrheniusModel, PhysicalParams, Potential, derived_scales

__version__ = "0.1.0"
__all__ = ["BACKEND", "ArrheniusModel", "PhysicalParams", "Potential", "derived_scales", "__version__"]
