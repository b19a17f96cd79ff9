"""Pseudospectral Camassa-Holm / Burgers solver with Littlewood-Paley and
Besov-norm diagnostics for the zero-filter limit ``alpha -> 0``."""

__version__ = "0.1.0"

from .errors import BlowUpError, ConfigurationError, ImminentShockError, SymmetryError  # noqa: E402
from .spectral import Grid, SpectralField, dealias, derivative, resolvent  # noqa: E402
from .littlewood_paley import BesovParams, besov_norm, build_partition, sobolev_norm  # noqa: E402
from .dynamics import EvolutionSpec, StepPolicy, integrate  # noqa: E402

__all__ = [
    "BesovParams", "BlowUpError", "ConfigurationError", "EvolutionSpec", "Grid",
    "ImminentShockError", "SpectralField", "StepPolicy", "SymmetryError", "besov_norm",
    "build_partition", "dealias", "derivative", "integrate", "resolvent", "sobolev_norm",
]
