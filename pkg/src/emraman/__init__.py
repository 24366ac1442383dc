"""Spectral theory, resonances and Raman growth rates of the two-fluid Euler-Maxwell system."""

__version__ = "0.1.0"

from .spectral import PlasmaParams, Frequency  # noqa: E402,F401
from .resonance import RegimeError  # noqa: E402,F401

__all__ = ["PlasmaParams", "Frequency", "RegimeError", "__version__"]
