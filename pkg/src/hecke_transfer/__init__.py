"""Transfer operators and period functions for Maass cusp forms on Gamma_0(p)."""

__version__ = "0.1.0"
