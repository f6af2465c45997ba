"""Cusp expansions and Petersson inner products for classical cusp forms."""

__version__ = "0.1.0"
