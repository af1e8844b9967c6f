"""Exact checks of locality conditions on finite hidden-variable models."""
__version__ = "0.1.0"
