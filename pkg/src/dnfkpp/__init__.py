"""Doubly nonlinear Fisher-KPP: travelling waves, critical speeds, spreading."""
__version__ = "0.1.0"
