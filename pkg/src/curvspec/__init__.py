"""Laplacian spectra and counting-function asymptotics on constant-curvature domains."""

__version__ = "0.1.0"
