"""Excursion probabilities of Gaussian random fields on spheres."""

__version__ = "0.1.0"
