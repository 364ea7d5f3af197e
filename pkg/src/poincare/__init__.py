"""Hyperbolic densities of plane domains, Poincaré capacity and numerical
checks of strong submultiplicativity."""

__version__ = "0.1.0"
