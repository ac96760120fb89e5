"""Reflectionless sech^2 potentials, their scattering states and their
phase-equivalent singular partners, built from SUSY determinant formulas."""

__version__ = "0.1.0"
