"""Constraint structure, gauge symmetries and reduced dynamics of Lagrangians affine in velocities."""

__version__ = "0.1.0"
