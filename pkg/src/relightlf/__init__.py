"""Relightable 4D light fields: synthetic one-light-at-a-time data,
two-stage MLP models with reflectance decomposition, environment-map
relighting, and evaluation tooling."""

__version__ = "0.1.0"
