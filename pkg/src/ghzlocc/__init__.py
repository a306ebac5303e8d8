"""LOCC discrimination of multiqubit GHZ bases: constructions, bounds, simulation and PPT certificates."""

__version__ = "0.1.0"
