"""phaselab: numerical laboratory for adiabatic and geometric phase phenomena."""

__version__ = "0.1.0"
