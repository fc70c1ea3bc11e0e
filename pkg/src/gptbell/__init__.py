"""Incompatibility degrees and generalized Tsirelson bounds for polytopic GPTs."""

__version__ = "0.1.0"
