"""Synthesis of pin-contract violations over RPIL function models."""

__version__ = "0.1.0"
