"""Deterministic discrete-event simulator for hierarchical fog/edge environments."""

__version__ = "0.1.0"
