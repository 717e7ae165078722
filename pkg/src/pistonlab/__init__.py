"""Piston-driven shock in a gamma-law gas at small upstream density."""

__version__ = "0.1.0"
