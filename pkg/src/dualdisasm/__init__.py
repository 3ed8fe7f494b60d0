"""Affordance-guided dual-arm disassembly of snap-fit parts, in simulation."""

__version__ = "0.1.0"
