"""Braiding-circuit ground-state preparation and entanglement scans
for Kitaev-type spin chains and honeycomb strips."""

__version__ = "0.1.0"
