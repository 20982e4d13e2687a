"""Coded light-field capture simulation and reconstruction-free planar-spoof detection."""
__version__ = "0.1.0"
