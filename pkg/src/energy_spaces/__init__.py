"""Energy operators, generalized brackets and energy-space scans for PDE solutions."""

__version__ = "0.1.0"
