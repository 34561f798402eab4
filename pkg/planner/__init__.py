"""Energy-aware routing and charge scheduling for a battery electric shuttle fleet."""

__version__ = "0.1.0"
