"""Road network inference from GPS trajectories."""

__version__ = "0.1.0"
