"""Higher-rank graphs, branching systems and their Cuntz-Krieger operators, computed exactly."""

__version__ = "0.1.0"
