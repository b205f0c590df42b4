"""Surface foliation features via harmonic maps to decomposition graphs."""

__version__ = "0.1.0"
