"""catamp - cat-state decoherence in an ideal linear optical amplifier."""

__version__ = "0.1.0"
