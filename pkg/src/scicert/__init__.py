"""scicert: certainty analysis for scientific findings in abstracts and news."""

__version__ = "0.1.0"
