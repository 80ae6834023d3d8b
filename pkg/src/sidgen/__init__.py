"""Topic-guided synthetic data pipeline for suicidal ideation classification."""

__version__ = "0.1.0"
