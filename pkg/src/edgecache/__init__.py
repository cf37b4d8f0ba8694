"""Online collaborative edge caching on a grid of small cells."""

__version__ = "0.1.0"
