"""Parallel quantum pebbling: graphs, legality, costs and attack strategies."""

__version__ = "0.1.0"
