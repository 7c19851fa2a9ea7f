"""Pairs of valuations and Cayley-graph probes for groups K x| Z."""

__version__ = "0.1.0"
