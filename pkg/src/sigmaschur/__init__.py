"""Sigma-p-groups, truncated Magnus groups and related counting experiments."""

__version__ = "0.1.0"
