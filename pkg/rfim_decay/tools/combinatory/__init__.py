"""Combinatory tools that run check groups and experiments."""
