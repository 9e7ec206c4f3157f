"""Wrappers of level sets and sumset complements on cyclic groups."""
__version__ = "0.1.0"
