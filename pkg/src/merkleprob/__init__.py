"""Merkle trees on truncated hashes and root-collision probability tools."""

__version__ = "0.1.0"
