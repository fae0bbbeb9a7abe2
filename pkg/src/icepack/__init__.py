"""Compiler from logical circuits onto [[4,2,2]] Iceberg code patches."""

__version__ = "0.1.0"
