"""Specification-guided automated program repair pipeline for Java codebases."""

__version__ = "0.1.0"

SCHEMA_VERSION = 1
