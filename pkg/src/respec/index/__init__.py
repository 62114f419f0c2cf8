"""Code index: project method table, call edges, and imported-library API."""

from respec.index.build import (
    NoSources,
    StaleIndex,
    UnknownMethod,
    build_index,
    callees_of,
    indexes_equivalent,
    load_index,
    public_api_of_imports,
    save_index,
    update_index,
)
from respec.index.model import ApiEntry, CodeIndex, MethodRecord, Visibility

__all__ = [
    "ApiEntry",
    "CodeIndex",
    "MethodRecord",
    "NoSources",
    "StaleIndex",
    "UnknownMethod",
    "Visibility",
    "build_index",
    "callees_of",
    "indexes_equivalent",
    "load_index",
    "public_api_of_imports",
    "save_index",
    "update_index",
]
