"""Query workbench for data graphs: register automata, graph patterns and logics."""
from __future__ import annotations

from .errors import CapExceeded, DgqError, GraphError, InvariantError, ParseError
from .graph import PAD, DataGraph, DataPath, Path, load_graph

__all__ = [
    "PAD",
    "CapExceeded",
    "DataGraph",
    "DataPath",
    "DgqError",
    "GraphError",
    "InvariantError",
    "ParseError",
    "Path",
    "load_graph",
]
__version__ = "0.1.0"
