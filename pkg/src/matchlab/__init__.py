"""Exact k-matching counts in regular graphs and related bounds."""

from .errors import DomainError, GuardError, MatchlabError
from .graphs import GraphClass, MultiGraph, build_graph, enumerate_regular
from .matching import haffnian, match_series, perm_k, phi

__all__ = [
    "DomainError",
    "GuardError",
    "GraphClass",
    "MatchlabError",
    "MultiGraph",
    "build_graph",
    "enumerate_regular",
    "haffnian",
    "match_series",
    "perm_k",
    "phi",
]
