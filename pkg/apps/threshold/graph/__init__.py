"""Graphs with rays and functions on them."""

from .graph import GraphWithRays, KVertex, RaySite, SiteIndex, build_graph, star_graph
from .laplacian import apply_graph_laplacian, apply_joining, dense_laplacian
from .ray_function import RayFunction, RayPart, pair, space_membership

__all__ = [
    "GraphWithRays",
    "KVertex",
    "RayFunction",
    "RayPart",
    "RaySite",
    "SiteIndex",
    "apply_graph_laplacian",
    "apply_joining",
    "build_graph",
    "dense_laplacian",
    "pair",
    "space_membership",
    "star_graph",
]
