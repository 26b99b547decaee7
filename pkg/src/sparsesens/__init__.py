"""Sparse power-efficient sensor subnetworks on Poisson points, coupled to site percolation."""

__version__ = "0.1.0"

from .geometry import Point, PointSet, Window, build_index, nearest_k, range_query, sample_poisson
from .graphs import AdjGraph, build_knn, build_udg, connected_components, graph_distance
from .tiling import Region, TileGeom, TileId, region_of, tile_of
from .subnet import Role, SubnetGraph, TileStatus, construct_subnet, largest_component
from .distributed import Auditor, LocalityViolation, construct_subnet_distributed
from .lattice import (
    P_C,
    LatticeWindow,
    chemical_distance,
    couple_lattice,
    estimate_good_prob,
    find_threshold,
    label_clusters,
    sample_site_lattice,
)
from .routing import RouteTrace, compute_next, dist_bfs, expand_route, route

__all__ = [
    "AdjGraph", "Auditor", "LatticeWindow", "LocalityViolation", "P_C", "Point", "PointSet", "Region",
    "Role", "RouteTrace", "SubnetGraph", "TileGeom", "TileId", "TileStatus", "Window", "build_index",
    "build_knn", "build_udg", "chemical_distance", "compute_next", "connected_components",
    "construct_subnet", "construct_subnet_distributed", "couple_lattice", "dist_bfs", "estimate_good_prob",
    "expand_route", "find_threshold", "graph_distance", "label_clusters", "largest_component",
    "nearest_k", "range_query", "region_of", "route", "sample_poisson", "sample_site_lattice", "tile_of",
]
