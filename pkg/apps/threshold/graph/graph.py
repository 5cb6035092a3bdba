"""
Graph with rays: a finite connected graph K with N half-lines attached at
joint vertices.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Hashable, Iterable, List, Sequence, Tuple, Union

from ..errors import DisconnectedK, DuplicateEdge, SelfLoop, ThresholdError, UnknownJoint

logger = logging.getLogger(__name__)

Vertex = Hashable


@dataclass(frozen=True, order=True)
class KVertex:
    vertex: Vertex

    def __str__(self) -> str:
        return f"{self.vertex}"


@dataclass(frozen=True, order=True)
class RaySite:
    ray: int
    position: int

    def __post_init__(self) -> None:
        if self.ray < 1:
            raise ThresholdError(f"ray index starts at 1, got {self.ray}")
        if self.position < 1:
            raise ThresholdError(f"ray position starts at 1, got {self.position}")

    def __str__(self) -> str:
        return f"{self.position}^({self.ray})"


SiteIndex = Union[KVertex, RaySite]


@dataclass(frozen=True)
class GraphWithRays:
    k_vertices: Tuple[Vertex, ...]
    k_edges: FrozenSet[FrozenSet[Vertex]]
    joints: Tuple[Vertex, ...]

    @property
    def ray_count(self) -> int:
        return len(self.joints)

    @cached_property
    def vertex_index(self) -> Dict[Vertex, int]:
        return {vertex: i for i, vertex in enumerate(self.k_vertices)}

    @cached_property
    def neighbors(self) -> Dict[Vertex, Tuple[Vertex, ...]]:
        adjacency: Dict[Vertex, List[Vertex]] = {vertex: [] for vertex in self.k_vertices}
        for edge in self.k_edges:
            a, b = tuple(edge)
            adjacency[a].append(b)
            adjacency[b].append(a)
        return {
            vertex: tuple(sorted(adjacent, key=self.vertex_index.__getitem__))
            for vertex, adjacent in adjacency.items()
        }

    def degree(self, vertex: Vertex) -> int:
        return len(self.neighbors[vertex])

    def rays_at(self, vertex: Vertex) -> Tuple[int, ...]:
        """1-based indices of the rays jointed at ``vertex``."""
        return tuple(alpha + 1 for alpha, joint in enumerate(self.joints) if joint == vertex)

    def joint_count(self, vertex: Vertex) -> int:
        return len(self.rays_at(vertex))

    @cached_property
    def distinct_joints(self) -> Tuple[Vertex, ...]:
        """Joint vertices in first-appearance order."""
        seen: List[Vertex] = []
        for joint in self.joints:
            if joint not in seen:
                seen.append(joint)
        return tuple(seen)

    def joint_of(self, ray: int) -> Vertex:
        return self.joints[ray - 1]

    def check_site(self, site: SiteIndex) -> None:
        if isinstance(site, KVertex):
            if site.vertex not in self.vertex_index:
                raise ThresholdError(f"unknown K vertex {site.vertex!r}")
        elif site.ray > self.ray_count:
            raise ThresholdError(f"ray {site.ray} exceeds ray count {self.ray_count}")

    def window_sites(self, length: int) -> List[SiteIndex]:
        """K vertices in insertion order, then each ray's first ``length`` positions."""
        sites: List[SiteIndex] = [KVertex(vertex) for vertex in self.k_vertices]
        for ray in range(1, self.ray_count + 1):
            sites.extend(RaySite(ray, n) for n in range(1, length + 1))
        return sites


def _normalize_edges(k_vertices: Sequence[Vertex], k_edges: Iterable[Sequence[Vertex]]) -> FrozenSet[FrozenSet[Vertex]]:
    known = set(k_vertices)
    edges = set()
    for edge in k_edges:
        a, b = tuple(edge)
        if a == b:
            raise SelfLoop(f"self loop at vertex {a!r}")
        if a not in known or b not in known:
            raise ThresholdError(f"edge {{{a!r}, {b!r}}} references an unknown vertex")
        key = frozenset((a, b))
        if key in edges:
            raise DuplicateEdge(f"duplicate edge {{{a!r}, {b!r}}}")
        edges.add(key)
    return frozenset(edges)


def _is_connected(k_vertices: Sequence[Vertex], edges: FrozenSet[FrozenSet[Vertex]]) -> bool:
    adjacency: Dict[Vertex, List[Vertex]] = {vertex: [] for vertex in k_vertices}
    for edge in edges:
        a, b = tuple(edge)
        adjacency[a].append(b)
        adjacency[b].append(a)
    start = k_vertices[0]
    seen = {start}
    queue = deque([start])
    while queue:
        current = queue.popleft()
        for neighbor in adjacency[current]:
            if neighbor not in seen:
                seen.add(neighbor)
                queue.append(neighbor)
    return len(seen) == len(k_vertices)


def build_graph(
    k_vertices: Sequence[Vertex],
    k_edges: Iterable[Sequence[Vertex]],
    joints: Sequence[Vertex],
) -> GraphWithRays:
    """Validate and freeze a graph with rays."""
    vertices = tuple(k_vertices)
    if not vertices:
        raise ThresholdError("K needs at least one vertex")
    if len(set(vertices)) != len(vertices):
        raise ThresholdError("K vertices must be distinct")
    edges = _normalize_edges(vertices, k_edges)
    if not _is_connected(vertices, edges):
        raise DisconnectedK("the finite part K must be connected")
    if not joints:
        raise ThresholdError("at least one ray is required")
    for joint in joints:
        if joint not in set(vertices):
            raise UnknownJoint(f"joint {joint!r} is not a K vertex")

    graph = GraphWithRays(vertices, edges, tuple(joints))
    logger.debug(f"Built graph: |K|={len(vertices)}, |E0|={len(edges)}, N={graph.ray_count}")
    return graph


def star_graph(ray_count: int) -> GraphWithRays:
    """K = {0} with every ray jointed at 0."""
    return build_graph([0], [], [0] * ray_count)
