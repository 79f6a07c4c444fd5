"""
Combinatorial polyhedra: construction, Conway operators, seed generators
and the Steinitz precondition check.

Conventions
-----------
Faces are vertex cycles oriented counterclockwise as seen from outside.
Seed vertex orderings are frozen by the coordinate tables in
``seed_coordinates``; seed faces are read off the convex hull, rotated to
start at their smallest vertex and sorted.

Conway operators fix their own orderings:

* ``dual``     vertex k is face k of the input; face k is the cycle of faces
               around input vertex k.
* ``kis``      input vertices keep their indices, then one apex per face in
               face order. Faces are (v_i, v_{i+1}, apex) per input face.
* ``truncate`` one vertex per directed edge (u, v) in sorted order, sitting
               near u. Faces: truncated input faces, then vertex figures.
* ``ambo``     one vertex per undirected edge in sorted order. Faces: input
               faces, then vertex figures.
"""

import itertools
import logging
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
from scipy.spatial import ConvexHull

from errors import (DegenerateFace, Disconnected, EulerViolation, NonManifoldEdge,
                    UnknownSeed, ValidationError)

logger = logging.getLogger(__name__)

PHI = (1 + 5 ** 0.5) / 2

SEED_NAMES = ('tetrahedron', 'cube', 'octahedron', 'dodecahedron', 'icosahedron', 'prism', 'polygon')
CONWAY_OPS = ('dual', 'kis', 'truncate', 'ambo')

Face = Tuple[int, ...]
Edge = Tuple[int, int]


@dataclass(frozen=True)
class PolyhedralComplex:
    """Closed oriented polyhedral surface (combinatorial type only)."""
    vertex_count: int
    faces: Tuple[Face, ...]
    edges: Tuple[Edge, ...]
    labels: Optional[Tuple[str, ...]] = None
    # apex vertex -> base face cycle, set by kis
    apex_bases: Optional[Dict[int, Face]] = field(default=None, compare=False)

    @property
    def V(self) -> int:
        return self.vertex_count

    @property
    def E(self) -> int:
        return len(self.edges)

    @property
    def F(self) -> int:
        return len(self.faces)

    @property
    def euler_characteristic(self) -> int:
        return self.V - self.E + self.F

    @property
    def is_simplicial(self) -> bool:
        return all(len(f) == 3 for f in self.faces)

    @cached_property
    def half_edges(self) -> Dict[Edge, int]:
        """Directed edge (u, v) -> index of the face traversing it."""
        result = {}
        for fi, face in enumerate(self.faces):
            k = len(face)
            for i in range(k):
                result[(face[i], face[(i + 1) % k])] = fi
        return result

    def label(self, v: int) -> str:
        return self.labels[v] if self.labels else str(v)


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple connected graph with degree data."""
    vertex_count: int
    adjacency: np.ndarray
    degrees: np.ndarray

    @classmethod
    def from_edges(cls, vertex_count: int, edges: Sequence[Edge]) -> 'Graph':
        adjacency = np.zeros((vertex_count, vertex_count), dtype=bool)
        for i, j in edges:
            if i == j:
                raise ValidationError(f"self-loop at vertex {i}")
            adjacency[i, j] = adjacency[j, i] = True
        graph = cls(vertex_count, adjacency, adjacency.sum(axis=1).astype(int))
        if vertex_count > 0 and not nx.is_connected(graph.to_networkx()):
            raise Disconnected(f"graph on {vertex_count} vertices is not connected")
        return graph

    @property
    def edges(self) -> List[Edge]:
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(i.tolist(), j.tolist()))

    def neighbors(self, v: int) -> List[int]:
        return np.flatnonzero(self.adjacency[v]).tolist()

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.vertex_count))
        g.add_edges_from(self.edges)
        return g

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.vertex_count == other.vertex_count and np.array_equal(self.adjacency, other.adjacency)


@dataclass(frozen=True)
class SteinitzReport:
    is_planar: bool
    is_3_connected: bool
    euler_ok: bool

    @property
    def ok(self) -> bool:
        return self.is_planar and self.is_3_connected and self.euler_ok

    def to_dict(self) -> Dict[str, bool]:
        return {'is_planar': self.is_planar, 'is_3_connected': self.is_3_connected, 'euler_ok': self.euler_ok}


def build_complex(vertex_count: int, faces: Sequence[Sequence[int]],
                  labels: Optional[Sequence[str]] = None,
                  apex_bases: Optional[Dict[int, Face]] = None) -> PolyhedralComplex:
    """
    Validate a face list and build a closed oriented complex.

    Args:
        vertex_count: Number of vertices
        faces: Vertex cycles, counterclockwise from outside

    Returns:
        PolyhedralComplex with the derived edge set cached
    """
    if vertex_count <= 0:
        raise ValidationError("vertex_count must be positive")
    if not faces:
        raise ValidationError("complex needs at least one face")
    if labels is not None and len(labels) != vertex_count:
        raise ValidationError(f"expected {vertex_count} labels, got {len(labels)}")

    normalized = []
    half_edges: Dict[Edge, int] = {}
    for fi, face in enumerate(faces):
        face = tuple(int(v) for v in face)
        if len(face) < 3:
            raise DegenerateFace(f"face {fi} has {len(face)} vertices", face=fi)
        if len(set(face)) != len(face):
            raise DegenerateFace(f"face {fi} repeats a vertex", face=fi)
        for v in face:
            if not 0 <= v < vertex_count:
                raise ValidationError(f"face {fi} references vertex {v} outside 0..{vertex_count - 1}")
        for i in range(len(face)):
            key = (face[i], face[(i + 1) % len(face)])
            if key in half_edges:
                raise NonManifoldEdge(f"directed edge {key} used by faces {half_edges[key]} and {fi}",
                                      edge=key)
            half_edges[key] = fi
        normalized.append(face)

    for (u, v) in half_edges:
        if (v, u) not in half_edges:
            raise NonManifoldEdge(f"edge {{{u},{v}}} lies on a single face", edge=(u, v))

    edges = tuple(sorted({(min(u, v), max(u, v)) for (u, v) in half_edges}))
    euler = vertex_count - len(edges) + len(normalized)
    if euler != 2:
        raise EulerViolation(f"V - E + F = {vertex_count} - {len(edges)} + {len(normalized)} = {euler}",
                             euler=euler)

    return PolyhedralComplex(
        vertex_count=vertex_count,
        faces=tuple(normalized),
        edges=edges,
        labels=tuple(labels) if labels is not None else None,
        apex_bases=dict(apex_bases) if apex_bases else None,
    )


def skeleton(complex: PolyhedralComplex) -> Graph:
    """1-skeleton of a complex."""
    return Graph.from_edges(complex.vertex_count, complex.edges)


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValidationError(f"polygon needs n >= 3, got {n}")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def relabel(complex: PolyhedralComplex, permutation: Sequence[int]) -> PolyhedralComplex:
    """Rename vertex v to permutation[v]."""
    perm = [int(p) for p in permutation]
    if sorted(perm) != list(range(complex.vertex_count)):
        raise ValidationError("relabeling must be a permutation of the vertices")
    faces = [tuple(perm[v] for v in face) for face in complex.faces]
    labels = None
    if complex.labels:
        labels = [''] * complex.vertex_count
        for old, new in enumerate(perm):
            labels[new] = complex.labels[old]
    apex_bases = None
    if complex.apex_bases:
        apex_bases = {perm[a]: tuple(perm[v] for v in base) for a, base in complex.apex_bases.items()}
    return build_complex(complex.vertex_count, faces, labels, apex_bases)


def vertex_rotation(complex: PolyhedralComplex, v: int) -> Tuple[int, ...]:
    """Neighbors of v in counterclockwise order seen from outside."""
    half = complex.half_edges
    start = min(w for (u, w) in half if u == v)
    order = [start]
    w = start
    while True:
        face = complex.faces[half[(v, w)]]
        w = face[face.index(v) - 1]
        if w == start:
            break
        order.append(w)
    return tuple(order)


def _dual(complex: PolyhedralComplex) -> PolyhedralComplex:
    half = complex.half_edges
    faces = [tuple(half[(u, w)] for w in vertex_rotation(complex, u)) for u in range(complex.V)]
    labels = [f"face:{fi}" for fi in range(complex.F)]
    return build_complex(complex.F, faces, labels)


def _kis(complex: PolyhedralComplex) -> PolyhedralComplex:
    faces = []
    apex_bases = {}
    for fi, face in enumerate(complex.faces):
        apex = complex.V + fi
        apex_bases[apex] = face
        k = len(face)
        faces.extend((face[i], face[(i + 1) % k], apex) for i in range(k))
    labels = [complex.label(v) for v in range(complex.V)] + [f"apex:{fi}" for fi in range(complex.F)]
    return build_complex(complex.V + complex.F, faces, labels, apex_bases)


def _truncate(complex: PolyhedralComplex) -> PolyhedralComplex:
    directed = sorted(complex.half_edges)
    index = {e: i for i, e in enumerate(directed)}
    faces = []
    for face in complex.faces:
        k = len(face)
        cycle = []
        for i in range(k):
            a, b = face[i], face[(i + 1) % k]
            cycle.extend((index[(a, b)], index[(b, a)]))
        faces.append(tuple(cycle))
    for u in range(complex.V):
        faces.append(tuple(index[(u, w)] for w in vertex_rotation(complex, u)))
    labels = [f"{u}>{v}" for (u, v) in directed]
    return build_complex(len(directed), faces, labels)


def _ambo(complex: PolyhedralComplex) -> PolyhedralComplex:
    index = {e: i for i, e in enumerate(complex.edges)}

    def edge_id(a: int, b: int) -> int:
        return index[(min(a, b), max(a, b))]

    faces = []
    for face in complex.faces:
        k = len(face)
        faces.append(tuple(edge_id(face[i], face[(i + 1) % k]) for i in range(k)))
    for u in range(complex.V):
        faces.append(tuple(edge_id(u, w) for w in vertex_rotation(complex, u)))
    labels = [f"{u}-{v}" for (u, v) in complex.edges]
    return build_complex(complex.E, faces, labels)


_CONWAY = {
    'dual': _dual,
    'kis': _kis,
    'truncate': _truncate,
    'ambo': _ambo,
}


def conway_apply(op: str, complex: PolyhedralComplex) -> PolyhedralComplex:
    """Apply one of the Conway operators dual, kis, truncate, ambo."""
    try:
        builder = _CONWAY[op]
    except KeyError:
        raise ValidationError(f"unknown Conway operator '{op}', expected one of {', '.join(CONWAY_OPS)}")
    result = builder(complex)
    logger.debug(f"{op}: V={complex.V} E={complex.E} F={complex.F} -> V={result.V} E={result.E} F={result.F}")
    return result


def parse_seed_name(name: str, n: Optional[int] = None) -> Tuple[str, Optional[int]]:
    """Accept 'prism', 'prism(6)' or 'prism' with n given separately."""
    match = re.fullmatch(r'\s*([a-z]+)\s*(?:\(\s*(\d+)\s*\))?\s*', name.lower())
    if not match or match.group(1) not in SEED_NAMES:
        raise UnknownSeed(f"unknown seed '{name}', expected one of {', '.join(SEED_NAMES)}", seed=name)
    base = match.group(1)
    if match.group(2) is not None:
        n = int(match.group(2))
    if base in ('prism', 'polygon'):
        if n is None or n < 3:
            raise UnknownSeed(f"seed '{base}' needs n >= 3", seed=name)
    else:
        n = None
    return base, n


def seed_coordinates(name: str, n: Optional[int] = None) -> np.ndarray:
    """Reference coordinates fixing the canonical vertex order of each seed."""
    base, n = parse_seed_name(name, n)
    if base == 'tetrahedron':
        return np.array([(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)], dtype=float)
    if base == 'cube':
        return np.array(list(itertools.product((-1, 1), repeat=3)), dtype=float)
    if base == 'octahedron':
        return np.array([(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)], dtype=float)
    if base == 'icosahedron':
        # cyclic permutations of (0, +-1, +-phi)
        points = [np.roll((0.0, s1, s2 * PHI), k)
                  for k in range(3) for s1 in (-1, 1) for s2 in (-1, 1)]
        return np.array(points)
    if base == 'dodecahedron':
        cube = list(itertools.product((-1.0, 1.0), repeat=3))
        # cyclic permutations of (0, +-1/phi, +-phi)
        rest = [np.roll((0.0, s1 / PHI, s2 * PHI), k)
                for k in range(3) for s1 in (-1, 1) for s2 in (-1, 1)]
        return np.vstack([np.array(cube), np.array(rest)])
    if base == 'prism':
        # square side faces: half-height sin(pi/n) on the unit circle
        angles = 2 * np.pi * np.arange(n) / n
        h = np.sin(np.pi / n)
        ring = np.column_stack([np.cos(angles), np.sin(angles)])
        bottom = np.column_stack([ring, np.full(n, -h)])
        top = np.column_stack([ring, np.full(n, h)])
        return np.vstack([bottom, top])
    angles = 2 * np.pi * np.arange(n) / n
    return np.column_stack([np.cos(angles), np.sin(angles)])


def hull_faces(points: np.ndarray, tol: float = 1e-8) -> List[Face]:
    """
    Faces of the convex hull of points in convex position.

    Coplanar hull triangles are merged into one polygon ordered
    counterclockwise around the outward normal.
    """
    hull = ConvexHull(points)
    groups: List[Tuple[np.ndarray, set]] = []
    for simplex, equation in zip(hull.simplices, hull.equations):
        for plane, members in groups:
            if np.allclose(plane, equation, atol=tol):
                members.update(simplex.tolist())
                break
        else:
            groups.append((equation, set(simplex.tolist())))

    faces = []
    for plane, members in groups:
        normal = plane[:3]
        idx = sorted(members)
        pts = points[idx]
        center = pts.mean(axis=0)
        e1 = pts[0] - center
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(normal, e1)
        rel = pts - center
        angles = np.arctan2(rel @ e2, rel @ e1)
        cycle = [idx[i] for i in np.argsort(angles)]
        start = cycle.index(min(cycle))
        faces.append(tuple(cycle[start:] + cycle[:start]))
    return sorted(faces)


def generate_seed(name: str, n: Optional[int] = None) -> Union[PolyhedralComplex, Graph]:
    """
    Canonical complex for a named seed.

    Args:
        name: tetrahedron, cube, octahedron, dodecahedron, icosahedron,
            prism / prism(n), polygon / polygon(n)
        n: size for prism and polygon

    Returns:
        PolyhedralComplex, or the cycle Graph for polygons
    """
    base, n = parse_seed_name(name, n)
    if base == 'polygon':
        return cycle_graph(n)
    points = seed_coordinates(base, n)
    complex = build_complex(len(points), hull_faces(points))
    logger.debug(f"seed {base}{f'({n})' if n else ''}: V={complex.V} E={complex.E} F={complex.F}")
    return complex


def _embedding_face_count(embedding: nx.PlanarEmbedding) -> int:
    visited = set()
    count = 0
    for v, w in embedding.edges():
        if (v, w) not in visited:
            embedding.traverse_face(v, w, mark_half_edges=visited)
            count += 1
    return count


def validate_steinitz(graph: Graph, complex: Optional[PolyhedralComplex] = None) -> SteinitzReport:
    """
    Check the Steinitz preconditions: planar and 3-connected.

    euler_ok uses the complex when one is given, otherwise the face count
    of a planar embedding.
    """
    g = graph.to_networkx()
    is_planar, embedding = nx.check_planarity(g)

    n = graph.vertex_count
    is_3_connected = n >= 4 and nx.is_connected(g)
    if is_3_connected:
        nodes = list(g.nodes)
        for a, b in itertools.combinations(nodes, 2):
            rest = [v for v in nodes if v != a and v != b]
            if not nx.is_connected(g.subgraph(rest)):
                is_3_connected = False
                break

    if complex is not None:
        euler_ok = complex.euler_characteristic == 2
    elif is_planar:
        euler_ok = n - g.number_of_edges() + _embedding_face_count(embedding) == 2
    else:
        euler_ok = False

    report = SteinitzReport(is_planar=bool(is_planar), is_3_connected=is_3_connected, euler_ok=euler_ok)
    logger.debug(f"Steinitz check on {n} vertices: {report}")
    return report
