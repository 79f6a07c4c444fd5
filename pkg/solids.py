"""
Reference geometry: seed coordinates carried through geometric Conway
operators, regular Archimedean truncations, Catalan kis-solids and random
simplicial polyhedra for property testing.

Closed forms used:
    Platonic seeds     coordinate tables in poly_core.seed_coordinates
                       (golden ratio forms for the icosahedron/dodecahedron)
    Archimedean        truncation fraction t = 1 / (2 + 2 cos(pi / p)) on a
                       regular solid with p-gonal faces
    Catalan kis(P)     polar of the Archimedean truncation of the polar dual
                       of P (face planes at unit distance from the origin)
"""

import logging
from typing import Iterable, Optional, Tuple

import numpy as np
from scipy.spatial import ConvexHull

from errors import FaceNotPlanar, OriginOutside, ValidationError
from poly_core import (PolyhedralComplex, build_complex, conway_apply, generate_seed, parse_seed_name,
                       seed_coordinates)
from realization import Realization
from settings_manager import settings_manager
from spectral import polar_vertices

logger = logging.getLogger(__name__)

DEFAULT_TRUNCATION = 1.0 / 3.0


def _face_frame(points: np.ndarray, face) -> Tuple[np.ndarray, np.ndarray, float]:
    pts = points[list(face)]
    centroid = pts.mean(axis=0)
    normal = np.cross(pts, np.roll(pts, -1, axis=0)).sum(axis=0)
    normal /= np.linalg.norm(normal)
    radius = float(np.linalg.norm(pts - centroid, axis=1).mean())
    return centroid, normal, radius


def dual_geometry(complex: PolyhedralComplex, coords: np.ndarray) -> np.ndarray:
    """Polar reciprocal face points, or reciprocated face centroids when the polar is undefined."""
    centered = coords - coords.mean(axis=0)
    try:
        return polar_vertices(centered, complex)
    except (OriginOutside, FaceNotPlanar) as e:
        logger.warning(f"Polar dual unavailable ({e.message}), using centroid reciprocals")
        centroids = np.array([centered[list(face)].mean(axis=0) for face in complex.faces])
        return centroids / np.sum(centroids ** 2, axis=1)[:, None]


def conway_geometry(op: str, complex: PolyhedralComplex, coords: np.ndarray,
                    truncation: float = DEFAULT_TRUNCATION,
                    kis_lift: Optional[float] = None) -> Tuple[PolyhedralComplex, np.ndarray]:
    """
    Apply a Conway operator to a complex and its coordinates together.

    Args:
        op: dual, kis, truncate or ambo
        complex: Input combinatorics
        coords: Input vertex positions (n x 3)
        truncation: Fraction of each edge cut off at both ends
        kis_lift: Pyramid height as a fraction of the mean face radius

    Returns:
        (new complex, new coordinates) in the operator's vertex order
    """
    coords = np.asarray(coords, dtype=float)
    result = conway_apply(op, complex)

    if op == 'dual':
        points = dual_geometry(complex, coords)
    elif op == 'kis':
        lift = settings_manager.get_geometry_config()['kis_lift'] if kis_lift is None else kis_lift
        apexes = []
        for face in complex.faces:
            centroid, normal, radius = _face_frame(coords, face)
            apexes.append(centroid + lift * radius * normal)
        points = np.vstack([coords, np.array(apexes)])
    elif op == 'truncate':
        if not 0.0 < truncation < 0.5:
            raise ValidationError(f"truncation fraction {truncation} outside (0, 1/2)")
        directed = sorted(complex.half_edges)
        points = np.array([(1 - truncation) * coords[u] + truncation * coords[v] for u, v in directed])
    else:
        points = np.array([(coords[u] + coords[v]) / 2 for u, v in complex.edges])

    return result, points


def reference_realization(name: str, n: Optional[int] = None, conway: Iterable[str] = ()) -> Realization:
    """Seed coordinates carried through the listed operators, left to right."""
    base, n = parse_seed_name(name, n)
    if base == 'polygon':
        raise ValidationError("polygons are planar cycles; use dynamics for them")
    complex = generate_seed(base, n)
    coords = seed_coordinates(base, n)
    ops = [op for op in conway if op]
    for op in ops:
        complex, coords = conway_geometry(op, complex, coords)
    tag = base if n is None else f"{base}({n})"
    if ops:
        tag = f"{tag}+{','.join(ops)}"
    return Realization(coords, complex, f"reference:{tag}")


def archimedean_truncation(realization: Realization) -> Realization:
    """Truncate a regular solid so that all new edges have equal length."""
    sizes = {len(face) for face in realization.complex.faces}
    if len(sizes) != 1:
        raise ValidationError(f"regular truncation needs one face size, found {sorted(sizes)}")
    p = sizes.pop()
    t = 1.0 / (2.0 + 2.0 * np.cos(np.pi / p))
    complex, coords = conway_geometry('truncate', realization.complex, realization.coords, truncation=t)
    return Realization(coords, complex, f"{realization.source}+archimedean")


def catalan_kis_realization(seed: str) -> Realization:
    """
    Catalan realization of kis(seed) for a Platonic seed.

    Polar of the Archimedean truncation of the polar dual: the truncated
    copies of the dual faces land on the seed vertices, the vertex figures
    on the kis apexes, matching the kis vertex order.
    """
    base, _ = parse_seed_name(seed)
    complex = generate_seed(base)
    coords = seed_coordinates(base)
    dual_complex, dual_coords = conway_geometry('dual', complex, coords)
    truncated = archimedean_truncation(Realization(dual_coords, dual_complex))
    points = polar_vertices(truncated.coords, truncated.complex)
    return Realization(points, conway_apply('kis', complex), f"catalan:kis({base})")


def random_simplicial_complex(n: int, rng_seed: int = 0) -> Tuple[PolyhedralComplex, np.ndarray]:
    """Convex hull of n seeded random points on the unit sphere."""
    if n < 4:
        raise ValidationError(f"need at least 4 points, got {n}")
    rng = np.random.default_rng(rng_seed)
    points = rng.standard_normal((n, 3))
    points /= np.linalg.norm(points, axis=1)[:, None]
    hull = ConvexHull(points)
    faces = []
    for simplex, equation in zip(hull.simplices, hull.equations):
        a, b, c = simplex.tolist()
        if np.dot(np.cross(points[b] - points[a], points[c] - points[a]), equation[:3]) < 0:
            b, c = c, b
        faces.append((a, b, c))
    return build_complex(n, faces), points


# solids of the worked examples: seed and Conway operators, left to right
NAMED_SOLIDS = {
    'tetrahedron': ('tetrahedron', ()),
    'cube': ('cube', ()),
    'octahedron': ('octahedron', ()),
    'dodecahedron': ('dodecahedron', ()),
    'icosahedron': ('icosahedron', ()),
    'triakis_tetrahedron': ('tetrahedron', ('kis',)),
    'truncated_cube': ('cube', ('truncate',)),
    'rhombic_dodecahedron': ('cube', ('ambo', 'dual')),
    'pentakis_dodecahedron': ('dodecahedron', ('kis',)),
}


def named_solid(name: str) -> Realization:
    """Reference realization of a solid from NAMED_SOLIDS."""
    try:
        seed, ops = NAMED_SOLIDS[name]
    except KeyError:
        raise ValidationError(f"unknown solid '{name}', expected one of {', '.join(NAMED_SOLIDS)}")
    return reference_realization(seed, conway=ops)
