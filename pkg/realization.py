"""
Geometric realizations and shape verdicts.

A realization places vertex i at row i of an n x d coordinate matrix. For
eigenspace realizations the columns are a basis of the eigenspace, so the
result is defined up to a linear map; every verdict here is either affine
invariant or evaluated on the D-orthonormal basis returned by the spectrum.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist

from errors import DegenerateFace, DimensionError, SingularFit, ValidationError
from poly_core import PolyhedralComplex, skeleton
from settings_manager import settings_manager
from spectral import EigenGroup

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Realization:
    """Coordinates for the vertices of a complex, tagged with their origin."""
    coords: np.ndarray
    complex: Optional[PolyhedralComplex]
    source: str = 'file'
    eigenvalue: Optional[float] = None
    group_index: Optional[int] = None

    @property
    def dim(self) -> int:
        return int(np.asarray(self.coords).shape[1])

    @property
    def vertex_count(self) -> int:
        return int(np.asarray(self.coords).shape[0])


@dataclass(frozen=True, eq=False)
class StarShapeResult:
    star_shaped: bool
    offending_faces: Tuple[int, ...]
    volumes: np.ndarray
    covering_degree: int = 1

    def __bool__(self) -> bool:
        return self.star_shaped


@dataclass(frozen=True, eq=False)
class PlanarityResult:
    max_deviation: float
    deviations: np.ndarray
    flags: np.ndarray

    @property
    def all_planar(self) -> bool:
        return not bool(np.any(self.flags))


@dataclass(frozen=True, eq=False)
class AffineMatch:
    residual: float
    linear: np.ndarray
    offset: np.ndarray


@dataclass(frozen=True, eq=False)
class PyramidRatio:
    ratios: Dict[int, float]
    mean: float
    spread: float


@dataclass(frozen=True, eq=False)
class ChordRatios:
    ratios: np.ndarray
    max_misalignment: float


@dataclass(frozen=True)
class ShapeReport:
    star_shaped: bool
    convex: bool
    faces_planar: bool
    max_face_deviation: float
    affine_match_residual: Optional[float]
    collapse_dim: int

    def to_dict(self) -> Dict:
        return {
            'star_shaped': self.star_shaped,
            'convex': self.convex,
            'faces_planar': self.faces_planar,
            'max_face_deviation': repr(float(self.max_face_deviation)),
            'affine_match_residual': None if self.affine_match_residual is None
            else repr(float(self.affine_match_residual)),
            'collapse_dim': self.collapse_dim,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'ShapeReport':
        residual = data.get('affine_match_residual')
        return cls(
            star_shaped=bool(data['star_shaped']),
            convex=bool(data['convex']),
            faces_planar=bool(data['faces_planar']),
            max_face_deviation=float(data['max_face_deviation']),
            affine_match_residual=None if residual is None else float(residual),
            collapse_dim=int(data['collapse_dim']),
        )


def realize(group: EigenGroup, complex: PolyhedralComplex) -> Realization:
    """
    Null space style realization: vertex i -> row i of the group basis.

    No scaling search is done; the output is defined up to a linear map.
    """
    basis = np.asarray(group.basis, dtype=float)
    if basis.shape[0] != complex.vertex_count:
        raise ValidationError(f"basis has {basis.shape[0]} entries for {complex.vertex_count} vertices")
    if group.multiplicity < 1:
        raise ValidationError("empty eigen group")
    return Realization(basis.copy(), complex, f"group:{group.index}", group.eigenvalue, group.index)


def _require_3d(realization: Realization):
    if realization.dim != 3:
        raise DimensionError(f"geometric verdicts need 3D coordinates, got {realization.dim}D",
                             dim=realization.dim)


def _degree_centroid(realization: Realization) -> np.ndarray:
    degrees = skeleton(realization.complex).degrees.astype(float)
    return degrees @ realization.coords / degrees.sum()


def _fan_triangles(complex: PolyhedralComplex) -> Tuple[np.ndarray, np.ndarray]:
    """Fan triangulation of every face, with the owning face index per triangle."""
    triangles, owners = [], []
    for fi, face in enumerate(complex.faces):
        for k in range(1, len(face) - 1):
            triangles.append((face[0], face[k], face[k + 1]))
            owners.append(fi)
    return np.array(triangles), np.array(owners)


def check_star_shaped(realization: Realization, degenerate_tol: Optional[float] = None) -> StarShapeResult:
    """
    Uniform-sign test of origin/face signed volumes.

    The origin is the degree-weighted centroid. Non-triangular faces are
    fan-triangulated. Witness: faces whose volume sign disagrees with the
    majority (or vanishes). A uniform sign only makes the radial projection
    a covering; star polyhedra such as the great icosahedron wind several
    times around the centre, so the covering degree must also be 1.
    """
    _require_3d(realization)
    tol = settings_manager.get_geometry_config()['degenerate_area_tol'] if degenerate_tol is None else degenerate_tol
    points = np.asarray(realization.coords, dtype=float) - _degree_centroid(realization)
    triangles, owners = _fan_triangles(realization.complex)

    a, b, c = (points[triangles[:, k]] for k in range(3))
    areas = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
    scale = np.linalg.norm(points, axis=1).max()
    degenerate = np.flatnonzero(areas <= tol * scale ** 2)
    if degenerate.size:
        face = int(owners[degenerate[0]])
        raise DegenerateFace(f"face {face} has a zero-area triangle", face=face)

    triple = np.einsum('ij,ij->i', a, np.cross(b, c))
    volumes = triple / 6.0
    majority = 1.0 if volumes.sum() >= 0 else -1.0
    bad = np.flatnonzero(volumes * majority <= 0)
    offending = tuple(sorted({int(owners[t]) for t in bad}))

    # signed solid angles sum to 4 pi times the winding number around the centre
    la, lb, lc = (np.linalg.norm(p, axis=1) for p in (a, b, c))
    denominator = (la * lb * lc + np.einsum('ij,ij->i', a, b) * lc
                   + np.einsum('ij,ij->i', a, c) * lb + np.einsum('ij,ij->i', b, c) * la)
    solid = 2.0 * np.arctan2(triple, denominator)
    degree = int(round(abs(solid.sum()) / (4.0 * np.pi)))
    return StarShapeResult(not offending and degree == 1, offending, volumes, degree)


def check_convex(realization: Realization, tol: Optional[float] = None) -> bool:
    """
    Every vertex on the convex hull and every face plane supporting.

    Face planes must keep all vertices on one side (tolerance relative to
    the coordinate scale) and all faces must agree on that side.
    """
    _require_3d(realization)
    tol = settings_manager.get_geometry_config()['convex_tol'] if tol is None else tol
    points = np.asarray(realization.coords, dtype=float)
    n = len(points)
    scale = np.abs(points - points.mean(axis=0)).max()
    try:
        hull = ConvexHull(points)
    except QhullError as e:
        logger.debug(f"Convex hull failed: {e}")
        return False
    if len(hull.vertices) != n:
        return False

    sides = set()
    for face in realization.complex.faces:
        pts = points[list(face)]
        normal = np.cross(pts, np.roll(pts, -1, axis=0)).sum(axis=0)
        length = np.linalg.norm(normal)
        if length <= tol * scale ** 2:
            return False
        offsets = (points - pts.mean(axis=0)) @ (normal / length)
        if np.abs(offsets[list(face)]).max() > tol * scale:
            return False
        if offsets.max() <= tol * scale:
            sides.add(-1)
        elif offsets.min() >= -tol * scale:
            sides.add(1)
        else:
            return False
    return len(sides) == 1


def face_planarity(realization: Realization, complex: Optional[PolyhedralComplex] = None,
                   tol: Optional[float] = None) -> PlanarityResult:
    """
    Best-fit plane deviation per face, normalized by face diameter.

    Args:
        realization: 3D coordinates
        complex: Faces to test (defaults to the realization's complex)
        tol: Flag threshold

    Returns:
        PlanarityResult with per-face deviations and flags
    """
    _require_3d(realization)
    complex = realization.complex if complex is None else complex
    tol = settings_manager.get_geometry_config()['planarity_tol'] if tol is None else tol
    points = np.asarray(realization.coords, dtype=float)

    deviations = np.zeros(complex.F)
    for fi, face in enumerate(complex.faces):
        if len(face) == 3:
            continue
        pts = points[list(face)]
        centered = pts - pts.mean(axis=0)
        _, _, vt = np.linalg.svd(centered)
        distance = np.abs(centered @ vt[-1]).max()
        deviations[fi] = distance / pdist(pts).max()

    flags = deviations > tol
    return PlanarityResult(float(deviations.max()), deviations, flags)


def affine_match(realization: Realization, reference: Realization,
                 correspondence: Optional[Sequence[int]] = None) -> AffineMatch:
    """
    Least-squares affine fit A r_i + b ~ s_(c(i)).

    Args:
        realization: Points r_i
        reference: Target points s
        correspondence: Index into reference per vertex (identity by default)

    Returns:
        AffineMatch; residual is relative to the spread of the reference
    """
    source = np.asarray(realization.coords, dtype=float)
    target = np.asarray(reference.coords, dtype=float)
    if len(source) != len(target):
        raise ValidationError(f"vertex counts differ: {len(source)} vs {len(target)}")
    if correspondence is not None:
        target = target[np.asarray(correspondence, dtype=int)]

    design = np.column_stack([source, np.ones(len(source))])
    singular = np.linalg.svd(design, compute_uv=False)
    if singular[-1] <= 1e-10 * singular[0]:
        raise SingularFit("realization is rank deficient, affine fit is not unique",
                          rank=int(np.sum(singular > 1e-10 * singular[0])))
    solution, *_ = np.linalg.lstsq(design, target, rcond=None)
    spread = np.linalg.norm(target - target.mean(axis=0))
    residual = float(np.linalg.norm(design @ solution - target) / spread)
    return AffineMatch(residual, solution[:-1].T, solution[-1])


def pyramid_height_ratio(realization: Realization, complex: Optional[PolyhedralComplex] = None) -> PyramidRatio:
    """
    Height of each kis pyramid over its base plane divided by the apex distance from the centre.
    """
    _require_3d(realization)
    complex = realization.complex if complex is None else complex
    if not complex.apex_bases:
        raise ValidationError("complex carries no kis apex provenance")
    points = np.asarray(realization.coords, dtype=float)
    centre = _degree_centroid(Realization(points, complex))

    ratios = {}
    for apex, base in sorted(complex.apex_bases.items()):
        pts = points[list(base)]
        anchor = pts.mean(axis=0)
        _, _, vt = np.linalg.svd(pts - anchor)
        height = abs(np.dot(points[apex] - anchor, vt[-1]))
        ratios[apex] = float(height / np.linalg.norm(points[apex] - centre))

    values = np.array(list(ratios.values()))
    return PyramidRatio(ratios, float(values.mean()), float(values.max() - values.min()))


def octagon_chord_ratios(realization: Realization, complex: Optional[PolyhedralComplex] = None,
                         face_size: int = 8) -> ChordRatios:
    """
    For edges shared by two face_size-gons: r with o_(k+2) - o_(k-1) = r (o_(k+1) - o_k).

    Affine invariant. Regular octagons give 1 + sqrt(2).
    """
    complex = realization.complex if complex is None else complex
    points = np.asarray(realization.coords, dtype=float)
    half = complex.half_edges
    ratios, misalignment = [], 0.0
    for face in complex.faces:
        k = len(face)
        if k != face_size:
            continue
        for i in range(k):
            a, b = face[i], face[(i + 1) % k]
            if len(complex.faces[half[(b, a)]]) != face_size:
                continue
            edge = points[b] - points[a]
            chord = points[face[(i + 2) % k]] - points[face[i - 1]]
            r = np.dot(chord, edge) / np.dot(edge, edge)
            misalignment = max(misalignment, np.linalg.norm(chord - r * edge) / np.linalg.norm(chord))
            ratios.append(r)
    if not ratios:
        raise ValidationError(f"no edge is shared by two {face_size}-gons")
    return ChordRatios(np.array(ratios), float(misalignment))


def collapse_dim_of(realization: Realization, tol: Optional[float] = None) -> int:
    # Import here to avoid circular imports
    from dynamics import collapse_dimension
    points = np.asarray(realization.coords, dtype=float)
    return collapse_dimension(points - points.mean(axis=0), tol)


def shape_report(realization: Realization, collapse_dim: Optional[int] = None,
                 reference: Optional[Realization] = None,
                 correspondence: Optional[Sequence[int]] = None) -> ShapeReport:
    """
    Collect every geometric verdict for a 3D realization.

    Args:
        realization: 3D realization carrying its complex
        collapse_dim: Dimension of the iteration limit (coordinate rank by default)
        reference: Target coordinates for the affine comparison
        correspondence: Vertex correspondence to the reference

    Returns:
        ShapeReport with star shape, convexity, face planarity and affine residual
    """
    _require_3d(realization)
    collapse_dim = collapse_dim_of(realization) if collapse_dim is None else collapse_dim
    planarity = face_planarity(realization)
    convex = check_convex(realization)
    try:
        star = check_star_shaped(realization).star_shaped
    except DegenerateFace as e:
        logger.warning(f"Star-shape test skipped: {e.message}")
        star = False
    residual = None
    if reference is not None:
        residual = affine_match(realization, reference, correspondence).residual
    return ShapeReport(star, convex, planarity.all_planar, planarity.max_deviation, residual, collapse_dim)
