"""
Buffon operator, grouped spectra and Colin de Verdiere matrices.

The edge Buffon operator is B = 1/2 (I + D^-1 A). It is conjugate to the
symmetric matrix 1/2 (I + D^-1/2 A D^-1/2), so spectra are computed on that
conjugate and eigenvectors are mapped back by D^-1/2. The resulting bases
are orthonormal in the degree-weighted inner product <u, v> = sum d_i u_i v_i.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Optional, Tuple

import numpy as np
import scipy.linalg

from errors import (DimensionError, NotConvex, NotSimplicial, OriginOutside, FaceNotPlanar,
                    ToleranceAmbiguity, ValidationError)
from poly_core import Graph, PolyhedralComplex, skeleton
from settings_manager import settings_manager

if TYPE_CHECKING:
    from realization import Realization

logger = logging.getLogger(__name__)

EDGE_VARIANT = 'edge'
FACE_VARIANT = 'face'


@dataclass(frozen=True, eq=False)
class BuffonOperator:
    """Dense Buffon operator with its degree data."""
    size: int
    matrix: np.ndarray
    degrees: np.ndarray
    variant: str = EDGE_VARIANT
    complex: Optional[PolyhedralComplex] = None

    def symmetric_conjugate(self) -> np.ndarray:
        """D^1/2 M D^-1/2, symmetrized against rounding."""
        root = np.sqrt(self.degrees.astype(float))
        conj = (root[:, None] * self.matrix) / root[None, :]
        return (conj + conj.T) / 2


@dataclass(frozen=True, eq=False)
class EigenGroup:
    """Eigenvalue with its multiplicity and a basis of right eigenvectors (n x m)."""
    index: int
    eigenvalue: float
    multiplicity: int
    basis: np.ndarray


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    groups: Tuple[EigenGroup, ...]
    tolerance_used: float
    solver: str = 'lapack'
    variant: str = EDGE_VARIANT

    @property
    def eigenvalues(self) -> List[float]:
        return [g.eigenvalue for g in self.groups]

    @property
    def multiplicities(self) -> List[int]:
        return [g.multiplicity for g in self.groups]

    def all_eigenvalues(self) -> np.ndarray:
        """Eigenvalues repeated by multiplicity, descending."""
        return np.repeat(self.eigenvalues, self.multiplicities)


@dataclass(frozen=True, eq=False)
class CdVMatrix:
    """Colin de Verdiere matrix from the polar construction."""
    size: int
    matrix: np.ndarray
    kernel_basis: np.ndarray
    negative_count: int
    corank: int
    eigenvalues: np.ndarray
    identity_residual: float
    polar_vertices: np.ndarray


def buffon_matrix(graph: Graph, complex: Optional[PolyhedralComplex] = None) -> BuffonOperator:
    """
    Edge Buffon operator B = 1/2 (I + D^-1 A).

    Args:
        graph: Connected graph
        complex: Originating complex, needed later by face_buffon_matrix

    Returns:
        Row-stochastic BuffonOperator
    """
    degrees = graph.degrees.astype(int)
    matrix = graph.adjacency.astype(float) / (2.0 * degrees[:, None])
    np.fill_diagonal(matrix, 0.5)
    return BuffonOperator(graph.vertex_count, matrix, degrees, EDGE_VARIANT, complex)


def operator_for(complex: PolyhedralComplex) -> BuffonOperator:
    """Edge operator on the skeleton of a complex, with the complex attached."""
    return buffon_matrix(skeleton(complex), complex)


def face_buffon_matrix(operator: BuffonOperator) -> BuffonOperator:
    """Face Buffon operator B_F = 4/3 B - 1/3 I on a simplicial complex."""
    if operator.variant != EDGE_VARIANT:
        raise ValidationError("face operator is derived from the edge operator")
    if operator.complex is None:
        raise NotSimplicial("originating complex unknown; build the operator with operator_for")
    sizes = sorted({len(f) for f in operator.complex.faces})
    if sizes != [3]:
        raise NotSimplicial(f"face sizes {sizes} found, face operator needs triangles", sizes=sizes)
    matrix = (4.0 / 3.0) * operator.matrix - (1.0 / 3.0) * np.eye(operator.size)
    return BuffonOperator(operator.size, matrix, operator.degrees, FACE_VARIANT, operator.complex)


def face_centroid_operator(complex: PolyhedralComplex) -> BuffonOperator:
    """
    Vertex -> centroid of the centroids of its incident faces.

    Works for any face sizes; on triangulations it equals face_buffon_matrix.
    """
    n = complex.vertex_count
    matrix = np.zeros((n, n))
    face_counts = np.zeros(n, dtype=int)
    for face in complex.faces:
        share = 1.0 / len(face)
        for i in face:
            face_counts[i] += 1
            for j in face:
                matrix[i, j] += share
    matrix /= face_counts[:, None]
    # on a closed surface faces per vertex equal the vertex degree
    return BuffonOperator(n, matrix, face_counts, FACE_VARIANT, complex)


def jacobi_eigh(symmetric: np.ndarray, tol: Optional[float] = None,
                max_sweeps: int = 100) -> Tuple[np.ndarray, np.ndarray]:
    """
    Cyclic Jacobi rotations for a dense symmetric matrix.

    Stops when the off-diagonal Frobenius norm drops below tol * n.

    Returns:
        (eigenvalues, eigenvectors as columns), unsorted
    """
    a = np.array(symmetric, dtype=float)
    n = a.shape[0]
    tol = settings_manager.get_spectral_config()['jacobi_tol'] if tol is None else tol
    v = np.eye(n)
    threshold = tol * n

    for sweep in range(max_sweeps):
        off = np.sqrt(2.0) * np.linalg.norm(np.triu(a, k=1))
        if off < threshold:
            logger.debug(f"Jacobi converged after {sweep} sweeps (off={off:.3e})")
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c

                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q

                vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
    else:
        logger.warning(f"Jacobi did not reach tolerance after {max_sweeps} sweeps")

    return np.diag(a).copy(), v


def spectrum(operator: BuffonOperator, group_tol: Optional[float] = None,
             solver: Optional[str] = None) -> SpectralDecomposition:
    """
    Grouped spectrum of a Buffon operator.

    Args:
        operator: Edge or face operator
        group_tol: Eigenvalues closer than this merge into one group
        solver: 'lapack' (scipy dense symmetric solver) or 'jacobi'

    Returns:
        SpectralDecomposition with groups in descending eigenvalue order
    """
    config = settings_manager.get_spectral_config()
    group_tol = config['group_tol'] if group_tol is None else group_tol
    solver = config['solver'] if solver is None else solver
    if group_tol <= 0:
        raise ValidationError("group_tol must be positive")

    conj = operator.symmetric_conjugate()
    if solver == 'lapack':
        values, vectors = scipy.linalg.eigh(conj)
    elif solver == 'jacobi':
        values, vectors = jacobi_eigh(conj, config['jacobi_tol'])
    else:
        raise ValidationError(f"unknown eigensolver '{solver}'")

    order = np.argsort(-values, kind='stable')
    values = values[order]
    vectors = vectors[:, order] / np.sqrt(operator.degrees.astype(float))[:, None]

    # chain eigenvalues closer than group_tol
    bounds = [0]
    ambiguity = config['ambiguity_factor'] * group_tol
    for k in range(1, len(values)):
        gap = values[k - 1] - values[k]
        if gap > group_tol:
            if gap < ambiguity:
                raise ToleranceAmbiguity(
                    f"eigenvalues {values[k - 1]:.15g} and {values[k]:.15g} are {gap:.3e} apart, "
                    f"inside the ambiguity window ({group_tol:.1e}, {ambiguity:.1e}]",
                    gap=gap, group_tol=group_tol)
            bounds.append(k)
    bounds.append(len(values))

    groups = []
    for gi, (lo, hi) in enumerate(zip(bounds[:-1], bounds[1:])):
        basis = vectors[:, lo:hi].copy()
        eigenvalue = float(np.mean(values[lo:hi]))
        if gi == 0 and hi - lo == 1 and basis.sum() < 0:
            basis = -basis
        groups.append(EigenGroup(gi, eigenvalue, hi - lo, basis))

    residual = max(np.abs(operator.matrix @ g.basis - g.eigenvalue * g.basis).max() for g in groups)
    if residual > 1e-9 * operator.size:
        logger.warning(f"Eigen residual {residual:.3e} exceeds 1e-9 * n")

    logger.info(f"Spectrum of {operator.variant} operator on {operator.size} vertices: "
                f"{len(groups)} groups, multiplicities {[g.multiplicity for g in groups]}")
    return SpectralDecomposition(tuple(groups), group_tol, solver, operator.variant)


def subdominant_space(decomp: SpectralDecomposition) -> EigenGroup:
    """The group of the largest eigenvalue below 1."""
    if len(decomp.groups) < 2:
        raise ValidationError("decomposition has a single eigenvalue group")
    return decomp.groups[1]


def _negative_inertia(d: np.ndarray) -> int:
    """Negative eigenvalues of the block diagonal factor of an LDL^T decomposition."""
    n = d.shape[0]
    count = 0
    i = 0
    while i < n:
        if i + 1 < n and d[i + 1, i] != 0.0:
            det = d[i, i] * d[i + 1, i + 1] - d[i, i + 1] * d[i + 1, i]
            if det < 0:
                count += 1
            elif d[i, i] + d[i + 1, i + 1] < 0:
                count += 2
            i += 2
        else:
            count += int(d[i, i] < 0)
            i += 1
    return count


def bisection_eigenvalues(operator: BuffonOperator, tol: float = 1e-12) -> np.ndarray:
    """
    Eigenvalues by interval refinement on inertia counts.

    Counts eigenvalues below x from the LDL^T factorization of S - xI
    (Sylvester's law of inertia) and bisects each eigenvalue separately.
    Independent of any eigensolver; meant for small graphs.
    """
    conj = operator.symmetric_conjugate()
    n = conj.shape[0]
    radius = np.sum(np.abs(conj), axis=1) - np.abs(np.diag(conj))
    lower = float(np.min(np.diag(conj) - radius)) - 1e-9
    upper = float(np.max(np.diag(conj) + radius)) + 1e-9
    identity = np.eye(n)

    def count_below(x: float) -> int:
        _, d, _ = scipy.linalg.ldl(conj - x * identity)
        return _negative_inertia(d)

    found = []
    for k in range(n):
        lo, hi = lower, upper
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if count_below(mid) >= k + 1:
                hi = mid
            else:
                lo = mid
        found.append(0.5 * (lo + hi))
    return np.array(sorted(found, reverse=True))


def _face_normals(coords: np.ndarray, complex: PolyhedralComplex) -> Tuple[np.ndarray, np.ndarray]:
    """Newell normals (unnormalized) and centroids per face."""
    normals = np.zeros((complex.F, 3))
    centroids = np.zeros((complex.F, 3))
    for fi, face in enumerate(complex.faces):
        pts = coords[list(face)]
        nxt = np.roll(pts, -1, axis=0)
        normals[fi] = np.cross(pts, nxt).sum(axis=0) / 2
        centroids[fi] = pts.mean(axis=0)
    return normals, centroids


def polar_vertices(coords: np.ndarray, complex: PolyhedralComplex, polar_tol: Optional[float] = None) -> np.ndarray:
    """
    Vertices w_f of the polar polyhedron: (w_f, u_i) = 1 for every vertex of face f.

    Raises:
        OriginOutside: origin on or outside some face plane
        FaceNotPlanar: a face has no solution within polar_tol
    """
    polar_tol = settings_manager.get_spectral_config()['polar_tol'] if polar_tol is None else polar_tol
    normals, centroids = _face_normals(coords, complex)
    unit = normals / np.linalg.norm(normals, axis=1)[:, None]
    offsets = np.einsum('ij,ij->i', unit, centroids)
    scale = np.abs(coords).max()
    if not (np.all(offsets > polar_tol * scale) or np.all(offsets < -polar_tol * scale)):
        raise OriginOutside("origin is not strictly inside every face plane",
                            min_offset=float(np.min(np.abs(offsets))))

    polar = np.zeros((complex.F, 3))
    for fi, face in enumerate(complex.faces):
        pts = coords[list(face)]
        w, *_ = np.linalg.lstsq(pts, np.ones(len(face)), rcond=None)
        misfit = np.abs(pts @ w - 1.0).max()
        if misfit > polar_tol:
            raise FaceNotPlanar(f"face {fi} polar vertex misfit {misfit:.3e}", face=fi, misfit=misfit)
        polar[fi] = w
    return polar


def cdv_matrix(realization: 'Realization', complex: Optional[PolyhedralComplex] = None,
               polar_tol: Optional[float] = None, rank_tol: Optional[float] = None) -> CdVMatrix:
    """
    Colin de Verdiere matrix of a convex realization with the origin inside.

    Off-diagonal entries come from w_f - w_g = M_ij (u_i x u_j) for the two
    faces f, g on edge ij; diagonal entries from sum_j M_ij u_j = -M_ii u_i.
    """
    # Import here to avoid circular imports
    from realization import check_convex

    complex = realization.complex if complex is None else complex
    coords = np.asarray(realization.coords, dtype=float)
    if coords.shape[1] != 3:
        raise DimensionError(f"Colin de Verdiere construction needs 3D coordinates, got {coords.shape[1]}D")
    config = settings_manager.get_spectral_config()
    rank_tol = config['cdv_rank_tol'] if rank_tol is None else rank_tol

    if not check_convex(realization):
        raise NotConvex("realization is not convex")
    polar = polar_vertices(coords, complex, polar_tol)

    n = complex.vertex_count
    matrix = np.zeros((n, n))
    half = complex.half_edges
    for i, j in complex.edges:
        f, g = half[(i, j)], half[(j, i)]
        cross = np.cross(coords[i], coords[j])
        value = np.dot(polar[g] - polar[f], cross) / np.dot(cross, cross)
        matrix[i, j] = matrix[j, i] = value

    off = np.array([matrix[i, j] for i, j in complex.edges])
    if np.all(off > 0):
        # mirrored realization, faces run clockwise
        matrix = -matrix
        off = -off
    elif not np.all(off < 0):
        raise NotConvex("edge entries of mixed sign", positive=int(np.sum(off > 0)))

    moment = matrix @ coords
    diagonal = -np.einsum('ij,ij->i', moment, coords) / np.einsum('ij,ij->i', coords, coords)
    matrix[np.diag_indices(n)] = diagonal

    identity_residual = float(np.abs(matrix @ coords).max() / (np.abs(matrix).max() * np.abs(coords).max()))
    if identity_residual > 1e-8:
        logger.warning(f"CdV identity residual {identity_residual:.3e} above 1e-8")

    values, vectors = scipy.linalg.eigh(matrix)
    cutoff = rank_tol * np.abs(values).max()
    kernel = np.abs(values) <= cutoff
    negative_count = int(np.sum(values < -cutoff))
    corank = int(np.sum(kernel))
    if corank != 3 or negative_count != 1:
        logger.warning(f"CdV matrix has corank {corank} and {negative_count} negative eigenvalues")

    return CdVMatrix(n, matrix, vectors[:, kernel], negative_count, corank, values,
                     identity_residual, polar)
