"""
Iterated Buffon transformation on vertex coordinates.

Each step replaces every vertex by the centroid of the midpoints of its
incident edges (coords <- B coords). The iteration recentres on the
degree-weighted centroid and rescales to unit Frobenius norm so that the
shape converges to a fixed point instead of shrinking to a point.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import orthogonal_procrustes, subspace_angles

from errors import NoConvergence, ValidationError
from poly_core import Graph
from settings_manager import settings_manager
from spectral import BuffonOperator, buffon_matrix

logger = logging.getLogger(__name__)

METRICS = ('procrustes', 'grassmann')


@dataclass(frozen=True, eq=False)
class CoordinateState:
    coords: np.ndarray
    step: int = 0
    shape_change: float = float('nan')
    collapse_dim: Optional[int] = None
    history: Tuple[float, ...] = field(default=())


@dataclass(frozen=True, eq=False)
class IterationResult:
    limit: CoordinateState
    collapse_dim: int
    steps_used: int


@dataclass(frozen=True, eq=False)
class PolygonSpectrum:
    """Eigenvalues 1/2 + 1/2 e^(2 pi i j / n) of the polygon midpoint map, indexed by j."""
    n: int
    eigenvalues: np.ndarray
    modulus_order: np.ndarray
    subdominant: Tuple[int, int]


def degree_weighted_centroid(coords: np.ndarray, degrees: np.ndarray) -> np.ndarray:
    weights = np.asarray(degrees, dtype=float)
    return weights @ np.asarray(coords, dtype=float) / weights.sum()


def normalize(coords: np.ndarray, degrees: np.ndarray) -> np.ndarray:
    """Recentre on the degree-weighted centroid and scale to unit Frobenius norm."""
    centered = np.asarray(coords, dtype=float) - degree_weighted_centroid(coords, degrees)
    norm = np.linalg.norm(centered)
    if norm == 0.0:
        raise ValidationError("coordinates collapsed onto their centroid")
    return centered / norm


def collapse_dimension(coords: np.ndarray, tol: Optional[float] = None) -> int:
    """Numerical rank by singular values relative to the largest one."""
    tol = settings_manager.get_dynamics_config()['collapse_tol'] if tol is None else tol
    singular = np.linalg.svd(np.asarray(coords, dtype=float), compute_uv=False)
    if singular[0] == 0.0:
        return 0
    return int(np.sum(singular > tol * singular[0]))


def buffon_step(state: CoordinateState, graph: Graph,
                operator: Optional[BuffonOperator] = None) -> CoordinateState:
    """
    One Buffon step, without renormalization.

    Args:
        state: Current coordinates (n x d)
        graph: Graph the coordinates live on
        operator: Prebuilt operator to reuse across steps

    Returns:
        New state with coords = B coords
    """
    coords = np.asarray(state.coords, dtype=float)
    if coords.shape[0] != graph.vertex_count:
        raise ValidationError(f"{coords.shape[0]} points for a graph on {graph.vertex_count} vertices")
    operator = buffon_matrix(graph) if operator is None else operator
    return replace(state, coords=operator.matrix @ coords, step=state.step + 1)


def shape_change(previous: np.ndarray, current: np.ndarray, metric: str = 'procrustes') -> float:
    """Distance between two normalized shapes, modulo rotation or as subspaces."""
    if metric == 'procrustes':
        rotation, _ = orthogonal_procrustes(current, previous)
        return float(np.linalg.norm(current @ rotation - previous))
    if metric == 'grassmann':
        return float(np.max(subspace_angles(previous, current)))
    raise ValidationError(f"unknown shape metric '{metric}', expected one of {', '.join(METRICS)}")


def iterate_to_limit(coords: np.ndarray, graph: Graph,
                     max_steps: Optional[int] = None, shape_tol: Optional[float] = None,
                     operator: Optional[BuffonOperator] = None, metric: str = 'procrustes',
                     collapse_tol: Optional[float] = None) -> IterationResult:
    """
    Iterate step / recentre / rescale until the shape stops changing.

    Args:
        coords: Initial points (n x d)
        graph: Graph carrying the points
        max_steps: Step limit
        shape_tol: Stop when the aligned shape change falls below this
        operator: Alternative operator (e.g. the polygon midpoint map)
        metric: 'procrustes' or 'grassmann'

    Returns:
        IterationResult with the limiting state and its collapse dimension
    """
    config = settings_manager.get_dynamics_config()
    max_steps = config['max_steps'] if max_steps is None else int(max_steps)
    shape_tol = config['shape_tol'] if shape_tol is None else shape_tol
    collapse_tol = config['collapse_tol'] if collapse_tol is None else collapse_tol
    if shape_tol <= 0:
        raise ValidationError("shape_tol must be positive")

    operator = buffon_matrix(graph) if operator is None else operator
    weights = operator.degrees
    current = normalize(coords, weights)
    state = CoordinateState(current)
    history = []

    for step in range(1, max_steps + 1):
        stepped = buffon_step(state, graph, operator)
        nxt = normalize(stepped.coords, weights)
        change = shape_change(state.coords, nxt, metric)
        history.append(change)
        state = CoordinateState(nxt, step, change)
        if change < shape_tol:
            dim = collapse_dimension(nxt, collapse_tol)
            logger.info(f"Converged after {step} steps (change {change:.3e}), collapse dimension {dim}")
            limit = CoordinateState(nxt, step, change, dim, tuple(history))
            return IterationResult(limit, dim, step)

    tail = history[-2:]
    raise NoConvergence(f"no convergence within {max_steps} steps, last shape changes {tail}",
                        steps=max_steps, last_change=history[-1] if history else float('nan'),
                        recent_changes=tail)


def perturb(coords: np.ndarray, eps: Optional[float] = None, rng_seed: Optional[int] = None) -> np.ndarray:
    """Seeded Gaussian perturbation scaled by the RMS radius of the points."""
    config = settings_manager.get_dynamics_config()
    eps = config['perturb_eps'] if eps is None else eps
    rng_seed = config['rng_seed'] if rng_seed is None else rng_seed
    coords = np.asarray(coords, dtype=float)
    rng = np.random.default_rng(rng_seed)
    centered = coords - coords.mean(axis=0)
    rms = np.sqrt(np.mean(np.sum(centered ** 2, axis=1)))
    return coords + eps * rms * rng.standard_normal(coords.shape)


def random_polygon(n: int, rng_seed: int = 0) -> np.ndarray:
    """Seeded random planar n-gon."""
    if n < 3:
        raise ValidationError(f"polygon needs n >= 3, got {n}")
    return np.random.default_rng(rng_seed).standard_normal((n, 2))


def polygon_midpoint_matrix(n: int) -> np.ndarray:
    """Vertex -> midpoint of the edge to the next vertex."""
    matrix = 0.5 * np.eye(n)
    matrix[np.arange(n), (np.arange(n) + 1) % n] += 0.5
    return matrix


def polygon_midpoint_operator(n: int) -> BuffonOperator:
    return BuffonOperator(n, polygon_midpoint_matrix(n), np.ones(n, dtype=int), 'midpoint')


def polygon_spectrum(n: int) -> PolygonSpectrum:
    """Closed-form spectrum of the polygon midpoint map."""
    if n < 3:
        raise ValidationError(f"polygon needs n >= 3, got {n}")
    j = np.arange(n)
    eigenvalues = 0.5 + 0.5 * np.exp(2j * np.pi * j / n)
    modulus_order = np.argsort(-np.abs(eigenvalues), kind='stable')
    return PolygonSpectrum(n, eigenvalues, modulus_order, (1, n - 1))


def polygram_eigenspace(n: int, k: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Real basis (cos, sin) of the eigenspace of 1/2 + 1/2 e^(+-2 pi i k / n).

    k = 1 gives affine regular polygons, larger k the star polygons.
    """
    if n < 3 or not 1 <= k <= (n - 1) // 2:
        raise ValidationError(f"polygram index k={k} outside 1..{(n - 1) // 2} for n={n}")
    angles = 2 * np.pi * k * np.arange(n) / n
    return np.cos(angles), np.sin(angles)


def affine_regular_residual(coords: np.ndarray, k: int = 1) -> float:
    """Relative residual of r_(i-1) + r_(i+1) = 2 cos(2 pi k / n) r_i."""
    coords = np.asarray(coords, dtype=float)
    centered = coords - coords.mean(axis=0)
    n = len(centered)
    lhs = np.roll(centered, 1, axis=0) + np.roll(centered, -1, axis=0)
    rhs = 2 * np.cos(2 * np.pi * k / n) * centered
    scale = np.linalg.norm(centered, axis=1).max()
    return float(np.linalg.norm(lhs - rhs, axis=1).max() / scale)
