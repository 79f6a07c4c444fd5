"""
Tests for the iterated Buffon transformation and the polygon midpoint map.
"""

from math import sqrt

import numpy as np
import pytest
from scipy.linalg import subspace_angles

from errors import NoConvergence, ValidationError
from poly_core import cycle_graph, generate_seed, seed_coordinates, skeleton
from dynamics import (CoordinateState, affine_regular_residual, buffon_step, collapse_dimension,
                      degree_weighted_centroid, iterate_to_limit, normalize, perturb, polygon_midpoint_matrix,
                      polygon_midpoint_operator, polygon_spectrum, polygram_eigenspace, random_polygon, shape_change)
from solids import named_solid
from spectral import operator_for, spectrum, subdominant_space

SUBDOMINANT_TRIPLE_SOLIDS = ['icosahedron', 'dodecahedron', 'triakis_tetrahedron', 'truncated_cube',
                             'rhombic_dodecahedron', 'pentakis_dodecahedron']


def test_square_step():
    square = np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]])
    state = buffon_step(CoordinateState(square), cycle_graph(4))
    np.testing.assert_allclose(state.coords, square / 2, atol=1e-15)
    assert state.step == 1


def test_step_rejects_wrong_shape():
    with pytest.raises(ValidationError):
        buffon_step(CoordinateState(np.zeros((5, 2))), cycle_graph(4))


def test_affine_equivariance():
    complex = generate_seed('icosahedron')
    graph = skeleton(complex)
    rng = np.random.default_rng(11)
    for _ in range(100):
        coords = rng.standard_normal((graph.vertex_count, 3))
        linear = rng.standard_normal((3, 3))
        offset = rng.standard_normal(3)
        direct = buffon_step(CoordinateState(coords @ linear + offset), graph).coords
        mapped = buffon_step(CoordinateState(coords), graph).coords @ linear + offset
        np.testing.assert_allclose(direct, mapped, atol=1e-12)


def test_degree_weighted_centroid_preserved():
    realization = named_solid('triakis_tetrahedron')
    graph = skeleton(realization.complex)
    coords = perturb(realization.coords, 0.3, rng_seed=4)
    stepped = buffon_step(CoordinateState(coords), graph).coords
    np.testing.assert_allclose(degree_weighted_centroid(stepped, graph.degrees),
                               degree_weighted_centroid(coords, graph.degrees), atol=1e-14)


def test_icosahedron_contracts_by_subdominant_eigenvalue():
    graph = skeleton(generate_seed('icosahedron'))
    coords = seed_coordinates('icosahedron')
    stepped = buffon_step(CoordinateState(coords), graph).coords
    np.testing.assert_allclose(stepped, (5 + sqrt(5)) / 10 * coords, atol=1e-12)


def test_normalize():
    degrees = np.array([1, 2, 3, 4])
    coords = np.random.default_rng(0).standard_normal((4, 3))
    result = normalize(coords, degrees)
    assert np.linalg.norm(result) == pytest.approx(1.0)
    np.testing.assert_allclose(degrees @ result, 0.0, atol=1e-14)


def test_normalize_rejects_collapsed_points():
    with pytest.raises(ValidationError):
        normalize(np.ones((4, 2)), np.ones(4))


def test_collapse_dimension():
    assert collapse_dimension(np.zeros((3, 3))) == 0
    planar = np.random.default_rng(1).standard_normal((10, 2)) @ np.array([[1.0, 0.0, 2.0], [0.0, 1.0, 0.0]])
    assert collapse_dimension(planar) == 2


def test_shape_change_ignores_rotation():
    coords = normalize(np.random.default_rng(2).standard_normal((6, 2)), np.ones(6))
    theta = 0.7
    rotation = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    assert shape_change(coords, coords @ rotation) < 1e-12
    assert shape_change(coords, coords @ rotation, metric='grassmann') < 1e-7


def test_unknown_metric():
    coords = np.eye(3)
    with pytest.raises(ValidationError):
        shape_change(coords, coords, metric='hausdorff')


@pytest.mark.parametrize('n', [3, 4, 5])
def test_polygon_spectrum_small(n):
    result = polygon_spectrum(n)
    expected = [0.5 + 0.5 * np.exp(2j * np.pi * j / n) for j in range(n)]
    np.testing.assert_allclose(result.eigenvalues, expected, atol=1e-15)
    assert result.modulus_order[0] == 0
    assert set(result.modulus_order[1:3].tolist()) == {1, n - 1}
    assert result.subdominant == (1, n - 1)


@pytest.mark.parametrize('n', range(3, 13))
def test_polygon_spectrum_matches_matrix(n):
    computed = np.linalg.eigvals(polygon_midpoint_matrix(n))
    for value in polygon_spectrum(n).eigenvalues:
        assert np.min(np.abs(computed - value)) < 1e-12


def test_polygon_spectrum_rejects_digon():
    with pytest.raises(ValidationError):
        polygon_spectrum(2)


@pytest.mark.parametrize('n,k', [(5, 1), (5, 2), (7, 3), (12, 5)])
def test_polygram_block_relations(n, k):
    c, s = polygram_eigenspace(n, k)
    matrix = polygon_midpoint_matrix(n)
    theta = 2 * np.pi * k / n
    np.testing.assert_allclose(matrix @ c, (0.5 + 0.5 * np.cos(theta)) * c - 0.5 * np.sin(theta) * s, atol=1e-14)
    np.testing.assert_allclose(matrix @ s, (0.5 + 0.5 * np.cos(theta)) * s + 0.5 * np.sin(theta) * c, atol=1e-14)
    assert affine_regular_residual(np.column_stack([c, s]), k) < 1e-12


@pytest.mark.parametrize('n,k', [(5, 0), (5, 3), (6, 3), (2, 1)])
def test_polygram_index_range(n, k):
    with pytest.raises(ValidationError):
        polygram_eigenspace(n, k)


def test_random_polygons_become_affine_regular():
    for n in range(3, 13):
        graph = cycle_graph(n)
        for seed in range(10):
            result = iterate_to_limit(random_polygon(n, rng_seed=seed), graph)
            assert result.collapse_dim == 2
            assert affine_regular_residual(result.limit.coords) < 1e-8


@pytest.mark.parametrize('n, expected', [(3, 1), (4, 3), (5, 2), (6, 2), (7, 2), (8, 2)])
def test_prism_collapse_dimension(n, expected):
    # triangle prism: simple subdominant value; n = 4 is the cube
    complex = generate_seed('prism', n)
    start = perturb(seed_coordinates('prism', n), 0.2, rng_seed=7)
    result = iterate_to_limit(start, skeleton(complex))
    assert result.collapse_dim == expected


@pytest.mark.parametrize('name', SUBDOMINANT_TRIPLE_SOLIDS)
def test_perturbed_solids_converge_to_subdominant_space(name):
    realization = named_solid(name)
    graph = skeleton(realization.complex)
    target = subdominant_space(spectrum(operator_for(realization.complex))).basis
    assert target.shape[1] == 3
    for seed in range(20):
        start = perturb(realization.coords, 0.1, rng_seed=seed)
        result = iterate_to_limit(start, graph)
        assert result.collapse_dim == 3
        assert np.max(subspace_angles(result.limit.coords, target)) < 1e-6


def test_iteration_history_is_recorded():
    result = iterate_to_limit(random_polygon(8, rng_seed=3), cycle_graph(8))
    assert len(result.limit.history) == result.steps_used
    assert result.limit.history[-1] == result.limit.shape_change


def test_no_convergence():
    with pytest.raises(NoConvergence) as excinfo:
        iterate_to_limit(random_polygon(12, rng_seed=0), cycle_graph(12), max_steps=2, shape_tol=1e-14)
    assert excinfo.value.exit_code == 4
    assert excinfo.value.details['steps'] == 2


def test_midpoint_iteration_grassmann():
    n = 6
    result = iterate_to_limit(random_polygon(n, rng_seed=5), cycle_graph(n),
                              operator=polygon_midpoint_operator(n), metric='grassmann')
    assert result.collapse_dim == 2
    assert affine_regular_residual(result.limit.coords) < 1e-6


def test_perturb_is_seeded():
    coords = seed_coordinates('cube')
    np.testing.assert_array_equal(perturb(coords, 0.1, rng_seed=1), perturb(coords, 0.1, rng_seed=1))
    assert not np.allclose(perturb(coords, 0.1, rng_seed=1), coords)
