"""
Tests for the Buffon operator, grouped spectra, the inertia oracle and
Colin de Verdiere matrices.
"""

import warnings
from math import sqrt

import numpy as np
import pytest
from scipy.linalg import subspace_angles

from errors import FaceNotPlanar, NotConvex, NotSimplicial, OriginOutside, ToleranceAmbiguity
from poly_core import Graph, cycle_graph, generate_seed, relabel, skeleton
from realization import Realization, realize
from solids import named_solid, random_simplicial_complex, reference_realization
from spectral import (bisection_eigenvalues, buffon_matrix, cdv_matrix, face_buffon_matrix, face_centroid_operator,
                      jacobi_eigh, operator_for, polar_vertices, spectrum, subdominant_space)

S5 = sqrt(5)

GOLDEN_SPECTRA = {
    'icosahedron': ([1, (5 + S5) / 10, 2 / 5, (5 - S5) / 10], [1, 3, 5, 3]),
    'dodecahedron': ([1, (3 + S5) / 6, 2 / 3, 1 / 2, 1 / 6, (3 - S5) / 6], [1, 3, 5, 4, 4, 3]),
    'triakis_tetrahedron': ([1, 7 / 12, 1 / 3, 1 / 4], [1, 3, 3, 1]),
    'rhombic_dodecahedron': ([1, (3 + sqrt(3)) / 6, 1 / 2, (3 - sqrt(3)) / 6, 0], [1, 3, 6, 3, 1]),
    'truncated_cube': ([1, (7 + sqrt(17)) / 12, 5 / 6, 2 / 3, 1 / 2, 1 / 3, (7 - sqrt(17)) / 12, 1 / 6],
                       [1, 3, 3, 1, 5, 3, 3, 5]),
    'pentakis_dodecahedron': (
        [1,
         (60 + 5 * S5 + sqrt(725 + 240 * S5)) / 120,
         (65 + sqrt(385)) / 120,
         (12 - S5 + sqrt(29 - 48 / S5)) / 24,
         1 / 2,
         (65 - sqrt(385)) / 120,
         1 / 3,
         (60 + 5 * S5 - sqrt(725 + 240 * S5)) / 120,
         (12 - S5 - sqrt(29 - 48 / S5)) / 24,
         1 / 4],
        [1, 3, 5, 3, 4, 5, 4, 3, 3, 1]),
}

SIMPLICIAL_SOLIDS = ['tetrahedron', 'octahedron', 'icosahedron', 'triakis_tetrahedron', 'pentakis_dodecahedron']


def random_cases(count=100):
    for seed in range(count):
        yield random_simplicial_complex(5 + seed % 16, rng_seed=1000 + seed)


def test_k4_matrix():
    operator = operator_for(generate_seed('tetrahedron'))
    expected = np.full((4, 4), 1 / 6)
    np.fill_diagonal(expected, 0.5)
    np.testing.assert_allclose(operator.matrix, expected, atol=1e-15)


def test_cycle_is_circulant():
    matrix = buffon_matrix(cycle_graph(6)).matrix
    for i in range(6):
        assert matrix[i, i] == 0.5
        assert matrix[i, (i + 1) % 6] == 0.25
        assert matrix[i, (i - 1) % 6] == 0.25
        assert np.count_nonzero(matrix[i]) == 3


def test_triakis_rows():
    operator = operator_for(named_solid('triakis_tetrahedron').complex)
    for i in range(operator.size):
        off = operator.matrix[i][operator.matrix[i] > 0]
        off = off[off != 0.5]
        expected = 1 / 12 if i < 4 else 1 / 6
        np.testing.assert_allclose(off, expected, atol=1e-15)
        assert len(off) == operator.degrees[i]


def test_face_operator_k4():
    face = face_buffon_matrix(operator_for(generate_seed('tetrahedron')))
    assert face.variant == 'face'
    np.testing.assert_allclose(np.diag(face.matrix), 1 / 3, atol=1e-15)
    off = face.matrix[~np.eye(4, dtype=bool)]
    np.testing.assert_allclose(off, 2 / 9, atol=1e-15)


def test_face_operator_needs_triangles():
    with pytest.raises(NotSimplicial):
        face_buffon_matrix(operator_for(generate_seed('cube')))


def test_face_operator_needs_complex():
    with pytest.raises(NotSimplicial):
        face_buffon_matrix(buffon_matrix(skeleton(generate_seed('tetrahedron'))))


@pytest.mark.parametrize('name', SIMPLICIAL_SOLIDS)
def test_face_centroid_operator_matches_affine_relation(name):
    complex = named_solid(name).complex
    direct = face_centroid_operator(complex)
    derived = face_buffon_matrix(operator_for(complex))
    np.testing.assert_allclose(direct.matrix, derived.matrix, atol=1e-14)


@pytest.mark.parametrize('name', SIMPLICIAL_SOLIDS)
def test_face_spectrum_map(name):
    operator = operator_for(named_solid(name).complex)
    edge = spectrum(operator)
    face = spectrum(face_buffon_matrix(operator))
    np.testing.assert_allclose(face.all_eigenvalues(), (4 * edge.all_eigenvalues() - 1) / 3, atol=1e-12)
    assert face.groups[0].eigenvalue == pytest.approx(1.0, abs=1e-12)
    assert face.multiplicities == edge.multiplicities


@pytest.mark.parametrize('name', sorted(GOLDEN_SPECTRA))
def test_golden_spectra(name):
    values, multiplicities = GOLDEN_SPECTRA[name]
    decomp = spectrum(operator_for(named_solid(name).complex))
    assert decomp.multiplicities == multiplicities
    np.testing.assert_allclose(decomp.eigenvalues, values, atol=1e-9, rtol=0)


@pytest.mark.parametrize('name', ['icosahedron', 'pentakis_dodecahedron', 'truncated_cube'])
def test_jacobi_agrees_with_lapack(name):
    operator = operator_for(named_solid(name).complex)
    lapack = spectrum(operator, solver='lapack')
    jacobi = spectrum(operator, solver='jacobi')
    assert jacobi.multiplicities == lapack.multiplicities
    np.testing.assert_allclose(jacobi.eigenvalues, lapack.eigenvalues, atol=1e-11)
    for ours, reference in zip(jacobi.groups, lapack.groups):
        assert np.max(subspace_angles(ours.basis, reference.basis)) < 1e-8


@pytest.mark.parametrize('name', ['icosahedron', 'pentakis_dodecahedron', 'truncated_cube'])
def test_jacobi_diagonalizes_to_tolerance(name):
    symmetric = operator_for(named_solid(name).complex).symmetric_conjugate()
    n = symmetric.shape[0]
    _, vectors = jacobi_eigh(symmetric, tol=1e-13)
    rotated = vectors.T @ symmetric @ vectors
    off = np.linalg.norm(rotated - np.diag(np.diag(rotated)))
    assert off < 1e-13 * n
    np.testing.assert_allclose(vectors.T @ vectors, np.eye(n), atol=1e-12)


def test_jacobi_on_random_hulls_stays_finite():
    for seed in range(5):
        complex, _ = random_simplicial_complex(30, rng_seed=seed)
        symmetric = operator_for(complex).symmetric_conjugate()
        with warnings.catch_warnings():
            warnings.simplefilter('error', RuntimeWarning)
            values, vectors = jacobi_eigh(symmetric)
        assert np.all(np.isfinite(values))
        np.testing.assert_allclose(np.sort(values), np.linalg.eigvalsh(symmetric), atol=1e-10)


@pytest.mark.parametrize('name', sorted(GOLDEN_SPECTRA))
def test_decomposition_invariants(name):
    complex = named_solid(name).complex
    operator = operator_for(complex)
    decomp = spectrum(operator)
    degrees = operator.degrees.astype(float)

    assert sum(decomp.multiplicities) == operator.size
    top = decomp.groups[0]
    assert top.multiplicity == 1
    assert np.ptp(top.basis[:, 0]) < 1e-12
    for group in decomp.groups:
        residual = np.abs(operator.matrix @ group.basis - group.eigenvalue * group.basis).max()
        assert residual <= 1e-9 * operator.size
        gram = group.basis.T @ (degrees[:, None] * group.basis)
        np.testing.assert_allclose(gram, np.eye(group.multiplicity), atol=1e-10)
    for group in decomp.groups[1:]:
        weighted = degrees @ group.basis
        bound = 1e-9 * (degrees @ np.abs(group.basis))
        assert np.all(np.abs(weighted) <= bound)


def test_subdominant_icosahedron():
    sub = subdominant_space(spectrum(operator_for(generate_seed('icosahedron'))))
    assert sub.eigenvalue == pytest.approx((5 + S5) / 10, abs=1e-12)
    assert sub.multiplicity == 3
    assert sub.basis.shape == (12, 3)


@pytest.mark.parametrize('n', [5, 6, 7, 8])
def test_prism_subdominant_is_double(n):
    sub = subdominant_space(spectrum(operator_for(generate_seed('prism', n))))
    assert sub.multiplicity == 2
    assert sub.eigenvalue == pytest.approx(0.5 + (2 * np.cos(2 * np.pi / n) + 1) / 6, abs=1e-12)


def test_small_prisms():
    # triangular prism: simple subdominant 2/3; square prism is the cube
    sub3 = subdominant_space(spectrum(operator_for(generate_seed('prism', 3))))
    assert (sub3.multiplicity, sub3.eigenvalue) == (1, pytest.approx(2 / 3, abs=1e-12))
    sub4 = subdominant_space(spectrum(operator_for(generate_seed('prism', 4))))
    assert (sub4.multiplicity, sub4.eigenvalue) == (3, pytest.approx(2 / 3, abs=1e-12))


def test_random_simplicial_subdominant_is_simple():
    simple = 0
    for seed in range(10):
        complex, _ = random_simplicial_complex(14, rng_seed=seed)
        simple += subdominant_space(spectrum(operator_for(complex))).multiplicity == 1
    assert simple >= 9


def test_tolerance_ambiguity():
    operator = operator_for(generate_seed('icosahedron'))
    # all gaps lie between 0.1 and 10 x 0.1
    with pytest.raises(ToleranceAmbiguity):
        spectrum(operator, group_tol=0.1)


def test_property_row_stochastic():
    for complex, _ in random_cases():
        matrix = operator_for(complex).matrix
        np.testing.assert_allclose(matrix.sum(axis=1), 1.0, atol=1e-14)


def test_property_spectrum_range_and_degree_orthogonality():
    for complex, _ in random_cases():
        operator = operator_for(complex)
        decomp = spectrum(operator)
        values = decomp.all_eigenvalues()
        assert values.min() >= -1e-12 and values.max() <= 1 + 1e-12
        assert decomp.groups[0].multiplicity == 1
        degrees = operator.degrees.astype(float)
        for group in decomp.groups[1:]:
            assert np.all(np.abs(degrees @ group.basis) <= 1e-9 * (degrees @ np.abs(group.basis)))


def test_property_face_map():
    for complex, _ in random_cases():
        operator = operator_for(complex)
        edge = spectrum(operator).all_eigenvalues()
        face = spectrum(face_buffon_matrix(operator)).all_eigenvalues()
        np.testing.assert_allclose(face, (4 * edge - 1) / 3, atol=1e-12)


def test_property_relabel_invariance():
    for seed, (complex, _) in enumerate(random_cases()):
        perm = np.random.default_rng(seed).permutation(complex.V)
        original = spectrum(operator_for(complex)).all_eigenvalues()
        moved = spectrum(operator_for(relabel(complex, perm))).all_eigenvalues()
        np.testing.assert_allclose(moved, original, atol=1e-12)


@pytest.mark.parametrize('name', ['tetrahedron', 'octahedron', 'cube', 'triakis_tetrahedron', 'prism(3)'])
def test_bisection_oracle(name):
    if name.startswith('prism'):
        complex = generate_seed(name)
    else:
        complex = named_solid(name).complex
    operator = operator_for(complex)
    np.testing.assert_allclose(bisection_eigenvalues(operator), spectrum(operator).all_eigenvalues(), atol=1e-8)


@pytest.mark.parametrize('n', [5, 6, 7, 8])
def test_bisection_oracle_random(n):
    complex, _ = random_simplicial_complex(n, rng_seed=n)
    operator = operator_for(complex)
    np.testing.assert_allclose(bisection_eigenvalues(operator), spectrum(operator).all_eigenvalues(), atol=1e-8)


def test_bisection_oracle_path():
    operator = buffon_matrix(Graph.from_edges(5, [(i, i + 1) for i in range(4)]))
    np.testing.assert_allclose(bisection_eigenvalues(operator), spectrum(operator).all_eigenvalues(), atol=1e-8)


@pytest.mark.parametrize('name', ['tetrahedron', 'cube', 'octahedron', 'icosahedron', 'dodecahedron'])
def test_cdv_platonic(name):
    realization = reference_realization(name)
    cdv = cdv_matrix(realization)
    complex = realization.complex

    assert cdv.corank == 3
    assert cdv.negative_count == 1
    assert cdv.kernel_basis.shape == (complex.V, 3)
    assert cdv.identity_residual < 1e-8
    np.testing.assert_allclose(cdv.matrix, cdv.matrix.T, atol=1e-12)

    adjacency = skeleton(complex).adjacency
    off = ~np.eye(complex.V, dtype=bool)
    assert np.all(cdv.matrix[adjacency] < 0)
    assert np.all(cdv.matrix[off & ~adjacency] == 0)

    # coordinate functions lie in the kernel
    coords = realization.coords
    projected = cdv.kernel_basis @ (cdv.kernel_basis.T @ coords)
    np.testing.assert_allclose(projected, coords, atol=1e-8)


def test_cdv_tetrahedron_entries_equal():
    cdv = cdv_matrix(reference_realization('tetrahedron'))
    off = cdv.matrix[~np.eye(4, dtype=bool)]
    np.testing.assert_allclose(off, off[0], rtol=1e-12)


def test_cdv_cube_values():
    cdv = cdv_matrix(reference_realization('cube'))
    adjacency = skeleton(generate_seed('cube')).adjacency
    np.testing.assert_allclose(cdv.matrix[adjacency], -0.5, atol=1e-12)
    np.testing.assert_allclose(np.diag(cdv.matrix), 0.5, atol=1e-12)


def test_cdv_mirror_image():
    realization = reference_realization('icosahedron')
    mirrored = Realization(realization.coords * np.array([-1.0, 1.0, 1.0]), realization.complex)
    cdv = cdv_matrix(mirrored)
    assert (cdv.corank, cdv.negative_count) == (3, 1)


def test_cdv_rejects_nonconvex():
    complex = named_solid('triakis_tetrahedron').complex
    realization = realize(spectrum(operator_for(complex)).groups[1], complex)
    with pytest.raises(NotConvex):
        cdv_matrix(realization)


def test_cdv_rejects_origin_outside():
    realization = reference_realization('cube')
    shifted = Realization(realization.coords + 5.0, realization.complex)
    with pytest.raises(OriginOutside):
        cdv_matrix(shifted)


def test_polar_vertices_reject_bent_face():
    realization = reference_realization('cube')
    coords = realization.coords.copy()
    coords[7] *= 1.05
    with pytest.raises(FaceNotPlanar):
        polar_vertices(coords, realization.complex)


def test_polar_of_octahedron_is_cube():
    realization = reference_realization('octahedron')
    polar = polar_vertices(realization.coords, realization.complex)
    np.testing.assert_allclose(np.abs(polar), 1.0, atol=1e-12)
