"""
Tests for OFF input/output and JSON run reports.
"""

import json
from math import sqrt

import numpy as np
import pytest

from errors import DimensionError, NonManifoldEdge, ParseError
from off_format import parse_off, read_off, save_off, write_off
from poly_core import generate_seed
from realization import Realization, ShapeReport
from reports import SCHEMA_VERSION, RunReport, decode_coordinates, encode_coordinates, exact_label, spectrum_entries
from solids import named_solid, reference_realization
from spectral import operator_for, spectrum

TETRAHEDRON_OFF = """OFF
# regular tetrahedron
4 4 6
1 1 1
1 -1 -1
-1 1 -1
-1 -1 1

3 0 1 2
3 0 3 1
3 0 2 3
3 1 3 2
"""


def test_parse_tetrahedron():
    realization, complex = parse_off(TETRAHEDRON_OFF)
    assert (complex.V, complex.E, complex.F) == (4, 6, 4)
    assert realization.coords.shape == (4, 3)
    np.testing.assert_array_equal(realization.coords[1], [1, -1, -1])
    assert realization.complex is complex


def test_counts_on_header_line():
    text = TETRAHEDRON_OFF.replace("OFF\n# regular tetrahedron\n4 4 6\n", "OFF 4 4 6\n")
    _, complex = parse_off(text)
    assert complex.F == 4


def test_zero_edge_count_accepted():
    _, complex = parse_off(TETRAHEDRON_OFF.replace("4 4 6", "4 4 0"))
    assert complex.E == 6


def test_edge_count_mismatch():
    with pytest.raises(ParseError) as excinfo:
        parse_off(TETRAHEDRON_OFF.replace("4 4 6", "4 4 7"))
    assert excinfo.value.line_number == 3


def test_vertex_count_mismatch():
    with pytest.raises(ParseError):
        parse_off(TETRAHEDRON_OFF.replace("4 4 6", "5 4 6"))


def test_bad_header_reports_line():
    with pytest.raises(ParseError) as excinfo:
        parse_off("# comment\n\nCOFF\n4 4 6\n")
    assert excinfo.value.line_number == 3
    assert excinfo.value.message.startswith("line 3:")
    assert excinfo.value.exit_code == 3


def test_bad_coordinate():
    with pytest.raises(ParseError) as excinfo:
        parse_off(TETRAHEDRON_OFF.replace("1 -1 -1", "1 -1 x"))
    assert excinfo.value.line_number == 5


def test_face_index_out_of_range():
    with pytest.raises(ParseError):
        parse_off(TETRAHEDRON_OFF.replace("3 1 3 2", "3 1 3 9"))


def test_empty_input():
    with pytest.raises(ParseError):
        parse_off("\n# nothing\n")


def test_open_surface_is_a_validation_error():
    text = "OFF\n4 2 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 1 2\n3 0 2 3\n"
    with pytest.raises(NonManifoldEdge):
        parse_off(text)


def test_write_exact_text():
    realization, complex = parse_off(TETRAHEDRON_OFF)
    lines = write_off(realization).split('\n')
    assert lines[0] == 'OFF'
    assert lines[1] == '4 4 6'
    assert lines[2:6] == ['1 1 1', '1 -1 -1', '-1 1 -1', '-1 -1 1']
    assert lines[6:10] == ['3 ' + ' '.join(map(str, face)) for face in complex.faces]
    assert lines[10] == ''
    assert '\r' not in write_off(realization)


def test_write_keeps_full_precision():
    points = np.array([[1 / 3, sqrt(2), -0.1], [2.0, 0.0, 1e-17]])
    realization = reference_realization('icosahedron')
    text = write_off(Realization(np.vstack([points, realization.coords[2:]]), realization.complex))
    reread, _ = parse_off(text)
    np.testing.assert_array_equal(reread.coords[:2], points)


@pytest.mark.parametrize('name', ['pentakis_dodecahedron', 'truncated_cube', 'rhombic_dodecahedron'])
def test_round_trip(name, tmp_path):
    original = named_solid(name)
    path = str(tmp_path / f"{name}.off")
    save_off(original, path)
    realization, complex = read_off(path)
    assert complex.faces == original.complex.faces
    assert complex.edges == original.complex.edges
    np.testing.assert_array_equal(realization.coords, original.coords)
    assert realization.source == f"file:{path}"


def test_write_rejects_other_dimensions():
    complex = generate_seed('dodecahedron')
    group = spectrum(operator_for(complex)).groups[2]
    with pytest.raises(DimensionError):
        write_off(Realization(group.basis, complex))


@pytest.mark.parametrize('value,label', [
    (1.0, '1'),
    (0.5, '1/2'),
    (7 / 12, '7/12'),
    (0.0, '0'),
    ((5 + sqrt(5)) / 10, '(5+sqrt(5))/10'),
    ((65 + sqrt(385)) / 120, '(65+sqrt(385))/120'),
    (0.123456, None),
])
def test_exact_labels(value, label):
    assert exact_label(value) == label


def test_spectrum_entries():
    entries = spectrum_entries(spectrum(operator_for(generate_seed('icosahedron'))))
    assert [e['multiplicity'] for e in entries] == [1, 3, 5, 3]
    assert [e['exact'] for e in entries] == ['1', '(5+sqrt(5))/10', '2/5', '(5-sqrt(5))/10']
    assert float(entries[1]['eigenvalue']) == pytest.approx((5 + sqrt(5)) / 10, abs=1e-12)


def test_coordinates_encode_exactly():
    coords = np.array([[1 / 3, -sqrt(2), 1e-300]])
    np.testing.assert_array_equal(decode_coordinates(encode_coordinates(coords)), coords)


def test_report_round_trip():
    report = RunReport(
        command='realize',
        input={'seed': 'dodecahedron', 'conway': ['kis']},
        steinitz={'is_planar': True, 'is_3_connected': True, 'euler_ok': True},
        automorphism_order=120,
        spectrum=[{'eigenvalue': '1.0', 'exact': '1', 'multiplicity': 1}],
        subdominant_dimension=3,
        shape=ShapeReport(True, True, True, 0.0, None, 3),
        coordinates=encode_coordinates(np.eye(3)),
        findings={'pyramid_ratio': '0.2217'},
    )
    text = report.to_json()
    assert text.endswith('\n')
    assert json.loads(text)['schema_version'] == SCHEMA_VERSION
    again = RunReport.from_json(text)
    assert again == report
    assert again.to_json() == text


def test_report_rejects_other_versions():
    data = RunReport(command='spectrum', input={}).to_dict()
    data['schema_version'] = 2
    with pytest.raises(ParseError):
        RunReport.from_dict(data)


def test_report_rejects_malformed_json():
    with pytest.raises(ParseError):
        RunReport.from_json('{"schema_version": 1,')
    with pytest.raises(ParseError):
        RunReport.from_json('[1, 2]')
    with pytest.raises(ParseError):
        RunReport.from_json('{"schema_version": 1}')
