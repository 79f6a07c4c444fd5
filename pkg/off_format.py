"""
ASCII OFF reader and writer.

Writer rules: header line "OFF", counts line "V F E", one vertex per line
with 17 significant digits, faces as "k i1 ... ik", LF line endings and a
trailing newline. The reader skips blank lines and '#' comments; an edge
count of 0 is accepted, any other value must equal the derived edge count.
"""

import logging
from typing import List, Optional, Tuple

import numpy as np

from errors import DimensionError, ParseError
from poly_core import PolyhedralComplex, build_complex
from realization import Realization
from utils import read_text, save_output

logger = logging.getLogger(__name__)


def _content_lines(text: str) -> List[Tuple[int, List[str]]]:
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split('#', 1)[0].strip()
        if stripped:
            lines.append((number, stripped.split()))
    return lines


def _ints(tokens: List[str], line_number: int) -> List[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise ParseError(f"expected integers, got {' '.join(tokens)!r}", line_number)


def parse_off(text: str, source: str = 'file') -> Tuple[Realization, PolyhedralComplex]:
    """
    Parse OFF text into a validated complex with attached coordinates.

    Raises:
        ParseError: malformed text or counts that disagree with the body
        ValidationError: the faces do not form a closed oriented surface
    """
    lines = _content_lines(text)
    if not lines:
        raise ParseError("empty input", 1)

    number, tokens = lines[0]
    if tokens[0] != 'OFF':
        raise ParseError(f"expected header 'OFF', got {tokens[0]!r}", number)
    rest = lines[1:]
    if len(tokens) > 1:
        counts_tokens, counts_line = tokens[1:], number
    else:
        if not rest:
            raise ParseError("missing counts line", number + 1)
        counts_line, counts_tokens = rest[0]
        rest = rest[1:]

    counts = _ints(counts_tokens, counts_line)
    if len(counts) != 3:
        raise ParseError(f"counts line needs 'V F E', got {len(counts)} values", counts_line)
    vertex_count, face_count, edge_count = counts
    if vertex_count <= 0 or face_count <= 0 or edge_count < 0:
        raise ParseError("counts must be positive", counts_line)
    if len(rest) != vertex_count + face_count:
        last = rest[-1][0] if rest else counts_line
        raise ParseError(f"header announces {vertex_count} vertices and {face_count} faces, "
                         f"found {len(rest)} data lines", last)

    coords = np.zeros((vertex_count, 3))
    for i in range(vertex_count):
        number, tokens = rest[i]
        if len(tokens) != 3:
            raise ParseError(f"vertex line needs 3 coordinates, got {len(tokens)}", number)
        try:
            coords[i] = [float(t) for t in tokens]
        except ValueError:
            raise ParseError(f"bad coordinate in {' '.join(tokens)!r}", number)

    faces = []
    for number, tokens in rest[vertex_count:]:
        values = _ints(tokens, number)
        k = values[0]
        if k < 1 or len(values) != k + 1:
            raise ParseError(f"face line announces {k} vertices, has {len(values) - 1}", number)
        for v in values[1:]:
            if not 0 <= v < vertex_count:
                raise ParseError(f"vertex index {v} out of range", number)
        faces.append(values[1:])

    complex = build_complex(vertex_count, faces)
    if edge_count and edge_count != complex.E:
        raise ParseError(f"header announces {edge_count} edges, faces define {complex.E}", counts_line)

    logger.debug(f"Parsed OFF: V={complex.V} E={complex.E} F={complex.F}")
    return Realization(coords, complex, source), complex


def write_off(realization: Realization, complex: Optional[PolyhedralComplex] = None) -> str:
    """Deterministic OFF text for a 3D realization."""
    complex = realization.complex if complex is None else complex
    coords = np.asarray(realization.coords, dtype=float)
    if coords.ndim != 2 or coords.shape[1] != 3:
        raise DimensionError(f"OFF stores 3D coordinates, got {coords.shape[-1]}D; export via the JSON report",
                             dim=int(coords.shape[-1]))
    if coords.shape[0] != complex.vertex_count:
        raise DimensionError(f"{coords.shape[0]} points for {complex.vertex_count} vertices")

    out = ['OFF', f"{complex.V} {complex.F} {complex.E}"]
    for point in coords:
        out.append(' '.join(format(float(x), '.17g') for x in point))
    for face in complex.faces:
        out.append(' '.join(str(v) for v in (len(face),) + tuple(face)))
    return '\n'.join(out) + '\n'


def read_off(path: str) -> Tuple[Realization, PolyhedralComplex]:
    return parse_off(read_text(path), source=f"file:{path}")


def save_off(realization: Realization, path: str, complex: Optional[PolyhedralComplex] = None) -> str:
    return save_output(write_off(realization, complex), path)
