"""
Run reports (JSON schema v1) and symbolic eigenvalue labels.

Floats are stored as repr() strings so reports round-trip bit for bit.
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import sqrt
from typing import Any, Dict, List, Optional

import numpy as np

from errors import ParseError
from realization import ShapeReport
from spectral import SpectralDecomposition

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

_S5 = sqrt(5)

# closed forms of the eigenvalues in the worked examples
KNOWN_CLOSED_FORMS = [
    ('(5+sqrt(5))/10', (5 + _S5) / 10),
    ('(5-sqrt(5))/10', (5 - _S5) / 10),
    ('(3+sqrt(5))/6', (3 + _S5) / 6),
    ('(3-sqrt(5))/6', (3 - _S5) / 6),
    ('(3+sqrt(3))/6', (3 + sqrt(3)) / 6),
    ('(3-sqrt(3))/6', (3 - sqrt(3)) / 6),
    ('(7+sqrt(17))/12', (7 + sqrt(17)) / 12),
    ('(7-sqrt(17))/12', (7 - sqrt(17)) / 12),
    ('(65+sqrt(385))/120', (65 + sqrt(385)) / 120),
    ('(65-sqrt(385))/120', (65 - sqrt(385)) / 120),
    ('(60+5*sqrt(5)+sqrt(725+240*sqrt(5)))/120', (60 + 5 * _S5 + sqrt(725 + 240 * _S5)) / 120),
    ('(60+5*sqrt(5)-sqrt(725+240*sqrt(5)))/120', (60 + 5 * _S5 - sqrt(725 + 240 * _S5)) / 120),
    ('(12-sqrt(5)+sqrt(29-48/sqrt(5)))/24', (12 - _S5 + sqrt(29 - 48 / _S5)) / 24),
    ('(12-sqrt(5)-sqrt(29-48/sqrt(5)))/24', (12 - _S5 - sqrt(29 - 48 / _S5)) / 24),
]


def exact_label(value: float, tol: float = 1e-9, max_denominator: int = 24) -> Optional[str]:
    """Symbolic form of an eigenvalue when it is a small rational or a known closed form."""
    fraction = Fraction(float(value)).limit_denominator(max_denominator)
    if abs(float(fraction) - value) <= tol:
        return str(fraction)
    for label, exact in KNOWN_CLOSED_FORMS:
        if abs(exact - value) <= tol:
            return label
    return None


def spectrum_entries(decomp: SpectralDecomposition) -> List[Dict[str, Any]]:
    return [
        {
            'eigenvalue': repr(float(g.eigenvalue)),
            'exact': exact_label(g.eigenvalue),
            'multiplicity': g.multiplicity,
        }
        for g in decomp.groups
    ]


def format_spectrum_table(decomp: SpectralDecomposition) -> str:
    """Plain text table: group, eigenvalue, multiplicity, exact form."""
    rows = ['group  eigenvalue            mult  exact']
    for g in decomp.groups:
        label = exact_label(g.eigenvalue) or '-'
        rows.append(f"{g.index + 1:>5}  {g.eigenvalue:<20.15f}  {g.multiplicity:>4}  {label}")
    return '\n'.join(rows) + '\n'


def encode_coordinates(coords: np.ndarray) -> List[List[str]]:
    return [[repr(float(x)) for x in row] for row in np.asarray(coords, dtype=float)]


def decode_coordinates(rows: List[List[str]]) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in rows])


@dataclass
class RunReport:
    command: str
    input: Dict[str, Any]
    steinitz: Optional[Dict[str, bool]] = None
    automorphism_order: Optional[int] = None
    spectrum: List[Dict[str, Any]] = field(default_factory=list)
    subdominant_dimension: Optional[int] = None
    shape: Optional[ShapeReport] = None
    iteration: Optional[Dict[str, Any]] = None
    coordinates: Optional[List[List[str]]] = None
    findings: Dict[str, Any] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['shape'] = self.shape.to_dict() if self.shape is not None else None
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=True) + '\n'

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunReport':
        version = data.get('schema_version')
        if version != SCHEMA_VERSION:
            raise ParseError(f"unsupported report schema_version {version!r}, expected {SCHEMA_VERSION}")
        try:
            shape = data.get('shape')
            return cls(
                command=data['command'],
                input=data['input'],
                steinitz=data.get('steinitz'),
                automorphism_order=data.get('automorphism_order'),
                spectrum=data.get('spectrum', []),
                subdominant_dimension=data.get('subdominant_dimension'),
                shape=ShapeReport.from_dict(shape) if shape is not None else None,
                iteration=data.get('iteration'),
                coordinates=data.get('coordinates'),
                findings=data.get('findings', {}),
                timings=data.get('timings', {}),
                schema_version=version,
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"malformed report: {e}")

    @classmethod
    def from_json(cls, text: str) -> 'RunReport':
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e.msg}", e.lineno)
        if not isinstance(data, dict):
            raise ParseError("report must be a JSON object")
        return cls.from_dict(data)
