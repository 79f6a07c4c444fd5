"""
Command line entry point.

    python main.py generate dodecahedron --conway kis
    python main.py spectrum --seed icosahedron
    python main.py realize --seed dodecahedron --conway kis --group 2 --out p.off
    python main.py iterate mesh.off --steps 5000 --rng-seed 7 --perturb 0.1
    python main.py check --seed prism --n 6
    python main.py polygon 5 --polygram 2

Exit codes: 0 ok, 2 validation, 3 parse, 4 no convergence. Errors are
printed to stderr as a JSON object.
"""

import argparse
import json
import logging
import sys
import time
from contextlib import contextmanager
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import subspace_angles

from dynamics import (affine_regular_residual, iterate_to_limit, perturb, polygon_midpoint_operator,
                      polygon_spectrum, polygram_eigenspace, random_polygon)
from errors import BuffonError, DimensionError, ValidationError
from off_format import read_off, write_off
from poly_core import CONWAY_OPS, PolyhedralComplex, cycle_graph, parse_seed_name, skeleton, validate_steinitz
from realization import (Realization, octagon_chord_ratios, pyramid_height_ratio, realize,
                         shape_report)
from reports import RunReport, encode_coordinates, format_spectrum_table, spectrum_entries
from settings_manager import settings_manager
from solids import archimedean_truncation, catalan_kis_realization, reference_realization
from spectral import face_buffon_matrix, operator_for, spectrum
from symmetry import automorphisms, subdominant_multiplicity_check
from utils import format_duration, save_output

logger = logging.getLogger(__name__)


def setup_logging(verbose: bool = False):
    level_name = 'INFO' if verbose else str(settings_manager.get_setting('log_level', 'WARNING'))
    handlers = [logging.StreamHandler(sys.stderr)]
    log_file = settings_manager.get_setting('log_file')
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding='utf-8'))
    logging.basicConfig(
        level=getattr(logging, level_name.upper(), logging.WARNING),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


class Timer:
    """Stage timings, collected only when requested."""

    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.timings: Dict[str, float] = {}

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        yield
        if self.enabled:
            self.timings[name] = time.perf_counter() - start

    def summary(self) -> str:
        return ', '.join(f"{k} {format_duration(v)}" for k, v in self.timings.items())


def parse_conway(value: Optional[str]) -> List[str]:
    if not value:
        return []
    ops = [op.strip() for op in value.split(',') if op.strip()]
    for op in ops:
        if op not in CONWAY_OPS:
            raise ValidationError(f"unknown Conway operator '{op}', expected one of {', '.join(CONWAY_OPS)}")
    return ops


def load_input(args) -> Tuple[Realization, PolyhedralComplex, Dict]:
    """Realization and complex from an OFF path or a named seed."""
    if getattr(args, 'input', None):
        realization, complex = read_off(args.input)
        return realization, complex, {'kind': 'off', 'path': args.input}
    if not getattr(args, 'seed', None):
        raise ValidationError("give an OFF file or --seed NAME")
    ops = parse_conway(args.conway)
    base, n = parse_seed_name(args.seed, args.n)
    if getattr(args, 'catalan', False):
        if ops != ['kis']:
            raise ValidationError("--catalan builds kis(seed); use it with --conway kis")
        realization = catalan_kis_realization(base)
    else:
        realization = reference_realization(base, n, ops)
        if getattr(args, 'archimedean', False):
            realization = archimedean_truncation(realization)
            ops = ops + ['truncate']
    descriptor = {'kind': 'seed', 'seed': base, 'n': n, 'conway': ops,
                  'catalan': bool(getattr(args, 'catalan', False))}
    return realization, realization.complex, descriptor


def write_report(report: RunReport, path: Optional[str]):
    if path:
        save_output(report.to_json(), path)


def cmd_generate(args) -> int:
    realization, complex, _ = load_input(args)
    text = write_off(realization, complex)
    if args.out:
        save_output(text, args.out)
    else:
        sys.stdout.write(text)
    return 0


def cmd_spectrum(args) -> int:
    timer = Timer(args.timings)
    _, complex, descriptor = load_input(args)
    with timer.stage('spectrum'):
        operator = operator_for(complex)
        if args.variant == 'face':
            operator = face_buffon_matrix(operator)
        decomp = spectrum(operator, args.tol, args.solver)
    sys.stdout.write(format_spectrum_table(decomp))
    if args.timings:
        print(f"timings: {timer.summary()}")
    report = RunReport('spectrum', descriptor, spectrum=spectrum_entries(decomp),
                       subdominant_dimension=decomp.groups[1].multiplicity if len(decomp.groups) > 1 else None,
                       findings={'variant': args.variant, 'solver': decomp.solver},
                       timings=timer.timings)
    write_report(report, args.json)
    return 0


def _kis_and_octagon_findings(realization: Realization, complex: PolyhedralComplex) -> Dict:
    findings = {}
    if complex.apex_bases:
        ratio = pyramid_height_ratio(realization, complex)
        findings['pyramid_ratio'] = {'mean': repr(ratio.mean), 'spread': repr(ratio.spread)}
    if any(len(face) == 8 for face in complex.faces):
        try:
            chords = octagon_chord_ratios(realization, complex)
            findings['octagon_chord_ratio'] = {'mean': repr(float(chords.ratios.mean())),
                                               'max_misalignment': repr(chords.max_misalignment)}
        except ValidationError:
            pass
    return findings


def cmd_realize(args) -> int:
    timer = Timer(args.timings)
    _, complex, descriptor = load_input(args)
    with timer.stage('spectrum'):
        decomp = spectrum(operator_for(complex), args.tol, args.solver)
    if not 1 <= args.group <= len(decomp.groups):
        raise ValidationError(f"--group {args.group} outside 1..{len(decomp.groups)}")
    group = decomp.groups[args.group - 1]
    realization = realize(group, complex)

    print(f"group {args.group}: eigenvalue {group.eigenvalue!r} multiplicity {group.multiplicity}")
    report = RunReport('realize', descriptor, spectrum=spectrum_entries(decomp),
                       subdominant_dimension=decomp.groups[1].multiplicity,
                       coordinates=encode_coordinates(realization.coords),
                       findings={'group': args.group, 'eigenvalue': repr(group.eigenvalue)})

    if realization.dim == 3:
        with timer.stage('verdicts'):
            shape = shape_report(realization)
            report.shape = shape
            report.findings.update(_kis_and_octagon_findings(realization, complex))
        print(f"star_shaped {shape.star_shaped} convex {shape.convex} faces_planar {shape.faces_planar} "
              f"max_face_deviation {shape.max_face_deviation:.3e} collapse_dim {shape.collapse_dim}")
        for key in ('pyramid_ratio', 'octagon_chord_ratio'):
            if key in report.findings:
                print(f"{key} {report.findings[key]['mean']}")
        if args.out:
            save_output(write_off(realization, complex), args.out)
    else:
        logger.warning(f"{realization.dim}D eigenspace: coordinates exported to the report only")
        print(f"{realization.dim}D realization, no geometric verdicts")

    report.timings = timer.timings
    write_report(report, args.report)
    if args.timings:
        print(f"timings: {timer.summary()}")
    if args.out and realization.dim != 3:
        raise DimensionError(f"cannot write {realization.dim}D coordinates as OFF; see the JSON report",
                             dim=realization.dim)
    return 0


def cmd_iterate(args) -> int:
    timer = Timer(args.timings)
    realization, complex, descriptor = load_input(args)
    graph = skeleton(complex)
    start = perturb(realization.coords, args.perturb, args.rng_seed)
    with timer.stage('iterate'):
        result = iterate_to_limit(start, graph, args.steps, args.tol)
    limit = Realization(result.limit.coords, complex, 'iteration')

    decomp = spectrum(operator_for(complex))
    sub = decomp.groups[1]
    angle = float(np.max(subspace_angles(limit.coords, sub.basis))) if sub.multiplicity >= 3 else None
    print(f"steps_used {result.steps_used} collapse_dim {result.collapse_dim} "
          f"last_change {result.limit.shape_change:.3e}")
    if angle is not None:
        print(f"max principal angle to subdominant eigenspace {angle:.3e}")

    iteration = {'steps_used': result.steps_used, 'collapse_dim': result.collapse_dim,
                 'rng_seed': args.rng_seed, 'perturb': args.perturb,
                 'last_change': repr(result.limit.shape_change)}
    findings = {'subdominant_angle': None if angle is None else repr(angle)}
    report = RunReport('iterate', descriptor, spectrum=spectrum_entries(decomp),
                       subdominant_dimension=sub.multiplicity, iteration=iteration,
                       coordinates=encode_coordinates(limit.coords), findings=findings,
                       timings=timer.timings)
    if args.out:
        save_output(write_off(limit, complex), args.out)
    write_report(report, args.report)
    if args.timings:
        print(f"timings: {timer.summary()}")
    return 0


def cmd_check(args) -> int:
    timer = Timer(args.timings)
    realization, complex, descriptor = load_input(args)
    graph = skeleton(complex)
    with timer.stage('steinitz'):
        steinitz = validate_steinitz(graph, complex)
    with timer.stage('automorphisms'):
        group = automorphisms(graph)
    with timer.stage('multiplicity'):
        verdict = subdominant_multiplicity_check(complex, group)
    with timer.stage('shape'):
        shape = shape_report(realization)

    print(f"planar {steinitz.is_planar} 3-connected {steinitz.is_3_connected} euler {steinitz.euler_ok}")
    print(f"automorphism order {group.order} vertex_transitive {group.is_vertex_transitive}")
    print(f"subdominant eigenvalue {verdict.eigenvalue!r} multiplicity {verdict.multiplicity}")
    if verdict.hypothesis_flag:
        print(f"WARNING: subdominant multiplicity {verdict.multiplicity}, not 3 "
              f"(symmetry precondition met: {verdict.precondition_met})")
    print(f"star_shaped {shape.star_shaped} convex {shape.convex} faces_planar {shape.faces_planar}")

    findings = {
        'vertex_transitive': group.is_vertex_transitive,
        'precondition_met': verdict.precondition_met,
        'hypothesis_flag': verdict.hypothesis_flag,
        'subdominant_eigenvalue': repr(verdict.eigenvalue),
    }
    report = RunReport('check', descriptor, steinitz=steinitz.to_dict(), automorphism_order=group.order,
                       subdominant_dimension=verdict.multiplicity, shape=shape, findings=findings,
                       timings=timer.timings)
    write_report(report, args.report)
    if args.timings:
        print(f"timings: {timer.summary()}")
    return 0


def cmd_polygon(args) -> int:
    n = args.n
    if args.polygram is not None:
        cos_part, sin_part = polygram_eigenspace(n, args.polygram)
        for j, (c, s) in enumerate(zip(cos_part, sin_part)):
            print(f"{j} {c!r} {s!r}")
        return 0

    if args.iterate:
        graph = cycle_graph(n)
        start = random_polygon(n, args.rng_seed)
        if args.midpoint:
            result = iterate_to_limit(start, graph, args.steps, args.tol,
                                      operator=polygon_midpoint_operator(n), metric='grassmann')
        else:
            result = iterate_to_limit(start, graph, args.steps, args.tol)
        residual = affine_regular_residual(result.limit.coords)
        print(f"steps_used {result.steps_used} collapse_dim {result.collapse_dim} "
              f"affine_regular_residual {residual:.3e}")
        for point in result.limit.coords:
            print(' '.join(format(float(x), '.17g') for x in point))
        return 0

    spec = polygon_spectrum(n)
    print('j  real                  imag                  modulus')
    for j in spec.modulus_order:
        value = spec.eigenvalues[j]
        print(f"{j:<2} {value.real:<21.17f} {value.imag:<21.17f} {abs(value):.17f}")
    print(f"subdominant pair j={spec.subdominant[0]},{spec.subdominant[1]}")
    return 0


def add_input_args(parser: argparse.ArgumentParser):
    parser.add_argument('input', nargs='?', help='OFF mesh file')
    parser.add_argument('--seed', help='seed solid: tetrahedron, cube, octahedron, dodecahedron, icosahedron, prism')
    parser.add_argument('--n', type=int, help='size for prism seeds')
    parser.add_argument('--conway', help='comma separated operators applied left to right')
    parser.add_argument('--archimedean', action='store_true', help='regular truncation of the result')
    parser.add_argument('--catalan', action='store_true', help='Catalan coordinates for kis(seed)')


# settings key -> flag help; values given on the command line override settings for the run
TOLERANCE_FLAGS = {
    'jacobi_tol': 'Jacobi off-diagonal tolerance per vertex',
    'planarity_tol': 'face planarity tolerance relative to the face diameter',
    'convex_tol': 'supporting plane tolerance relative to the coordinate scale',
    'collapse_tol': 'relative singular value cutoff for the collapse dimension',
    'degenerate_area_tol': 'zero-area triangle cutoff in the star-shape test',
    'automorphism_budget': 'automorphism search budget',
}


def add_tolerance_args(parser: argparse.ArgumentParser, *keys: str):
    for key in keys:
        kind = int if key == 'automorphism_budget' else float
        parser.add_argument('--' + key.replace('_', '-'), dest=key, type=kind, help=TOLERANCE_FLAGS[key])


def apply_tolerance_args(args):
    for key in TOLERANCE_FLAGS:
        value = getattr(args, key, None)
        if value is not None:
            settings_manager.set_setting(key, value)


def build_parser() -> argparse.ArgumentParser:
    spectral = settings_manager.get_spectral_config()
    dynamics = settings_manager.get_dynamics_config()

    parser = argparse.ArgumentParser(prog='buffon', description='Buffon transformation of polygons and polyhedra')
    parser.add_argument('-v', '--verbose', action='store_true', help='log progress to stderr')
    parser.add_argument('--timings', action='store_true', help='report stage timings')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('generate', help='write reference coordinates as OFF')
    p.add_argument('seed')
    p.add_argument('--n', type=int)
    p.add_argument('--conway')
    p.add_argument('--archimedean', action='store_true')
    p.add_argument('--catalan', action='store_true')
    p.add_argument('--out')
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser('spectrum', help='grouped Buffon spectrum')
    add_input_args(p)
    p.add_argument('--tol', type=float, default=spectral['group_tol'])
    p.add_argument('--solver', choices=('lapack', 'jacobi'), default=spectral['solver'])
    p.add_argument('--variant', choices=('edge', 'face'), default='edge')
    p.add_argument('--json')
    add_tolerance_args(p, 'jacobi_tol')
    p.set_defaults(handler=cmd_spectrum)

    p = sub.add_parser('realize', help='eigenspace realization with shape verdicts')
    add_input_args(p)
    p.add_argument('--group', type=int, default=2, help='1-based group index, 1 is the eigenvalue 1')
    p.add_argument('--tol', type=float, default=spectral['group_tol'])
    p.add_argument('--solver', choices=('lapack', 'jacobi'), default=spectral['solver'])
    p.add_argument('--out')
    add_tolerance_args(p, 'jacobi_tol', 'planarity_tol', 'convex_tol', 'collapse_tol', 'degenerate_area_tol')
    p.add_argument('--report')
    p.set_defaults(handler=cmd_realize)

    p = sub.add_parser('iterate', help='iterate the Buffon transformation to its limiting shape')
    add_input_args(p)
    p.add_argument('--steps', type=int, default=dynamics['max_steps'])
    p.add_argument('--tol', type=float, default=dynamics['shape_tol'])
    p.add_argument('--rng-seed', type=int, default=dynamics['rng_seed'])
    p.add_argument('--perturb', type=float, default=dynamics['perturb_eps'])
    p.add_argument('--out')
    add_tolerance_args(p, 'collapse_tol', 'planarity_tol', 'convex_tol', 'degenerate_area_tol')
    p.add_argument('--report')
    p.set_defaults(handler=cmd_iterate)

    p = sub.add_parser('check', help='Steinitz, automorphism and shape verdicts')
    add_input_args(p)
    add_tolerance_args(p, 'jacobi_tol', 'planarity_tol', 'convex_tol', 'collapse_tol', 'degenerate_area_tol',
                       'automorphism_budget')
    p.add_argument('--report')
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser('polygon', help='polygon spectra, polygrams and iteration')
    p.add_argument('n', type=int)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument('--iterate', action='store_true')
    mode.add_argument('--spectrum', action='store_true')
    mode.add_argument('--polygram', type=int)
    p.add_argument('--midpoint', action='store_true', help='iterate the vertex-to-edge-midpoint map')
    p.add_argument('--steps', type=int, default=dynamics['max_steps'])
    p.add_argument('--tol', type=float, default=dynamics['shape_tol'])
    p.add_argument('--rng-seed', type=int, default=dynamics['rng_seed'])
    p.set_defaults(handler=cmd_polygon)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)

    try:
        apply_tolerance_args(args)
        return args.handler(args)
    except BuffonError as e:
        logger.debug(f"{type(e).__name__}: {e.message}")
        print(json.dumps(e.to_dict(), sort_keys=True), file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        print(json.dumps({'error': type(e).__name__, 'message': str(e), 'exit_code': 1}, sort_keys=True),
              file=sys.stderr)
        return 1
    finally:
        # overrides last for this run only
        settings_manager.invalidate_cache()


if __name__ == '__main__':
    sys.exit(main())
