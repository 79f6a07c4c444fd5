"""
Graph automorphisms and eigenvalue multiplicity patterns.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from networkx.algorithms.isomorphism import GraphMatcher
from scipy.linalg import subspace_angles

from errors import SearchBudgetExceeded
from poly_core import Graph, PolyhedralComplex, skeleton
from settings_manager import settings_manager
from spectral import SpectralDecomposition, operator_for, spectrum

logger = logging.getLogger(__name__)

Permutation = Tuple[int, ...]

# Multiplicities in spectral order of the Buffon operator, from the
# decomposition of the vertex permutation representation.
PLATONIC_PATTERNS: Dict[str, Tuple[int, ...]] = {
    'tetrahedron': (1, 3),
    'octahedron': (1, 3, 2),
    'cube': (1, 3, 3, 1),
    'icosahedron': (1, 3, 5, 3),
    'dodecahedron': (1, 3, 5, 4, 4, 3),
}

# T, O, I rotation groups
PLATONIC_ROTATION_ORDERS = (12, 24, 60)


@dataclass(frozen=True, eq=False)
class AutomorphismGroup:
    order: int
    generators: Tuple[Permutation, ...]
    is_vertex_transitive: bool
    elements: Tuple[Permutation, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class MultiplicityVerdict:
    automorphism_order: int
    multiplicity: int
    eigenvalue: float
    is_simplicial: bool
    precondition_met: bool
    hypothesis_flag: bool

    @property
    def multiplicity_is_3(self) -> bool:
        return self.multiplicity == 3


def compose(a: Permutation, b: Permutation) -> Permutation:
    """(a o b)(i) = a(b(i))."""
    return tuple(a[i] for i in b)


def closure(generators: Sequence[Permutation], n: int) -> set:
    """All products of the generators."""
    identity = tuple(range(n))
    seen = {identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for p in frontier:
            for g in generators:
                q = compose(g, p)
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
        frontier = nxt
    return seen


def distance_profiles(g: nx.Graph) -> Dict[int, Tuple]:
    """Degree plus the count of vertices at each distance: an automorphism invariant."""
    profiles = {}
    for v, lengths in nx.all_pairs_shortest_path_length(g):
        counts = Counter(lengths.values())
        profiles[v] = (g.degree(v), tuple(sorted(counts.items())))
    return profiles


def preserves_adjacency(graph: Graph, permutation: Sequence[int]) -> bool:
    perm = np.asarray(permutation)
    return bool(np.array_equal(graph.adjacency[np.ix_(perm, perm)], graph.adjacency))


class BudgetedMatcher(GraphMatcher):
    """VF2 matcher that stops once it has examined more candidate pairs than the budget."""

    def __init__(self, g: nx.Graph, budget: int, node_match=None):
        super().__init__(g, g, node_match=node_match)
        self.budget = budget
        self.states = 0

    def syntactic_feasibility(self, G1_node, G2_node):
        self.states += 1
        if self.states > self.budget:
            raise SearchBudgetExceeded(f"automorphism search examined more than {self.budget} states",
                                       budget=self.budget)
        return super().syntactic_feasibility(G1_node, G2_node)


def automorphisms(graph: Graph, budget: Optional[int] = None) -> AutomorphismGroup:
    """
    Enumerate all automorphisms by VF2 matching with distance-profile pruning.

    Args:
        graph: Connected graph
        budget: Maximum number of candidate vertex pairs the search may examine

    Returns:
        AutomorphismGroup with exact order and a greedy generating set
    """
    budget = settings_manager.get_symmetry_config()['budget'] if budget is None else budget
    n = graph.vertex_count
    g = graph.to_networkx()
    nx.set_node_attributes(g, distance_profiles(g), 'profile')
    matcher = BudgetedMatcher(g, budget, node_match=lambda a, b: a['profile'] == b['profile'])

    elements: List[Permutation] = []
    for mapping in matcher.isomorphisms_iter():
        elements.append(tuple(mapping[i] for i in range(n)))
    elements.sort()

    for perm in elements:
        if not preserves_adjacency(graph, perm):
            raise AssertionError(f"matcher returned a non-automorphism {perm}")

    generators: List[Permutation] = []
    group = {tuple(range(n))}
    for perm in elements:
        if perm not in group:
            generators.append(perm)
            group = closure(generators, n)
    if len(group) != len(elements):
        raise AssertionError(f"generated group has {len(group)} elements, enumerated {len(elements)}")

    orbit = {perm[0] for perm in elements}
    logger.info(f"Automorphism group of order {len(elements)} with {len(generators)} generators")
    return AutomorphismGroup(len(elements), tuple(generators), len(orbit) == n, tuple(elements))


def multiplicity_pattern(decomp: SpectralDecomposition, expected: Sequence[int]) -> bool:
    """True iff the ordered multiplicity sequence equals expected."""
    return list(decomp.multiplicities) == [int(m) for m in expected]


def permute_rows(vectors: np.ndarray, permutation: Sequence[int]) -> np.ndarray:
    """Action of a vertex permutation: entry i moves to permutation[i]."""
    result = np.empty_like(vectors)
    result[np.asarray(permutation)] = vectors
    return result


def eigenspace_invariance(decomp: SpectralDecomposition, permutation: Sequence[int]) -> float:
    """Largest principal angle between any eigenspace and its permuted image."""
    worst = 0.0
    for group in decomp.groups:
        moved = permute_rows(group.basis, permutation)
        worst = max(worst, float(np.max(subspace_angles(group.basis, moved))))
    return worst


def subdominant_multiplicity_check(complex: PolyhedralComplex,
                                   group: Optional[AutomorphismGroup] = None) -> MultiplicityVerdict:
    """
    Is the subdominant eigenvalue triple?

    The precondition (simplicial, automorphism order >= 24 and divisible by
    a Platonic rotation group order) is recorded, not enforced; a
    multiplicity other than 3 raises the hypothesis flag.
    """
    group = automorphisms(skeleton(complex)) if group is None else group
    decomp = spectrum(operator_for(complex))
    sub = decomp.groups[1]
    precondition = (complex.is_simplicial and group.order >= 24
                    and any(group.order % k == 0 for k in PLATONIC_ROTATION_ORDERS))
    verdict = MultiplicityVerdict(group.order, sub.multiplicity, sub.eigenvalue,
                                  complex.is_simplicial, precondition, sub.multiplicity != 3)
    if verdict.hypothesis_flag:
        logger.warning(f"Subdominant multiplicity {sub.multiplicity} (automorphism order {group.order})")
    return verdict
