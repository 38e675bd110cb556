"""
Hitting Set reductions for distid.

Three constructions turn a Hitting Set instance (universe {1..n}, sets
S_1..S_m) into a graph whose minimum DIS is k* + offset, where k* is the
minimum hitting set size and offset is |C| times the number of gadget
copies:

    distance_id(r)   one gadget copy per element (with v_i) and per set
                     (with v_j and its twin vbar_j); every membership
                     i in S_j gets a private path of r-1 vertices from
                     v_i to v_j. Needs an r-local problem and a local gadget.
    apex             distance_id(1) plus an apex adjacent to every element
                     copy's border and to every v_j, vbar_j. Needs a
                     1-layered problem.
    compressed(r)    ell(n+1) element copies and ell(m) set copies; v_i and
                     v_j are wired to the copies selected by the 1-bits of
                     i and j, each element owns one path l_i^0..l_i^{r-1}
                     shared by all its sets, and an apex path a^0..a^{r-1}
                     closes the graph.

Bit k of x over width w is the k-th most significant bit: (x >> (w-k)) & 1.

lift_hitting_set maps a hitting set to a DIS of size k + offset and
extract_hitting_set maps any DIS of size s back to a hitting set of size
at most s - offset.
"""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .graph_core import Graph, RoleKind, RoleLabel, all_pairs_distances, twin_pairs
from .gadgets import Gadget
from .problems import IdentifyingProblem, Trait, TraitViolation, require_traits
from .solver import HittingSetInstance, SolveResult, Status, is_dis, is_hitting_set, min_hitting_set

logger = logging.getLogger(__name__)


class ReductionError(ValueError):
    """A lift or extract input was rejected."""


class ReductionKind(Enum):
    DISTANCE_ID = 'distance_id'
    APEX = 'apex'
    COMPRESSED = 'compressed'


def ell(x: int) -> int:
    """1 + floor(log2 x) for x >= 1."""
    if x < 1:
        raise ValueError(f'ell needs a positive integer, got {x}')
    return x.bit_length()


def bit(x: int, k: int, width: int) -> int:
    if not 1 <= k <= width:
        raise ValueError(f'bit index {k} outside 1..{width}')
    return (x >> (width - k)) & 1


def element_copy(k: int) -> str:
    return f'E{k}'


def set_copy(k: int) -> str:
    return f'S{k}'


# ---------------------------------------------------------------------------
# Artifact
# ---------------------------------------------------------------------------

@dataclass
class ReductionArtifact:
    graph: Graph
    kind: ReductionKind
    r: int
    gadget: Gadget
    instance: HittingSetInstance
    copies: int
    offset: int
    equivalence_untested: bool = False
    _roles: Dict[RoleLabel, int] = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        for v in self.graph.vertices():
            label = self.graph.label(v)
            if label.kind is RoleKind.PLAIN:
                raise ValueError(f'vertex {v} has no construction role')
            if label in self._roles:
                raise ValueError(f'role {label} appears twice')
            self._roles[label] = v

    def vertex(self, label: RoleLabel) -> int:
        return self._roles[label]

    def element_vertex(self, i: int) -> int:
        return self._roles[RoleLabel.element(i)]

    def set_pair(self, j: int) -> Tuple[int, int]:
        return self._roles[RoleLabel.set_vertex(j)], self._roles[RoleLabel.set_twin(j)]

    def copy_names(self) -> List[str]:
        return sorted({label.copy for label in self._roles if label.kind is RoleKind.GADGET},
                      key=lambda c: (c[0], int(c[1:])))

    def code_vertices(self) -> List[int]:
        code_names = [self.gadget.names[c] for c in sorted(self.gadget.code)]
        return sorted(self._roles[RoleLabel.gadget(copy, name)]
                      for copy in self.copy_names() for name in code_names)

    def element_region(self, i: int) -> List[int]:
        """L_i: v_i together with the path vertices that belong to element i."""
        region = [self.element_vertex(i)]
        region += [v for label, v in self._roles.items() if label.kind is RoleKind.PATH and label.i == i]
        return sorted(region)

    @property
    def kind_label(self) -> str:
        if self.kind is ReductionKind.APEX:
            return 'apex'
        return f'{self.kind.value}({self.r})'


class _GraphBuilder:
    def __init__(self, gadget: Gadget):
        self.gadget = gadget
        self.labels: List[RoleLabel] = []
        self.edges: List[Tuple[int, int]] = []

    def add_vertex(self, label: RoleLabel) -> int:
        self.labels.append(label)
        return len(self.labels) - 1

    def add_copy(self, copy: str) -> List[int]:
        """Add a copy of H; returns the vertex ids of the copy's border."""
        start = len(self.labels)
        for name in self.gadget.names:
            self.labels.append(RoleLabel.gadget(copy, name))
        self.edges.extend((start + u, start + v) for u, v in self.gadget.h.edges)
        return [start + b for b in sorted(self.gadget.border)]

    def join(self, v: int, targets: Sequence[int]):
        self.edges.extend((v, t) for t in targets)

    def build(self) -> Graph:
        return Graph(len(self.labels), self.edges, self.labels)


def _check_instance(inst: HittingSetInstance):
    inst.validate()


def _check_r(r):
    if isinstance(r, bool) or int(r) != r or r < 1:
        raise ValueError(f'the construction radius must be a positive integer, got {r!r}')
    return int(r)


def build_associated_graph(inst: HittingSetInstance) -> Graph:
    """Bipartite element/set incidence graph: elements 0..n-1, sets n..n+m-1."""
    _check_instance(inst)
    labels = [RoleLabel.element(i) for i in range(1, inst.n + 1)]
    labels += [RoleLabel.set_vertex(j) for j in range(1, inst.m + 1)]
    edges = [(i - 1, inst.n + j - 1) for j, s in enumerate(inst.sets, start=1) for i in s]
    return Graph(inst.n + inst.m, edges, labels)


def _distance_id_builder(gad: Gadget, r: int, inst: HittingSetInstance) -> _GraphBuilder:
    builder = _GraphBuilder(gad)
    element = {}
    for i in range(1, inst.n + 1):
        border = builder.add_copy(element_copy(i))
        element[i] = builder.add_vertex(RoleLabel.element(i))
        builder.join(element[i], border)
    for j in range(1, inst.m + 1):
        border = builder.add_copy(set_copy(j))
        v = builder.add_vertex(RoleLabel.set_vertex(j))
        vbar = builder.add_vertex(RoleLabel.set_twin(j))
        builder.join(v, border)
        builder.join(vbar, border)
    for j, s in enumerate(inst.sets, start=1):
        target = builder.labels.index(RoleLabel.set_vertex(j))
        for i in s:
            previous = element[i]
            for k in range(1, r):
                step = builder.add_vertex(RoleLabel.path(i, j, k))
                builder.join(step, [previous])
                previous = step
            builder.join(previous, [target])
    return builder


def build_distance_id_graph(gad: Gadget, r: int, inst: HittingSetInstance) -> ReductionArtifact:
    r = _check_r(r)
    _check_instance(inst)
    graph = _distance_id_builder(gad, r, inst).build()
    copies = inst.n + inst.m
    art = ReductionArtifact(graph, ReductionKind.DISTANCE_ID, r, gad, inst, copies,
                            len(gad.code) * copies, equivalence_untested=inst.n == 1)
    logger.debug(f'distance_id({r}) with {gad.name}: {len(graph)} vertices, offset {art.offset}')
    return art


def build_apex_graph(gad: Gadget, inst: HittingSetInstance) -> ReductionArtifact:
    _check_instance(inst)
    builder = _distance_id_builder(gad, 1, inst)
    apex = builder.add_vertex(RoleLabel.apex())
    border_names = [gad.names[b] for b in sorted(gad.border)]
    for i in range(1, inst.n + 1):
        builder.join(apex, [builder.labels.index(RoleLabel.gadget(element_copy(i), name))
                            for name in border_names])
    for j in range(1, inst.m + 1):
        builder.join(apex, [builder.labels.index(RoleLabel.set_vertex(j)),
                            builder.labels.index(RoleLabel.set_twin(j))])
    graph = builder.build()
    copies = inst.n + inst.m
    art = ReductionArtifact(graph, ReductionKind.APEX, 1, gad, inst, copies,
                            len(gad.code) * copies, equivalence_untested=inst.n == 1)
    logger.debug(f'apex with {gad.name}: {len(graph)} vertices, offset {art.offset}')
    return art


def build_compressed_graph(gad: Gadget, r: int, inst: HittingSetInstance) -> ReductionArtifact:
    r = _check_r(r)
    _check_instance(inst)
    n, m = inst.n, inst.m
    width_e, width_s = ell(n + 1), ell(m)

    builder = _GraphBuilder(gad)
    element_borders = [builder.add_copy(element_copy(k)) for k in range(1, width_e + 1)]
    set_borders = [builder.add_copy(set_copy(k)) for k in range(1, width_s + 1)]

    set_pairs = {}
    for j in range(1, m + 1):
        pair = (builder.add_vertex(RoleLabel.set_vertex(j)), builder.add_vertex(RoleLabel.set_twin(j)))
        for k in range(1, width_s + 1):
            if bit(j, k, width_s):
                for v in pair:
                    builder.join(v, set_borders[k - 1])
        set_pairs[j] = pair

    path_ends = {}
    for i in range(1, n + 1):
        head = builder.add_vertex(RoleLabel.element(i))
        for k in range(1, width_e + 1):
            if bit(i, k, width_e):
                builder.join(head, element_borders[k - 1])
        previous = head
        for k in range(1, r):
            step = builder.add_vertex(RoleLabel.path(i, None, k))
            builder.join(step, [previous])
            previous = step
        path_ends[i] = previous

    for j, s in enumerate(inst.sets, start=1):
        for i in s:
            builder.join(path_ends[i], [set_pairs[j][0]])

    previous = None
    for k in range(r):
        step = builder.add_vertex(RoleLabel.apex_path(k))
        if previous is None:
            for border in element_borders:
                builder.join(step, border)
        else:
            builder.join(step, [previous])
        previous = step
    for j in range(1, m + 1):
        builder.join(previous, set_pairs[j])

    graph = builder.build()
    copies = width_e + width_s
    art = ReductionArtifact(graph, ReductionKind.COMPRESSED, r, gad, inst, copies, len(gad.code) * copies)
    logger.debug(f'compressed({r}) with {gad.name}: {len(graph)} vertices, offset {art.offset}')
    return art


def build_artifact(kind: ReductionKind, gad: Gadget, r: int, inst: HittingSetInstance) -> ReductionArtifact:
    if kind is ReductionKind.APEX:
        return build_apex_graph(gad, inst)
    if kind is ReductionKind.DISTANCE_ID:
        return build_distance_id_graph(gad, r, inst)
    return build_compressed_graph(gad, r, inst)


def expected_order(kind: ReductionKind, h_size: int, r: int, inst: HittingSetInstance) -> int:
    """Exact vertex count of a construction."""
    n, m = inst.n, inst.m
    memberships = sum(len(s) for s in inst.sets)
    if kind is ReductionKind.COMPRESSED:
        return h_size * (ell(n + 1) + ell(m)) + r * (n + 1) + 2 * m
    if kind is ReductionKind.APEX:
        return n * (h_size + 1) + m * (h_size + 2) + 1
    return n * (h_size + 1) + m * (h_size + 2) + (r - 1) * memberships


def size_bound(kind: ReductionKind, h_size: int, r: int, inst: HittingSetInstance) -> int:
    """Published order bound; holds whenever there are at most 2(n+m) memberships."""
    n, m = inst.n, inst.m
    if kind is ReductionKind.COMPRESSED:
        return h_size * (ell(n + 1) + ell(m)) + r * (n + 1) + 2 * m
    if kind is ReductionKind.APEX:
        r = 1
    return (h_size + 2 * r) * (n + m)


# ---------------------------------------------------------------------------
# Compatibility gate
# ---------------------------------------------------------------------------

def required_traits(art: ReductionArtifact) -> List[Trait]:
    if art.kind is ReductionKind.APEX or (art.kind is ReductionKind.COMPRESSED and not art.gadget.meta.local):
        return [Trait.distance(), Trait.layered(1)]
    return [Trait.distance(), Trait.local(art.r)]


def check_compatibility(art: ReductionArtifact, p: IdentifyingProblem, corpus=None) -> None:
    """Fail fast unless p, the gadget and the construction fit together."""
    if not art.gadget.supports(p):
        raise TraitViolation(f'gadget {art.gadget.name} is not proven for {p.name}')
    if art.kind is ReductionKind.DISTANCE_ID and not art.gadget.meta.local:
        raise TraitViolation(f'distance_id({art.r}) needs a local gadget, got {art.gadget.name}')
    if art.kind is ReductionKind.COMPRESSED and not art.gadget.meta.local and art.r != 1:
        raise TraitViolation(f'compressed({art.r}) with a non-local gadget needs r = 1')
    local_route = art.kind is ReductionKind.DISTANCE_ID or (
        art.kind is ReductionKind.COMPRESSED and art.gadget.meta.local)
    if local_route and p.radius != art.r:
        raise TraitViolation(f'{p.name} has radius {p.radius} but the construction uses r = {art.r}')
    require_traits(p, required_traits(art), corpus)


# ---------------------------------------------------------------------------
# Solution maps
# ---------------------------------------------------------------------------

def lift_hitting_set(art: ReductionArtifact, hs: Sequence[int]) -> Tuple[int, ...]:
    """I = {v_i : i in hs} plus every copy of C."""
    chosen = sorted(set(hs))
    for i in chosen:
        if not 1 <= i <= art.instance.n:
            raise ReductionError(f'element {i} is outside 1..{art.instance.n}')
    if not is_hitting_set(art.instance, chosen):
        missed = next(j for j, s in enumerate(art.instance.sets, start=1) if not set(s) & set(chosen))
        raise ReductionError(f'{chosen} does not hit set {missed}')
    lifted = set(art.code_vertices())
    lifted.update(art.element_vertex(i) for i in chosen)
    return tuple(sorted(lifted))


def phi(inst: HittingSetInstance, j: int) -> int:
    """Representative element of S_j: its smallest member."""
    return min(inst.sets[j - 1])


def extract_hitting_set(art: ReductionArtifact, dis: Sequence[int], p: IdentifyingProblem,
                        verify: bool = True) -> Tuple[int, ...]:
    """P = {i : dis meets L_i} + {phi(j) : v_j or vbar_j in dis}."""
    chosen = set(dis)
    if verify:
        ok, violation = is_dis(art.graph, p, chosen)
        if not ok:
            raise ReductionError(f'not a {p.name} DIS of the artifact: {violation} fails')
    inst = art.instance
    picked = {i for i in range(1, inst.n + 1) if chosen.intersection(art.element_region(i))}
    for j in range(1, inst.m + 1):
        if chosen.intersection(art.set_pair(j)):
            picked.add(phi(inst, j))
    result = tuple(sorted(picked))
    if not is_hitting_set(inst, result):
        raise ReductionError(f'extraction produced {list(result)}, which misses a set; '
                             f'{p.name} does not fit this construction')
    return result


def twin_variants(art: ReductionArtifact, dis: Sequence[int], p: IdentifyingProblem,
                  count: int, seed: int) -> List[Tuple[int, ...]]:
    """Other DIS obtained by exchanging members with open-neighbourhood twins."""
    pairs = twin_pairs(art.graph)
    if not pairs:
        return []
    rng = np.random.default_rng(seed)
    dm = all_pairs_distances(art.graph)
    base = tuple(sorted(dis))
    variants = []
    seen = {base}
    attempts = 0
    while len(variants) < count and attempts < 20 * count:
        attempts += 1
        current = set(base)
        for index in rng.permutation(len(pairs))[: int(rng.integers(1, len(pairs) + 1))]:
            x, y = pairs[int(index)]
            if (x in current) != (y in current):
                current ^= {x, y}
        variant = tuple(sorted(current))
        if variant in seen:
            continue
        seen.add(variant)
        if is_dis(art.graph, p, variant, dm)[0]:
            variants.append(variant)
        else:
            logger.warning(f'twin swap broke the DIS: {variant}')
    return variants


# ---------------------------------------------------------------------------
# SAT
# ---------------------------------------------------------------------------

@dataclass
class CNF:
    """Clauses over variables 1..num_vars, literals as signed ints (DIMACS)."""
    num_vars: int
    clauses: List[Tuple[int, ...]]


def literal_element(literal: int) -> int:
    """u_x = 2x-1 for x, ubar_x = 2x for not x."""
    x = abs(literal)
    return 2 * x - 1 if literal > 0 else 2 * x


def sat_to_hitting_set(cnf: CNF) -> HittingSetInstance:
    """One pair set per variable, then one set per clause."""
    sets = [(2 * x - 1, 2 * x) for x in range(1, cnf.num_vars + 1)]
    for index, clause in enumerate(cnf.clauses, start=1):
        if not clause:
            raise ValueError(f'clause {index} is empty')
        for literal in clause:
            if literal == 0 or abs(literal) > cnf.num_vars:
                raise ValueError(f'clause {index} has literal {literal} outside 1..{cnf.num_vars}')
        sets.append(tuple(sorted({literal_element(lit) for lit in clause})))
    return HittingSetInstance(2 * cnf.num_vars, sets).validate()


def is_satisfiable(cnf: CNF, max_vars: int = 20) -> bool:
    """Truth-table oracle."""
    if cnf.num_vars > max_vars:
        raise ValueError(f'truth tables are limited to {max_vars} variables')
    for values in itertools.product((False, True), repeat=cnf.num_vars):
        if all(any(values[abs(lit) - 1] == (lit > 0) for lit in clause) for clause in cnf.clauses):
            return True
    return False


def random_cnf(num_vars: int, num_clauses: int, seed: int, width: int = 3) -> CNF:
    rng = np.random.default_rng(seed)
    clauses = []
    for _ in range(num_clauses):
        size = min(width, num_vars)
        chosen = rng.choice(num_vars, size=size, replace=False) + 1
        signs = rng.choice((-1, 1), size=size)
        clauses.append(tuple(int(x * s) for x, s in zip(chosen, signs)))
    return CNF(num_vars, clauses)


def random_instance(n: int, m: int, seed: int) -> HittingSetInstance:
    """Covering instance with at most n + 2m memberships."""
    if n < 1 or m < 1:
        raise ValueError('random instances need n >= 1 and m >= 1')
    rng = np.random.default_rng(seed)
    sets = [set() for _ in range(m)]
    for i in range(1, n + 1):
        sets[int(rng.integers(m))].add(i)
    for s in sets:
        if not s:
            s.add(int(rng.integers(1, n + 1)))
    for _ in range(int(rng.integers(0, m + 1))):
        sets[int(rng.integers(m))].add(int(rng.integers(1, n + 1)))
    return HittingSetInstance(n, [tuple(sorted(s)) for s in sets]).validate()


# ---------------------------------------------------------------------------
# Round trip
# ---------------------------------------------------------------------------

@dataclass
class RoundTrip:
    """Every intermediate of hitting set -> DIS -> hitting set."""
    kind: str
    order: int
    offset: int
    hs_result: SolveResult
    lifted: Tuple[int, ...] = ()
    lifted_valid: bool = False
    extracted: Tuple[int, ...] = ()
    variants_checked: int = 0
    failures: List[str] = field(default_factory=list)

    @property
    def k(self) -> Optional[int]:
        return self.hs_result.k

    @property
    def passed(self) -> bool:
        return self.hs_result.status is Status.OPTIMAL and not self.failures


def roundtrip(art: ReductionArtifact, p: IdentifyingProblem, budget: Optional[int] = None,
              variants: int = 0, seed: int = 0) -> RoundTrip:
    """Solve the instance, lift, verify, extract and compare sizes."""
    hs = min_hitting_set(art.instance, budget)
    record = RoundTrip(art.kind_label, len(art.graph), art.offset, hs)
    if hs.status is not Status.OPTIMAL:
        record.failures.append(f'hitting set solver returned {hs.status.value}')
        return record

    record.lifted = lift_hitting_set(art, hs.witness)
    if len(record.lifted) != hs.k + art.offset:
        record.failures.append(f'lift has {len(record.lifted)} vertices, expected {hs.k + art.offset}')
    dm = all_pairs_distances(art.graph)
    record.lifted_valid, violation = is_dis(art.graph, p, record.lifted, dm)
    if not record.lifted_valid:
        record.failures.append(f'lift is not a {p.name} DIS: {violation} fails')
        return record

    # the lift and every twin variant have already passed is_dis
    candidates = [record.lifted] + twin_variants(art, record.lifted, p, variants, seed)
    for index, candidate in enumerate(candidates):
        try:
            extracted = extract_hitting_set(art, candidate, p, verify=False)
        except ReductionError as exc:
            record.failures.append(str(exc))
            continue
        if index == 0:
            record.extracted = extracted
        else:
            record.variants_checked += 1
        if len(extracted) > len(candidate) - art.offset:
            record.failures.append(f'extracted {len(extracted)} elements from a DIS of size '
                                   f'{len(candidate)}, more than {len(candidate) - art.offset}')
    logger.info(f'roundtrip {art.kind_label} {p.name}: k={hs.k} order={len(art.graph)} '
                f'{"ok" if record.passed else "failed"}')
    return record
