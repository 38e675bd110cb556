"""
Gadgets (H, B, C) and their axiom checks.

A B-extension G of H adds fresh vertices whose neighbourhood inside H is
either empty or exactly B. The gadget axioms quantify over every
B-extension; check_gadget tests them on a finite, named family of
extensions (single, twin and seeded random ones):

    p_h  C f-distinguishes every x in V_H from every other vertex of G
    p_b  C f-distinguishes the B-adjacent fresh vertices from the others
    p_d  C r-dominates G[V_H + N_B]
    p_s  every minimum DIS S of G has |S & V_H| >= |C|
    p_l  (local gadgets) for every k in 1..r some c in C has d(c, B) = k-1

In every extension the first len(H) vertices are H itself, in the same
order.
"""

import logging
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from .config import get_config
from .graph_core import (
    INFINITY, Graph, Radius, all_pairs_distances, check_radius, components,
    format_radius, in_ball, induced_subgraph, is_bipartite, is_connected,
)
from .problems import IdentifyingProblem, Trait
from .solver import Status, enumerate_min_dis

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GadgetMeta:
    bipartite_single_ext: bool
    planar_twin_ext: bool
    local: bool


@dataclass(frozen=True)
class Gadget:
    """A gadget (H, B, C) with named vertices."""
    name: str
    h: Graph
    names: Tuple[str, ...]
    border: FrozenSet[int]
    code: FrozenSet[int]
    meta: GadgetMeta
    radius: Optional[Radius] = None
    twins: Tuple[Tuple[int, int], ...] = ()
    required_traits: FrozenSet[Trait] = field(default_factory=frozenset)
    only_problem: Optional[str] = None

    def index(self, name: str) -> int:
        return self.names.index(name)

    def supports(self, p: IdentifyingProblem) -> bool:
        """Whether the gadget is proven for p."""
        if self.only_problem is not None:
            return p.name == self.only_problem
        if self.radius is not None and p.radius != self.radius:
            return False
        return all(p.claims(t) for t in self.required_traits)

    def __len__(self):
        return len(self.h)


def _assemble(name, names, edges, border, code, radius=None, twins=(), required=(),
              only_problem=None, local=False) -> Gadget:
    index = {v: i for i, v in enumerate(names)}
    h = Graph(len(names), [(index[a], index[b]) for a, b in edges])
    if not is_connected(h):
        raise ValueError(f'gadget {name} is not connected')
    gad = Gadget(
        name=name, h=h, names=tuple(names),
        border=frozenset(index[b] for b in border),
        code=frozenset(index[c] for c in code),
        meta=GadgetMeta(bipartite_single_ext=False, planar_twin_ext=True, local=local),
        radius=radius,
        twins=tuple((index[x], index[y]) for x, y in twins),
        required_traits=frozenset(required),
        only_problem=only_problem,
    )
    return replace(gad, meta=replace(gad.meta, bipartite_single_ext=is_bipartite(b_single_extension(gad))))


def gadget_1layered() -> Gadget:
    """Ten vertices: two 4-cycles joined through b and bbar."""
    names = ['b', 'bbar', 'u_1', 'ubar_1', 'u_2', 'ubar_2', 'v_1', 'vbar_1', 'v_2', 'vbar_2']
    edges = [
        ('u_1', 'u_2'), ('u_2', 'ubar_1'), ('ubar_1', 'ubar_2'), ('ubar_2', 'u_1'),
        ('v_1', 'v_2'), ('v_2', 'vbar_1'), ('vbar_1', 'vbar_2'), ('vbar_2', 'v_1'),
    ]
    for b in ('b', 'bbar'):
        edges += [(b, 'u_1'), (b, 'ubar_1'), (b, 'v_1'), (b, 'vbar_1')]
    twins = [('b', 'bbar'), ('u_1', 'ubar_1'), ('u_2', 'ubar_2'), ('v_1', 'vbar_1'), ('v_2', 'vbar_2')]
    return _assemble('1layered', names, edges, border=['b', 'bbar'],
                     code=['b', 'u_1', 'u_2', 'v_1', 'v_2'], twins=twins,
                     required=[Trait.layered(1)])


def gadget_local_0layered(r: int) -> Gadget:
    """Layers {a_i, b_i}, each joined completely to the next; 4r+2 vertices, 8 when r = 1."""
    r = check_radius(r)
    if r == INFINITY:
        raise ValueError('the local 0-layered gadget needs a finite radius')
    top = 4 if r == 1 else 2 * r + 1
    names = [f'{x}_{i}' for i in range(1, top + 1) for x in ('a', 'b')]
    edges = []
    for i in range(1, top):
        for x in ('a', 'b'):
            for y in ('a', 'b'):
                edges.append((f'{x}_{i}', f'{y}_{i + 1}'))
    return _assemble(f'local0:{r}', names, edges, border=['a_1', 'b_1'],
                     code=[f'a_{i}' for i in range(1, top + 1)], radius=r,
                     twins=[(f'a_{i}', f'b_{i}') for i in range(1, top + 1)],
                     required=[Trait.local(r), Trait.layered(0)], local=True)


def gadget_r_ic(r: int) -> Gadget:
    """6r+4 vertices built from six paths; proven for r-IC only."""
    r = check_radius(r)
    if r == INFINITY:
        raise ValueError('the r-IC gadget needs a finite radius')

    def a(j, i):
        # a^j_{r+1} is a_0 and a^j_0 is b_0
        if i == r + 1:
            return 'a_0'
        if i == 0:
            return 'b_0'
        return f'a^{j}_{i}'

    def b(j, i):
        return 'b_0' if i == r + 1 else f'b^{j}_{i}'

    names = [f'a_{i}' for i in range(r + 2)] + [f'b_{i}' for i in range(r + 2)]
    names += [f'{x}^{j}_{i}' for x in ('a', 'b') for j in (1, 2) for i in range(1, r + 1)]

    edges = []
    for i in range(r + 1):
        edges.append((f'a_{i}', f'a_{i + 1}'))
        edges.append((f'b_{i}', f'b_{i + 1}'))
    for j in (1, 2):
        for i in range(r + 1):
            edges.append((a(j, i), a(j, i + 1)))
        for i in range(1, r + 1):
            edges.append((b(j, i), b(j, i + 1)))

    code = [f'a_{r + 1}', f'b_{r + 1}'] + [a(1, i) for i in range(1, r + 2)] + [b(1, i) for i in range(1, r + 2)]
    return _assemble(f'ic:{r}', names, edges, border=['b^1_1', 'b^2_1'], code=code,
                     radius=r, only_problem=f'ic:{r}', local=True)


GADGET_PATTERN = re.compile(r'^(?:(1layered)|(local0|ic):(\d+))$', re.IGNORECASE)


def parse_gadget(text: str) -> Gadget:
    """Parse ``1layered``, ``local0:<r>`` or ``ic:<r>``."""
    match = GADGET_PATTERN.match(text.strip())
    if not match:
        raise ValueError(f'Unknown gadget: {text!r} (expected 1layered, local0:<r> or ic:<r>)')
    if match.group(1):
        return gadget_1layered()
    family, r = match.group(2).lower(), int(match.group(3))
    if family == 'local0':
        return gadget_local_0layered(r)
    return gadget_r_ic(r)


def gadget_for_problem(p: IdentifyingProblem, prefer_layered: bool = False) -> Gadget:
    """Pick a gadget proven for p."""
    candidates = []
    if prefer_layered:
        candidates.append(gadget_1layered)
    if p.is_finite:
        candidates += [lambda: gadget_local_0layered(p.radius), lambda: gadget_r_ic(p.radius)]
    candidates.append(gadget_1layered)
    for make in candidates:
        gad = make()
        if gad.supports(p):
            return gad
    raise ValueError(f'No gadget is proven for {p.name}')


# ---------------------------------------------------------------------------
# B-extensions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Extension:
    name: str
    graph: Graph


def _extend(gad: Gadget, adjacent: Sequence[bool], fresh_edges=()) -> Graph:
    n = len(gad.h)
    edges = list(gad.h.edges)
    for offset, touches in enumerate(adjacent):
        if touches:
            edges.extend((b, n + offset) for b in sorted(gad.border))
    edges.extend((n + x, n + y) for x, y in fresh_edges)
    return Graph(n + len(adjacent), edges)


def b_single_extension(gad: Gadget) -> Graph:
    return _extend(gad, [True])


def b_twin_extension(gad: Gadget) -> Graph:
    return _extend(gad, [True, True])


def random_b_extension(gad: Gadget, extra: int, seed: int) -> Graph:
    """H plus `extra` fresh vertices, connected, at least one of them B-adjacent."""
    if extra < 1:
        raise ValueError(f'extra must be at least 1, got {extra}')
    rng = np.random.default_rng(seed)
    adjacent = rng.random(extra) < 0.5
    if not adjacent.any():
        adjacent[int(rng.integers(extra))] = True
    fresh_edges = [(x, y) for x in range(extra) for y in range(x + 1, extra) if rng.random() < 0.4]

    g = _extend(gad, adjacent.tolist(), fresh_edges)
    anchor = int(np.flatnonzero(adjacent)[0])
    for comp in components(g):
        if 0 not in comp:
            fresh_edges.append((anchor, min(comp) - len(gad.h)))
    return _extend(gad, adjacent.tolist(), fresh_edges)


def extension_family(gad: Gadget, seed: Optional[int] = None, count: Optional[int] = None,
                     max_extra: Optional[int] = None) -> List[Extension]:
    """Single and twin extensions followed by `count` seeded random ones."""
    if seed is None:
        seed = get_config('corpus', 'seed', default=2024)
    if count is None:
        count = get_config('gadgets', 'random_extensions', default=10)
    if max_extra is None:
        max_extra = get_config('gadgets', 'max_extra', default=4)
    family = [Extension('single', b_single_extension(gad)), Extension('twin', b_twin_extension(gad))]
    rng = np.random.default_rng(seed)
    for index in range(count):
        extra = int(rng.integers(1, max_extra + 1))
        member_seed = int(rng.integers(2 ** 31))
        family.append(Extension(f'random{index}+{extra}', random_b_extension(gad, extra, member_seed)))
    return family


def validate_extension(gad: Gadget, g: Graph) -> None:
    n = len(gad.h)
    if len(g) < n:
        raise ValueError(f'extension has {len(g)} vertices, fewer than the gadget')
    inner, _ = induced_subgraph(g, range(n))
    if inner.edges != gad.h.edges:
        raise ValueError('the first vertices of the extension do not induce the gadget')
    for v in range(n, len(g)):
        touched = {u for u in g.neighbors(v) if u < n}
        if touched and touched != gad.border:
            raise ValueError(f'fresh vertex {v} touches {sorted(touched)} inside the gadget, not B')


# ---------------------------------------------------------------------------
# Axiom checks
# ---------------------------------------------------------------------------

AXIOMS = ('p_h', 'p_b', 'p_d', 'p_s', 'p_l')


class Verdict(Enum):
    PASS = 'pass'
    FAIL = 'fail'
    UNCHECKED = 'unchecked'


@dataclass
class AxiomResult:
    axiom: str
    verdict: Verdict = Verdict.UNCHECKED
    counterexample: Optional[str] = None
    member: Optional[str] = None
    checked: int = 0
    unchecked: int = 0

    def record(self, member: str, failure: Optional[str]):
        if self.verdict is Verdict.FAIL:
            return
        self.checked += 1
        if failure is not None:
            self.verdict, self.counterexample, self.member = Verdict.FAIL, failure, member
            logger.info(f'{self.axiom} fails on {member}: {failure}')
        else:
            self.verdict = Verdict.PASS

    def skip(self):
        self.unchecked += 1


@dataclass
class AxiomReport:
    gadget: str
    problem: str
    members: List[str]
    bipartite_single_ext: bool
    results: Dict[str, AxiomResult]

    def verdict(self, axiom: str) -> Verdict:
        return self.results[axiom].verdict

    @property
    def passed(self) -> bool:
        return all(res.verdict is not Verdict.FAIL for res in self.results.values())


def _undistinguished(p, dm, cmask, xs, ys) -> Optional[Tuple[int, int]]:
    for x in xs:
        for y in ys:
            if x != y and not (p.distinguishers(dm, x, y) & cmask).any():
                return x, y
    return None


def _check_dominated(gad, p, g, fresh_b) -> Optional[str]:
    sub, index = induced_subgraph(g, list(range(len(gad.h))) + fresh_b)
    dm = all_pairs_distances(sub)
    code = [index[c] for c in sorted(gad.code)]
    covered = in_ball(dm[:, code], p.radius).any(axis=1)
    missing = [v for v in sorted(index) if not covered[index[v]]]
    if missing:
        return f'vertex {missing[0]} is not {format_radius(p.radius)}-dominated'
    return None


def _check_size(gad, p, g, budget) -> Tuple[Optional[str], bool]:
    """(failure, checked) for p_s on one extension."""
    result, optima = enumerate_min_dis(g, p, budget)
    if result.status is Status.ABORTED:
        return None, False
    if result.status is Status.INFEASIBLE:
        # no DIS exists, so the statement holds vacuously
        return None, True
    n = len(gad.h)
    for witness in optima:
        inside = sum(1 for x in witness if x < n)
        if inside < len(gad.code):
            return f'optimum {list(witness)} has {inside} vertices in H, |C| = {len(gad.code)}', True
    return None, True


def check_locality(gad: Gadget, r: Radius) -> Optional[str]:
    """Structural p_l: some code vertex at each distance 0..r-1 from B."""
    if r == INFINITY:
        return 'locality needs a finite radius'
    dm = all_pairs_distances(gad.h)
    border = sorted(gad.border)
    reached = {int(dm[c, border].min()) for c in gad.code}
    for k in range(1, r + 1):
        if k - 1 not in reached:
            return f'no code vertex at distance {k - 1} from B'
    return None


def check_gadget(gad: Gadget, p: IdentifyingProblem, family: Optional[Sequence[Extension]] = None,
                 budget: Optional[int] = None, max_ps_vertices: Optional[int] = None,
                 progress: bool = False) -> AxiomReport:
    """Check every gadget axiom for p on each extension of the family."""
    if family is None:
        family = extension_family(gad)
    if max_ps_vertices is None:
        max_ps_vertices = get_config('gadgets', 'max_ps_vertices', default=22)

    results = {axiom: AxiomResult(axiom) for axiom in AXIOMS}
    n = len(gad.h)
    members = tqdm(family, desc=f'{gad.name} / {p.name}', disable=not progress)
    for member in members:
        g = member.graph
        validate_extension(gad, g)
        dm = all_pairs_distances(g)
        cmask = np.zeros(len(g), dtype=bool)
        cmask[sorted(gad.code)] = True

        fresh_b = [v for v in range(n, len(g)) if g.neighbors(v) & gad.border]
        fresh_other = [v for v in range(n, len(g)) if not g.neighbors(v) & gad.border]

        pair = _undistinguished(p, dm, cmask, range(n), range(len(g)))
        results['p_h'].record(member.name, pair and f'{pair[0]} and {pair[1]} are not distinguished by C')
        pair = _undistinguished(p, dm, cmask, fresh_b, fresh_other)
        results['p_b'].record(member.name, pair and f'{pair[0]} and {pair[1]} are not distinguished by C')
        results['p_d'].record(member.name, _check_dominated(gad, p, g, fresh_b))

        if len(g) > max_ps_vertices:
            results['p_s'].skip()
        else:
            failure, checked = _check_size(gad, p, g, budget)
            if checked:
                results['p_s'].record(member.name, failure)
            else:
                logger.warning(f'p_s unchecked on {member.name}: solver budget exhausted')
                results['p_s'].skip()

    if gad.meta.local:
        results['p_l'].record('gadget', check_locality(gad, p.radius))

    report = AxiomReport(gad.name, p.name, [m.name for m in family],
                         is_bipartite(b_single_extension(gad)), results)
    logger.debug(f'{gad.name} / {p.name}: ' + ', '.join(f'{a}={r.verdict.value}' for a, r in results.items()))
    return report
