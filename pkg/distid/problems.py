"""
Identifying problems for distid.

An IdentifyingProblem pairs a domination radius r with a distinguishing
predicate f_G[w](u,v). Predicates only see the graph through its
DistanceMatrix and are evaluated for all witnesses w at once: the rule
receives the matrix and the unordered pair and returns a boolean mask over
w. Evaluation always goes through the ordered pair (min, max), so every
predicate is symmetric.

Built-in families (selection strings for the CLI):

    ic:<r>   r-identifying code        w in N_r[u] xor N_r[v]
    ld:<r>   r-locating-dominating     w in (N_r[u] xor N_r[v]) or w in {u, v}
    md:<r>   r-resolving set           w in N_r[u] or N_r[v], and d(u,w) != d(v,w)
    md:inf   resolving set (metric dimension)

Traits are the axioms of distance identifying functions:

    alpha      f[w](u,v) is false when d(u,w) = d(v,w)
    beta1(i)   f[w](u,v) is true when exactly one of u, v lies within i of w
    beta2(i)   f[w](u,v) is false when neither u nor v lies within i of w
    gamma(i)   f[w](u,v) is true when the nearer of u, v lies within i and d(u,w) != d(v,w)

A problem is i-local when beta1(i) and beta2(i) hold and i-layered when
gamma(i) holds. Traits are checked exhaustively on finite corpora.
"""

import functools
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .graph_core import (
    INFINITY, DistanceMatrix, Graph, Radius, all_pairs_distances, check_radius,
    format_radius, in_ball, standard_corpus,
)

logger = logging.getLogger(__name__)

# rule(dm, u, v) -> boolean mask over witnesses w, with u < v
Rule = Callable[[DistanceMatrix, int, int], np.ndarray]
# predicate(dm, w, u, v) -> bool
Predicate = Callable[[DistanceMatrix, int, int, int], bool]


class TraitKind(Enum):
    DISTANCE = 'distance'
    LOCAL = 'local'
    LAYERED = 'layered'


@dataclass(frozen=True)
class Trait:
    kind: TraitKind
    i: Optional[Radius] = None

    @classmethod
    def distance(cls):
        return cls(TraitKind.DISTANCE)

    @classmethod
    def local(cls, i):
        return cls(TraitKind.LOCAL, i)

    @classmethod
    def layered(cls, i):
        return cls(TraitKind.LAYERED, i)

    def axioms(self) -> List['Axiom']:
        if self.kind is TraitKind.DISTANCE:
            return [Axiom(AxiomKind.ALPHA)]
        if self.kind is TraitKind.LOCAL:
            return [Axiom(AxiomKind.BETA1, self.i), Axiom(AxiomKind.BETA2, self.i)]
        return [Axiom(AxiomKind.GAMMA, self.i)]

    def __str__(self):
        if self.kind is TraitKind.DISTANCE:
            return 'distance'
        return f'{self.kind.value}({format_radius(self.i)})'


class AxiomKind(Enum):
    ALPHA = 'alpha'
    BETA1 = 'beta1'
    BETA2 = 'beta2'
    GAMMA = 'gamma'


@dataclass(frozen=True)
class Axiom:
    kind: AxiomKind
    i: Optional[Radius] = None

    def __str__(self):
        if self.kind is AxiomKind.ALPHA:
            return 'alpha'
        return f'{self.kind.value}({format_radius(self.i)})'


@dataclass(frozen=True)
class Counterexample:
    graph: Graph
    w: int
    u: int
    v: int
    d_uw: int
    d_vw: int
    value: bool

    def describe(self) -> str:
        return (f'n={len(self.graph)} edges={self.graph.sorted_edges()} '
                f'w={self.w} u={self.u} v={self.v} d(u,w)={self.d_uw} d(v,w)={self.d_vw} '
                f'f={str(self.value).lower()}')


@dataclass(frozen=True)
class TraitReport:
    axiom: Axiom
    holds: bool
    counterexample: Optional[Counterexample] = None
    graphs_checked: int = 0


class TraitViolation(ValueError):
    """A problem lacks a trait required by a construction."""

    def __init__(self, message, report: Optional[TraitReport] = None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True, eq=False)
class IdentifyingProblem:
    """A distance identifying function together with its domination radius."""
    name: str
    radius: Radius
    rule: Rule
    claimed_traits: FrozenSet[Trait] = field(default_factory=frozenset)

    def distinguishers(self, dm: DistanceMatrix, u: int, v: int) -> np.ndarray:
        """Mask of witnesses w with f[w](u,v) true."""
        if u > v:
            u, v = v, u
        return np.asarray(self.rule(dm, u, v), dtype=bool)

    def distinguishes(self, dm: DistanceMatrix, w: int, u: int, v: int) -> bool:
        return bool(self.distinguishers(dm, u, v)[w])

    def claims(self, trait: Trait) -> bool:
        """Whether the trait is claimed; a claimed layered(j) covers every layered(i) with i <= j."""
        if trait.kind is TraitKind.LAYERED:
            return any(t.kind is TraitKind.LAYERED and t.i >= trait.i for t in self.claimed_traits)
        return trait in self.claimed_traits

    @property
    def is_finite(self) -> bool:
        return self.radius != INFINITY

    def __str__(self):
        return self.name


# ---------------------------------------------------------------------------
# Built-in families
# ---------------------------------------------------------------------------

def _finite_radius(r, family):
    r = check_radius(r)
    if r == INFINITY:
        raise ValueError(f'{family} needs a finite radius')
    return r


@functools.lru_cache(maxsize=None)
def make_r_ic(r) -> IdentifyingProblem:
    r = _finite_radius(r, 'r-IC')

    def rule(dm, u, v):
        return in_ball(dm.row(u), r) ^ in_ball(dm.row(v), r)

    return IdentifyingProblem(f'ic:{r}', r, rule,
                              frozenset({Trait.distance(), Trait.local(r)}))


@functools.lru_cache(maxsize=None)
def make_r_ld(r) -> IdentifyingProblem:
    r = _finite_radius(r, 'r-LD')

    def rule(dm, u, v):
        du, dv = dm.row(u), dm.row(v)
        return (in_ball(du, r) ^ in_ball(dv, r)) | (du == 0) | (dv == 0)

    layered = 1 if r == 1 else 0
    return IdentifyingProblem(f'ld:{r}', r, rule,
                              frozenset({Trait.distance(), Trait.local(r), Trait.layered(layered)}))


@functools.lru_cache(maxsize=None)
def make_r_md(r) -> IdentifyingProblem:
    r = check_radius(r)

    def rule(dm, u, v):
        du, dv = dm.row(u), dm.row(v)
        return (in_ball(du, r) | in_ball(dv, r)) & (du != dv)

    return IdentifyingProblem(f'md:{format_radius(r)}', r, rule,
                              frozenset({Trait.distance(), Trait.local(r), Trait.layered(r)}))


def from_predicate(name: str, radius, predicate: Predicate,
                   claimed_traits: Iterable[Trait] = ()) -> IdentifyingProblem:
    """Admit a user-supplied scalar predicate f(dm, w, u, v)."""
    radius = check_radius(radius)

    def rule(dm, u, v):
        return np.array([bool(predicate(dm, w, u, v)) for w in range(dm.n)], dtype=bool)

    return IdentifyingProblem(name, radius, rule, frozenset(claimed_traits))


PROBLEM_PATTERN = re.compile(r'^(ic|ld|md):(\d+|inf)$', re.IGNORECASE)

PROBLEM_FACTORIES = {
    'ic': make_r_ic,
    'ld': make_r_ld,
    'md': make_r_md,
}


def parse_problem(text: str) -> IdentifyingProblem:
    """Parse a selection string such as ``ic:2`` or ``md:inf``."""
    match = PROBLEM_PATTERN.match(text.strip())
    if not match:
        raise ValueError(f'Unknown problem: {text!r} (expected ic:<r>, ld:<r>, md:<r> or md:inf)')
    family, radius = match.groups()
    radius = INFINITY if radius.lower() == 'inf' else int(radius)
    return PROBLEM_FACTORIES[family.lower()](radius)


# ---------------------------------------------------------------------------
# Trait checks
# ---------------------------------------------------------------------------

def _violations(axiom: Axiom, mask: np.ndarray, du: np.ndarray, dv: np.ndarray) -> np.ndarray:
    """Witnesses at which the axiom's quantified statement fails for this pair."""
    if axiom.kind is AxiomKind.ALPHA:
        return (du == dv) & mask
    near_u, near_v = in_ball(du, axiom.i), in_ball(dv, axiom.i)
    if axiom.kind is AxiomKind.BETA1:
        return (near_u ^ near_v) & ~mask
    if axiom.kind is AxiomKind.BETA2:
        return ~near_u & ~near_v & mask
    return (near_u | near_v) & (du != dv) & ~mask


def check_trait(p: IdentifyingProblem, axiom, corpus: Iterable[Graph]) -> TraitReport:
    """Test an axiom over every (w, {u, v}) triple of every corpus graph.

    Accepts an Axiom or a Trait with a single axiom. Returns the first
    counterexample in corpus order (graphs, then pairs u < v, then w).
    """
    if isinstance(axiom, Trait):
        axioms = axiom.axioms()
        if len(axioms) != 1:
            raise ValueError(f'{axiom} bundles {len(axioms)} axioms; check them one at a time')
        axiom = axioms[0]

    checked = 0
    for g in corpus:
        checked += 1
        dm = all_pairs_distances(g)
        for u in range(len(g)):
            for v in range(u + 1, len(g)):
                mask = p.distinguishers(dm, u, v)
                if not np.array_equal(mask, p.distinguishers(dm, v, u)):
                    raise ValueError(f'{p.name} is not symmetric on pair ({u}, {v})')
                du, dv = dm.row(u), dm.row(v)
                bad = np.flatnonzero(_violations(axiom, mask, du, dv))
                if bad.size:
                    w = int(bad[0])
                    cex = Counterexample(g, w, u, v, int(du[w]), int(dv[w]), bool(mask[w]))
                    logger.info(f'{p.name}: {axiom} fails: {cex.describe()}')
                    return TraitReport(axiom, False, cex, checked)
    return TraitReport(axiom, True, None, checked)


@functools.lru_cache(maxsize=4)
def default_trait_corpus(seed: int = 2024) -> Tuple[Graph, ...]:
    """Every graph up to 5 vertices plus the named families and seeded graphs up to 6."""
    return tuple(standard_corpus(max_n=6, seed=seed, count=50, exhaustive_n=5))


# keyed on problem identity; built-ins are shared through the memoised factories
_report_cache = {}


def _cached_check(p: IdentifyingProblem, axiom: Axiom, seed: int) -> TraitReport:
    key = (p, axiom, seed)
    if key not in _report_cache:
        _report_cache[key] = check_trait(p, axiom, default_trait_corpus(seed))
    return _report_cache[key]


def verify_claims(p: IdentifyingProblem, corpus: Optional[Sequence[Graph]] = None,
                  seed: int = 2024) -> List[TraitReport]:
    """Check every axiom behind the problem's claimed traits."""
    reports = []
    for trait in sorted(p.claimed_traits, key=str):
        for axiom in trait.axioms():
            if corpus is None:
                reports.append(_cached_check(p, axiom, seed))
            else:
                reports.append(check_trait(p, axiom, corpus))
    return reports


def require_traits(p: IdentifyingProblem, traits: Iterable[Trait],
                   corpus: Optional[Sequence[Graph]] = None, seed: int = 2024) -> None:
    """Fail fast unless p claims every trait and the claims survive the corpus."""
    for trait in traits:
        if not p.claims(trait):
            raise TraitViolation(f'{p.name} does not claim {trait}')
        for axiom in trait.axioms():
            report = _cached_check(p, axiom, seed) if corpus is None else check_trait(p, axiom, corpus)
            if not report.holds:
                raise TraitViolation(
                    f'{p.name} claims {trait} but {axiom} fails: {report.counterexample.describe()}',
                    report)
