"""
Exact and greedy solvers for distance identifying sets and Hitting Set.

A vertex set C is an (f,r)-DIS exactly when it hits every closed ball
N_r[v] and every distinguisher set D(u,v) = {w : f[w](u,v)}. Both problems
therefore run through one hitting-set engine over integer bit-sets:

1. constraints are deduplicated and supersets dropped (hitting the smaller
   set hits the larger one);
2. a greedy pass gives the first upper bound;
3. branch and bound finds the optimum size k: branch on the unhit
   constraint of least cardinality (take its i-th element, exclude the
   earlier ones), propagate unit constraints and prune with a disjoint
   packing lower bound;
4. a lexicographic search over k-sets returns the canonical witness and,
   when asked, every optimal witness.

Open-neighbourhood twins x, y can only be told apart by x or y themselves,
so their Distinguish constraint is a subset of {x, y}; least-cardinality
branching visits those constraints first.

Both phases share one node budget. When it runs out the result is ABORTED
and carries the best size found so far.
"""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .config import get_config
from .graph_core import INFINITY, DistanceMatrix, Graph, all_pairs_distances, check_radius
from .problems import IdentifyingProblem

logger = logging.getLogger(__name__)


class Status(Enum):
    OPTIMAL = 'optimal'
    INFEASIBLE = 'infeasible'
    ABORTED = 'aborted'
    FEASIBLE = 'feasible'


class ConstraintKind(Enum):
    DOMINATE = 'dominate'
    DISTINGUISH = 'distinguish'
    HIT = 'hit'


@dataclass(frozen=True)
class ConstraintTag:
    kind: ConstraintKind
    u: int
    v: Optional[int] = None

    def __str__(self):
        if self.kind is ConstraintKind.DISTINGUISH:
            return f'distinguish({self.u},{self.v})'
        return f'{self.kind.value}({self.u})'


@dataclass
class ConstraintFamily:
    """Constraints over ground elements 0..ground_size-1, each an int bit-set."""
    ground_size: int
    constraints: List[Tuple[ConstraintTag, int]] = field(default_factory=list)

    def empty_constraint(self) -> Optional[ConstraintTag]:
        for tag, bits in self.constraints:
            if bits == 0:
                return tag
        return None

    def is_hit_by(self, bits: int) -> bool:
        return all(s & bits for _, s in self.constraints)

    def __len__(self):
        return len(self.constraints)


@dataclass(frozen=True)
class SolveResult:
    status: Status
    k: Optional[int] = None
    witness: Optional[Tuple[int, ...]] = None
    tag: Optional[ConstraintTag] = None
    bound: Optional[int] = None
    nodes: int = 0

    @property
    def ok(self) -> bool:
        return self.status in (Status.OPTIMAL, Status.FEASIBLE)


@dataclass
class HittingSetInstance:
    """Universe {1..n} with a list of non-empty subsets (1-based elements)."""
    n: int
    sets: List[Tuple[int, ...]]

    def __post_init__(self):
        self.sets = [tuple(sorted(set(s))) for s in self.sets]

    @property
    def m(self) -> int:
        return len(self.sets)

    def validate(self) -> 'HittingSetInstance':
        if self.n < 1:
            raise ValueError(f'Universe size must be positive, got {self.n}')
        covered = set()
        for j, s in enumerate(self.sets, start=1):
            if not s:
                raise ValueError(f'Set {j} is empty')
            for x in s:
                if not 1 <= x <= self.n:
                    raise ValueError(f'Set {j} has element {x} outside 1..{self.n}')
            covered.update(s)
        missing = sorted(set(range(1, self.n + 1)) - covered)
        if missing:
            raise ValueError(f'Element {missing[0]} is not covered by any set')
        return self

    def to_family(self) -> ConstraintFamily:
        return ConstraintFamily(self.n, [
            (ConstraintTag(ConstraintKind.HIT, j), _to_bits(x - 1 for x in s))
            for j, s in enumerate(self.sets, start=1)
        ])


# ---------------------------------------------------------------------------
# Bit-set helpers
# ---------------------------------------------------------------------------

def _to_bits(elements: Iterable[int]) -> int:
    bits = 0
    for e in elements:
        bits |= 1 << int(e)
    return bits


def _from_bits(bits: int) -> Tuple[int, ...]:
    out = []
    while bits:
        low = bits & -bits
        out.append(low.bit_length() - 1)
        bits ^= low
    return tuple(out)


def _popcount(bits: int) -> int:
    return bin(bits).count('1')


def _mask_to_bits(mask: np.ndarray) -> int:
    return _to_bits(np.flatnonzero(mask))


def _reduce_constraints(sets: Iterable[int]) -> List[int]:
    """Deduplicate and drop supersets; result sorted by (cardinality, value)."""
    unique = sorted(set(sets), key=lambda s: (_popcount(s), s))
    kept = []
    for s in unique:
        if not any(k & s == k for k in kept):
            kept.append(s)
    return kept


def _packing_bound(sets: Sequence[int]) -> int:
    """Size of a greedy family of pairwise disjoint sets; each needs its own element."""
    used = 0
    count = 0
    for s in sets:
        if not s & used:
            used |= s
            count += 1
    return count


class _BudgetExhausted(Exception):
    pass


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------

class HittingSetEngine:
    """Branch-and-bound minimum hitting set over int bit-sets."""

    def __init__(self, ground_size: int, sets: Iterable[int], budget: int):
        self.ground_size = ground_size
        self.sets = _reduce_constraints(sets)
        self.budget = budget
        self.nodes = 0
        self.best_size = ground_size + 1
        self.best = None

    def _spend(self):
        self.nodes += 1
        if self.nodes > self.budget:
            raise _BudgetExhausted()

    def greedy(self) -> int:
        """Most-hitting element first (lowest index on ties), then drop redundant picks."""
        if not self.sets:
            return 0
        incidence = np.zeros((len(self.sets), self.ground_size), dtype=bool)
        for row, s in enumerate(self.sets):
            incidence[row, list(_from_bits(s))] = True
        unhit = np.ones(len(self.sets), dtype=bool)
        picked = []
        while unhit.any():
            counts = incidence[unhit].sum(axis=0)
            e = int(np.argmax(counts))
            picked.append(e)
            unhit &= ~incidence[:, e]
        chosen = _to_bits(picked)
        for e in reversed(picked):
            trial = chosen & ~(1 << e)
            if all(s & trial for s in self.sets):
                chosen = trial
        return chosen

    def _search(self, chosen: int, excluded: int, unhit: List[int]):
        self._spend()
        while True:
            if _popcount(chosen) >= self.best_size:
                return
            avail = []
            for s in unhit:
                if s & chosen:
                    continue
                a = s & ~excluded
                if not a:
                    return
                avail.append(a)
            forced = 0
            for a in avail:
                if not a & (a - 1):
                    forced |= a
            if not forced:
                break
            chosen |= forced
            unhit = avail

        size = _popcount(chosen)
        if not avail:
            self.best_size, self.best = size, chosen
            return
        if size + _packing_bound(avail) >= self.best_size:
            return

        pivot = min(avail, key=_popcount)
        for e in _from_bits(pivot):
            self._search(chosen | (1 << e), excluded, avail)
            excluded |= 1 << e

    def _lex(self, chosen: int, last: int, slots: int, unhit: List[int],
             out: List[int], limit: Optional[int]) -> bool:
        self._spend()
        higher = ~((1 << (last + 1)) - 1)
        avail = []
        cap = self.ground_size - 1
        union = 0
        for s in unhit:
            if s & chosen:
                continue
            a = s & higher
            if not a:
                return False
            avail.append(a)
            union |= a
            cap = min(cap, a.bit_length() - 1)
        if not avail:
            out.append(chosen)
            return limit is not None and len(out) >= limit
        if slots == 0 or _packing_bound(avail) > slots:
            return False
        # every later pick is larger, so the next one cannot exceed any set's maximum
        for e in _from_bits(union & ((1 << (cap + 1)) - 1)):
            if self._lex(chosen | (1 << e), e, slots - 1, avail, out, limit):
                return True
        return False

    def minimum_size(self) -> int:
        """Optimum size; raises _BudgetExhausted with best_size/best kept current."""
        upper = self.greedy()
        self.best_size, self.best = _popcount(upper), upper
        logger.debug(f'greedy upper bound {self.best_size} over {len(self.sets)} constraints')
        self._search(0, 0, self.sets)
        return self.best_size

    def optimal_sets(self, k: int, limit: Optional[int] = None) -> List[int]:
        """Size-k hitting sets in lexicographic order of their sorted elements."""
        out = []
        self._lex(0, -1, k, self.sets, out, limit)
        return out


def _run_engine(family: ConstraintFamily, budget: Optional[int],
                enumerate_all: bool = False) -> Tuple[SolveResult, List[int]]:
    if budget is None:
        budget = get_config('solver', 'budget', default=10_000_000)
    empty = family.empty_constraint()
    if empty is not None:
        logger.debug(f'infeasible: {empty} has no candidate')
        return SolveResult(Status.INFEASIBLE, tag=empty), []

    engine = HittingSetEngine(family.ground_size, (s for _, s in family.constraints), budget)
    try:
        k = engine.minimum_size()
        optima = engine.optimal_sets(k, None if enumerate_all else 1)
    except _BudgetExhausted:
        logger.warning(f'budget of {budget} nodes exhausted; best size {engine.best_size}')
        witness = _from_bits(engine.best) if engine.best is not None else None
        return SolveResult(Status.ABORTED, witness=witness, bound=engine.best_size,
                           nodes=engine.nodes), []

    witness = optima[0]
    if not family.is_hit_by(witness):
        raise RuntimeError('engine produced a set that misses a constraint')
    logger.debug(f'optimum {k} after {engine.nodes} nodes')
    return SolveResult(Status.OPTIMAL, k, _from_bits(witness), nodes=engine.nodes), optima


def enumerate_optimal(family: ConstraintFamily, k: int, budget: Optional[int] = None) -> List[Tuple[int, ...]]:
    """All hitting sets of size k that are minimal in cardinality, lexicographic order."""
    if budget is None:
        budget = get_config('solver', 'budget', default=10_000_000)
    engine = HittingSetEngine(family.ground_size, (s for _, s in family.constraints), budget)
    try:
        return [_from_bits(b) for b in engine.optimal_sets(k)]
    except _BudgetExhausted:
        raise RuntimeError(f'budget of {budget} nodes exhausted while enumerating optima')


# ---------------------------------------------------------------------------
# Distance identifying sets
# ---------------------------------------------------------------------------

def build_constraints(g: Graph, p: IdentifyingProblem, dm: Optional[DistanceMatrix] = None) -> ConstraintFamily:
    """One Dominate constraint per vertex, one Distinguish constraint per unordered pair."""
    if dm is None:
        dm = all_pairs_distances(g)
    n = len(g)
    constraints = []
    for v in range(n):
        constraints.append((ConstraintTag(ConstraintKind.DOMINATE, v), _mask_to_bits(dm.ball_mask(v, p.radius))))
    for u in range(n):
        for v in range(u + 1, n):
            constraints.append((ConstraintTag(ConstraintKind.DISTINGUISH, u, v),
                                _mask_to_bits(p.distinguishers(dm, u, v))))
    return ConstraintFamily(n, constraints)


def is_dis(g: Graph, p: IdentifyingProblem, c: Iterable[int],
           dm: Optional[DistanceMatrix] = None) -> Tuple[bool, Optional[ConstraintTag]]:
    """Whether c is an (f,r)-DIS of g, with the first violated constraint otherwise."""
    n = len(g)
    members = np.zeros(n, dtype=bool)
    for x in c:
        if not 0 <= x < n:
            raise ValueError(f'Vertex {x} is not in the graph (0..{n - 1})')
        members[x] = True
    if dm is None:
        dm = all_pairs_distances(g)
    for v in range(n):
        if not (dm.ball_mask(v, p.radius) & members).any():
            return False, ConstraintTag(ConstraintKind.DOMINATE, v)
    for u in range(n):
        for v in range(u + 1, n):
            if not (p.distinguishers(dm, u, v) & members).any():
                return False, ConstraintTag(ConstraintKind.DISTINGUISH, u, v)
    return True, None


def min_dis(g: Graph, p: IdentifyingProblem, budget: Optional[int] = None) -> SolveResult:
    logger.debug(f'min_dis {p.name} on n={len(g)} m={g.edge_count()}')
    result, _ = _run_engine(build_constraints(g, p), budget)
    return result


def enumerate_min_dis(g: Graph, p: IdentifyingProblem,
                      budget: Optional[int] = None) -> Tuple[SolveResult, List[Tuple[int, ...]]]:
    """Optimum plus every optimal witness in lexicographic order."""
    result, optima = _run_engine(build_constraints(g, p), budget, enumerate_all=True)
    return result, [_from_bits(b) for b in optima]


def greedy_dis(g: Graph, p: IdentifyingProblem) -> SolveResult:
    family = build_constraints(g, p)
    empty = family.empty_constraint()
    if empty is not None:
        return SolveResult(Status.INFEASIBLE, tag=empty)
    engine = HittingSetEngine(family.ground_size, (s for _, s in family.constraints), budget=0)
    chosen = _from_bits(engine.greedy())
    return SolveResult(Status.FEASIBLE, len(chosen), chosen)


def brute_force_min_dis(g: Graph, p: IdentifyingProblem, max_order: int = 12) -> SolveResult:
    """Exhaustive oracle: smallest size first, lexicographically smallest witness."""
    n = len(g)
    if n > max_order:
        raise ValueError(f'Brute force is limited to {max_order} vertices, got {n}')
    dm = all_pairs_distances(g)
    rows = [dm.ball_mask(v, p.radius) for v in range(n)]
    rows += [p.distinguishers(dm, u, v) for u in range(n) for v in range(u + 1, n)]
    if not rows:
        return SolveResult(Status.OPTIMAL, 0, ())
    needs = np.array(rows, dtype=bool)
    for k in range(n + 1):
        for combo in itertools.combinations(range(n), k):
            if needs[:, list(combo)].any(axis=1).all():
                return SolveResult(Status.OPTIMAL, k, combo)
    return SolveResult(Status.INFEASIBLE)


def kernel_bound(r, k: int) -> int:
    """Largest order of a graph with an r-local DIS of size k."""
    r = check_radius(r)
    if r == INFINITY:
        raise ValueError('The kernel bound needs a finite radius')
    return (r + 1) ** k + k


# ---------------------------------------------------------------------------
# Hitting Set
# ---------------------------------------------------------------------------

def is_hitting_set(inst: HittingSetInstance, elements: Iterable[int]) -> bool:
    chosen = set(elements)
    return all(chosen.intersection(s) for s in inst.sets)


def min_hitting_set(inst: HittingSetInstance, budget: Optional[int] = None) -> SolveResult:
    inst.validate()
    logger.debug(f'min_hitting_set n={inst.n} m={inst.m}')
    result, _ = _run_engine(inst.to_family(), budget)
    return _one_based(result)


def greedy_hitting_set(inst: HittingSetInstance) -> SolveResult:
    inst.validate()
    family = inst.to_family()
    engine = HittingSetEngine(family.ground_size, (s for _, s in family.constraints), budget=0)
    chosen = _from_bits(engine.greedy())
    return _one_based(SolveResult(Status.FEASIBLE, len(chosen), chosen))


def _one_based(result: SolveResult) -> SolveResult:
    if result.witness is None:
        return result
    return SolveResult(result.status, result.k, tuple(x + 1 for x in result.witness),
                       result.tag, result.bound, result.nodes)
