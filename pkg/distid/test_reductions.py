#!/usr/bin/env python3
"""
Tests for the Hitting Set reductions: graph sizes, lift/extract and the
hitting set -> DIS -> hitting set round trip.

The worked instance throughout is the universe {1, 2, 3, 4} with the sets
{1, 2} and {2, 3, 4}; its minimum hitting set is {2}.
"""

import itertools
import sys
from pathlib import Path

import pytest

_repo_root = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(_repo_root))

from distid.gadgets import gadget_1layered, gadget_local_0layered, gadget_r_ic, parse_gadget  # noqa: E402
from distid.graph_core import RoleKind, RoleLabel, all_pairs_distances, is_bipartite, is_connected  # noqa: E402
from distid.problems import TraitViolation, parse_problem  # noqa: E402
from distid.reductions import (  # noqa: E402
    CNF, ReductionError, ReductionKind, bit, build_apex_graph, build_artifact,
    build_associated_graph, build_compressed_graph, build_distance_id_graph, check_compatibility,
    ell, expected_order, extract_hitting_set, is_satisfiable, lift_hitting_set, literal_element,
    phi, random_cnf, random_instance, roundtrip, sat_to_hitting_set, size_bound, twin_variants,
)
from distid.solver import HittingSetInstance, Status, is_dis, is_hitting_set, min_hitting_set  # noqa: E402

FIG2 = HittingSetInstance(4, [(1, 2), (2, 3, 4)])
MD_INF = parse_problem('md:inf')
MD2 = parse_problem('md:2')


# ---------------------------------------------------------------------------
# Helpers and sizes
# ---------------------------------------------------------------------------

def test_ell_and_bit():
    assert [ell(x) for x in (1, 2, 3, 4, 5, 8)] == [1, 2, 2, 3, 3, 4]
    with pytest.raises(ValueError):
        ell(0)
    # 5 = 101 over three bits, most significant first
    assert [bit(5, k, 3) for k in (1, 2, 3)] == [1, 0, 1]
    with pytest.raises(ValueError):
        bit(5, 4, 3)


def test_associated_graph():
    g = build_associated_graph(FIG2)
    assert len(g) == 6
    assert g.edge_count() == 5
    assert is_bipartite(g)
    assert g.label(0) == RoleLabel.element(1)
    assert g.label(4) == RoleLabel.set_vertex(1)
    assert g.neighbors(5) == {1, 2, 3}


def test_distance_id_graph_size():
    gad = gadget_local_0layered(2)
    art = build_distance_id_graph(gad, 2, FIG2)
    assert len(art.graph) == 73
    assert art.copies == 6
    assert art.offset == 30
    assert expected_order(ReductionKind.DISTANCE_ID, len(gad), 2, FIG2) == 73
    assert size_bound(ReductionKind.DISTANCE_ID, len(gad), 2, FIG2) == 84
    assert is_connected(art.graph)
    assert is_bipartite(art.graph)
    assert art.kind_label == 'distance_id(2)'
    assert not art.equivalence_untested


def test_distance_id_paths_reach_only_set_vertices():
    art = build_distance_id_graph(gadget_local_0layered(3), 3, FIG2)
    dm = all_pairs_distances(art.graph)
    for j, s in enumerate(FIG2.sets, start=1):
        v, vbar = art.set_pair(j)
        for i in s:
            assert dm[art.element_vertex(i), v] == 3
            assert dm[art.element_vertex(i), vbar] == 5
    # two vertices per membership
    paths = [v for v in art.graph.vertices() if art.graph.label(v).kind is RoleKind.PATH]
    assert len(paths) == 2 * 5
    assert all(art.graph.degree(v) == 2 for v in paths)


def test_distance_id_radius_one_has_no_paths():
    art = build_distance_id_graph(gadget_local_0layered(1), 1, FIG2)
    assert not any(art.graph.label(v).kind is RoleKind.PATH for v in art.graph.vertices())
    assert art.graph.has_edge(art.element_vertex(1), art.set_pair(1)[0])
    assert art.element_region(1) == [art.element_vertex(1)]


def test_apex_graph_size():
    gad = gadget_1layered()
    art = build_apex_graph(gad, FIG2)
    assert len(art.graph) == 69
    assert art.offset == 30
    assert art.kind_label == 'apex'
    apex = art.vertex(RoleLabel.apex())
    assert art.graph.degree(apex) == 12
    assert expected_order(ReductionKind.APEX, len(gad), 1, FIG2) == 69
    assert size_bound(ReductionKind.APEX, len(gad), 1, FIG2) == 72
    assert is_bipartite(art.graph)


def test_compressed_graph_size():
    gad = gadget_local_0layered(2)
    art = build_compressed_graph(gad, 2, FIG2)
    assert len(art.graph) == 64
    assert art.copies == 5
    assert art.offset == 25
    assert art.copy_names() == ['E1', 'E2', 'E3', 'S1', 'S2']
    assert size_bound(ReductionKind.COMPRESSED, len(gad), 2, FIG2) == 64
    assert is_connected(art.graph)
    assert is_bipartite(art.graph)
    # a^0 sees the border of every element copy plus a^1
    assert art.graph.degree(art.vertex(RoleLabel.apex_path(0))) == 2 * 3 + 1


def test_compressed_binary_encoding():
    gad = gadget_local_0layered(2)
    art = build_compressed_graph(gad, 2, FIG2)
    border_names = [gad.names[b] for b in sorted(gad.border)]
    for i in range(1, 5):
        head = art.element_vertex(i)
        for k in range(1, 4):
            copy_border = {art.vertex(RoleLabel.gadget(f'E{k}', name)) for name in border_names}
            touches = copy_border <= art.graph.neighbors(head)
            assert touches == bool(bit(i, k, 3)), f'element {i}, bit {k}'
    v, vbar = art.set_pair(2)
    ends = {art.vertex(RoleLabel.path(i, None, 1)) for i in (2, 3, 4)}
    assert art.graph.neighbors(v) == art.graph.neighbors(vbar) | ends


def test_single_element_instance_is_flagged():
    inst = HittingSetInstance(1, [(1,)])
    assert build_apex_graph(gadget_1layered(), inst).equivalence_untested
    assert build_distance_id_graph(gadget_local_0layered(1), 1, inst).equivalence_untested


def test_builders_reject_bad_input():
    with pytest.raises(ValueError):
        build_distance_id_graph(gadget_local_0layered(1), 0, FIG2)
    with pytest.raises(ValueError):
        build_apex_graph(gadget_1layered(), HittingSetInstance(3, [(1, 2)]))


@pytest.mark.parametrize('n,m,r', list(itertools.product(range(1, 9), range(1, 7), range(1, 4))))
def test_random_instances_respect_size_bounds(n, m, r):
    inst = random_instance(n, m, seed=100 * n + 10 * m + r)
    assert sum(len(s) for s in inst.sets) <= n + 2 * m
    for gad in (gadget_local_0layered(r), gadget_1layered()):
        for kind in ReductionKind:
            art = build_artifact(kind, gad, r, inst)
            assert len(art.graph) == expected_order(kind, len(gad), art.r, inst)
            assert len(art.graph) <= size_bound(kind, len(gad), art.r, inst), f'{kind.value} {gad.name}'


# ---------------------------------------------------------------------------
# Compatibility
# ---------------------------------------------------------------------------

def test_compatibility_gate():
    check_compatibility(build_apex_graph(gadget_1layered(), FIG2), MD_INF)
    check_compatibility(build_distance_id_graph(gadget_local_0layered(2), 2, FIG2), MD2)
    check_compatibility(build_compressed_graph(gadget_1layered(), 1, FIG2), parse_problem('ld:1'))

    with pytest.raises(TraitViolation):
        check_compatibility(build_apex_graph(gadget_1layered(), FIG2), parse_problem('ic:1'))
    with pytest.raises(TraitViolation):
        check_compatibility(build_distance_id_graph(gadget_local_0layered(2), 2, FIG2), parse_problem('md:1'))
    with pytest.raises(TraitViolation):
        check_compatibility(build_compressed_graph(gadget_1layered(), 2, FIG2), MD2)
    with pytest.raises(TraitViolation):
        check_compatibility(build_distance_id_graph(gadget_1layered(), 1, FIG2), parse_problem('ld:1'))


# ---------------------------------------------------------------------------
# Lift and extract
# ---------------------------------------------------------------------------

def test_apex_lift_and_extract():
    art = build_apex_graph(gadget_1layered(), FIG2)
    lifted = lift_hitting_set(art, [2])
    assert len(lifted) == 31
    assert art.element_vertex(2) in lifted
    assert is_dis(art.graph, MD_INF, lifted)[0]
    assert extract_hitting_set(art, lifted, MD_INF) == (2,)


def test_compressed_lift():
    art = build_compressed_graph(gadget_local_0layered(2), 2, FIG2)
    lifted = lift_hitting_set(art, [2])
    assert len(lifted) == 26
    assert is_dis(art.graph, MD2, lifted)[0]
    assert extract_hitting_set(art, lifted, MD2) == (2,)


def test_distance_id_lift_for_md_and_ld():
    art = build_distance_id_graph(gadget_local_0layered(2), 2, FIG2)
    lifted = lift_hitting_set(art, [2])
    assert len(lifted) == 31
    assert is_dis(art.graph, MD2, lifted)[0]
    assert is_dis(art.graph, parse_problem('ld:2'), lifted)[0]


def test_ic_gadget_lift():
    art = build_distance_id_graph(gadget_r_ic(1), 1, FIG2)
    lifted = lift_hitting_set(art, [2])
    assert len(lifted) == 1 + 6 * 6
    assert is_dis(art.graph, parse_problem('ic:1'), lifted)[0]


def test_lift_rejects_non_hitting_sets():
    art = build_apex_graph(gadget_1layered(), FIG2)
    with pytest.raises(ReductionError):
        lift_hitting_set(art, [1])
    with pytest.raises(ReductionError):
        lift_hitting_set(art, [])
    with pytest.raises(ReductionError):
        lift_hitting_set(art, [2, 9])


def test_extract_rejects_invalid_dis():
    art = build_apex_graph(gadget_1layered(), FIG2)
    with pytest.raises(ReductionError):
        extract_hitting_set(art, art.code_vertices(), MD_INF)


def test_extract_maps_set_vertices_to_their_smallest_element():
    art = build_apex_graph(gadget_1layered(), FIG2)
    assert phi(FIG2, 1) == 1
    assert phi(FIG2, 2) == 2
    _, vbar = art.set_pair(1)
    dis = set(lift_hitting_set(art, [2])) | {vbar}
    assert is_dis(art.graph, MD_INF, dis)[0]
    assert extract_hitting_set(art, dis, MD_INF) == (1, 2)


def test_twin_variants_stay_valid():
    art = build_apex_graph(gadget_1layered(), FIG2)
    lifted = lift_hitting_set(art, [2])
    variants = twin_variants(art, lifted, MD_INF, count=5, seed=1)
    assert variants
    for variant in variants:
        assert variant != lifted
        assert len(variant) == len(lifted)
        assert is_dis(art.graph, MD_INF, variant)[0]
        extracted = extract_hitting_set(art, variant, MD_INF)
        assert len(extracted) <= len(variant) - art.offset


# ---------------------------------------------------------------------------
# Round trip
# ---------------------------------------------------------------------------

def test_roundtrip_on_worked_instance():
    cases = [
        (build_apex_graph(gadget_1layered(), FIG2), MD_INF),
        (build_distance_id_graph(gadget_local_0layered(2), 2, FIG2), MD2),
        (build_compressed_graph(gadget_local_0layered(2), 2, FIG2), MD2),
    ]
    for art, p in cases:
        record = roundtrip(art, p, variants=3, seed=5)
        assert record.passed, f'{record.kind}: {record.failures}'
        assert record.k == 1
        assert len(record.lifted) == 1 + art.offset
        assert record.lifted_valid
        assert record.extracted == (2,)


def test_roundtrip_reports_an_aborted_solver():
    record = roundtrip(build_apex_graph(gadget_1layered(), FIG2), MD_INF, budget=0)
    assert record.hs_result.status is Status.ABORTED
    assert not record.passed


# n in 2..8, m in 1..6 and r in 1..3, one seeded instance each
ROUNDTRIP_BATCH = [(n, m, r, 100 * n + 10 * m + r)
                   for n, m, r in itertools.product(range(2, 9), range(1, 7), range(1, 4))]


@pytest.mark.slow
@pytest.mark.parametrize('kind,gadget,problem', [
    (ReductionKind.APEX, '1layered', 'md:inf'),
    (ReductionKind.DISTANCE_ID, 'local0:{r}', 'md:{r}'),
    (ReductionKind.DISTANCE_ID, 'ic:1', 'ic:1'),
    (ReductionKind.COMPRESSED, 'local0:{r}', 'ld:{r}'),
    (ReductionKind.COMPRESSED, '1layered', 'md:1'),
])
def test_roundtrip_on_random_instances(kind, gadget, problem):
    """Lift an optimal hitting set, then extract it and five twin-swapped variants."""
    assert len(ROUNDTRIP_BATCH) >= 100
    for n, m, r, seed in ROUNDTRIP_BATCH:
        radius = r if '{r}' in problem else 1
        p = parse_problem(problem.format(r=radius))
        inst = random_instance(n, m, seed)
        art = build_artifact(kind, parse_gadget(gadget.format(r=radius)), radius, inst)
        check_compatibility(art, p)
        record = roundtrip(art, p, variants=5, seed=seed)
        case = f'n={n} m={m} r={radius} seed={seed}'
        assert record.passed, f'{case}: {record.failures}'
        assert len(record.lifted) == record.k + art.offset, case
        assert record.variants_checked == 5, case


# ---------------------------------------------------------------------------
# SAT
# ---------------------------------------------------------------------------

def test_literal_elements():
    assert literal_element(1) == 1
    assert literal_element(-1) == 2
    assert literal_element(3) == 5
    assert literal_element(-3) == 6


def test_sat_to_hitting_set_layout():
    cnf = CNF(3, [(1, -2), (2, 3, -1)])
    inst = sat_to_hitting_set(cnf)
    assert inst.n == 6
    assert inst.sets == [(1, 2), (3, 4), (5, 6), (1, 4), (2, 3, 5)]
    with pytest.raises(ValueError):
        sat_to_hitting_set(CNF(2, [()]))
    with pytest.raises(ValueError):
        sat_to_hitting_set(CNF(2, [(3,)]))


def test_unused_variable_still_gets_a_pair():
    inst = sat_to_hitting_set(CNF(2, [(1,)]))
    assert inst.sets == [(1, 2), (3, 4), (1,)]
    assert min_hitting_set(inst).k == 2


def test_unsatisfiable_formula_needs_more():
    cnf = CNF(1, [(1,), (-1,)])
    assert not is_satisfiable(cnf)
    assert min_hitting_set(sat_to_hitting_set(cnf)).k == 2


@pytest.mark.parametrize('seed', range(60))
def test_satisfiable_iff_hitting_set_matches_variable_count(seed):
    num_vars = 3 + seed % 4
    cnf = random_cnf(num_vars, 2 + seed % 23, seed)
    assert all(len(clause) == 3 for clause in cnf.clauses)
    result = min_hitting_set(sat_to_hitting_set(cnf))
    assert result.status is Status.OPTIMAL
    assert (result.k == cnf.num_vars) == is_satisfiable(cnf)


def test_random_generators_are_deterministic():
    assert random_instance(6, 4, 3).sets == random_instance(6, 4, 3).sets
    assert random_cnf(5, 7, 2).clauses == random_cnf(5, 7, 2).clauses
    inst = random_instance(6, 4, 3)
    assert is_hitting_set(inst, range(1, 7))
    with pytest.raises(ValueError):
        random_instance(0, 2, 1)
