#!/usr/bin/env python3
"""Tests for the DIS and Hitting Set solver, checked against brute force."""

import itertools
import sys
from pathlib import Path

import pytest
from hypothesis import assume, given, settings, strategies as st
from hypothesis.strategies import composite

_repo_root = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(_repo_root))

from distid.graph_core import (  # noqa: E402
    Graph, complete_graph, cycle_graph, is_connected, path_graph, standard_corpus, twin_pairs,
)
from distid.problems import make_r_ic, make_r_ld, make_r_md, parse_problem  # noqa: E402
from distid.solver import (  # noqa: E402
    ConstraintKind, ConstraintTag, HittingSetInstance, Status, brute_force_min_dis,
    build_constraints, enumerate_min_dis, enumerate_optimal, greedy_dis, greedy_hitting_set,
    is_dis, is_hitting_set, kernel_bound, min_dis, min_hitting_set,
)

PROBLEMS = ['ic:1', 'ic:2', 'ld:1', 'ld:2', 'md:1', 'md:2', 'md:inf']

FIG2 = HittingSetInstance(4, [(1, 2), (2, 3, 4)])


@composite
def graphs(draw, max_n=7):
    n = draw(st.integers(min_value=1, max_value=max_n))
    pairs = list(itertools.combinations(range(n), 2))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph(n, [p for p, k in zip(pairs, keep) if k])


# ---------------------------------------------------------------------------
# Worked examples
# ---------------------------------------------------------------------------

def test_path_has_metric_dimension_one():
    result = min_dis(path_graph(5), make_r_md(float('inf')))
    assert result.status is Status.OPTIMAL
    assert result.k == 1
    assert result.witness == (0,), f'Expected an end vertex, got {result.witness}'


def test_cycle_metric_dimension():
    result = min_dis(cycle_graph(6), make_r_md(float('inf')))
    assert result.k == 2
    assert is_dis(cycle_graph(6), make_r_md(float('inf')), result.witness)[0]


@pytest.mark.parametrize('n', range(4, 9))
def test_metric_dimension_of_paths_and_cycles(n):
    md = make_r_md(float('inf'))
    assert min_dis(path_graph(n), md).k == 1
    assert min_dis(cycle_graph(n), md).k == 2


def test_c4_identifying_code():
    result = min_dis(cycle_graph(4), make_r_ic(1))
    assert result.status is Status.OPTIMAL
    assert result.k == 3


def test_closed_twins_are_infeasible_for_ic():
    result = min_dis(complete_graph(2), make_r_ic(1))
    assert result.status is Status.INFEASIBLE
    assert result.tag == ConstraintTag(ConstraintKind.DISTINGUISH, 0, 1)
    assert str(result.tag) == 'distinguish(0,1)'
    assert greedy_dis(complete_graph(2), make_r_ic(1)).status is Status.INFEASIBLE


def test_single_vertex():
    result = min_dis(Graph(1), make_r_md(1))
    assert result.k == 1 and result.witness == (0,)


def test_build_constraints_layout():
    family = build_constraints(path_graph(3), make_r_md(float('inf')))
    assert len(family) == 3 + 3
    tags = [str(tag) for tag, _ in family.constraints]
    assert tags[:3] == ['dominate(0)', 'dominate(1)', 'dominate(2)']
    assert dict(family.constraints)[ConstraintTag(ConstraintKind.DISTINGUISH, 0, 2)] == 0b101


def test_is_dis_reports_first_violation():
    g = path_graph(4)
    ok, tag = is_dis(g, make_r_md(1), [0])
    assert not ok
    assert tag == ConstraintTag(ConstraintKind.DOMINATE, 2)
    assert is_dis(g, make_r_md(float('inf')), [3]) == (True, None)
    with pytest.raises(ValueError):
        is_dis(g, make_r_md(1), [4])


def test_aborted_keeps_bound_and_witness():
    g = cycle_graph(6)
    p = make_r_md(float('inf'))
    result = min_dis(g, p, budget=0)
    assert result.status is Status.ABORTED
    assert not result.ok
    assert result.bound >= 2
    assert is_dis(g, p, result.witness)[0]


def test_enumerate_min_dis_is_lexicographic():
    result, optima = enumerate_min_dis(path_graph(4), make_r_md(float('inf')))
    assert result.k == 1
    assert optima == [(0,), (3,)]
    assert result.witness == optima[0]


def test_greedy_is_an_upper_bound():
    for g in standard_corpus(max_n=6, seed=5, count=20, exhaustive_n=3):
        for text in PROBLEMS:
            p = parse_problem(text)
            exact = min_dis(g, p)
            greedy = greedy_dis(g, p)
            if exact.status is Status.INFEASIBLE:
                assert greedy.status is Status.INFEASIBLE
                continue
            assert greedy.status is Status.FEASIBLE
            assert greedy.k >= exact.k
            assert is_dis(g, p, greedy.witness)[0]


def test_kernel_bound():
    assert kernel_bound(1, 2) == 6
    assert kernel_bound(2, 3) == 30
    with pytest.raises(ValueError):
        kernel_bound(float('inf'), 2)


def test_kernel_bound_holds_for_local_problems():
    for g in standard_corpus(max_n=6, seed=9, count=20, exhaustive_n=3):
        for text in ('ic:1', 'ld:1', 'md:1', 'md:2'):
            p = parse_problem(text)
            result = min_dis(g, p)
            if result.status is Status.OPTIMAL:
                assert len(g) <= kernel_bound(p.radius, result.k), f'{text} on {g}'


# ---------------------------------------------------------------------------
# Oracle equivalence and structural properties
# ---------------------------------------------------------------------------

@settings(max_examples=80, deadline=None)
@given(graphs(), st.sampled_from(PROBLEMS))
def test_solver_matches_brute_force(g, text):
    """Same status, same optimum and the same lexicographically smallest witness."""
    p = parse_problem(text)
    exact = min_dis(g, p)
    oracle = brute_force_min_dis(g, p)
    assert exact.status is oracle.status
    if exact.status is Status.OPTIMAL:
        assert exact.k == oracle.k
        assert exact.witness == oracle.witness


@settings(max_examples=60, deadline=None)
@given(graphs(), st.sampled_from(PROBLEMS), st.data())
def test_supersets_of_a_dis_are_dis(g, text, data):
    p = parse_problem(text)
    result = min_dis(g, p)
    assume(result.status is Status.OPTIMAL)
    extra = data.draw(st.sets(st.integers(min_value=0, max_value=len(g) - 1)))
    assert is_dis(g, p, set(result.witness) | extra)[0]


@settings(max_examples=60, deadline=None)
@given(graphs(), st.sampled_from(PROBLEMS))
def test_every_optimum_meets_every_twin_pair(g, text):
    p = parse_problem(text)
    result, optima = enumerate_min_dis(g, p)
    assume(result.status is Status.OPTIMAL)
    assert optima == sorted(optima)
    for witness in optima:
        assert len(witness) == result.k
        for x, y in twin_pairs(g):
            assert x in witness or y in witness, f'{witness} misses twins {x}, {y}'


@settings(max_examples=40, deadline=None)
@given(graphs(max_n=6))
def test_md_infinity_is_feasible_on_connected_graphs(g):
    result = min_dis(g, make_r_md(float('inf')))
    if is_connected(g):
        assert result.status is Status.OPTIMAL


@pytest.mark.slow
def test_solver_matches_brute_force_on_corpus():
    for g in standard_corpus(max_n=9, seed=2024, count=150, exhaustive_n=4):
        for text in PROBLEMS:
            p = parse_problem(text)
            exact, oracle = min_dis(g, p), brute_force_min_dis(g, p)
            assert exact.status is oracle.status, f'{text} on {g}'
            assert exact.k == oracle.k, f'{text} on {g}'


def test_ld_never_infeasible():
    for g in standard_corpus(max_n=6, seed=1, count=20, exhaustive_n=3):
        assert min_dis(g, make_r_ld(1)).status is Status.OPTIMAL


# ---------------------------------------------------------------------------
# Hitting Set
# ---------------------------------------------------------------------------

def test_hitting_set_examples():
    result = min_hitting_set(FIG2)
    assert result.status is Status.OPTIMAL
    assert result.k == 1
    assert result.witness == (2,)

    assert min_hitting_set(HittingSetInstance(2, [(1,), (2,)])).k == 2

    triangle = HittingSetInstance(3, [(1, 2), (1, 3), (2, 3)])
    result = min_hitting_set(triangle)
    assert result.k == 2
    assert result.witness == (1, 2)
    assert enumerate_optimal(triangle.to_family(), 2) == [(0, 1), (0, 2), (1, 2)]


def test_greedy_hitting_set():
    result = greedy_hitting_set(FIG2)
    assert result.status is Status.FEASIBLE
    assert result.witness == (2,)
    assert is_hitting_set(FIG2, result.witness)


def test_hitting_set_instance_normalizes_and_validates():
    inst = HittingSetInstance(3, [(3, 1, 3), (2,)])
    assert inst.sets == [(1, 3), (2,)]
    assert inst.m == 2
    with pytest.raises(ValueError):
        HittingSetInstance(3, [(1, 2)]).validate()
    with pytest.raises(ValueError):
        HittingSetInstance(2, [(1, 2), ()]).validate()
    with pytest.raises(ValueError):
        HittingSetInstance(2, [(1, 3)]).validate()
    with pytest.raises(ValueError):
        min_hitting_set(HittingSetInstance(0, []))


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=7).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(
        st.sets(st.integers(min_value=1, max_value=n), min_size=1), min_size=1, max_size=8))))
def test_hitting_set_matches_exhaustive_search(case):
    n, sets = case
    missing = set(range(1, n + 1)) - set().union(*sets)
    if missing:
        sets = sets + [missing]
    inst = HittingSetInstance(n, [tuple(s) for s in sets])
    result = min_hitting_set(inst)
    best = next(combo for k in range(n + 1) for combo in itertools.combinations(range(1, n + 1), k)
                if is_hitting_set(inst, combo))
    assert result.k == len(best)
    assert result.witness == best
