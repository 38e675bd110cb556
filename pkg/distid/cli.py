"""
Command-line front end for distid.

Every command prints a line-oriented ``key value`` report on standard
output (``dot`` without ``--out`` prints the DOT text itself); diagnostics
go to standard error through logging. Exit codes:

    0  success (including a feasible greedy answer)
    1  usage, parse or validation error
    2  infeasible instance
    3  solver budget exhausted

Check verdicts are part of the report, not the exit code: ``verify`` with an
invalid set, ``gadget-check`` with a failing axiom and ``roundtrip`` with
``result fail`` all exit 0.
"""

import argparse
import logging
import sys
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from tqdm import tqdm

from .config import config, get_config
from .gadgets import Verdict, check_gadget, extension_family, gadget_for_problem, parse_gadget
from .graph_core import is_bipartite, standard_corpus
from .io_formats import (
    FormatError, load_artifact, manifest_for, read_cnf, read_graph, read_hs_instance, read_text,
    write_dot, write_graph, write_hs_instance, write_manifest, write_text,
)
from .problems import Axiom, AxiomKind, IdentifyingProblem, TraitViolation, check_trait, parse_problem
from .reductions import (
    ReductionError, ReductionKind, build_artifact, check_compatibility, expected_order,
    extract_hitting_set, lift_hitting_set, roundtrip, sat_to_hitting_set, size_bound,
)
from .solver import Status, enumerate_min_dis, greedy_dis, is_dis, min_dis, min_hitting_set

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_ABORTED = 3

STATUS_EXIT = {
    Status.OPTIMAL: EXIT_OK,
    Status.FEASIBLE: EXIT_OK,
    Status.INFEASIBLE: EXIT_INFEASIBLE,
    Status.ABORTED: EXIT_ABORTED,
}

Report = List[Tuple[str, object]]

# Registry of subcommands
COMMANDS: Dict[str, dict] = {}


def command(name, help, arguments=()):
    """Decorator to register a subcommand.

    Args:
        name: Subcommand name on the command line
        help: One-line description
        arguments: (flags, kwargs) pairs passed to add_argument
    """
    def decorator(fn):
        COMMANDS[name] = {
            'handler': fn,
            'help': help,
            'arguments': arguments,
        }
        return fn
    return decorator


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _arg(*flags, **kwargs):
    return flags, kwargs


PROBLEM = _arg('--problem', required=True, help='ic:<r>, ld:<r>, md:<r> or md:inf')
GRAPH = _arg('--graph', required=True, help='graph file')
HS = _arg('--hs', required=True, help='hitting set instance file')
GADGET = _arg('--gadget', required=True, help='1layered, local0:<r> or ic:<r>')
GADGET_OR_PROBLEM = _arg('--gadget', help='1layered, local0:<r> or ic:<r> (default: a gadget proven for --problem)')
KIND = _arg('--kind', required=True, choices=[k.value for k in ReductionKind])
RADIUS = _arg('--r', type=int, help='construction radius (default: the problem radius, else 1; not for apex)')
MANIFEST = _arg('--manifest', required=True, help='manifest file written by reduce')
VERTICES = _arg('--set', required=True, dest='members', help='comma or space separated ids')


def parse_members(text: str) -> List[int]:
    tokens = text.replace(',', ' ').split()
    try:
        return sorted({int(t) for t in tokens})
    except ValueError:
        raise UsageError(f'expected integers, got {text!r}')


def _format(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (list, tuple)):
        return ' '.join(str(v) for v in value) if value else '-'
    if value is None:
        return '-'
    return str(value)


def _solve_report(result) -> Report:
    report = [('status', result.status.value)]
    if result.k is not None:
        report.append(('k', result.k))
    if result.witness is not None:
        report.append(('witness', list(result.witness)))
    if result.tag is not None:
        report.append(('constraint', str(result.tag)))
    if result.bound is not None:
        report.append(('bound', result.bound))
    report.append(('nodes', result.nodes))
    return report


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

@command('solve', 'minimum distance identifying set of a graph', [
    PROBLEM, GRAPH,
    _arg('--greedy', action='store_true', help='greedy upper bound only'),
    _arg('--all', action='store_true', help='also list every optimal witness'),
])
def cmd_solve(args) -> Tuple[int, Report]:
    p = parse_problem(args.problem)
    g = read_graph(read_text(args.graph))
    if args.greedy:
        result = greedy_dis(g, p)
        return STATUS_EXIT[result.status], _solve_report(result)
    if args.all:
        result, optima = enumerate_min_dis(g, p, args.budget)
        report = _solve_report(result) + [('optima', len(optima))]
        report += [('optimum', list(w)) for w in optima]
        return STATUS_EXIT[result.status], report
    result = min_dis(g, p, args.budget)
    return STATUS_EXIT[result.status], _solve_report(result)


@command('verify', 'check whether a vertex set is a distance identifying set', [PROBLEM, GRAPH, VERTICES])
def cmd_verify(args) -> Tuple[int, Report]:
    p = parse_problem(args.problem)
    g = read_graph(read_text(args.graph))
    ok, violation = is_dis(g, p, parse_members(args.members))
    return EXIT_OK, [('valid', ok), ('violation', str(violation) if violation else None)]


def _construction(args, inst, p: Optional[IdentifyingProblem]):
    """Build the --kind construction, picking the gadget and radius from p when omitted."""
    kind = ReductionKind(args.kind)
    if kind is ReductionKind.APEX and args.r not in (None, 1):
        raise UsageError(f'the apex construction takes no radius, got --r {args.r}')
    if args.gadget:
        gad = parse_gadget(args.gadget)
    elif p is not None:
        gad = gadget_for_problem(p, prefer_layered=kind is ReductionKind.APEX)
        logger.info(f'using gadget {gad.name} for {p.name}')
    else:
        raise UsageError('--gadget is required without --problem')
    r = args.r
    if r is None:
        r = p.radius if p is not None and p.is_finite and kind is not ReductionKind.APEX else 1
    return build_artifact(kind, gad, r, inst)


@command('reduce', 'build a reduction graph from a hitting set instance', [
    KIND, GADGET_OR_PROBLEM, RADIUS, HS,
    _arg('--out', required=True, help='output prefix; writes <out>.g and <out>.manifest'),
    _arg('--problem', help='check the construction fits this problem first'),
])
def cmd_reduce(args) -> Tuple[int, Report]:
    inst = read_hs_instance(read_text(args.hs))
    p = parse_problem(args.problem) if args.problem else None
    art = _construction(args, inst, p)
    if p is not None:
        check_compatibility(art, p)
    kind, gad = art.kind, art.gadget

    graph_path, manifest_path = f'{args.out}.g', f'{args.out}.manifest'
    write_text(graph_path, write_graph(art.graph))
    write_text(manifest_path, write_manifest(manifest_for(art)))
    return EXIT_OK, [
        ('kind', art.kind_label),
        ('vertices', len(art.graph)),
        ('edges', art.graph.edge_count()),
        ('code_size', len(gad.code)),
        ('copies', art.copies),
        ('offset', art.offset),
        ('expected_order', expected_order(kind, len(gad), art.r, inst)),
        ('size_bound', size_bound(kind, len(gad), art.r, inst)),
        ('bipartite', is_bipartite(art.graph)),
        ('equivalence_untested', art.equivalence_untested),
        ('graph', graph_path),
        ('manifest', manifest_path),
    ]


def _load(args):
    return load_artifact(read_text(args.graph), read_text(args.manifest), read_text(args.hs))


@command('lift', 'map a hitting set to a DIS of a reduction graph', [
    GRAPH, MANIFEST, HS, VERTICES,
    _arg('--problem', help='verify the lifted set for this problem'),
])
def cmd_lift(args) -> Tuple[int, Report]:
    art = _load(args)
    lifted = lift_hitting_set(art, parse_members(args.members))
    report = [('lift_size', len(lifted)), ('lift', list(lifted))]
    if args.problem:
        p = parse_problem(args.problem)
        report.append(('lift_valid', is_dis(art.graph, p, lifted)[0]))
    return EXIT_OK, report


@command('extract', 'map a DIS of a reduction graph back to a hitting set', [
    GRAPH, MANIFEST, HS, VERTICES, PROBLEM,
])
def cmd_extract(args) -> Tuple[int, Report]:
    art = _load(args)
    p = parse_problem(args.problem)
    dis = parse_members(args.members)
    extracted = extract_hitting_set(art, dis, p)
    return EXIT_OK, [
        ('extract_size', len(extracted)),
        ('extract', list(extracted)),
        ('size_limit', len(dis) - art.offset),
    ]


@command('gadget-check', 'check the gadget axioms on a family of B-extensions', [
    GADGET, PROBLEM,
    _arg('--count', type=int, help='random extensions (default: gadgets.random_extensions)'),
    _arg('--max-extra', type=int, help='largest number of fresh vertices (default: gadgets.max_extra)'),
])
def cmd_gadget_check(args) -> Tuple[int, Report]:
    gad = parse_gadget(args.gadget)
    p = parse_problem(args.problem)
    family = extension_family(gad, args.seed, args.count, args.max_extra)
    report = check_gadget(gad, p, family, args.budget, progress=args.progress)
    lines = [('gadget', gad.name), ('problem', p.name), ('supported', gad.supports(p)),
             ('members', len(family)), ('bipartite_single_ext', report.bipartite_single_ext)]
    for axiom, result in report.results.items():
        if axiom == 'p_l' and not gad.meta.local:
            continue
        lines.append((axiom, result.verdict.value))
        if result.verdict is Verdict.FAIL:
            lines.append((f'{axiom}_counterexample', f'{result.member}: {result.counterexample}'))
    lines.append(('verdict', 'pass' if report.passed else 'fail'))
    return EXIT_OK, lines


def parse_axiom(text: str) -> Axiom:
    name, _, radius = text.partition(':')
    try:
        kind = AxiomKind(name.lower())
    except ValueError:
        raise UsageError(f'unknown trait {text!r} (expected alpha, beta1:<i>, beta2:<i> or gamma:<i>)')
    if kind is AxiomKind.ALPHA:
        return Axiom(kind)
    if not radius:
        raise UsageError(f'{name} needs a radius, e.g. {name}:1')
    return Axiom(kind, float('inf') if radius == 'inf' else int(radius))


@command('trait-check', 'test identifying-function traits on the graph corpus', [
    PROBLEM,
    _arg('--trait', action='append', help='alpha, beta1:<i>, beta2:<i> or gamma:<i>; default: every claimed trait'),
    _arg('--max-n', type=int, help='largest corpus order (default: corpus.max_n)'),
    _arg('--count', type=int, help='seeded random graphs (default: corpus.count)'),
])
def cmd_trait_check(args) -> Tuple[int, Report]:
    p = parse_problem(args.problem)
    if args.trait:
        axioms = [parse_axiom(t) for t in args.trait]
    else:
        axioms = [a for t in sorted(p.claimed_traits, key=str) for a in t.axioms()]
    max_n = args.max_n or get_config('corpus', 'max_n', default=6)
    count = args.count if args.count is not None else get_config('corpus', 'count', default=50)
    corpus = standard_corpus(max_n=max_n, seed=args.seed, count=count, exhaustive_n=min(5, max_n))

    report = [('problem', p.name), ('claims', ' '.join(str(t) for t in sorted(p.claimed_traits, key=str))),
              ('graphs', len(corpus))]
    for axiom in axioms:
        graphs = tqdm(corpus, desc=str(axiom), disable=not args.progress)
        result = check_trait(p, axiom, graphs)
        report.append((str(axiom), 'holds' if result.holds else 'fails'))
        if not result.holds:
            report.append((f'{axiom}_counterexample', result.counterexample.describe()))
    return EXIT_OK, report


@command('roundtrip', 'hitting set -> lift -> verify -> extract on a reduction graph', [
    KIND, GADGET_OR_PROBLEM, RADIUS, HS, PROBLEM,
    _arg('--variants', type=int, help='twin-swapped DIS to extract as well (default: roundtrip.variants)'),
])
def cmd_roundtrip(args) -> Tuple[int, Report]:
    inst = read_hs_instance(read_text(args.hs))
    p = parse_problem(args.problem)
    art = _construction(args, inst, p)
    check_compatibility(art, p)
    variants = args.variants if args.variants is not None else get_config('roundtrip', 'variants', default=5)
    record = roundtrip(art, p, args.budget, variants, args.seed)

    report = [('kind', record.kind), ('order', record.order), ('offset', record.offset),
              ('hs_status', record.hs_result.status.value)]
    if record.hs_result.status is not Status.OPTIMAL:
        return STATUS_EXIT[record.hs_result.status], report
    report += [
        ('hs_opt', record.k),
        ('lift_size', len(record.lifted)),
        ('lift_valid', record.lifted_valid),
        ('extract_size', len(record.extracted)),
        ('variants', record.variants_checked),
        ('equivalence_untested', art.equivalence_untested),
    ]
    report += [('failure', failure) for failure in record.failures]
    report.append(('result', 'pass' if record.passed else 'fail'))
    return EXIT_OK, report


@command('sat2hs', 'turn a DIMACS CNF into a hitting set instance', [
    _arg('--cnf', required=True, help='DIMACS CNF file'),
    _arg('--out', help='write the instance here'),
    _arg('--solve', action='store_true', help='solve the instance and decide satisfiability'),
])
def cmd_sat2hs(args) -> Tuple[int, Report]:
    cnf = read_cnf(read_text(args.cnf))
    inst = sat_to_hitting_set(cnf)
    if args.out:
        write_text(args.out, write_hs_instance(inst))
    report = [('vars', cnf.num_vars), ('clauses', len(cnf.clauses)), ('n', inst.n), ('m', inst.m)]
    if args.solve:
        result = min_hitting_set(inst, args.budget)
        report.append(('hs_status', result.status.value))
        if result.status is not Status.OPTIMAL:
            return STATUS_EXIT[result.status], report
        report += [('hs_opt', result.k), ('satisfiable', result.k == cnf.num_vars)]
    return EXIT_OK, report


@command('dot', 'print a graph as DOT', [
    GRAPH,
    _arg('--out', help='write the DOT text here and report on it instead'),
])
def cmd_dot(args) -> Tuple[int, Union[Report, str]]:
    g = read_graph(read_text(args.graph))
    if not args.out:
        return EXIT_OK, write_dot(g)
    write_text(args.out, write_dot(g))
    return EXIT_OK, [('dot', args.out), ('vertices', len(g)), ('edges', g.edge_count())]


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='distid', description='Distance identifying sets and Hitting Set reductions')
    parser.add_argument('--config', help='configuration file (default: $DISTID_CONFIG or ./config.yaml)')
    parser.add_argument('--log-level', help='DEBUG, INFO, WARNING or ERROR (default: logging.level)')
    parser.add_argument('--budget', type=int, help='solver node budget (default: solver.budget)')
    parser.add_argument('--seed', type=int, help='seed for random corpora (default: corpus.seed)')
    parser.add_argument('--progress', action='store_true', default=None, help='show progress bars')
    sub = parser.add_subparsers(dest='command', required=True, parser_class=_Parser)
    for name, entry in COMMANDS.items():
        cmd = sub.add_parser(name, help=entry['help'])
        for flags, kwargs in entry['arguments']:
            cmd.add_argument(*flags, **kwargs)
    return parser


def run(argv: Optional[Sequence[str]] = None, out=None) -> int:
    """Parse argv, run one command, print its report; returns the exit code."""
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        if args.config:
            config.load(args.config)
            logging.getLogger().setLevel(str(get_config('logging', 'level', default='WARNING')).upper())
        if args.budget is None:
            args.budget = get_config('solver', 'budget', default=10_000_000)
        if args.budget < 0:
            raise UsageError(f'--budget must not be negative, got {args.budget}')
        if args.seed is None:
            args.seed = get_config('corpus', 'seed', default=2024)
        if args.progress is None:
            args.progress = bool(get_config('cli', 'progress', default=False))
        if args.log_level:
            logging.getLogger().setLevel(args.log_level.upper())

        handler: Callable = COMMANDS[args.command]['handler']
        code, report = handler(args)
    except UsageError as e:
        logger.error(f'usage: {e}')
        return EXIT_USAGE
    except FormatError as e:
        logger.error(f'parse error: {e}')
        return EXIT_USAGE
    except (TraitViolation, ReductionError) as e:
        logger.error(str(e))
        return EXIT_USAGE
    except (ValueError, OSError) as e:
        logger.error(str(e))
        return EXIT_USAGE

    if isinstance(report, str):
        out.write(report)
        return code
    for key, value in report:
        out.write(f'{key} {_format(value)}\n')
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    level = get_config('logging', 'level', default='WARNING')
    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.WARNING),
        stream=sys.stderr,
        format='%(levelname)s %(name)s: %(message)s',
    )
    return run(argv)
