"""
Text formats for distid.

Graph (0-based vertex ids):

    g <n> <m>
    <u> <v>                 m lines, u < v, sorted
    label <v> <role>        optional, one per labelled vertex

Hitting Set instance (1-based elements):

    hs <n> <m>
    <e1> <e2> ...           m lines, elements ascending

Manifest (sidecar of a reduction graph): one ``key value`` line per field
of Manifest, in field order.

CNF: DIMACS (``p cnf <vars> <clauses>``, clauses terminated by 0).

Lines starting with ``#`` (``c`` for DIMACS) are comments. Writers are
canonical: sorted, LF-only, trailing newline.
"""

import hashlib
import re
from pathlib import Path
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError

from .gadgets import parse_gadget
from .graph_core import PLAIN, Graph, RoleKind, RoleLabel
from .reductions import CNF, ReductionArtifact, ReductionKind
from .solver import HittingSetInstance


class FormatError(ValueError):
    """Malformed input; line is 1-based when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f'line {line}: {message}' if line is not None else message)


def _content_lines(text: str, comment: str = '#'):
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(comment):
            continue
        yield number, line.split()


def _int(token: str, number: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise FormatError(f'{what} must be an integer, got {token!r}', number)


# ---------------------------------------------------------------------------
# Roles
# ---------------------------------------------------------------------------

ROLE_PATTERN = re.compile(
    r'^(?:(?P<gadget>gadget):(?P<copy>[^:\s]+):(?P<name>[^:\s]+)'
    r'|(?P<element>element):(?P<i>\d+)'
    r'|(?P<set>set|settwin):(?P<j>\d+)'
    r'|(?P<path>path):(?P<pi>\d+):(?P<pj>\d+|-):(?P<pk>\d+)'
    r'|(?P<apexpath>apexpath):(?P<ak>\d+)'
    r'|(?P<bare>apex|plain))$'
)


def format_role(label: RoleLabel) -> str:
    kind = label.kind
    if kind is RoleKind.GADGET:
        return f'gadget:{label.copy}:{label.name}'
    if kind is RoleKind.ELEMENT:
        return f'element:{label.i}'
    if kind in (RoleKind.SET, RoleKind.SET_TWIN):
        return f'{kind.value}:{label.j}'
    if kind is RoleKind.PATH:
        return f'path:{label.i}:{"-" if label.j is None else label.j}:{label.k}'
    if kind is RoleKind.APEX_PATH:
        return f'apexpath:{label.k}'
    return kind.value


def parse_role(text: str, line: Optional[int] = None) -> RoleLabel:
    match = ROLE_PATTERN.match(text)
    if not match:
        raise FormatError(f'unknown role {text!r}', line)
    if match.group('gadget'):
        return RoleLabel.gadget(match.group('copy'), match.group('name'))
    if match.group('element'):
        return RoleLabel.element(int(match.group('i')))
    if match.group('set'):
        j = int(match.group('j'))
        return RoleLabel.set_vertex(j) if match.group('set') == 'set' else RoleLabel.set_twin(j)
    if match.group('path'):
        pj = match.group('pj')
        return RoleLabel.path(int(match.group('pi')), None if pj == '-' else int(pj), int(match.group('pk')))
    if match.group('apexpath'):
        return RoleLabel.apex_path(int(match.group('ak')))
    return RoleLabel.apex() if match.group('bare') == 'apex' else PLAIN


# ---------------------------------------------------------------------------
# Graphs
# ---------------------------------------------------------------------------

def read_graph(text: str) -> Graph:
    lines = list(_content_lines(text))
    if not lines or lines[0][1][0] != 'g' or len(lines[0][1]) != 3:
        raise FormatError('expected header "g <n> <m>"', lines[0][0] if lines else 1)
    number, header = lines[0]
    n, m = _int(header[1], number, 'vertex count'), _int(header[2], number, 'edge count')

    edges = {}
    labels = {}
    for number, tokens in lines[1:]:
        if tokens[0] == 'label':
            if len(tokens) != 3:
                raise FormatError('expected "label <v> <role>"', number)
            v = _int(tokens[1], number, 'vertex')
            if not 0 <= v < n:
                raise FormatError(f'vertex {v} is outside 0..{n - 1}', number)
            if v in labels:
                raise FormatError(f'vertex {v} is labelled twice', number)
            labels[v] = parse_role(tokens[2], number)
            continue
        if len(tokens) != 2:
            raise FormatError('expected "<u> <v>"', number)
        u, v = (_int(t, number, 'vertex') for t in tokens)
        for x in (u, v):
            if not 0 <= x < n:
                raise FormatError(f'vertex {x} is outside 0..{n - 1}', number)
        if u == v:
            raise FormatError(f'self-loop at vertex {u}', number)
        edge = (min(u, v), max(u, v))
        if edge in edges:
            raise FormatError(f'edge {u} {v} repeats line {edges[edge]}', number)
        edges[edge] = number
    if len(edges) != m:
        raise FormatError(f'header announces {m} edges, found {len(edges)}')

    full = [labels.get(v, PLAIN) for v in range(n)] if labels else None
    return Graph.from_edges(n, list(edges), full)


def write_graph(g: Graph) -> str:
    out = [f'g {len(g)} {g.edge_count()}']
    out += [f'{u} {v}' for u, v in g.sorted_edges()]
    for v in g.vertices():
        label = g.label(v)
        if label.kind is not RoleKind.PLAIN:
            out.append(f'label {v} {format_role(label)}')
    return '\n'.join(out) + '\n'


def write_dot(g: Graph) -> str:
    out = ['graph G {']
    for v in g.vertices():
        label = g.label(v)
        if label.kind is RoleKind.PLAIN:
            out.append(f'  {v};')
        else:
            out.append(f'  {v} [label="{format_role(label)}"];')
    out += [f'  {u} -- {v};' for u, v in g.sorted_edges()]
    out.append('}')
    return '\n'.join(out) + '\n'


# ---------------------------------------------------------------------------
# Hitting Set instances
# ---------------------------------------------------------------------------

def read_hs_instance(text: str) -> HittingSetInstance:
    lines = list(_content_lines(text))
    if not lines or lines[0][1][0] != 'hs' or len(lines[0][1]) != 3:
        raise FormatError('expected header "hs <n> <m>"', lines[0][0] if lines else 1)
    number, header = lines[0]
    n, m = _int(header[1], number, 'universe size'), _int(header[2], number, 'set count')
    if n < 1:
        raise FormatError(f'universe size must be positive, got {n}', number)

    sets = []
    for number, tokens in lines[1:]:
        elements = [_int(t, number, 'element') for t in tokens]
        for x in elements:
            if not 1 <= x <= n:
                raise FormatError(f'element {x} is outside 1..{n}', number)
        sets.append(tuple(elements))
    if len(sets) != m:
        raise FormatError(f'header announces {m} sets, found {len(sets)}')
    inst = HittingSetInstance(n, sets)
    try:
        return inst.validate()
    except ValueError as exc:
        raise FormatError(str(exc))


def write_hs_instance(inst: HittingSetInstance) -> str:
    out = [f'hs {inst.n} {inst.m}']
    out += [' '.join(str(x) for x in sorted(s)) for s in inst.sets]
    return '\n'.join(out) + '\n'


def instance_digest(inst: HittingSetInstance) -> str:
    """SHA-256 hex of the canonical instance text."""
    return hashlib.sha256(write_hs_instance(inst).encode('utf-8')).hexdigest()


# ---------------------------------------------------------------------------
# DIMACS CNF
# ---------------------------------------------------------------------------

def read_cnf(text: str) -> CNF:
    num_vars = num_clauses = None
    header_line = None
    clauses: List[Tuple[int, ...]] = []
    current: List[int] = []
    for number, tokens in _content_lines(text, comment='c'):
        if tokens[0] == '%':
            break
        if tokens[0] == 'p':
            if num_vars is not None:
                raise FormatError('second problem line', number)
            if len(tokens) != 4 or tokens[1] != 'cnf':
                raise FormatError('expected "p cnf <vars> <clauses>"', number)
            num_vars = _int(tokens[2], number, 'variable count')
            num_clauses = _int(tokens[3], number, 'clause count')
            header_line = number
            continue
        if num_vars is None:
            raise FormatError('clause before the problem line', number)
        for token in tokens:
            literal = _int(token, number, 'literal')
            if literal == 0:
                if not current:
                    raise FormatError('empty clause', number)
                clauses.append(tuple(current))
                current = []
            elif abs(literal) > num_vars:
                raise FormatError(f'literal {literal} is outside 1..{num_vars}', number)
            else:
                current.append(literal)
    if num_vars is None:
        raise FormatError('missing problem line "p cnf <vars> <clauses>"')
    if current:
        clauses.append(tuple(current))
    if len(clauses) != num_clauses:
        raise FormatError(f'problem line announces {num_clauses} clauses, found {len(clauses)}', header_line)
    return CNF(num_vars, clauses)


def write_cnf(cnf: CNF) -> str:
    out = [f'p cnf {cnf.num_vars} {len(cnf.clauses)}']
    out += [' '.join(str(lit) for lit in clause) + ' 0' for clause in cnf.clauses]
    return '\n'.join(out) + '\n'


# ---------------------------------------------------------------------------
# Manifest
# ---------------------------------------------------------------------------

class Manifest(BaseModel):
    """Sidecar describing how a reduction graph was built."""
    kind: str = Field(..., pattern=r'^(distance_id|apex|compressed)$')
    r: int = Field(..., ge=1)
    gadget: str = Field(..., min_length=1)
    code_size: int = Field(..., ge=0)
    copies: int = Field(..., ge=1)
    offset: int = Field(..., ge=0)
    instance_digest: str = Field(..., pattern=r'^[0-9a-f]{64}$')
    equivalence_untested: bool = False


def manifest_for(art: ReductionArtifact) -> Manifest:
    return Manifest(
        kind=art.kind.value,
        r=art.r,
        gadget=art.gadget.name,
        code_size=len(art.gadget.code),
        copies=art.copies,
        offset=art.offset,
        instance_digest=instance_digest(art.instance),
        equivalence_untested=art.equivalence_untested,
    )


def write_manifest(manifest: Manifest) -> str:
    out = []
    for key, value in manifest.model_dump().items():
        if isinstance(value, bool):
            value = str(value).lower()
        out.append(f'{key} {value}')
    return '\n'.join(out) + '\n'


def read_manifest(text: str) -> Manifest:
    values = {}
    for number, tokens in _content_lines(text):
        if len(tokens) != 2:
            raise FormatError('expected "<key> <value>"', number)
        key, value = tokens
        if key not in Manifest.model_fields:
            raise FormatError(f'unknown manifest key {key!r}', number)
        if key in values:
            raise FormatError(f'manifest key {key!r} repeated', number)
        values[key] = value
    try:
        return Manifest(**values)
    except ValidationError as exc:
        raise FormatError(f'invalid manifest: {exc.errors()[0]["loc"][0]}: {exc.errors()[0]["msg"]}')


def load_artifact(graph_text: str, manifest_text: str, instance_text: str) -> ReductionArtifact:
    """Rebuild an artifact from its graph, manifest and instance files."""
    manifest = read_manifest(manifest_text)
    inst = read_hs_instance(instance_text)
    if instance_digest(inst) != manifest.instance_digest:
        raise FormatError('instance does not match the manifest digest')
    gad = parse_gadget(manifest.gadget)
    if len(gad.code) != manifest.code_size:
        raise FormatError(f'gadget {gad.name} has |C| = {len(gad.code)}, manifest says {manifest.code_size}')
    graph = read_graph(graph_text)
    try:
        art = ReductionArtifact(graph, ReductionKind(manifest.kind), manifest.r, gad, inst,
                                manifest.copies, manifest.offset, manifest.equivalence_untested)
    except (KeyError, ValueError) as exc:
        raise FormatError(f'graph labels do not describe a reduction: {exc}')
    if len(art.copy_names()) != manifest.copies:
        raise FormatError(f'graph has {len(art.copy_names())} gadget copies, manifest says {manifest.copies}')
    if manifest.offset != manifest.code_size * manifest.copies:
        raise FormatError(f'offset {manifest.offset} is not |C| * copies')
    return art


def read_text(path) -> str:
    return Path(path).read_text(encoding='utf-8')


def write_text(path, text: str) -> None:
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(text)
