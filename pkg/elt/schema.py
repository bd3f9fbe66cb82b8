"""
Event schema trees and the ``.elt`` schema language.

A schema is a tree whose leaves bind one predicate to one channel and whose
internal nodes combine two or more children with one of the operators SEQ,
SYNC, GUARD or OR. The grammar::

    catalog   := event+ ;
    event     := "event" STRING "{" node "}" ;
    node      := composite | primitive ;
    composite := OP "(" node ("," node)+ ")" ;
    OP        := "SEQ" | "SYNC" | "GUARD" | "OR" ;
    primitive := "prim" "(" "channel" "=" STRING "," "predicate" "=" pred ")" ;
    pred      := IDENT [ "(" param ("," param)* ")" ] ;
    param     := IDENT "=" (NUMBER | IDENT) ;

``#`` starts a comment that runs to the end of the line. There is no
negation: primitives are always stated positively.
"""

import logging
import re
from collections import OrderedDict
from dataclasses import dataclass, field

from elt.errors import (AxiomViolation, BadParameter, DuplicateEventType,
                        SchemaSyntaxError, UnknownOperator, UnknownPredicate)
from elt.predicates import default_registry

logger = logging.getLogger(__name__)

OPERATORS = ('SEQ', 'SYNC', 'GUARD', 'OR')
CONJUNCTIVE = ('SEQ', 'SYNC', 'GUARD')

MAX_DEPTH = 200


@dataclass(frozen=True)
class PredicateRef:
    """
    Reference to a registered predicate with its named parameters. The
    parameters are kept as a sorted tuple of (name, value) pairs.
    """

    name: str
    params: tuple = ()

    def __post_init__(self):
        params = self.params
        if isinstance(params, dict):
            params = params.items()
        object.__setattr__(self, 'params', tuple(sorted(
            (str(k), v if isinstance(v, str) else float(v)) for k, v in params)))

    def param_dict(self):
        return dict(self.params)


@dataclass(frozen=True)
class PrimitiveNode:
    predicate: PredicateRef
    channel: str

    def __post_init__(self):
        if not self.channel:
            raise ValueError('primitive channel must not be empty')


@dataclass(frozen=True)
class CompositeNode:
    op: str
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, 'children', tuple(self.children))
        if self.op not in OPERATORS:
            raise UnknownOperator(self.op)


@dataclass(frozen=True)
class SchemaTree:
    event_type: str
    root: object
    declared_channels: frozenset = field(default=frozenset(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'declared_channels',
                           frozenset(leaf.channel for _, leaf in leaves(self.root)))

    def leaves(self):
        return leaves(self.root)


@dataclass(frozen=True)
class EventCatalog:
    schemas: OrderedDict

    def __post_init__(self):
        object.__setattr__(self, 'schemas', OrderedDict(self.schemas))

    @property
    def event_types(self):
        return list(self.schemas)

    @property
    def channels(self):
        out = set()
        for s in self.schemas.values():
            out |= s.declared_channels
        return out

    def __len__(self):
        return len(self.schemas)

    def __iter__(self):
        return iter(self.schemas.values())

    def __getitem__(self, event_type):
        return self.schemas[event_type]


def is_primitive(node):
    return isinstance(node, PrimitiveNode)


def leaves(node, path=()):
    """Primitive leaves below ``node`` as (path, node) in left-to-right order"""
    if is_primitive(node):
        return [(path, node)]
    out = []
    for i, child in enumerate(node.children):
        out.extend(leaves(child, path + (i,)))
    return out


def path_str(path):
    return '/'.join(['root'] + [str(i) for i in path])


@dataclass(frozen=True)
class Violation:
    kind: str
    path: tuple
    message: str

    def __str__(self):
        return '{} at {}: {}'.format(self.kind, path_str(self.path), self.message)


def validate_axioms(schema):
    """
    Check the statically checkable axioms on a schema tree

    Args:
        schema: SchemaTree (or a bare node)

    Returns:
        list of Violation, empty when the tree is valid
    """

    root = schema.root if isinstance(schema, SchemaTree) else schema
    report = []

    def visit(node, path):
        if is_primitive(node):
            if node.predicate.name.startswith('not_'):
                report.append(Violation(
                    'NegatedPredicate', path,
                    'primitives must be stated positively, got {}'.format(
                        node.predicate.name)))
            return
        n = len(node.children)
        if n < 2:
            report.append(Violation(
                'Axiom1', path,
                '{} needs at least 2 children, has {}'.format(node.op, n)))
        if node.op == 'GUARD' and n != 2:
            report.append(Violation(
                'GuardArity', path, 'GUARD takes exactly (inner, outer), has {}'.format(n)))
        for i, child in enumerate(node.children):
            visit(child, path + (i,))

    visit(root, ())
    return report


_TOKEN = re.compile(r'''
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<number>-?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[{}(),=])
''', re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    line: int
    col: int


def tokenize(source):
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            ch = source[pos]
            if ch == '"':
                raise SchemaSyntaxError(line, pos - line_start + 1, 'closing \'"\'')
            raise SchemaSyntaxError(line, pos - line_start + 1, 'a token', ch)
        kind = m.lastgroup
        text = m.group()
        if kind not in ('ws', 'comment'):
            tokens.append(Token(kind, text, line, pos - line_start + 1))
        newlines = text.count('\n')
        if newlines:
            line += newlines
            line_start = pos + text.rindex('\n') + 1
        pos = m.end()
    tokens.append(Token('eof', '', line, pos - line_start + 1))
    return tokens


class Parser():
    """
    Recursive descent parser for the schema language

    Args:
        source: DSL text
        registry: PredicateRegistry used to check predicate names and
            parameters
    """

    def __init__(self, source, registry=None):
        self.tokens = tokenize(source)
        self.pos = 0
        self.registry = registry if registry is not None else default_registry()

    @property
    def tok(self):
        return self.tokens[self.pos]

    def fail(self, expected):
        t = self.tok
        raise SchemaSyntaxError(t.line, t.col, expected, t.value or 'end of input')

    def expect(self, kind, value=None):
        t = self.tok
        if t.kind != kind or (value is not None and t.value != value):
            self.fail(repr(value) if value is not None else kind)
        self.pos += 1
        return t

    def accept(self, value):
        if self.tok.kind == 'punct' and self.tok.value == value:
            self.pos += 1
            return True
        return False

    def catalog(self):
        schemas = OrderedDict()
        self.event(schemas)
        while self.tok.kind != 'eof':
            self.event(schemas)
        return EventCatalog(schemas)

    def event(self, schemas):
        self.expect('ident', 'event')
        name = unquote(self.expect('string').value)
        if not name:
            self.fail('a non-empty event type')
        if name in schemas:
            raise DuplicateEventType(name)
        self.expect('punct', '{')
        root = self.node(0)
        self.expect('punct', '}')

        schema = SchemaTree(name, root)
        violations = validate_axioms(schema)
        if violations:
            raise AxiomViolation(violations)
        schemas[name] = schema

    def node(self, depth):
        if depth > MAX_DEPTH:
            self.fail('nesting shallower than {}'.format(MAX_DEPTH))
        t = self.expect('ident')
        if t.value == 'prim':
            return self.primitive()
        if t.value not in OPERATORS:
            raise UnknownOperator(t.value)

        self.expect('punct', '(')
        children = [self.node(depth + 1)]
        while self.accept(','):
            children.append(self.node(depth + 1))
        self.expect('punct', ')')
        return CompositeNode(t.value, tuple(children))

    def primitive(self):
        self.expect('punct', '(')
        self.expect('ident', 'channel')
        self.expect('punct', '=')
        channel = unquote(self.expect('string').value)
        if not channel:
            self.fail('a non-empty channel name')
        self.expect('punct', ',')
        self.expect('ident', 'predicate')
        self.expect('punct', '=')
        pred = self.predicate()
        self.expect('punct', ')')
        return PrimitiveNode(pred, channel)

    def predicate(self):
        name = self.expect('ident').value
        params = {}
        if self.accept('('):
            while True:
                key = self.expect('ident').value
                self.expect('punct', '=')
                t = self.tok
                if t.kind == 'number':
                    value = float(t.value)
                elif t.kind == 'ident':
                    value = t.value
                else:
                    self.fail('a number or a name')
                self.pos += 1
                if key in params:
                    raise BadParameter(key, 'given twice')
                params[key] = value
                if not self.accept(','):
                    break
            self.expect('punct', ')')

        pred = PredicateRef(name, params)
        if name not in self.registry:
            raise UnknownPredicate(name)
        self.registry.validate(pred)
        return pred


def unquote(s):
    return re.sub(r'\\(.)', r'\1', s[1:-1])


def quote(s):
    return '"' + s.replace('\\', '\\\\').replace('"', '\\"') + '"'


def parse_schema(source, registry=None):
    """
    Parse DSL text into an EventCatalog

    Args:
        source: DSL text (str, or UTF-8 bytes)
        registry: PredicateRegistry, the shipped vocabulary by default

    Returns:
        EventCatalog with one SchemaTree per ``event`` block
    """

    if isinstance(source, bytes):
        try:
            source = source.decode('utf-8')
        except UnicodeDecodeError as e:
            raise SchemaSyntaxError(1, e.start + 1, 'UTF-8 text')

    catalog = Parser(source, registry).catalog()
    logger.debug('Parsed {} event schemas: {}'.format(len(catalog), catalog.event_types))
    return catalog


def load_schema(path, registry=None):
    with open(path, 'rb') as f:
        return parse_schema(f.read(), registry)


def _render_pred(pred):
    if not pred.params:
        return pred.name
    args = []
    for k, v in pred.params:
        args.append('{}={}'.format(k, v if isinstance(v, str) else repr(float(v))))
    return '{}({})'.format(pred.name, ', '.join(args))


def render_node(node, indent=1):
    pad = '  ' * indent
    if is_primitive(node):
        return '{}prim(channel={}, predicate={})'.format(
            pad, quote(node.channel), _render_pred(node.predicate))
    inner = ',\n'.join(render_node(c, indent + 1) for c in node.children)
    return '{}{}(\n{}\n{})'.format(pad, node.op, inner, pad)


def render_schema(schema):
    """
    DSL text for one schema; parsing it gives back an equal tree
    """
    if is_primitive(schema.root):
        return 'event {} {{ {} }}\n'.format(quote(schema.event_type),
                                            render_node(schema.root, 0))
    return 'event {} {{\n{}\n}}\n'.format(quote(schema.event_type),
                                         render_node(schema.root))


def render_catalog(catalog):
    return '\n'.join(render_schema(s) for s in catalog)
