#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Tests for `elt.schema`: the schema language, axioms and rendering."""

import glob
import os
import unittest

import numpy as np

import elt
from elt.errors import (AxiomViolation, BadParameter, DuplicateEventType, ELTError,
                        SchemaSyntaxError, UnknownOperator, UnknownPredicate)
from elt.schema import (CompositeNode, EventCatalog, PredicateRef, PrimitiveNode,
                        SchemaTree, load_schema, parse_schema, path_str,
                        render_catalog, render_schema, validate_axioms)

SCHEMA_DIR = os.path.join(os.path.dirname(elt.__file__), 'schemas')

SPIKE_THEN_DROP = '''
event "e" {
  SEQ(
    prim(channel="A", predicate=spike),
    prim(channel="B", predicate=drop)
  )
}
'''


def prim(name, channel='A', **params):
    return PrimitiveNode(PredicateRef(name, params), channel)


class TestParse(unittest.TestCase):

    def test_seq_example(self):
        catalog = parse_schema(SPIKE_THEN_DROP)
        self.assertEqual(len(catalog), 1)
        schema = catalog['e']
        self.assertEqual(schema.root.op, 'SEQ')
        self.assertEqual([leaf.predicate.name for _, leaf in schema.leaves()],
                         ['spike', 'drop'])
        self.assertEqual(schema.declared_channels, frozenset({'A', 'B'}))
        self.assertEqual(validate_axioms(schema), [])

    def test_single_primitive(self):
        text = 'event "e" { prim(channel="A", predicate=rise) }\n'
        catalog = parse_schema(text)
        self.assertEqual(catalog['e'].root, prim('rise'))
        self.assertEqual(render_schema(catalog['e']), text)

    def test_parameters_and_comments(self):
        catalog = parse_schema('''
            # leading comment
            event "a" { prim(channel="x y", predicate=stable(cv=0.4, slope=3e-1)) }
            event "b" {  # trailing comment
              OR(prim(channel="x", predicate=rise), prim(channel="x", predicate=fall))
            }''')
        self.assertEqual(catalog.event_types, ['a', 'b'])
        self.assertEqual(catalog['a'].root.predicate.param_dict(),
                         {'cv': 0.4, 'slope': 0.3})
        self.assertEqual(catalog.channels, {'x y', 'x'})

    def test_escaped_strings(self):
        catalog = parse_schema(r'event "q\"t" { prim(channel="a\\b", predicate=rise) }')
        self.assertEqual(catalog.event_types, ['q"t'])
        self.assertEqual(catalog['q"t'].root.channel, 'a\\b')

    def test_shipped_schemas(self):
        files = sorted(glob.glob(os.path.join(SCHEMA_DIR, '*.elt')))
        self.assertGreaterEqual(len(files), 3)
        for path in files:
            catalog = load_schema(path)
            self.assertGreater(len(catalog), 0)
        catalog = load_schema(os.path.join(SCHEMA_DIR, 'pressure_test.elt'))
        self.assertEqual(catalog.event_types, ['valid_test', 'lost_seal'])
        self.assertEqual(catalog.channels, {'pressure', 'volume'})


class TestErrors(unittest.TestCase):

    def test_seq_with_one_child(self):
        with self.assertRaises(AxiomViolation) as cm:
            parse_schema('event "e" { SEQ(prim(channel="A", predicate=rise)) }')
        v = cm.exception.violations[0]
        self.assertEqual(v.kind, 'Axiom1')
        self.assertEqual(v.path, ())

    def test_guard_arity(self):
        text = ('event "e" { GUARD(prim(channel="A", predicate=spike), '
                'prim(channel="B", predicate=plateau), '
                'prim(channel="C", predicate=rise)) }')
        with self.assertRaises(AxiomViolation) as cm:
            parse_schema(text)
        self.assertIn('GuardArity', [v.kind for v in cm.exception.violations])

    def test_syntax_error_position(self):
        text = 'event "e" { SEQ(prim(channel="A", predicate=rise), ) }'
        with self.assertRaises(SchemaSyntaxError) as cm:
            parse_schema(text)
        self.assertEqual((cm.exception.line, cm.exception.col), (1, 52))
        self.assertEqual(cm.exception.found, ')')

        with self.assertRaises(SchemaSyntaxError) as cm:
            parse_schema('\n\nevent 5')
        self.assertEqual((cm.exception.line, cm.exception.col), (3, 7))

    def test_syntax_errors(self):
        for text in ['', '# only a comment\n', 'event', 'event "e" {',
                     'event "e" { prim(channel="A", predicate=rise) ',
                     'event "" { prim(channel="A", predicate=rise) }',
                     'event "e" { prim(channel="", predicate=rise) }',
                     'event "e" { prim(predicate=rise, channel="A") }',
                     'event "e { prim(channel="A", predicate=rise) }',
                     'event "e" { prim(channel="A", predicate=rise(slope=)) }',
                     'event "e" { prim(channel="A", predicate=rise) } $']:
            self.assertRaises(SchemaSyntaxError, parse_schema, text)
        self.assertRaises(SchemaSyntaxError, parse_schema, b'\xff\xfe')

    def test_unknown_names(self):
        self.assertRaises(UnknownPredicate, parse_schema,
                          'event "e" { prim(channel="A", predicate=wobble) }')
        self.assertRaises(UnknownOperator, parse_schema,
                          'event "e" { AND(prim(channel="A", predicate=rise), '
                          'prim(channel="B", predicate=fall)) }')
        self.assertRaises(DuplicateEventType, parse_schema,
                          'event "e" { prim(channel="A", predicate=rise) }\n'
                          'event "e" { prim(channel="A", predicate=fall) }')

    def test_bad_parameters(self):
        for pred in ['rise(foo=1)', 'rise(slope=-1)', 'rise(slope=1, slope=2)',
                     'rise(slope=1e999)', 'rise(slope=steep)']:
            self.assertRaises(BadParameter, parse_schema,
                              'event "e" {{ prim(channel="A", predicate={}) }}'.format(pred))

    def test_fuzz_is_total(self):
        rng = np.random.default_rng(42)
        pieces = ['event', '"e"', '"f"', '{', '}', '(', ')', ',', '=', 'prim', 'channel',
                  'predicate', 'SEQ', 'SYNC', 'GUARD', 'OR', 'rise', 'slope', '0.5',
                  '-1', '#', '\n', ' ', '"', '\\', '@', 'é']
        for _ in range(500):
            if rng.uniform() < 0.5:
                source = bytes(rng.integers(0, 256, int(rng.integers(0, 80))).tolist())
            else:
                source = ' '.join(pieces[i] for i in
                                  rng.integers(0, len(pieces), int(rng.integers(0, 40))))
            try:
                parse_schema(source)
            except ELTError:
                pass


class TestAxioms(unittest.TestCase):

    def test_valid_tree(self):
        node = CompositeNode('SEQ', (prim('rise'), prim('fall', 'B')))
        self.assertEqual(validate_axioms(node), [])

    def test_or_with_one_child(self):
        node = CompositeNode('SEQ', (prim('rise'), CompositeNode('OR', (prim('fall'),))))
        violations = validate_axioms(SchemaTree('e', node))
        self.assertEqual(len(violations), 1)
        self.assertEqual(violations[0].kind, 'Axiom1')
        self.assertEqual(violations[0].path, (1,))
        self.assertEqual(path_str(violations[0].path), 'root/1')

    def test_guard_with_three_children(self):
        node = CompositeNode('GUARD', (prim('spike'), prim('plateau'), prim('rise')))
        self.assertEqual([v.kind for v in validate_axioms(node)], ['GuardArity'])

    def test_negated_predicate(self):
        node = CompositeNode('SYNC', (prim('not_rise'), prim('fall')))
        self.assertEqual([v.kind for v in validate_axioms(node)], ['NegatedPredicate'])

    def test_unknown_operator_node(self):
        self.assertRaises(UnknownOperator, CompositeNode, 'XOR', (prim('rise'),))


def random_node(rng, depth):
    if depth == 0 or rng.uniform() < 0.3:
        choices = [('rise', {'slope': float(rng.uniform(0.1, 2))}),
                   ('stable', {'cv': float(rng.uniform(0.01, 1))}),
                   ('spike', {}),
                   ('concave_rise', {'r2': float(rng.uniform(0.1, 1)),
                                     'curvature': float(-rng.uniform(0.01, 1))})]
        name, params = choices[int(rng.integers(0, len(choices)))]
        channel = ['A', 'B', 'p "q"', 'back\\slash'][int(rng.integers(0, 4))]
        return PrimitiveNode(PredicateRef(name, params), channel)
    op = ['SEQ', 'SYNC', 'GUARD', 'OR'][int(rng.integers(0, 4))]
    n = 2 if op == 'GUARD' else int(rng.integers(2, 4))
    return CompositeNode(op, tuple(random_node(rng, depth - 1) for _ in range(n)))


class TestRoundTrip(unittest.TestCase):

    def test_shipped_schemas(self):
        for path in glob.glob(os.path.join(SCHEMA_DIR, '*.elt')):
            catalog = load_schema(path)
            self.assertEqual(parse_schema(render_catalog(catalog)), catalog)

    def test_random_trees(self):
        rng = np.random.default_rng(11)
        for k in range(100):
            schema = SchemaTree('event_{}'.format(k), random_node(rng, 4))
            catalog = EventCatalog([(schema.event_type, schema)])
            self.assertEqual(parse_schema(render_catalog(catalog)), catalog)


if __name__ == '__main__':
    unittest.main()
