#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Tests for `elt.evaluator`."""

import unittest

import numpy as np

from elt.core import GroundTruthEvent, Interval, SeriesFrame
from elt.detector import Detection
from elt.errors import BadThreshold, FormatVersionError
from elt.evaluator import (evaluate, evaluate_many, labels_from_doc, labels_to_doc, match,
                           random_baseline)
from elt.schema import parse_schema


def pred(a, b, event_type='e', confidence=0.8):
    return Detection(Interval(a, b), event_type, confidence)


def truth(a, b, event_type='e'):
    return GroundTruthEvent(Interval(a, b), event_type)


class TestEvaluate(unittest.TestCase):

    def test_perfect_match(self):
        report = evaluate([pred(0, 10), pred(20, 30, 'f')], [truth(0, 10), truth(20, 30, 'f')])
        for t in (0.5, 0.9):
            self.assertEqual(report.f1(t), 1.0)
        self.assertEqual(set(report.per_type), {'e', 'f'})

    def test_partial_match(self):
        report = evaluate([pred(0, 6)], [truth(0, 10), truth(20, 30)])
        self.assertAlmostEqual(report.f1(0.5), 2 / 3)
        self.assertEqual(report.overall[0.5]['precision'], 1.0)
        self.assertEqual(report.overall[0.5]['recall'], 0.5)
        self.assertEqual(report.f1(0.9), 0.0)
        self.assertEqual(report.overall[0.9]['fp'], 1)
        self.assertEqual(report.overall[0.9]['fn'], 2)

    def test_no_predictions(self):
        report = evaluate([], [truth(0, 10)])
        scores = report.overall[0.5]
        self.assertEqual((scores['precision'], scores['recall'], scores['f1']),
                         (0.0, 0.0, 0.0))

    def test_types_never_pair(self):
        report = evaluate([pred(0, 10, 'f')], [truth(0, 10, 'e')])
        self.assertEqual(report.f1(0.5), 0.0)
        self.assertEqual(match([pred(0, 10, 'f')], [truth(0, 10, 'e')]), [])

    def test_one_to_one(self):
        # the stronger prediction takes the truth, the other one is a false positive
        preds = [pred(0, 9, confidence=0.5), pred(0, 10, confidence=0.9)]
        self.assertEqual(match(preds, [truth(0, 10)]), [(1, 0, 1.0)])
        self.assertAlmostEqual(evaluate(preds, [truth(0, 10)]).f1(0.5), 2 / 3)

    def test_bad_thresholds(self):
        for t in (0.0, -0.1, 1.5):
            self.assertRaises(BadThreshold, evaluate, [], [], [t])
        evaluate([], [], [1.0])

    def test_threshold_monotone(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            preds, gts = [], []
            for _ in range(5):
                a = int(rng.integers(0, 100))
                preds.append(pred(a, a + int(rng.integers(1, 30)),
                                  confidence=float(rng.uniform())))
                a = int(rng.integers(0, 100))
                gts.append(truth(a, a + int(rng.integers(1, 30))))
            report = evaluate(preds, gts, [0.1, 0.3, 0.5, 0.7, 0.9])
            f1 = [report.f1(t) for t in report.thresholds]
            self.assertEqual(f1, sorted(f1, reverse=True))

    def test_pooled_counts(self):
        report = evaluate_many([([pred(0, 10)], [truth(0, 10)]),
                                ([], [truth(5, 15)])])
        self.assertEqual(report.overall[0.5]['tp'], 1)
        self.assertEqual(report.overall[0.5]['fn'], 1)
        self.assertEqual(report.matches[0]['frame'], 0)

    def test_report_output(self):
        report = evaluate([pred(0, 6)], [truth(0, 10), truth(20, 30)])
        doc = report.to_dict()
        self.assertEqual(doc['version'], 'eval_report_v1')
        self.assertEqual(set(doc['thresholds']), {'0.5', '0.9'})
        table = report.to_table()
        self.assertIn('f1', table)
        self.assertIn('0.667', table)


class TestLabels(unittest.TestCase):

    def test_round_trip(self):
        events = [truth(0, 10), truth(20, 30, 'f')]
        self.assertEqual(labels_from_doc(labels_to_doc(events)), events)

    def test_version(self):
        self.assertRaises(FormatVersionError, labels_from_doc,
                          {'version': 'labels_v0', 'events': []})
        self.assertRaises(FormatVersionError, labels_from_doc, 'labels')


class TestBaseline(unittest.TestCase):

    def test_deterministic(self):
        catalog = parse_schema('event "a" { prim(channel="x", predicate=rise) }\n'
                               'event "b" { prim(channel="x", predicate=fall) }')
        frames = [SeriesFrame(('x',), np.zeros(n)) for n in (50, 80, 120)]
        first = random_baseline(frames, catalog, seed=1)
        self.assertEqual(first, random_baseline(frames, catalog, seed=1))
        self.assertEqual(len(first), 3)
        for frame, dets in zip(frames, first):
            self.assertEqual(len(dets), 1)
            self.assertLessEqual(dets[0].interval.t_off, frame.T)
            self.assertIn(dets[0].event_type, ('a', 'b'))


if __name__ == '__main__':
    unittest.main()
