#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Tests for `elt.predicates`."""

import unittest

import numpy as np

from elt.core import Interval, SeriesFrame
from elt.errors import (BadParameter, OutOfBounds, SegmentTooShort, UnknownChannel,
                        UnknownPredicate)
from elt.predicates import (VOCABULARY, PredicateRegistry, SegmentFeatures,
                            compute_features, default_registry, score_predicate)
from elt.schema import PredicateRef


def ramp_frame(n=60):
    """Flat, ramp up, flat"""
    x = np.concatenate([np.zeros(n // 3), np.linspace(0, 1, n // 3), np.ones(n // 3)])
    return SeriesFrame(('x',), x)


class TestFeatures(unittest.TestCase):

    def test_constant_segment(self):
        frame = SeriesFrame(('x',), [5.0, 5.0, 5.0, 5.0])
        f = compute_features(frame, 'x', Interval(0, 4))
        self.assertEqual(f.norm_slope, 0.0)
        self.assertEqual(f.cv, 0.0)
        self.assertEqual(f.net_delta, 0.0)
        self.assertEqual(f.r2_linear, 1.0)

    def test_linear_segment(self):
        # IQR of 0..6 is 3
        frame = SeriesFrame(('x',), np.arange(7.0))
        self.assertAlmostEqual(frame.robust_scale('x'), 3.0)
        f = compute_features(frame, 'x', Interval(0, 4))
        self.assertAlmostEqual(f.norm_slope, 4.0 / 3.0)
        self.assertAlmostEqual(f.r2_linear, 1.0)
        self.assertAlmostEqual(f.net_delta, 1.0)
        self.assertAlmostEqual(f.cv, 0.0)
        self.assertAlmostEqual(f.curvature, 0.0)

    def test_bounds(self):
        frame = SeriesFrame(('x',), np.arange(15.0))
        self.assertRaises(OutOfBounds, compute_features, frame, 'x', Interval(10, 20))
        self.assertRaises(SegmentTooShort, compute_features, frame, 'x', Interval(3, 4))
        self.assertRaises(UnknownChannel, compute_features, frame, 'y', Interval(0, 5))

    def test_curvature_sign(self):
        u = np.linspace(0, 1, 50)
        frame = SeriesFrame(('c', 'v'), np.column_stack((1 - np.exp(-3 * u), u ** 2)))
        self.assertLess(compute_features(frame, 'c', Interval(0, 50)).curvature, 0)
        self.assertGreater(compute_features(frame, 'v', Interval(0, 50)).curvature, 0)

    def test_constant_at_large_level(self):
        frame = SeriesFrame(('x',), np.full(200, 1e6))
        f = compute_features(frame, 'x', Interval(10, 110))
        self.assertEqual(f.norm_slope, 0.0)
        self.assertEqual(f.curvature, 0.0)
        self.assertEqual(f.cv, 0.0)
        self.assertEqual(f.noise_ratio, 0.0)
        mu = default_registry().score_segment(frame, 'x', Interval(10, 110),
                                              PredicateRef('stable'))
        self.assertGreaterEqual(mu, 0.95)

    def test_offset_does_not_change_features(self):
        rng = np.random.default_rng(4)
        x = np.cumsum(rng.normal(size=200))
        base = SeriesFrame(('x',), x)
        lifted = SeriesFrame(('x',), x + 1e6)
        for iv in [Interval(0, 50), Interval(60, 180)]:
            a = compute_features(base, 'x', iv)
            b = compute_features(lifted, 'x', iv)
            self.assertAlmostEqual(a.norm_slope, b.norm_slope, places=6)
            self.assertAlmostEqual(a.curvature, b.curvature, places=6)
            self.assertAlmostEqual(a.cv, b.cv, places=6)

    def test_noise_ratio(self):
        rng = np.random.default_rng(6)
        t = np.arange(400)
        wave = np.where((t // 20) % 2 == 0, 1.0, 0.0)
        noise = rng.normal(0.0, 0.05, 400)
        frame = SeriesFrame(('w', 'n'), np.column_stack((wave + noise, noise)))
        self.assertGreater(compute_features(frame, 'w', Interval(0, 400)).noise_ratio, 5.0)
        self.assertLess(compute_features(frame, 'n', Interval(0, 400)).noise_ratio, 1.5)

    def test_peak(self):
        x = np.zeros(40)
        x[18:22] = [1, 3, 3, 1]
        frame = SeriesFrame(('x',), x + np.linspace(0, 0.01, 40))
        f = compute_features(frame, 'x', Interval(10, 30))
        self.assertGreater(f.peak_deviation, 0)
        self.assertEqual(f.peak_prominence, abs(f.peak_deviation))


class TestScores(unittest.TestCase):

    def setUp(self):
        self.registry = default_registry()

    def score(self, name, frame, interval, channel='x', **params):
        return self.registry.score_segment(frame, channel, interval,
                                           PredicateRef(name, params))

    def test_stable_on_constant(self):
        frame = SeriesFrame(('x',), np.concatenate([np.zeros(20), np.ones(20)]))
        self.assertGreaterEqual(self.score('stable', frame, Interval(0, 20)), 0.95)

    def test_rise_on_decreasing_ramp(self):
        frame = SeriesFrame(('x',), np.linspace(1, 0, 30))
        self.assertLessEqual(self.score('rise', frame, Interval(0, 30)), 0.05)
        self.assertGreater(self.score('fall', frame, Interval(0, 30)), 0.9)

    def test_ramp_frame(self):
        frame = ramp_frame()
        self.assertGreater(self.score('rise', frame, Interval(20, 40)), 0.9)
        self.assertLess(self.score('stable', frame, Interval(20, 40)), 0.1)
        self.assertGreater(self.score('stable', frame, Interval(40, 60)), 0.9)

    def test_plateau(self):
        frame = SeriesFrame(('x',), np.concatenate([np.zeros(40), np.ones(20)]))
        self.assertGreater(self.score('plateau', frame, Interval(40, 60)), 0.9)
        self.assertLess(self.score('plateau', frame, Interval(0, 20)), 0.1)

    def test_spike_and_drop(self):
        x = np.zeros(60)
        x[28:32] = [2, 4, 4, 2]
        frame = SeriesFrame(('x', 'y'), np.column_stack((x, -x)))
        self.assertGreater(self.score('spike', frame, Interval(20, 40)), 0.9)
        self.assertLess(self.score('drop', frame, Interval(20, 40)), 0.1)
        self.assertGreater(self.score('drop', frame, Interval(20, 40), channel='y'), 0.9)

    def test_square_wave(self):
        t = np.arange(200)
        x = np.concatenate([np.zeros(100), np.where((t // 5) % 2 == 0, 1.0, 0.0)])
        frame = SeriesFrame(('x',), x)
        self.assertGreater(self.score('square_wave', frame, Interval(100, 300)), 0.9)
        self.assertLess(self.score('square_wave', frame, Interval(0, 100)), 0.1)

    def test_square_wave_needs_structure(self):
        # plain noise has a large cv but no structure beyond its own jitter
        rng = np.random.default_rng(8)
        frame = SeriesFrame(('x',), rng.normal(size=300))
        self.assertLess(self.score('square_wave', frame, Interval(0, 300)), 0.2)

    def test_stable_ratio_gate(self):
        t = np.arange(300)
        x = np.concatenate([np.zeros(100), np.where((t[:200] // 10) % 2 == 0, 0.5, 0.0)])
        x = x + np.random.default_rng(3).normal(0.0, 0.05, 300)
        frame = SeriesFrame(('x',), x)
        loose = dict(cv=3.0, slope=1.0)
        self.assertGreater(self.score('stable', frame, Interval(100, 300), **loose), 0.8)
        self.assertLess(self.score('stable', frame, Interval(100, 300), ratio=2.0, **loose),
                        0.1)
        self.assertGreater(self.score('stable', frame, Interval(0, 100), ratio=2.0, **loose),
                           0.5)

    def test_range_over_random_segments(self):
        rng = np.random.default_rng(0)
        frame = SeriesFrame(('x',), np.cumsum(rng.normal(size=300)))
        for name in VOCABULARY:
            for _ in range(30):
                a = int(rng.integers(0, 290))
                b = int(rng.integers(a + 2, 301))
                mu = self.score(name, frame, Interval(a, b))
                self.assertGreaterEqual(mu, 0.0)
                self.assertLessEqual(mu, 1.0)

    def test_monotone_in_threshold(self):
        frame = ramp_frame()
        feats = compute_features(frame, 'x', Interval(15, 45))
        last = 1.0
        for slope in [0.1, 0.3, 0.6, 1.0, 2.0]:
            mu = score_predicate(PredicateRef('rise', {'slope': slope}), feats)
            self.assertLessEqual(mu, last)
            last = mu

    def test_monotone_in_norm_slope(self):
        rise, fall = PredicateRef('rise'), PredicateRef('fall')
        last_rise, last_fall = 0.0, 1.0
        for v in np.linspace(-3.0, 3.0, 61):
            feats = SegmentFeatures(norm_slope=float(v), r2_linear=1.0, curvature=0.0,
                                    cv=0.0, net_delta=float(v), peak_deviation=0.0,
                                    peak_prominence=0.0)
            mirror = SegmentFeatures(norm_slope=float(-v), r2_linear=1.0, curvature=0.0,
                                     cv=0.0, net_delta=float(-v), peak_deviation=0.0,
                                     peak_prominence=0.0)
            mu_rise = score_predicate(rise, feats)
            mu_fall = score_predicate(fall, feats)
            self.assertGreaterEqual(mu_rise, last_rise)
            self.assertLessEqual(mu_fall, last_fall)
            self.assertAlmostEqual(mu_fall, score_predicate(rise, mirror))
            last_rise, last_fall = mu_rise, mu_fall
        self.assertGreater(last_rise, 0.9)
        self.assertLess(last_fall, 0.01)

    def test_affine_invariance(self):
        rng = np.random.default_rng(5)
        x = np.cumsum(rng.normal(size=200))
        base = SeriesFrame(('x',), x)
        for a, b in [(10.0, 100.0), (0.1, -5.0)]:
            scaled = SeriesFrame(('x',), a * x + b)
            for name in VOCABULARY:
                for iv in [Interval(0, 50), Interval(40, 120), Interval(100, 200)]:
                    self.assertAlmostEqual(self.score(name, base, iv),
                                           self.score(name, scaled, iv), places=6)

    def test_time_warp(self):
        for k in (2, 3):
            coarse = SeriesFrame(('x',), np.linspace(0, 1, 30))
            fine = SeriesFrame(('x',), np.linspace(0, 1, 30 * k))
            for name in ('rise', 'stable', 'fall'):
                self.assertLess(abs(self.score(name, coarse, Interval(0, 30)) -
                                    self.score(name, fine, Interval(0, 30 * k))), 0.05)


class TestRegistry(unittest.TestCase):

    def test_vocabulary(self):
        reg = default_registry()
        for name in ('rise', 'fall', 'stable', 'plateau', 'spike', 'drop',
                     'square_wave', 'concave_rise'):
            self.assertIn(name, reg)
        self.assertEqual(reg.names(), sorted(VOCABULARY))

    def test_unknown_and_bad_params(self):
        reg = default_registry()
        self.assertRaises(UnknownPredicate, reg.validate, PredicateRef('wobble'))
        self.assertRaises(BadParameter, reg.validate, PredicateRef('rise', {'foo': 1}))
        self.assertRaises(BadParameter, reg.validate, PredicateRef('rise', {'slope': -1}))
        self.assertRaises(BadParameter, reg.validate, PredicateRef('rise', {'r2': 2}))
        self.assertRaises(BadParameter, reg.validate,
                          PredicateRef('rise', {'slope': float('inf')}))
        self.assertRaises(BadParameter, reg.validate,
                          PredicateRef('rise', {'slope': 'steep'}))

    def test_resolve_merges_defaults(self):
        params = default_registry().resolve(PredicateRef('stable', {'cv': 0.4}))
        self.assertEqual(params, {'cv': 0.4, 'slope': 0.15, 'ratio': 0.0})

    def test_with_overrides(self):
        reg = default_registry()
        new = reg.with_overrides({'rise': {'slope': 2.0}})
        self.assertEqual(new.resolve(PredicateRef('rise'))['slope'], 2.0)
        self.assertEqual(reg.resolve(PredicateRef('rise'))['slope'], 0.3)
        self.assertRaises(BadParameter, reg.with_overrides, {'rise': {'foo': 1.0}})
        self.assertRaises(UnknownPredicate, reg.with_overrides, {'wobble': {'a': 1.0}})

    def test_segment_scorer(self):
        reg = PredicateRegistry()
        reg.register('high_mean', {}, scorer=lambda frame, ch, iv, p: 2.0)
        frame = SeriesFrame(('x',), np.zeros(10))
        self.assertEqual(reg.score_segment(frame, 'x', Interval(0, 5),
                                           PredicateRef('high_mean')), 1.0)
        self.assertRaises(ValueError, reg.register, 'x', {})


if __name__ == '__main__':
    unittest.main()
