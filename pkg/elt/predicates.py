"""
Rule-based semantic functions: score how well one channel over one interval
matches a morphological predicate.

Every score is a product of logistic soft gates over a handful of segment
features, so it is graded in [0, 1] rather than a hard yes/no. Features are
normalized by the robust scale of the whole channel, which makes every score
invariant to affine rescaling of the channel.
"""

import logging
import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np
from scipy import stats

from elt.errors import BadParameter, OutOfBounds, SegmentTooShort, UnknownPredicate
from elt.utils import g_high, g_low

logger = logging.getLogger(__name__)

INF = float('inf')


@dataclass(frozen=True)
class SegmentFeatures:
    """
    Shape descriptors of one segment. All values are divided by the channel
    robust scale except r2_linear and noise_ratio.

    Attributes:
        norm_slope: least-squares slope times segment length
        r2_linear: coefficient of determination of the linear fit
        curvature: mean second derivative on normalized time u in [0, 1]
        cv: standard deviation of the linear-fit residuals
        net_delta: last value minus first value
        peak_deviation: signed largest deviation from the endpoints line
        peak_prominence: absolute value of peak_deviation
        level: segment mean minus channel median
        noise_ratio: residual standard deviation over the sample noise
            level, which is estimated from first differences and so ignores
            a few jumps
    """

    norm_slope: float
    r2_linear: float
    curvature: float
    cv: float
    net_delta: float
    peak_deviation: float
    peak_prominence: float
    level: float = 0.0
    noise_ratio: float = 0.0


def compute_features(frame, channel, interval, scale_floor=0.0):
    """
    Compute the SegmentFeatures of ``channel`` over ``interval``. Results are
    memoized on the frame.

    Args:
        frame: SeriesFrame
        channel: channel name
        interval: Interval inside [0, T) with length >= 2
        scale_floor: fraction of the 1-99 percentile range used as the
            lower bound of the robust scale, 0 for the plain IQR

    Returns:
        SegmentFeatures
    """

    if interval.t_off > frame.T:
        raise OutOfBounds('{} outside series of length {}'.format(interval, frame.T))
    if interval.length < 2:
        raise SegmentTooShort('{} is shorter than 2 samples'.format(interval))
    key = ('features', channel, interval.t_on, interval.t_off, scale_floor)
    return frame.cached(key, lambda: _features(frame, channel, interval, scale_floor))


def _features(frame, channel, interval, scale_floor):
    x = frame.column(channel)[interval.t_on:interval.t_off]
    n = len(x)
    s = frame.robust_scale(channel, scale_floor)
    level = float((x.mean() - frame.median(channel)) / s)

    if np.ptp(x) == 0:
        # constant: exactly linear and flat
        return SegmentFeatures(norm_slope=0.0, r2_linear=1.0, curvature=0.0, cv=0.0,
                               net_delta=0.0, peak_deviation=0.0, peak_prominence=0.0,
                               level=level, noise_ratio=0.0)

    # centered fits stay exact on a large offset
    xc = x - x.mean()
    t = np.arange(n, dtype=float)
    tc = t - t.mean()
    slope = float(np.dot(tc, xc) / np.dot(tc, tc))
    resid = xc - slope * tc
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum(xc ** 2))
    r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))

    if n >= 3:
        u = tc / (n - 1)
        curvature = 2.0 * np.polyfit(u, xc, 2)[0] / s
    else:
        curvature = 0.0

    dev = xc - (xc[0] + (xc[-1] - xc[0]) * t / (n - 1))
    peak = float(dev[np.argmax(np.abs(dev))]) / s

    spread = float(np.std(resid))
    noise = stats.median_abs_deviation(np.diff(x), scale='normal') / math.sqrt(2.0)
    noise_ratio = spread / max(float(noise), 1e-9 * s) if spread > 0 else 0.0

    return SegmentFeatures(
        norm_slope=slope * n / s,
        r2_linear=r2,
        curvature=float(curvature),
        cv=spread / s,
        net_delta=float((x[-1] - x[0]) / s),
        peak_deviation=peak,
        peak_prominence=abs(peak),
        level=level,
        noise_ratio=float(noise_ratio))


Param = namedtuple('Param', ['default', 'low', 'high'])


def _rise(f, p, sign=1.0):
    mu = g_high(sign * f.norm_slope, p['slope']) * g_high(f.r2_linear, p['r2'])
    if p['max_delta'] > 0:
        mu = mu * g_low(abs(f.net_delta), p['max_delta'])
    return mu


def _fall(f, p):
    return _rise(f, p, sign=-1.0)


def _stable(f, p):
    mu = g_low(abs(f.norm_slope), p['slope']) * g_low(f.cv, p['cv'])
    if p['ratio'] > 0:
        mu = mu * g_low(f.noise_ratio, p['ratio'])
    return mu


def _plateau(f, p):
    return g_high(f.level, p['level']) * _stable(f, p)


def _spike(f, p):
    return g_high(f.peak_deviation, p['prominence']) * g_low(abs(f.net_delta), p['delta'])


def _drop(f, p):
    return g_high(-f.peak_deviation, p['prominence']) * g_low(abs(f.net_delta), p['delta'])


def _square_wave(f, p):
    return (g_high(f.cv, p['cv']) * g_high(f.noise_ratio, p['ratio']) *
            g_low(abs(f.norm_slope), p['slope']) * g_low(f.r2_linear, p['r2']))


def _concave_rise(f, p):
    return _rise(f, p) * g_low(f.curvature, p['curvature'])


_RAMP = {'slope': Param(0.3, 1e-6, INF),
         'r2': Param(0.6, 1e-6, 1.0),
         'max_delta': Param(0.0, 0.0, INF)}

_FLAT = {'slope': Param(0.15, 1e-6, INF),
         'cv': Param(0.10, 1e-6, INF),
         'ratio': Param(0.0, 0.0, INF)}

_PEAK = {'prominence': Param(1.0, 1e-6, INF),
         'delta': Param(0.3, 1e-6, INF)}

VOCABULARY = {
    'stable': (_FLAT, _stable),
    'rise': (_RAMP, _rise),
    'fall': (_RAMP, _fall),
    'spike': (_PEAK, _spike),
    'drop': (_PEAK, _drop),
    'plateau': (dict(_FLAT, level=Param(0.5, 1e-6, INF)), _plateau),
    'square_wave': ({'cv': Param(0.25, 1e-6, INF),
                     'ratio': Param(2.0, 1e-6, INF),
                     'slope': Param(0.5, 1e-6, INF),
                     'r2': Param(0.5, 1e-6, 1.0)}, _square_wave),
    'concave_rise': (dict(_RAMP, curvature=Param(-0.05, -INF, -1e-6)), _concave_rise),
}


class PredicateRegistry():
    """
    Maps predicate names to a parameter signature and a scoring rule.

    A rule is either a feature rule ``rule(features, params) -> mu`` or a
    segment scorer ``scorer(frame, channel, interval, params) -> mu``. Feature
    rules get their SegmentFeatures from :func:`compute_features`; segment
    scorers see the raw signal, which is where an embedding based scorer
    would plug in.

    Args:
        scale_floor: robust scale floor used when computing features
    """

    def __init__(self, scale_floor=0.0):
        self._logger = logging.getLogger(__name__)
        self._entries = {}
        self.scale_floor = scale_floor

    def register(self, name, signature, rule=None, scorer=None):
        if (rule is None) == (scorer is None):
            raise ValueError('give exactly one of rule or scorer for {}'.format(name))
        self._entries[name] = (dict(signature), rule, scorer)

    def names(self):
        return sorted(self._entries)

    def __contains__(self, name):
        return name in self._entries

    def signature(self, name):
        if name not in self._entries:
            raise UnknownPredicate(name)
        return self._entries[name][0]

    def resolve(self, pred):
        """
        Full parameter set for a predicate reference: registry defaults
        updated with the reference's own parameters, after validation.
        """

        sig = self.signature(pred.name)
        given = dict(pred.params)
        for key, value in given.items():
            if key not in sig:
                raise BadParameter(key, 'not a parameter of {}'.format(pred.name))
            check_value(key, value, sig[key])

        params = {k: p.default for k, p in sig.items()}
        params.update(given)
        return params

    def validate(self, pred):
        self.resolve(pred)

    def score(self, pred, feats):
        """Score precomputed features, feature rules only"""
        params = self.resolve(pred)
        _, rule, _ = self._entries[pred.name]
        if rule is None:
            raise BadParameter(pred.name, 'segment scorer cannot score features')
        return _clip(rule(feats, params))

    def score_segment(self, frame, channel, interval, pred):
        params = self.resolve(pred)
        _, rule, scorer = self._entries[pred.name]
        if scorer is not None:
            return _clip(scorer(frame, channel, interval, params))
        feats = compute_features(frame, channel, interval, self.scale_floor)
        return _clip(rule(feats, params))

    def with_overrides(self, overrides):
        """
        Copy of the registry with changed defaults

        Args:
            overrides: {predicate: {param: value}}

        Returns:
            PredicateRegistry
        """

        new = PredicateRegistry(self.scale_floor)
        new._entries = dict(self._entries)
        for name, values in overrides.items():
            sig = dict(self.signature(name))
            for key, value in values.items():
                if key not in sig:
                    raise BadParameter('{}.{}'.format(name, key))
                check_value(key, value, sig[key])
                sig[key] = sig[key]._replace(default=value)
            _, rule, scorer = new._entries[name]
            new._entries[name] = (sig, rule, scorer)

        return new


def check_value(key, value, param):
    if isinstance(param.default, str):
        if not isinstance(value, str):
            raise BadParameter(key, 'expected a name')
        return
    if isinstance(value, str) or isinstance(value, bool):
        raise BadParameter(key, 'expected a number')
    value = float(value)
    if not math.isfinite(value):
        raise BadParameter(key, 'must be finite')
    if not param.low <= value <= param.high:
        raise BadParameter(key, '{} outside [{}, {}]'.format(value, param.low, param.high))


def _clip(mu):
    return min(1.0, max(0.0, float(mu)))


def default_registry(scale_floor=0.0):
    """Registry holding the shipped vocabulary"""
    reg = PredicateRegistry(scale_floor)
    for name, (signature, rule) in VOCABULARY.items():
        reg.register(name, signature, rule=rule)
    return reg


def score_predicate(pred, feats, registry=None):
    """
    Semantic coherence score of a predicate on segment features

    Args:
        pred: PredicateRef
        feats: SegmentFeatures
        registry: PredicateRegistry, the shipped vocabulary by default

    Returns:
        mu in [0, 1]
    """
    if registry is None:
        registry = default_registry()
    return registry.score(pred, feats)
