"""
Scan a series against a catalog of event schemas and report the event
instances found, each with the instance tree that explains it.
"""

import logging
from dataclasses import dataclass, field
from datetime import datetime

from elt.core import Interval, interval_intersection_length, iou
from elt.errors import ChannelMismatch, EmptyCandidates, EmptyCatalog, FormatVersionError
from elt.instantiator import SearchConfig, instantiate
from elt.logic import OperatorParams, tree_from_dict, tree_to_dict
from elt.predicates import default_registry

DETECTIONS_VERSION = 'detections_v1'


@dataclass(frozen=True)
class Detection:
    interval: Interval
    event_type: str
    confidence: float
    explanation: object = None

    def to_dict(self):
        return {'t_on': self.interval.t_on,
                't_off': self.interval.t_off,
                'event_type': self.event_type,
                'confidence': self.confidence,
                'explanation': (tree_to_dict(self.explanation)
                                if self.explanation is not None else None)}

    @classmethod
    def from_dict(cls, d):
        explanation = d.get('explanation')
        if explanation is not None:
            explanation = tree_from_dict(explanation)
        return cls(Interval(d['t_on'], d['t_off']), d['event_type'],
                   float(d['confidence']), explanation)


def detections_to_doc(detections):
    return {'version': DETECTIONS_VERSION,
            'detections': [d.to_dict() for d in detections]}


def detections_from_doc(doc):
    if not isinstance(doc, dict) or doc.get('version') != DETECTIONS_VERSION:
        found = doc.get('version') if isinstance(doc, dict) else type(doc).__name__
        raise FormatVersionError(DETECTIONS_VERSION, found)
    return [Detection.from_dict(d) for d in doc['detections']]


@dataclass(frozen=True)
class DetectorConfig:
    """
    Settings of the scan, the [detector] config section

    Attributes:
        min_confidence: lowest root score reported
        nms_iou: detections overlapping a stronger one above this IoU are
            dropped
        nms_coverage: detections with more than this share of their samples
            inside a stronger one are dropped too
        window_scales: window sizes as fractions of the series length
        exclusive: groups of event types that suppress each other
    """

    min_confidence: float = 0.3
    nms_iou: float = 0.5
    nms_coverage: float = 0.9
    window_scales: tuple = (1.0, 0.5, 0.25)
    exclusive: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, 'window_scales', tuple(self.window_scales))
        object.__setattr__(self, 'exclusive',
                           tuple(frozenset(g) for g in self.exclusive))

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})

    def competes(self, a, b):
        """True when event types a and b suppress each other"""
        if a == b:
            return True
        return any(a in g and b in g for g in self.exclusive)


def windows(T, scales, min_length=4):
    """
    Half-overlapping windows for each scale, the full series first. Windows
    shorter than two minimal segments are skipped, except the full series.

    Returns:
        sorted unique list of (start, stop)
    """
    out = set()
    for s in scales:
        w = min(T, int(round(s * T)))
        if w < max(2, 2 * min_length) and w < T:
            continue
        stride = max(1, w // 2)
        starts = list(range(0, T - w + 1, stride))
        if starts[-1] + w < T:
            starts.append(T - w)
        out.update((a, a + w) for a in starts)
    return sorted(out, key=lambda ab: (-(ab[1] - ab[0]), ab[0]))


def suppress(detections, config):
    """
    Greedy non-maximum suppression in order of confidence

    Args:
        detections: list of Detection
        config: DetectorConfig

    Returns:
        kept detections, sorted by confidence then onset
    """
    ranked = sorted(detections, key=lambda d: (-d.confidence, d.interval.t_on,
                                               d.interval.t_off, d.event_type))
    kept = []
    for d in ranked:
        if any(config.competes(d.event_type, k.event_type) and
               (iou(d.interval, k.interval) > config.nms_iou or
                interval_intersection_length(d.interval, k.interval) >
                config.nms_coverage * d.interval.length)
               for k in kept):
            continue
        kept.append(d)
    return kept


class Detector():
    """
    Detect instances of every event type of a catalog in a series

    Args:
        catalog: EventCatalog
        registry: PredicateRegistry, the shipped vocabulary by default
        search: SearchConfig
        detector: DetectorConfig
        operators: keyword arguments of OperatorParams.for_length
        trace: optional text stream for the beam search trace
    """

    def __init__(self, catalog, registry=None, search=None, detector=None,
                 operators=None, trace=None):

        self._logger = logging.getLogger(__name__)
        if len(catalog) == 0:
            raise EmptyCatalog('catalog has no event schemas')

        self.catalog = catalog
        self.search = search or SearchConfig()
        self.registry = registry or default_registry(self.search.scale_floor)
        self.config = detector or DetectorConfig()
        self.operators = operators or {}
        self.trace = trace

    def detect(self, frame):
        """
        Run every schema over every window of the frame

        Args:
            frame: SeriesFrame

        Returns:
            list of Detection
        """

        start_time = datetime.now()
        missing = self.catalog.channels - set(frame.channels)
        if missing:
            raise ChannelMismatch(missing)

        params = OperatorParams.for_length(frame.T, **self.operators)
        spans = windows(frame.T, self.config.window_scales, self.search.min_length)

        found = []
        for schema in self.catalog:
            for a, b in spans:
                try:
                    result = instantiate(frame, schema, self.registry, params,
                                         self.search, (a, b), self.trace)
                except EmptyCandidates as e:
                    self._logger.warning('No {} candidates on [{}, {}): {}'.format(
                        schema.event_type, a, b, e))
                    continue

                if result.root_score < self.config.min_confidence:
                    continue
                i = result.best.interval
                if (i.t_on == a and a > 0) or (i.t_off == b and b < frame.T):
                    self._logger.debug('Dropping {} {} at the edge of [{}, {})'.format(
                        schema.event_type, i, a, b))
                    continue
                found.append(Detection(i, schema.event_type, result.root_score,
                                       result.best))

        kept = suppress(found, self.config)
        self._logger.info('{} detections kept of {} found in {} windows ({})'.format(
            len(kept), len(found), len(spans), datetime.now() - start_time))
        return kept


def detect(frame, catalog, config=None, registry=None):
    """
    Detect events of a catalog in one frame

    Args:
        frame: SeriesFrame
        catalog: EventCatalog
        config: dict of config sections as returned by
            :func:`elt.config.read_config`, defaults when None
        registry: PredicateRegistry

    Returns:
        list of Detection
    """
    config = config or {}
    search = SearchConfig.from_dict(config.get('search', {}))
    if registry is None:
        registry = default_registry(search.scale_floor).with_overrides(
            config.get('predicates', {}))
    return Detector(catalog, registry, search,
                    DetectorConfig.from_dict(config.get('detector', {})),
                    config.get('operators')).detect(frame)
