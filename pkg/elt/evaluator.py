"""
IoU based precision, recall and F1 of detections against labelled events,
and a random guessing baseline.
"""

import logging
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from elt.core import GroundTruthEvent, Interval, iou
from elt.detector import Detection
from elt.errors import BadThreshold, FormatVersionError

logger = logging.getLogger(__name__)

LABELS_VERSION = 'labels_v1'
REPORT_VERSION = 'eval_report_v1'
DEFAULT_THRESHOLDS = (0.5, 0.9)


def labels_to_doc(events):
    return {'version': LABELS_VERSION, 'events': [e.to_dict() for e in events]}


def labels_from_doc(doc):
    if not isinstance(doc, dict) or doc.get('version') != LABELS_VERSION:
        found = doc.get('version') if isinstance(doc, dict) else type(doc).__name__
        raise FormatVersionError(LABELS_VERSION, found)
    return [GroundTruthEvent.from_dict(d) for d in doc['events']]


def f1_score(precision, recall):
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass
class Counts:
    tp: int = 0
    n_pred: int = 0
    n_truth: int = 0

    @property
    def fp(self):
        return self.n_pred - self.tp

    @property
    def fn(self):
        return self.n_truth - self.tp

    def scores(self):
        precision = self.tp / self.n_pred if self.n_pred else 0.0
        recall = self.tp / self.n_truth if self.n_truth else 0.0
        return {'precision': precision, 'recall': recall,
                'f1': f1_score(precision, recall),
                'tp': self.tp, 'fp': self.fp, 'fn': self.fn}


@dataclass
class EvalReport:
    """
    Attributes:
        thresholds: IoU thresholds
        overall: {threshold: scores} over all event types
        per_type: {event_type: {threshold: scores}}
        matches: matched pairs with their IoU
    """

    thresholds: tuple
    overall: dict = field(default_factory=dict)
    per_type: dict = field(default_factory=dict)
    matches: list = field(default_factory=list)

    def f1(self, threshold):
        return self.overall[threshold]['f1']

    def to_dict(self):
        key = '{:g}'.format
        return {'version': REPORT_VERSION,
                'thresholds': {key(t): self.overall[t] for t in self.thresholds},
                'per_type': {et: {key(t): s for t, s in by_t.items()}
                             for et, by_t in self.per_type.items()},
                'matches': self.matches}

    def to_table(self):
        """Plain text table, one row per event type and threshold"""
        rows = []
        for et, by_t in list(self.per_type.items()) + [('all', self.overall)]:
            for t, s in by_t.items():
                rows.append(OrderedDict([('event_type', et), ('iou', t)] +
                                        [(k, s[k]) for k in
                                         ('precision', 'recall', 'f1', 'tp', 'fp', 'fn')]))
        df = pd.DataFrame(rows, columns=['event_type', 'iou', 'precision', 'recall',
                                         'f1', 'tp', 'fp', 'fn'])
        return df.to_string(index=False, float_format='{:.3f}'.format)


def match(predictions, truth):
    """
    Greedy one-to-one matching within each event type. Predictions in order
    of confidence take the unmatched truth with the highest IoU.

    Returns:
        list of (prediction index, truth index, iou)
    """
    order = sorted(range(len(predictions)), key=lambda i: -predictions[i].confidence)
    used = set()
    pairs = []
    for i in order:
        p = predictions[i]
        best, best_iou = None, 0.0
        for j, g in enumerate(truth):
            if j in used or g.event_type != p.event_type:
                continue
            v = iou(p.interval, g.interval)
            if v > best_iou:
                best, best_iou = j, v
        if best is not None:
            used.add(best)
            pairs.append((i, best, best_iou))
    return pairs


def check_thresholds(thresholds):
    for t in thresholds:
        if not 0 < t <= 1:
            raise BadThreshold(t)


def evaluate_many(pairs, thresholds=DEFAULT_THRESHOLDS):
    """
    Pool the confusion counts of several frames

    Args:
        pairs: list of (predictions, truth) per frame
        thresholds: IoU thresholds in (0, 1]

    Returns:
        EvalReport
    """

    thresholds = tuple(float(t) for t in thresholds)
    check_thresholds(thresholds)

    types = set()
    for preds, truth in pairs:
        types.update(p.event_type for p in preds)
        types.update(g.event_type for g in truth)
    types = sorted(types)

    counts = {t: {et: Counts() for et in types} for t in thresholds}
    matches = []
    for frame_idx, (preds, truth) in enumerate(pairs):
        found = match(preds, truth)
        for i, j, v in found:
            matches.append({'frame': frame_idx, 'prediction': i, 'truth': j,
                            'event_type': truth[j].event_type, 'iou': v})
        for t in thresholds:
            for p in preds:
                counts[t][p.event_type].n_pred += 1
            for g in truth:
                counts[t][g.event_type].n_truth += 1
            for i, j, v in found:
                if v >= t:
                    counts[t][truth[j].event_type].tp += 1

    report = EvalReport(thresholds, matches=matches)
    for et in types:
        report.per_type[et] = {t: counts[t][et].scores() for t in thresholds}
    for t in thresholds:
        total = Counts(sum(c.tp for c in counts[t].values()),
                       sum(c.n_pred for c in counts[t].values()),
                       sum(c.n_truth for c in counts[t].values()))
        report.overall[t] = total.scores()

    logger.debug('Evaluated {} frames: {}'.format(
        len(pairs), {t: round(report.overall[t]['f1'], 3) for t in thresholds}))
    return report


def evaluate(predictions, truth, thresholds=DEFAULT_THRESHOLDS):
    """
    IoU based F1 of one frame's detections

    Args:
        predictions: list of Detection
        truth: list of GroundTruthEvent
        thresholds: IoU thresholds in (0, 1]

    Returns:
        EvalReport
    """
    return evaluate_many([(predictions, truth)], thresholds)


def random_baseline(frames, catalog, seed=0):
    """
    One uniformly random interval with a uniformly random event type per
    frame, confidence 0.5

    Returns:
        list with one list of Detection per frame
    """
    rng = np.random.default_rng(seed)
    types = catalog.event_types
    out = []
    for frame in frames:
        t_on = int(rng.integers(0, frame.T - 1))
        t_off = int(rng.integers(t_on + 1, frame.T + 1))
        et = types[int(rng.integers(0, len(types)))]
        out.append([Detection(Interval(t_on, t_off), et, 0.5)])
    return out
