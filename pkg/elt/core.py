"""
Time axis, intervals and the multivariate series container shared by every
other module.

Intervals are half-open ``[t_on, t_off)`` on the discrete sample axis, so two
adjacent intervals share no sample.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import stats

from elt.errors import MissingColumn, NonNumericCell, TooShort, UnknownChannel

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Interval:
    """
    Half-open span of sample indices ``[t_on, t_off)``.

    Args:
        t_on: first sample index, >= 0
        t_off: one past the last sample index, > t_on
    """

    t_on: int
    t_off: int

    def __post_init__(self):
        if int(self.t_on) != self.t_on or int(self.t_off) != self.t_off:
            raise ValueError('interval bounds must be integers')
        object.__setattr__(self, 't_on', int(self.t_on))
        object.__setattr__(self, 't_off', int(self.t_off))
        if self.t_on < 0:
            raise ValueError('interval starts before 0: {}'.format(self))
        if self.t_off <= self.t_on:
            raise ValueError('empty interval: {}'.format(self))

    @property
    def length(self):
        return self.t_off - self.t_on

    def as_list(self):
        return [self.t_on, self.t_off]

    def __str__(self):
        return '[{}, {})'.format(self.t_on, self.t_off)


def span(intervals):
    """Smallest interval that covers every interval given"""
    intervals = list(intervals)
    return Interval(min(i.t_on for i in intervals),
                    max(i.t_off for i in intervals))


def interval_intersection_length(a, b):
    """
    Number of samples shared by two intervals

    Args:
        a: Interval
        b: Interval

    Returns:
        max(0, min(a.t_off, b.t_off) - max(a.t_on, b.t_on))
    """
    return max(0, min(a.t_off, b.t_off) - max(a.t_on, b.t_on))


def union_length(a, b):
    """Set measure of the union, not the covering span"""
    return a.length + b.length - interval_intersection_length(a, b)


def iou(a, b):
    """
    Intersection over union of two intervals, in [0, 1]
    """
    inter = interval_intersection_length(a, b)
    return inter / union_length(a, b)


# (sign(b.on - a.on), sign(b.off - a.off), sign(b.on - a.off), sign(b.off - a.on))
ALLEN_SIGNS = {
    (1, 1, 1, 1): 'before',
    (1, 1, 0, 1): 'meets',
    (1, 1, -1, 1): 'overlaps',
    (-1, 1, -1, 1): 'during',
    (0, 1, -1, 1): 'starts',
    (-1, 0, -1, 1): 'finishes',
    (0, 0, -1, 1): 'equal',
    (-1, -1, -1, -1): 'after',
    (-1, -1, -1, 0): 'met_by',
    (-1, -1, -1, 1): 'overlapped_by',
    (1, -1, -1, 1): 'contains',
    (0, -1, -1, 1): 'started_by',
    (1, 0, -1, 1): 'finished_by',
}

ALLEN_RELATIONS = tuple(ALLEN_SIGNS.values())


def allen_relation(a, b):
    """
    Allen relation that holds from ``a`` to ``b``, e.g. 'before' when ``a``
    ends strictly before ``b`` starts.
    """
    key = (int(np.sign(b.t_on - a.t_on)), int(np.sign(b.t_off - a.t_off)),
           int(np.sign(b.t_on - a.t_off)), int(np.sign(b.t_off - a.t_on)))
    return ALLEN_SIGNS[key]


@dataclass(frozen=True)
class GroundTruthEvent:
    interval: Interval
    event_type: str

    def __post_init__(self):
        if not self.event_type:
            raise ValueError('event_type must not be empty')

    def to_dict(self):
        return {'t_on': self.interval.t_on,
                't_off': self.interval.t_off,
                'event_type': self.event_type}

    @classmethod
    def from_dict(cls, d):
        return cls(Interval(d['t_on'], d['t_off']), d['event_type'])


@dataclass(frozen=True, eq=False)
class SeriesFrame:
    """
    Multivariate time series with named channels.

    Args:
        channels: ordered channel names, unique
        values: T x C array of finite values
        sample_period: seconds per sample, metadata only
    """

    channels: tuple
    values: np.ndarray
    sample_period: float = 1.0
    _scales: dict = field(default_factory=dict, repr=False, compare=False)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        channels = tuple(self.channels)
        object.__setattr__(self, 'channels', channels)
        if len(set(channels)) != len(channels):
            raise ValueError('channel names must be unique: {}'.format(channels))

        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.shape[1] != len(channels):
            raise ValueError('{} columns for {} channels'.format(
                values.shape[1], len(channels)))
        if values.shape[0] < 2:
            raise TooShort(values.shape[0])
        if not np.all(np.isfinite(values)):
            raise ValueError('series values must be finite')
        values.flags.writeable = False
        object.__setattr__(self, 'values', values)

        if not self.sample_period > 0:
            raise ValueError('sample_period must be positive')

    @property
    def T(self):
        return self.values.shape[0]

    @property
    def C(self):
        return self.values.shape[1]

    def index(self, channel):
        try:
            return self.channels.index(channel)
        except ValueError:
            raise UnknownChannel(channel)

    def column(self, channel):
        return self.values[:, self.index(channel)]

    def robust_scale(self, channel, floor_fraction=0.0):
        """
        Robust scale of a full channel: the interquartile range, floored at
        1e-9. A positive ``floor_fraction`` also floors it at that fraction of
        the 1-99 percentile range, for channels that sit on one level most of
        the time. Both terms scale linearly with the channel so affine
        rescaling leaves ratios intact.
        """
        key = (channel, floor_fraction)
        if key not in self._scales:
            x = self.column(channel)
            q = stats.iqr(x)
            p1, p99 = np.percentile(x, [1, 99])
            self._scales[key] = float(max(q, floor_fraction * (p99 - p1), 1e-9))
        return self._scales[key]

    def median(self, channel):
        key = (channel, 'median')
        if key not in self._scales:
            self._scales[key] = float(np.median(self.column(channel)))
        return self._scales[key]

    def cached(self, key, compute):
        """Value of compute() memoized on the frame under key"""
        if key not in self._cache:
            self._cache[key] = compute()
        return self._cache[key]

    def window(self, start, stop):
        """New frame holding samples [start, stop)"""
        return SeriesFrame(self.channels, self.values[start:stop],
                           self.sample_period)

    def to_dataframe(self):
        return pd.DataFrame(self.values, columns=list(self.channels))

    def __eq__(self, other):
        if not isinstance(other, SeriesFrame):
            return NotImplemented
        return (self.channels == other.channels and
                self.sample_period == other.sample_period and
                np.array_equal(self.values, other.values))

    __hash__ = None


def load_csv(path, channel_spec, delimiter=',', timestamp_column=None,
             sample_period=1.0):
    """
    Load selected columns of a CSV file into a SeriesFrame. Rows keep file
    order and become sample indices.

    Args:
        path: CSV file with a header row
        channel_spec: list of column names to load
        delimiter: field separator
        timestamp_column: optional column used only to estimate the sample
            period
        sample_period: seconds per sample when no timestamp column is given

    Returns:
        SeriesFrame
    """

    df = pd.read_csv(path, sep=delimiter, dtype=str, keep_default_na=False)
    df.columns = [c.strip() for c in df.columns]

    for c in channel_spec:
        if c not in df.columns:
            raise MissingColumn(c)

    if len(df) < 2:
        raise TooShort(len(df))

    values = np.empty((len(df), len(channel_spec)))
    for j, c in enumerate(channel_spec):
        col = pd.to_numeric(df[c].str.strip(), errors='coerce').to_numpy(dtype=float)
        bad = ~np.isfinite(col)
        if bad.any():
            row = int(np.argmax(bad))
            raise NonNumericCell(row, c)
        values[:, j] = col

    if timestamp_column is not None and timestamp_column in df.columns:
        sample_period = _estimate_period(df[timestamp_column], sample_period)

    logger.debug('Loaded {} rows of {} from {}'.format(len(df), channel_spec, path))
    return SeriesFrame(tuple(channel_spec), values, sample_period)


def _estimate_period(col, default):
    """Median step of a timestamp column in seconds, numeric or datetime"""

    t = pd.to_numeric(col, errors='coerce')
    if t.isnull().any():
        t = pd.to_datetime(col, errors='coerce')
        if t.isnull().any():
            return default
        t = (t - t.iloc[0]).dt.total_seconds()

    step = float(np.median(np.diff(t.to_numpy(dtype=float))))
    return step if step > 0 else default
