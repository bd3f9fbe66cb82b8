"""
Seeded generator of two-channel pressure test frames with labelled events.

Each frame is a flat baseline with one planted event. A valid test is a
drawdown (pressure falls while volume ramps up) followed by a concave
pressure recovery and a stable hold while the volume stays put, then a
retraction back to baseline. A lost seal has the same drawdown followed by
an oscillating pressure. Isolated spikes and slow drifts are added outside
the event as distractors.

Values are built in normalized units and mapped to psi and cc at the end.
"""

import logging
import os
from dataclasses import dataclass

import numpy as np

from elt.core import GroundTruthEvent, Interval, SeriesFrame
from elt.evaluator import labels_to_doc
from elt.utils import dump_json

logger = logging.getLogger(__name__)

CHANNELS = ('pressure', 'volume')

PRESSURE_OFFSET = 500.0
PRESSURE_GAIN = 2500.0
VOLUME_GAIN = 40.0

RETRACTION = 5


@dataclass(frozen=True)
class SyntheticSpec:
    """
    Settings of the synthetic suite, the [synthetic] config section

    Attributes:
        seed: seed of the random generator
        n_samples: number of frames
        length_mean, length_std: lognormal frame length in samples
        event_mean, event_std: lognormal event length in samples
        drawdown_mean, drawdown_std: lognormal drawdown length in samples
        noise: standard deviation of the additive noise, normalized units
        lost_seal_fraction: share of frames holding a lost seal
        bounce_fraction: share of valid tests with a fast linear recovery
        distractors: spikes and drifts per frame
        sample_period: seconds per sample
        phases: label drawdown and buildup instead of the whole test
    """

    seed: int = 7
    n_samples: int = 10
    length_mean: float = 2000.0
    length_std: float = 800.0
    length_min: int = 600
    length_max: int = 9742
    event_mean: float = 1000.0
    event_std: float = 400.0
    drawdown_mean: float = 100.0
    drawdown_std: float = 40.0
    noise: float = 0.05
    lost_seal_fraction: float = 0.2
    bounce_fraction: float = 0.3
    distractors: int = 2
    sample_period: float = 1.0
    phases: bool = False

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})


def lognormal(rng, mean, std):
    """Lognormal draw parameterized by its own mean and standard deviation"""
    s2 = np.log(1.0 + (std / mean) ** 2)
    return float(rng.lognormal(np.log(mean) - s2 / 2.0, np.sqrt(s2)))


def _event(rng, spec, T):
    length = lognormal(rng, spec.event_mean, spec.event_std)
    length = int(np.clip(length, 150, 0.6 * T))
    dd = lognormal(rng, spec.drawdown_mean, spec.drawdown_std)
    dd = int(np.clip(dd, 30, 0.3 * length))
    margin = int(0.1 * T)
    start = int(rng.integers(margin, max(margin + 1, T - length - RETRACTION - margin)))
    return start, length, dd


def _plant_valid(rng, spec, p, v, start, length, dd):
    level = rng.uniform(0.5, 0.7)
    u = np.linspace(0.0, 1.0, dd)
    p[start:start + dd] = 1.0 - u
    v[start:start + dd] = u

    a = start + dd
    rec = int(rng.uniform(0.3, 0.5) * (length - dd))
    u = np.linspace(0.0, 1.0, rec)
    if rng.uniform() < spec.bounce_fraction:
        p[a:a + rec] = level * u
    else:
        p[a:a + rec] = level * (1.0 - np.exp(-3.0 * u)) / (1.0 - np.exp(-3.0))
    p[a + rec:start + length] = level
    v[a:start + length] = 1.0
    return level


def _plant_lost_seal(rng, spec, p, v, start, length, dd):
    u = np.linspace(0.0, 1.0, dd)
    p[start:start + dd] = 1.0 - u
    v[start:start + dd] = u

    a = start + dd
    rest = start + length - a
    period = max(8, rest // int(rng.integers(4, 8)))
    t = np.arange(rest)
    high = ((t // (period // 2)) % 2) == 0
    p[a:start + length] = np.where(high, 0.6, 0.2)
    v[a:start + length] = 1.0
    return float(p[start + length - 1])


def _retract(p, v, end, level):
    u = np.linspace(0.0, 1.0, RETRACTION + 1)[1:]
    p[end:end + RETRACTION] = level + (1.0 - level) * u
    v[end:end + RETRACTION] = 1.0 - u


def _distract(rng, spec, p, busy, T):
    """Spikes and drifts on pressure, kept clear of the event span"""
    lo, hi = busy
    for k in range(spec.distractors):
        spike = k % 2 == 0
        width = int(rng.integers(5, 16)) if spike else int(rng.integers(100, 301))
        room = [(0, lo - width), (hi, T - width)]
        room = [(a, b) for a, b in room if b > a]
        if not room:
            continue
        a, b = room[int(rng.integers(0, len(room)))]
        at = int(rng.integers(a, b))
        u = np.linspace(0.0, np.pi, width)
        amp = 0.3 if spike else 0.1
        p[at:at + width] += amp * np.sin(u)


def generate_frame(rng, spec):
    T = int(np.clip(lognormal(rng, spec.length_mean, spec.length_std),
                    spec.length_min, spec.length_max))
    p = np.ones(T)
    v = np.zeros(T)

    start, length, dd = _event(rng, spec, T)
    end = start + length
    if rng.uniform() < spec.lost_seal_fraction:
        event_type = 'lost_seal'
        level = _plant_lost_seal(rng, spec, p, v, start, length, dd)
    else:
        event_type = 'valid_test'
        level = _plant_valid(rng, spec, p, v, start, length, dd)
    _retract(p, v, end, level)
    _distract(rng, spec, p, (max(0, start - 10), min(T, end + RETRACTION + 10)), T)

    if spec.noise > 0:
        p = p + rng.normal(0.0, spec.noise, T)
        v = v + rng.normal(0.0, spec.noise, T)

    if spec.phases:
        events = [GroundTruthEvent(Interval(start, start + dd), 'drawdown')]
        if event_type == 'valid_test':
            events.append(GroundTruthEvent(Interval(start + dd, end), 'buildup'))
    else:
        events = [GroundTruthEvent(Interval(start, end), event_type)]

    values = np.column_stack((PRESSURE_OFFSET + PRESSURE_GAIN * p, VOLUME_GAIN * v))
    frame = SeriesFrame(CHANNELS, values, spec.sample_period)
    return frame, events


def generate_synthetic(spec):
    """
    Generate the synthetic suite

    Args:
        spec: SyntheticSpec

    Returns:
        list of (SeriesFrame, list of GroundTruthEvent)
    """
    rng = np.random.default_rng(spec.seed)
    out = [generate_frame(rng, spec) for _ in range(spec.n_samples)]
    logger.info('Generated {} synthetic frames, seed {}'.format(len(out), spec.seed))
    return out


def write_synthetic(suite, out_dir, sample_period=1.0):
    """
    Write each frame as ``frame_NNN.csv`` with a time column next to its
    ``frame_NNN.labels.json``

    Returns:
        list of written csv paths
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for k, (frame, events) in enumerate(suite):
        stem = os.path.join(out_dir, 'frame_{:03d}'.format(k))
        df = frame.to_dataframe()
        df.insert(0, 'time', np.arange(frame.T) * sample_period)
        df.to_csv(stem + '.csv', index=False, float_format='%.6f')
        dump_json(labels_to_doc(events), stem + '.labels.json')
        paths.append(stem + '.csv')
    return paths
