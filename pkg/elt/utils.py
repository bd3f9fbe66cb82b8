"""
Collection of utilities that are needed for more than one module
"""

import json

import numpy as np
from scipy.special import expit


def strip_string(s, sep=','):
    """Split a config value into a list of stripped, non-empty items"""
    return [x.strip() for x in s.split(sep) if x.strip()]


def gate_slope(theta):
    """Logistic slope used for a threshold, a quarter of its magnitude"""
    return max(abs(theta) / 4.0, 1e-6)


def g_high(x, theta):
    """
    Soft indicator of x > theta

    Args:
        x: feature value
        theta: threshold, the gate is 0.5 there

    Returns:
        value in [0, 1], increasing in x
    """
    return float(expit((x - theta) / gate_slope(theta)))


def g_low(x, theta):
    """Soft indicator of x < theta, the complement of :func:`g_high`"""
    return float(expit((theta - x) / gate_slope(theta)))


def product(values):
    """Left fold of multiplication, so the float result is order-stable"""
    p = 1.0
    for v in values:
        p = p * v
    return p


def dump_json(doc, path=None):
    """
    Serialize a document with sorted keys and fixed indentation so that
    equal documents give byte-identical files.
    """
    text = json.dumps(doc, sort_keys=True, indent=2, default=_default) + '\n'
    if path is not None:
        with open(path, 'w') as f:
            f.write(text)
    return text


def load_json(path):
    with open(path) as f:
        return json.load(f)


def _default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    raise TypeError('{!r} is not JSON serializable'.format(o))
