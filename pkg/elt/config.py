"""
Read and check the INI configuration file.

Every key is optional. Values are checked against :attr:`Config.ranges`, a
table of type and bounds per section, and converted to python types. The
``[predicates]`` section holds ``<predicate>.<param>`` overrides of the
predicate defaults.
"""

import logging
import math
import os
from configparser import ConfigParser

from elt.errors import ConfigError
from elt.utils import strip_string

ENV_VAR = 'ELT_CONFIG'

INF = float('inf')


class MyParser(ConfigParser):
    def as_dict(self):
        d = dict(self._sections)
        for k in d:
            d[k] = dict(self._defaults, **d[k])
            d[k].pop('__name__', None)
        return d


class Config():
    """
    Typed configuration sections

    Args:
        config_file: INI file, the ``ELT_CONFIG`` environment variable when
            None, no file at all when neither is set
        overrides: {section: {key: value}} applied over the file, values
            either strings as in the file or already typed

    Attributes:
        sections: {section: {key: value}} holding only the keys given
    """

    ranges = {
        'logging': {
            'log_level': {'type': 'choice',
                          'choices': ('debug', 'info', 'warning', 'error', 'critical')},
            'log_file': {'type': 'str'},
        },
        'operators': {
            'delta': {'type': 'int', 'min': 0, 'max': INF},
            'delta_fraction': {'type': 'float', 'min': 0, 'max': 1},
            'kappa': {'type': 'float', 'min': 1e-9, 'max': INF},
            'sigma': {'type': 'float', 'min': 1e-9, 'max': INF},
            'sigma_fraction': {'type': 'float', 'min': 1e-9, 'max': 1},
            'epsilon': {'type': 'int', 'min': 0, 'max': INF},
            'compactness_tolerance': {'type': 'int', 'min': 0, 'max': INF},
        },
        'search': {
            'method': {'type': 'choice', 'choices': ('beam', 'exhaustive')},
            'beam_width': {'type': 'int', 'min': 1, 'max': INF},
            'max_candidates': {'type': 'int', 'min': 1, 'max': INF},
            'exhaustive_budget': {'type': 'int', 'min': 1, 'max': INF},
            'span_limit': {'type': 'float', 'min': 1e-9, 'max': 1},
            'penalty_beta': {'type': 'float', 'min': 0, 'max': INF},
            'min_length': {'type': 'int', 'min': 2, 'max': INF},
            'refine_fraction': {'type': 'float', 'min': 0, 'max': 1},
            'scale_floor': {'type': 'float', 'min': 0, 'max': 1},
        },
        'detector': {
            'min_confidence': {'type': 'float', 'min': 0, 'max': 1},
            'nms_iou': {'type': 'float', 'min': 0, 'max': 1},
            'nms_coverage': {'type': 'float', 'min': 0, 'max': 1},
            'window_scales': {'type': 'floats', 'min': 1e-9, 'max': 1},
            'exclusive': {'type': 'groups'},
        },
        'data': {
            'delimiter': {'type': 'str'},
            'timestamp_column': {'type': 'str'},
            'channels': {'type': 'strs'},
            'sample_period': {'type': 'float', 'min': 1e-12, 'max': INF},
        },
        'synthetic': {
            'seed': {'type': 'int', 'min': 0, 'max': INF},
            'n_samples': {'type': 'int', 'min': 1, 'max': INF},
            'length_mean': {'type': 'float', 'min': 10, 'max': INF},
            'length_std': {'type': 'float', 'min': 0, 'max': INF},
            'length_min': {'type': 'int', 'min': 10, 'max': INF},
            'length_max': {'type': 'int', 'min': 10, 'max': INF},
            'event_mean': {'type': 'float', 'min': 10, 'max': INF},
            'event_std': {'type': 'float', 'min': 0, 'max': INF},
            'drawdown_mean': {'type': 'float', 'min': 1, 'max': INF},
            'drawdown_std': {'type': 'float', 'min': 0, 'max': INF},
            'noise': {'type': 'float', 'min': 0, 'max': INF},
            'lost_seal_fraction': {'type': 'float', 'min': 0, 'max': 1},
            'bounce_fraction': {'type': 'float', 'min': 0, 'max': 1},
            'distractors': {'type': 'int', 'min': 0, 'max': INF},
            'sample_period': {'type': 'float', 'min': 1e-12, 'max': INF},
            'phases': {'type': 'bool'},
        },
    }

    def __init__(self, config_file=None, overrides=None):

        self._logger = logging.getLogger(__name__)

        if config_file is None:
            config_file = os.environ.get(ENV_VAR) or None

        raw = {}
        if config_file is not None:
            if not os.path.isfile(config_file):
                raise ConfigError('Configuration file does not exist --> {}'
                                  .format(config_file))
            f = MyParser()
            try:
                f.read(config_file)
            except Exception as e:
                raise ConfigError('Could not read {}: {}'.format(config_file, e))
            raw = f.as_dict()

        for section, values in (overrides or {}).items():
            raw.setdefault(section, {}).update(
                {k: v for k, v in values.items() if v is not None})

        self.config_file = config_file
        self.sections = {}
        for section, values in raw.items():
            if section == 'predicates':
                self.sections[section] = self.process_predicates(values)
            elif section in self.ranges:
                self.sections[section] = {k: self.convert(section, k, v)
                                          for k, v in values.items()}
            else:
                raise ConfigError('unknown config section [{}]'.format(section))

    def convert(self, section, key, value):
        """Check one value against the ranges table and give it its type"""

        if key not in self.ranges[section]:
            raise ConfigError('unknown key {!r} in [{}]'.format(key, section))
        r = self.ranges[section][key]

        if isinstance(value, str) and value.strip().lower() == 'none':
            return None

        kind = r['type']
        try:
            if kind == 'str':
                return value
            if kind == 'bool':
                if isinstance(value, bool):
                    return value
                value = value.strip().lower()
                if value not in ('true', 'false', 'yes', 'no', '1', '0'):
                    raise ValueError('expected true or false')
                return value in ('true', 'yes', '1')
            if kind == 'choice':
                value = value.strip().lower()
                if value not in r['choices']:
                    raise ValueError('expected one of {}'.format(r['choices']))
                return value
            if kind == 'strs':
                return strip_string(value) if isinstance(value, str) else list(value)
            if kind == 'groups':
                if not isinstance(value, str):
                    return [list(g) for g in value]
                return [strip_string(g) for g in value.split(';') if g.strip()]
            if kind == 'floats':
                items = strip_string(value) if isinstance(value, str) else value
                return [self.check_number(float(v), r) for v in items]
            if kind == 'int':
                v = float(value)
                if v != int(v):
                    raise ValueError('expected an integer')
                return int(self.check_number(v, r))
            return self.check_number(float(value), r)
        except (TypeError, ValueError) as e:
            raise ConfigError('[{}] {} = {!r}: {}'.format(section, key, value, e))

    @staticmethod
    def check_number(v, r):
        if math.isnan(v) or not r['min'] <= v <= r['max']:
            raise ValueError('outside [{}, {}]'.format(r['min'], r['max']))
        return v

    def process_predicates(self, values):
        """``rise.slope = 0.5`` becomes {'rise': {'slope': 0.5}}"""
        out = {}
        for key, value in values.items():
            if '.' not in key:
                raise ConfigError('predicate override {!r} is not <predicate>.<param>'
                                  .format(key))
            name, param = key.split('.', 1)
            if isinstance(value, str):
                try:
                    value = float(value)
                except ValueError:
                    value = value.strip()
            out.setdefault(name.strip(), {})[param.strip()] = value
        return out

    def __getitem__(self, section):
        return self.sections.get(section, {})

    def get(self, section, default=None):
        return self.sections.get(section, default if default is not None else {})

    def as_dict(self):
        return dict(self.sections)


def read_config(config_file=None, overrides=None):
    """
    Read a config file into {section: {key: value}}

    Args:
        config_file: INI file, ``ELT_CONFIG`` when None
        overrides: {section: {key: value}} applied over the file

    Returns:
        dict of typed config sections
    """
    return Config(config_file, overrides).as_dict()
