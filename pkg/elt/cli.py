# -*- coding: utf-8 -*-
"""
Command line interface: ``elt validate | detect | eval | render | synth``

Exit codes are 0 on success, 1 when the input breaks a rule of the
formalism (axioms, thresholds) and 2 for bad files or usage.
"""

import argparse
import glob
import logging
import os
import sys
import traceback
from datetime import datetime

import coloredlogs
import pandas as pd

from elt import __version__
from elt.config import Config
from elt.core import load_csv
from elt.detector import Detector, DetectorConfig, detections_from_doc, detections_to_doc
from elt.errors import DomainError, ELTError, InputError
from elt.evaluator import evaluate_many, labels_from_doc
from elt.instantiator import SearchConfig
from elt.predicates import default_registry
from elt.render import render_svg
from elt.schema import load_schema
from elt.synthetic import SyntheticSpec, generate_synthetic, write_synthetic
from elt.utils import dump_json, load_json

logger = logging.getLogger('elt')

FMT = '%(asctime)s::%(levelname)s:%(name)s:%(message)s'
DATEFMT = '%Y-%m-%d %H:%M:%S'


def setup_logging(config, verbose=False):
    """Console logging with coloredlogs, or a log file when one is configured"""

    loglevel = 'DEBUG' if verbose else config.get('log_level', 'info').upper()
    logfile = config.get('log_file')
    numeric_level = getattr(logging, loglevel, None)
    if not isinstance(numeric_level, int):
        raise ValueError('Invalid log level: %s' % loglevel)

    if logfile is not None:
        logging.basicConfig(filename=logfile,
                            filemode='a',
                            datefmt=DATEFMT,
                            level=numeric_level,
                            format=FMT)
    else:
        coloredlogs.install(level=numeric_level, fmt=FMT, datefmt=DATEFMT,
                            stream=sys.stderr)


def load_frame(path, data):
    """Read a CSV with the [data] settings, every non-time column by default"""
    delimiter = data.get('delimiter') or ','
    ts = data.get('timestamp_column', 'time')
    channels = data.get('channels')
    if not channels:
        header = pd.read_csv(path, sep=delimiter, nrows=0).columns
        channels = [c.strip() for c in header if c.strip() != ts]
    return load_csv(path, channels, delimiter, ts, data.get('sample_period', 1.0))


def registry_for(config):
    search = SearchConfig.from_dict(config['search'])
    return default_registry(search.scale_floor).with_overrides(config['predicates'])


def cmd_validate(args):
    catalog = load_schema(args.schema)
    for schema in catalog:
        logger.info('{}: {} primitives on channels {}'.format(
            schema.event_type, len(schema.leaves()), sorted(schema.declared_channels)))
    print('ok: {} event types'.format(len(catalog)))
    return 0


def cmd_detect(args):
    config = Config(args.config, {
        'search': {'method': args.method, 'beam_width': args.beam_width},
        'detector': {'min_confidence': args.min_confidence, 'nms_iou': args.nms_iou}})
    registry = registry_for(config)
    catalog = load_schema(args.schema, registry)
    frame = load_frame(args.data, config['data'])
    logger.info('Loaded {} samples of {} from {}'.format(frame.T, list(frame.channels),
                                                       args.data))

    trace = open(args.trace, 'w') if args.trace else None
    try:
        detector = Detector(catalog, registry,
                            SearchConfig.from_dict(config['search']),
                            DetectorConfig.from_dict(config['detector']),
                            config['operators'], trace)
        detections = detector.detect(frame)
    finally:
        if trace is not None:
            trace.close()

    text = dump_json(detections_to_doc(detections), args.out)
    if args.out is None:
        sys.stdout.write(text)
    return 0


def _pairs(detections_path, labels_path):
    if os.path.isdir(detections_path):
        pairs = []
        for det in sorted(glob.glob(os.path.join(detections_path, '*.detections.json'))):
            stem = os.path.basename(det)[:-len('.detections.json')]
            lab = os.path.join(labels_path, stem + '.labels.json')
            if not os.path.isfile(lab):
                raise InputError('no labels for {} in {}'.format(stem, labels_path))
            pairs.append((det, lab))
        if not pairs:
            raise InputError('no *.detections.json files in {}'.format(detections_path))
        return pairs
    return [(detections_path, labels_path)]


def cmd_eval(args):
    pairs = [(detections_from_doc(load_json(d)), labels_from_doc(load_json(g)))
             for d, g in _pairs(args.detections, args.labels)]
    report = evaluate_many(pairs, args.thresholds)
    print(report.to_table())
    if args.out:
        dump_json(report.to_dict(), args.out)
    return 0


def cmd_render(args):
    config = Config(args.config)
    frame = load_frame(args.data, config['data'])
    detections = detections_from_doc(load_json(args.detections))
    render_svg(frame, detections, args.out)
    return 0


def cmd_synth(args):
    config = Config(args.config, {'synthetic': {'seed': args.seed,
                                                'n_samples': args.n_samples}})
    spec = SyntheticSpec.from_dict(config['synthetic'])
    suite = generate_synthetic(spec)
    paths = write_synthetic(suite, args.out_dir, spec.sample_period)
    logger.info('Wrote {} frames to {}'.format(len(paths), args.out_dir))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog='elt', description='Detect events in multivariate series with event logic trees')
    parser.add_argument('--version', action='version', version=__version__)
    parser.add_argument('-v', '--verbose', action='store_true', help='debug logging')
    sub = parser.add_subparsers(dest='command')
    sub.required = True

    p = sub.add_parser('validate', help='parse a schema file and check its axioms')
    p.add_argument('schema', type=str)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser('detect', help='detect events in a CSV series')
    p.add_argument('data', type=str)
    p.add_argument('schema', type=str)
    p.add_argument('-c', '--config', type=str, default=None)
    p.add_argument('-o', '--out', type=str, default=None)
    p.add_argument('--trace', type=str, default=None,
                   help='write the beam search trace as JSON lines')
    p.add_argument('--method', choices=['beam', 'exhaustive'], default=None)
    p.add_argument('--beam-width', type=str, default=None)
    p.add_argument('--min-confidence', type=str, default=None)
    p.add_argument('--nms-iou', type=str, default=None)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser('eval', help='score detections against labels')
    p.add_argument('detections', type=str, help='detections file or directory')
    p.add_argument('labels', type=str, help='labels file or directory')
    p.add_argument('-o', '--out', type=str, default=None)
    p.add_argument('-t', '--thresholds', type=float, nargs='+', default=[0.5, 0.9])
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser('render', help='draw a series and its detections as SVG')
    p.add_argument('data', type=str)
    p.add_argument('detections', type=str)
    p.add_argument('-o', '--out', type=str, required=True)
    p.add_argument('-c', '--config', type=str, default=None)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser('synth', help='write a synthetic benchmark suite')
    p.add_argument('out_dir', type=str)
    p.add_argument('-c', '--config', type=str, default=None)
    p.add_argument('--seed', type=str, default=None)
    p.add_argument('--n-samples', type=str, default=None)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None):

    args = build_parser().parse_args(argv)

    start_time = datetime.now()
    try:
        config_file = getattr(args, 'config', None)
        setup_logging(Config(config_file)['logging'], args.verbose)
        code = args.func(args)
    except DomainError as e:
        logger.error(str(e))
        return 1
    except (ELTError, OSError, ValueError) as e:
        logger.error(str(e))
        logger.debug(traceback.format_exc())
        return 2

    logger.info('Elapsed time: {}'.format(datetime.now() - start_time))
    return code


if __name__ == '__main__':
    sys.exit(main())
