"""
Generate the synthetic pressure test suite, detect events in every frame and
print the F1 table next to the random baseline.

    python run_benchmark.py [out_dir]
"""

import os
import sys

import elt
from elt.cli import setup_logging
from elt.config import Config
from elt.detector import detect
from elt.evaluator import evaluate_many, random_baseline
from elt.schema import load_schema
from elt.synthetic import SyntheticSpec, generate_synthetic, write_synthetic
from elt.utils import dump_json

here = os.path.dirname(os.path.abspath(__file__))
config = Config(os.path.join(here, 'config_detect.ini')).as_dict()
synth = Config(os.path.join(here, 'config_synth.ini'))
setup_logging(config['logging'])

schema_file = os.path.join(os.path.dirname(elt.__file__), 'schemas', 'pressure_test.elt')
catalog = load_schema(schema_file)
suite = generate_synthetic(SyntheticSpec.from_dict(synth['synthetic']))

predictions = [detect(frame, catalog, config) for frame, _ in suite]
truth = [events for _, events in suite]
baseline = random_baseline([frame for frame, _ in suite], catalog)

report = evaluate_many(list(zip(predictions, truth)))
print(report.to_table())
print('random baseline F1@0.5 = {:.3f}'.format(
    evaluate_many(list(zip(baseline, truth))).f1(0.5)))

if len(sys.argv) > 1:
    write_synthetic(suite, sys.argv[1])
    dump_json(report.to_dict(), os.path.join(sys.argv[1], 'report.json'))
