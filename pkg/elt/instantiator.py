"""
Symbolic instantiation of an event schema on a series: propose candidate
intervals for every primitive, search for the interval assignment with the
highest root confidence and polish its boundaries.
"""

import itertools
import json
import logging
from collections import namedtuple
from dataclasses import dataclass, field

from elt.core import Interval
from elt.errors import BudgetExceeded, EmptyCandidates, UnknownChannel
from elt.logic import TreeScorer, build_tree
from elt.schema import path_str
from elt.signal_core.changepoint import binseg_breakpoints
from elt.utils import product

logger = logging.getLogger(__name__)

Candidate = namedtuple('Candidate', ['interval', 'mu'])

GRID_DIVISORS = (16, 8, 4, 2)


@dataclass(frozen=True)
class SearchConfig:
    """Settings of candidate generation and search, the [search] config section"""

    method: str = 'beam'
    beam_width: int = 32
    max_candidates: int = 64
    exhaustive_budget: int = 1000000
    span_limit: float = 0.8
    penalty_beta: float = 3.0
    min_length: int = 12
    refine_fraction: float = 0.02
    scale_floor: float = 0.0

    def __post_init__(self):
        if self.method not in ('beam', 'exhaustive'):
            raise ValueError('search method must be beam or exhaustive')

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})


@dataclass
class CandidateSet:
    """
    Candidates per primitive leaf, sorted by descending mu

    Attributes:
        candidates: {leaf path: [Candidate]}
        breakpoints: {channel: [sample index]} found by change-point detection
        grid_sizes: window sizes of the fallback grid
        bounds: (start, stop) the candidates were restricted to
    """

    candidates: dict
    breakpoints: dict = field(default_factory=dict)
    grid_sizes: tuple = ()
    bounds: tuple = None

    def __getitem__(self, path):
        return self.candidates[path]

    def counts(self):
        return {path_str(p): len(c) for p, c in self.candidates.items()}


@dataclass(frozen=True)
class SearchResult:
    best: object
    root_score: float
    explored: int
    method: str


def _grid(start, stop, min_length):
    length = stop - start
    sizes = []
    spans = set()
    for div in GRID_DIVISORS:
        w = length // div
        if w < max(2, min_length):
            continue
        sizes.append(w)
        stride = max(1, w // 2)
        for t in range(start, stop - w + 1, stride):
            spans.add((t, t + w))
    return tuple(sizes), spans


def generate_candidates(frame, schema, registry, config=None, bounds=None):
    """
    Propose scored intervals for every primitive of a schema

    Args:
        frame: SeriesFrame
        schema: SchemaTree
        registry: PredicateRegistry scoring the candidates
        config: SearchConfig
        bounds: (start, stop) to restrict candidates to, the whole series by
            default

    Returns:
        CandidateSet
    """

    config = config or SearchConfig()
    start, stop = bounds if bounds is not None else (0, frame.T)
    length = stop - start

    for ch in schema.declared_channels:
        if ch not in frame.channels:
            raise UnknownChannel(ch)

    breakpoints = {}
    for ch in sorted(schema.declared_channels):
        key = ('breakpoints', ch, start, stop, config.scale_floor, config.penalty_beta,
               config.min_length)
        bkps = frame.cached(key, lambda: binseg_breakpoints(
            frame.column(ch)[start:stop], frame.robust_scale(ch, config.scale_floor),
            config.penalty_beta, min_size=max(2, config.min_length)))
        breakpoints[ch] = [start + b for b in bkps]
        logger.debug('{} breakpoints on {} in [{}, {}): {}'.format(
            len(bkps), ch, start, stop, breakpoints[ch]))

    marks = sorted({start, stop}.union(*breakpoints.values()))
    limit = max(config.span_limit * length, config.min_length)
    spans = set()
    for a, b in itertools.combinations(marks, 2):
        if config.min_length <= b - a <= limit:
            spans.add((a, b))

    # the grid only fills what the breakpoint spans leave free
    grid_sizes, grid = _grid(start, stop, config.min_length)
    grid = grid - spans
    if not spans and not grid and length >= 2:
        spans.add((start, stop))

    def ranked(leaf, pairs):
        scored = [Candidate(Interval(a, b),
                            registry.score_segment(frame, leaf.channel, Interval(a, b),
                                                   leaf.predicate))
                  for a, b in sorted(pairs)]
        scored.sort(key=lambda c: (-c.mu, c.interval.t_on, c.interval.t_off))
        return scored

    candidates = {}
    for path, leaf in schema.leaves():
        chosen = ranked(leaf, spans)[:config.max_candidates]
        if len(chosen) < config.max_candidates:
            chosen += ranked(leaf, grid)[:config.max_candidates - len(chosen)]
            chosen.sort(key=lambda c: (-c.mu, c.interval.t_on, c.interval.t_off))
        candidates[path] = chosen

    return CandidateSet(candidates, breakpoints, grid_sizes, (start, stop))


def _onsets(assignment, order):
    return tuple(assignment[p].interval.t_on for p in order if p in assignment)


def _check_nonempty(schema, candidates):
    order = [p for p, _ in schema.leaves()]
    for p in order:
        if not candidates[p]:
            raise EmptyCandidates(path_str(p))
    return order


def instantiate_exhaustive(schema, candidates, params, budget=1000000):
    """
    Score every full assignment of candidates to leaves

    Args:
        schema: SchemaTree
        candidates: CandidateSet or {leaf path: [Candidate]}
        params: OperatorParams
        budget: largest number of assignments to enumerate

    Returns:
        SearchResult, ties broken toward the earliest onsets
    """

    order = _check_nonempty(schema, candidates)
    lists = [candidates[p] for p in order]
    count = product(len(c) for c in lists)
    if count > budget:
        raise BudgetExceeded(int(count), budget)

    scorer = TreeScorer(schema, params)
    best, best_key = None, None
    explored = 0
    for combo in itertools.product(*lists):
        assignment = dict(zip(order, combo))
        score = scorer.upper_bound(assignment)
        explored += 1
        key = (-score, _onsets(assignment, order))
        if best_key is None or key < best_key:
            best, best_key = assignment, key

    tree = scorer.build(best)
    return SearchResult(tree, tree.score, explored, 'exhaustive')


def instantiate_beam(schema, candidates, params, beam_width=32, trace=None):
    """
    Beam search over leaf assignments in left-to-right leaf order. Partial
    assignments are ranked by the upper bound of their completions, equal
    bounds by the product of the scores bound so far, then by onsets.

    Args:
        schema: SchemaTree
        candidates: CandidateSet or {leaf path: [Candidate]}
        params: OperatorParams
        beam_width: partial assignments kept after each leaf
        trace: optional text stream receiving one JSON line per scored
            assignment

    Returns:
        SearchResult
    """

    if beam_width < 1:
        raise ValueError('beam_width must be positive')
    order = _check_nonempty(schema, candidates)
    scorer = TreeScorer(schema, params, memo=True)

    beam = [{}]
    explored = 0
    for step, path in enumerate(order):
        last = step == len(order) - 1
        scored = []
        for partial in beam:
            for cand in candidates[path]:
                assignment = dict(partial)
                assignment[path] = cand
                bound = scorer.upper_bound(assignment)
                explored += 1
                # an open OR branch bounds at 1, so bounds often tie
                evidence = 0.0 if last else -product(c.mu for c in assignment.values())
                scored.append((-bound, evidence, _onsets(assignment, order), len(scored),
                               assignment))
                if trace is not None:
                    _write_trace(trace, schema, step, assignment, bound)
        scored.sort(key=lambda s: s[:4])
        beam = [s[4] for s in scored[:beam_width]]

    tree = scorer.build(beam[0])
    return SearchResult(tree, tree.score, explored, 'beam')


def _write_trace(stream, schema, step, assignment, bound):
    doc = {'event_type': schema.event_type,
           'step': step,
           'bound': bound,
           'assignment': {path_str(p): [c.interval.t_on, c.interval.t_off, c.mu]
                          for p, c in sorted(assignment.items())}}
    stream.write(json.dumps(doc, sort_keys=True) + '\n')


def refine_boundaries(frame, tree, registry, params, step, bounds=None,
                      min_length=2, max_passes=50):
    """
    Hill-climb every leaf boundary by +-step, keeping moves that raise the
    root score, then halve the step down to one sample.

    Args:
        frame: SeriesFrame
        tree: InstanceTree to refine
        registry: PredicateRegistry rescoring moved leaves
        params: OperatorParams
        step: initial move in samples
        bounds: (start, stop) boundaries must stay in
        min_length: shortest leaf interval
        max_passes: sweeps over all boundaries per step size

    Returns:
        InstanceTree scoring at least as high as ``tree``
    """

    start, stop = bounds if bounds is not None else (0, frame.T)
    leaves = dict(tree.schema.leaves())
    order = list(leaves)
    assignment = {p: Candidate(i, mu) for p, (i, mu) in tree.leaf_assignment().items()}
    scorer = TreeScorer(tree.schema, params)
    best = scorer.upper_bound(assignment)

    step = max(1, int(step))
    while step >= 1:
        for _ in range(max_passes):
            improved = False
            for p in order:
                for side in (0, 1):
                    for d in (-step, step):
                        i = assignment[p].interval
                        on, off = (i.t_on + d, i.t_off) if side == 0 else (i.t_on, i.t_off + d)
                        if on < start or off > stop or off - on < min_length:
                            continue
                        moved = Interval(on, off)
                        mu = registry.score_segment(frame, leaves[p].channel, moved,
                                                    leaves[p].predicate)
                        trial = dict(assignment)
                        trial[p] = Candidate(moved, mu)
                        score = scorer.upper_bound(trial)
                        if score > best + 1e-12:
                            assignment, best, improved = trial, score, True
            if not improved:
                break
        step //= 2

    return build_tree(tree.schema, assignment, params)


def instantiate(frame, schema, registry, params, config=None, bounds=None,
                trace=None):
    """
    Candidate generation, search with the configured method and boundary
    refinement in one call

    Returns:
        SearchResult whose tree is the refined instantiation
    """

    config = config or SearchConfig()
    candidates = generate_candidates(frame, schema, registry, config, bounds)
    if config.method == 'exhaustive':
        result = instantiate_exhaustive(schema, candidates, params,
                                        config.exhaustive_budget)
    else:
        result = instantiate_beam(schema, candidates, params, config.beam_width, trace)

    step = int(round(config.refine_fraction * frame.T))
    if step >= 1 and result.root_score > 0:
        tree = refine_boundaries(frame, result.best, registry, params, step,
                                 bounds=candidates.bounds, min_length=config.min_length)
        result = SearchResult(tree, tree.score, result.explored, result.method)

    logger.debug('{} on [{}, {}): {:.4f} after {} assignments'.format(
        schema.event_type, candidates.bounds[0], candidates.bounds[1],
        result.root_score, result.explored))
    return result
