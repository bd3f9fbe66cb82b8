"""
Confidence propagation over instantiated event logic trees.

A leaf of an instance tree is a primitive instance: a schema leaf bound to an
interval with a semantic score mu. A composite instance scores its children
with the operator of its schema node:

    SEQ    product T-norm, no collision, causal and coherence gates
    SYNC   product T-norm, no collision, IoU alignment penalty
    GUARD  product T-norm, no collision, boundary spill penalty
    OR     probabilistic sum, IoU alignment penalty

The same evaluation is used for complete trees and for partial assignments,
where it returns an admissible upper bound for the beam search.
"""

import itertools
import logging
import math
from dataclasses import dataclass

from elt.core import Interval, interval_intersection_length, iou, span
from elt.errors import FormatVersionError, ShapeMismatch
from elt.schema import (CompositeNode, PredicateRef, PrimitiveNode, SchemaTree,
                        is_primitive, leaves)
from elt.utils import product

logger = logging.getLogger(__name__)

INSTANCE_VERSION = 'elt_instance_v1'


@dataclass(frozen=True)
class OperatorParams:
    """
    Hyperparameters of the operators, in samples except kappa

    Args:
        delta: largest gap allowed between consecutive SEQ children
        kappa: alignment tolerance of SYNC and OR
        sigma: temperature of the GUARD spill penalty
        epsilon: overlap on one channel that still counts as no collision
        compactness_tolerance: largest internal gap inside a conjunctive
            composite, defaults to delta
    """

    delta: int
    kappa: float = 0.25
    sigma: float = 1.0
    epsilon: int = 1
    compactness_tolerance: int = None

    def __post_init__(self):
        if self.compactness_tolerance is None:
            object.__setattr__(self, 'compactness_tolerance', self.delta)
        if self.delta < 0 or self.epsilon < 0 or self.compactness_tolerance < 0:
            raise ValueError('delta, epsilon and compactness_tolerance must be >= 0')
        if not self.kappa > 0:
            raise ValueError('kappa must be positive')
        if not self.sigma > 0:
            raise ValueError('sigma must be positive')

    @classmethod
    def for_length(cls, T, delta=None, delta_fraction=0.05, kappa=0.25,
                   sigma=None, sigma_fraction=0.05, epsilon=1,
                   compactness_tolerance=None):
        """Parameters for a series of T samples, delta and sigma relative to T"""
        if delta is None:
            delta = max(1, int(round(delta_fraction * T)))
        if sigma is None:
            sigma = max(1.0, sigma_fraction * T)
        return cls(int(delta), float(kappa), float(sigma), int(epsilon),
                   None if compactness_tolerance is None else int(compactness_tolerance))

    def to_dict(self):
        return {'delta': self.delta, 'kappa': self.kappa, 'sigma': self.sigma,
                'epsilon': self.epsilon,
                'compactness_tolerance': self.compactness_tolerance}


@dataclass(frozen=True)
class PrimitiveInstance:
    node: PrimitiveNode
    interval: Interval
    mu: float

    def __post_init__(self):
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError('mu must be in [0, 1], got {}'.format(self.mu))

    @property
    def channel(self):
        return self.node.channel


@dataclass(frozen=True)
class CompositeInstance:
    node: CompositeNode
    children: tuple
    interval: Interval
    mu: float


@dataclass(frozen=True)
class InstanceTree:
    schema: SchemaTree
    root: object
    params: OperatorParams

    @property
    def score(self):
        return self.root.mu

    @property
    def interval(self):
        return self.root.interval

    def leaf_assignment(self):
        """{leaf path: (interval, mu)} of the primitive instances"""
        out = {}

        def visit(inst, path):
            if isinstance(inst, PrimitiveInstance):
                out[path] = (inst.interval, inst.mu)
            else:
                for i, c in enumerate(inst.children):
                    visit(c, path + (i,))

        visit(self.root, ())
        return out


def primitive_descendants(inst):
    """
    Primitive instances beneath ``inst``. Only the highest scoring branch of
    an OR counts, ties going to the earlier child.
    """
    if isinstance(inst, PrimitiveInstance):
        return [inst]
    if inst.node.op == 'OR':
        best = max(range(len(inst.children)), key=lambda i: (inst.children[i].mu, -i))
        return primitive_descendants(inst.children[best])
    out = []
    for c in inst.children:
        out.extend(primitive_descendants(c))
    return out


def _collide(prims_a, prims_b, epsilon):
    for p in prims_a:
        for q in prims_b:
            if (p.channel == q.channel and
                    interval_intersection_length(p.interval, q.interval) > epsilon):
                return 1
    return 0


def collision(a, b, params):
    """1 when a and b hold one channel in two states for more than epsilon samples"""
    return _collide(primitive_descendants(a), primitive_descendants(b), params.epsilon)


def seq_gate(a, b, delta):
    """Causal and coherence gates of B following A"""
    causal = 1.0 if (b.t_on > a.t_on and b.t_off > a.t_off) else 0.0
    coherent = 1.0 if (b.t_on - a.t_off - delta) < 0 else 0.0
    return causal * coherent


def sync_penalty(a, b, kappa):
    return math.exp(-(1.0 - iou(a, b)) / kappa)


def guard_penalty(inner, outer, sigma):
    d_on = max(0, outer.t_on - inner.t_on)
    d_off = max(0, inner.t_off - outer.t_off)
    return math.exp(-(d_on + d_off) / sigma)


def _kernel(gate, a, b, params):
    if gate == 'seq':
        return seq_gate(a, b, params.delta)
    if gate == 'sync':
        return sync_penalty(a, b, params.kappa)
    if gate == 'guard':
        return guard_penalty(a, b, params.sigma)
    raise ValueError('unknown gate {!r}'.format(gate))


def _open_kernel(gate, a, b, params):
    """
    Bound on the kernel of a pair where only one side is finished, from the
    span ``known`` already covered by the assigned leaves of the other side.
    That span can only grow as more leaves get bound.
    """
    done, part = (a, b) if a.complete else (b, a)
    if part.known is None:
        return 1.0
    i, k = done.interval, part.known
    if gate == 'seq':
        if a.complete:
            return 0.0 if k.t_on <= i.t_on else 1.0
        return 0.0 if i.t_off <= k.t_off else 1.0
    if gate == 'sync':
        union = i.length + k.length - interval_intersection_length(i, k)
        return math.exp(-(1.0 - i.length / union) / params.kappa)
    if gate == 'guard':
        if a.complete:
            return 1.0
        return math.exp(-(max(0, i.t_on - k.t_on) + max(0, k.t_off - i.t_off)) /
                        params.sigma)
    raise ValueError('unknown gate {!r}'.format(gate))


def _pair_kernel(gate, a, b, params):
    if a.complete and b.complete:
        return _kernel(gate, a.interval, b.interval, params)
    if a.complete or b.complete:
        return _open_kernel(gate, a, b, params)
    return 1.0


def score_seq(a, b, params):
    psi = collision(a, b, params)
    return (a.mu * b.mu) * (1 - psi) * seq_gate(a.interval, b.interval, params.delta)


def score_sync(a, b, params):
    psi = collision(a, b, params)
    return (a.mu * b.mu) * (1 - psi) * sync_penalty(a.interval, b.interval, params.kappa)


def score_guard(inner, outer, params):
    psi = collision(inner, outer, params)
    return ((inner.mu * outer.mu) * (1 - psi) *
            guard_penalty(inner.interval, outer.interval, params.sigma))


def score_or(a, b, params):
    return (a.mu + b.mu - a.mu * b.mu) * sync_penalty(a.interval, b.interval, params.kappa)


def score_and_k(a, b, gate, params):
    """
    Generalized temporal conjunction: product T-norm, collision gate and the
    temporal kernel selected by ``gate`` (one of seq, sync, guard)
    """
    psi = collision(a, b, params)
    return (a.mu * b.mu) * (1 - psi) * _kernel(gate, a.interval, b.interval, params)


def compactness(intervals, tolerance):
    """0 when the union of the intervals has an internal gap over tolerance"""
    ordered = sorted(intervals)
    reach = ordered[0].t_off
    for i in ordered[1:]:
        if i.t_on - reach > tolerance:
            return 0.0
        reach = max(reach, i.t_off)
    return 1.0


def probabilistic_sum(values):
    s = 0.0
    for m in values:
        s = s + m - s * m
    return s


@dataclass(frozen=True)
class _Eval:
    mu: float
    interval: Interval
    prims: tuple
    instance: object
    known: Interval = None

    @property
    def complete(self):
        return self.instance is not None


_OPEN_LEAF = _Eval(1.0, None, (), None, None)

_GATES = {'SEQ': 'seq', 'SYNC': 'sync', 'GUARD': 'guard'}


class TreeScorer():
    """
    Scores assignments of intervals and semantic scores to the leaves of a
    schema.

    An assignment maps leaf paths to ``(interval, mu)``. Leaves missing from
    it score 1. A gate between two unfinished children is left open and a
    gate with one unfinished child is bounded from the span its assigned
    leaves already cover, so the result bounds the score of every completion
    from above.

    Args:
        schema: SchemaTree
        params: OperatorParams
        memo: cache the evaluation of leaves and complete subtrees
    """

    def __init__(self, schema, params, memo=False):
        self._logger = logging.getLogger(__name__)
        self.schema = schema
        self.params = params
        self._memo = {} if memo else None
        self._leaf_paths = {}
        self._index(schema.root, ())

    def _index(self, node, path):
        self._leaf_paths[path] = [p for p, _ in leaves(node, path)]
        if not is_primitive(node):
            for i, c in enumerate(node.children):
                self._index(c, path + (i,))

    def evaluate(self, assignment):
        return self._evaluate(self.schema.root, (), assignment)

    def upper_bound(self, assignment):
        return self.evaluate(assignment).mu

    def build(self, assignment):
        """InstanceTree of a complete assignment"""
        ev = self.evaluate(assignment)
        if not ev.complete:
            missing = [p for p in self._leaf_paths[()] if p not in assignment]
            raise ShapeMismatch('leaves without an assignment: {}'.format(missing))
        return InstanceTree(self.schema, ev.instance, self.params)

    def _evaluate(self, node, path, assignment):
        if is_primitive(node):
            value = assignment.get(path)
            if value is None:
                return _OPEN_LEAF
            if self._memo is not None and (path, value) in self._memo:
                return self._memo[(path, value)]
            interval, mu = value
            inst = PrimitiveInstance(node, interval, float(mu))
            ev = _Eval(inst.mu, interval, (inst,), inst, interval)
            if self._memo is not None:
                self._memo[(path, value)] = ev
            return ev

        key = None
        if self._memo is not None:
            values = tuple(assignment.get(p) for p in self._leaf_paths[path])
            if None not in values:
                key = (path, values)
                if key in self._memo:
                    return self._memo[key]

        evals = [self._evaluate(c, path + (i,), assignment)
                 for i, c in enumerate(node.children)]
        if node.op == 'OR':
            ev = self._disjunction(node, evals)
        else:
            ev = self._conjunction(node, evals)

        if key is not None:
            self._memo[key] = ev
        return ev

    def _disjunction(self, node, evals):
        mu = probabilistic_sum(e.mu for e in evals)
        mu = mu * product(_pair_kernel('sync', a, b, self.params)
                          for a, b in itertools.combinations(evals, 2))
        if not all(e.complete for e in evals):
            return _Eval(mu, None, (), None, _known(evals))

        best = max(range(len(evals)), key=lambda i: (evals[i].mu, -i))
        interval = span(e.interval for e in evals)
        inst = CompositeInstance(node, tuple(e.instance for e in evals), interval, mu)
        return _Eval(mu, interval, evals[best].prims, inst, interval)

    def _conjunction(self, node, evals):
        p = self.params
        mu = product(e.mu for e in evals)

        psi = 0
        for a, b in itertools.combinations(evals, 2):
            if _collide(a.prims, b.prims, p.epsilon):
                psi = 1
                break
        mu = mu * (1 - psi)

        gate = _GATES[node.op]
        if gate == 'seq':
            pairs = zip(evals, evals[1:])
        else:
            pairs = itertools.combinations(evals, 2)
        mu = mu * product(_pair_kernel(gate, a, b, p) for a, b in pairs)

        prims = tuple(itertools.chain.from_iterable(e.prims for e in evals))
        if not all(e.complete for e in evals):
            return _Eval(mu, None, prims, None, _known(evals))

        mu = mu * compactness([e.interval for e in evals], p.compactness_tolerance)
        interval = span(e.interval for e in evals)
        inst = CompositeInstance(node, tuple(e.instance for e in evals), interval, mu)
        return _Eval(mu, interval, prims, inst, interval)


def _known(evals):
    spans = [e.known for e in evals if e.known is not None]
    return span(spans) if spans else None


def upper_bound(schema, assignment, params):
    """
    Admissible bound on the score of any completion of a partial assignment

    Args:
        schema: SchemaTree
        assignment: {leaf path: (Interval, mu)}
        params: OperatorParams

    Returns:
        float in [0, 1]
    """
    return TreeScorer(schema, params).upper_bound(assignment)


def build_tree(schema, assignment, params):
    return TreeScorer(schema, params).build(assignment)


def _check_shape(inst, node, path):
    if is_primitive(node):
        if not isinstance(inst, PrimitiveInstance) or inst.node != node:
            raise ShapeMismatch('leaf at {} does not match the schema'.format(path))
        return
    if (not isinstance(inst, CompositeInstance) or inst.node.op != node.op or
            len(inst.children) != len(node.children)):
        raise ShapeMismatch('composite at {} does not match the schema'.format(path))
    for i, (c, n) in enumerate(zip(inst.children, node.children)):
        _check_shape(c, n, path + (i,))


def propagate(tree):
    """
    Recompute every composite score from the primitive instances up

    Args:
        tree: InstanceTree

    Returns:
        tuple of the root confidence and a freshly annotated InstanceTree
    """
    _check_shape(tree.root, tree.schema.root, ())
    fresh = build_tree(tree.schema, tree.leaf_assignment(), tree.params)
    return fresh.score, fresh


# relation from A to B -> (operator, B given first)
RELATION_OPERATORS = {
    'before': ('SEQ', False),
    'meets': ('SEQ', False),
    'overlaps': ('SEQ', False),
    'after': ('SEQ', True),
    'met_by': ('SEQ', True),
    'overlapped_by': ('SEQ', True),
    'during': ('GUARD', False),
    'starts': ('GUARD', False),
    'finishes': ('GUARD', False),
    'contains': ('GUARD', True),
    'started_by': ('GUARD', True),
    'finished_by': ('GUARD', True),
    'equal': ('SYNC', False),
}


def operator_for_relation(relation):
    """
    Operator that captures an Allen relation from A to B, with a flag telling
    whether the arguments are given as (B, A)
    """
    try:
        return RELATION_OPERATORS[relation]
    except KeyError:
        raise ValueError('unknown Allen relation {!r}'.format(relation))


def tree_to_dict(tree):
    """JSON document of an instance tree"""

    def node_dict(inst):
        if isinstance(inst, PrimitiveInstance):
            return {'predicate': inst.node.predicate.name,
                    'params': inst.node.predicate.param_dict(),
                    'channel': inst.node.channel,
                    'interval': inst.interval.as_list(),
                    'mu': inst.mu}
        return {'op': inst.node.op,
                'interval': inst.interval.as_list(),
                'mu': inst.mu,
                'children': [node_dict(c) for c in inst.children]}

    return {'version': INSTANCE_VERSION,
            'event_type': tree.schema.event_type,
            'params': tree.params.to_dict(),
            'root': node_dict(tree.root)}


def tree_from_dict(doc):
    """
    Rebuild an InstanceTree from its JSON document. Composite scores are
    recomputed from the leaves.
    """
    if doc.get('version') != INSTANCE_VERSION:
        raise FormatVersionError(INSTANCE_VERSION, doc.get('version'))

    assignment = {}

    def node_from(d, path):
        if 'predicate' in d:
            node = PrimitiveNode(PredicateRef(d['predicate'], d.get('params', {})),
                                 d['channel'])
            assignment[path] = (Interval(*d['interval']), float(d['mu']))
            return node
        return CompositeNode(d['op'], tuple(node_from(c, path + (i,))
                                            for i, c in enumerate(d['children'])))

    schema = SchemaTree(doc['event_type'], node_from(doc['root'], ()))
    params = OperatorParams(**doc['params'])
    tree = build_tree(schema, assignment, params)

    stored = doc['root'].get('mu')
    if stored is not None and abs(stored - tree.score) > 1e-9:
        logger.warning('Stored score {} of {} differs from recomputed {}'.format(
            stored, schema.event_type, tree.score))
    return tree
