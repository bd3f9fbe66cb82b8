"""
Static SVG rendering of a series with its detections and the instance tree
that explains each detection.

Every artist carries a gid so the SVG can be inspected: ``channel-<name>``
for the traces, ``detection-<i>`` for the shaded spans and ``tree-<i>`` for
the tree diagrams.
"""

import logging
from io import StringIO

import matplotlib
matplotlib.use('Agg')
from matplotlib.figure import Figure  # noqa: E402
from matplotlib.gridspec import GridSpec  # noqa: E402

from elt.logic import PrimitiveInstance  # noqa: E402

logger = logging.getLogger(__name__)

matplotlib.rcParams['svg.hashsalt'] = 'elt'
matplotlib.rcParams['svg.fonttype'] = 'none'

COLORS = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#8c564b', '#17becf']


def _node_label(inst):
    if isinstance(inst, PrimitiveInstance):
        return '{}({}) {} mu={:.3f}'.format(inst.node.predicate.name, inst.channel,
                                            inst.interval, inst.mu)
    return '{} {} mu={:.3f}'.format(inst.node.op, inst.interval, inst.mu)


def _layout(inst, depth, out):
    """Depth first positions: x from depth, y from visiting order"""
    out.append((inst, depth, len(out)))
    if not isinstance(inst, PrimitiveInstance):
        for c in inst.children:
            _layout(c, depth + 1, out)


def draw_tree(ax, tree):
    """Indented tree diagram with one labelled row per node"""
    placed = []
    _layout(tree.root, 0, placed)
    n = len(placed)
    pos = {id(inst): (depth, n - 1 - y) for inst, depth, y in placed}

    for inst, depth, y in placed:
        x0, y0 = pos[id(inst)]
        if not isinstance(inst, PrimitiveInstance):
            for c in inst.children:
                x1, y1 = pos[id(c)]
                ax.plot([x0 + 0.1, x0 + 0.1, x1], [y0, y1, y1], color='0.6', lw=0.8)
        ax.text(x0 + 0.15 if depth else x0, y0, _node_label(inst), fontsize=7,
                va='center', family='monospace')

    ax.set_xlim(-0.2, max(d for _, d, _ in placed) + 6)
    ax.set_ylim(-1, n)
    ax.set_title('{} confidence {:.3f}'.format(tree.schema.event_type, tree.score),
                 fontsize=8)
    ax.axis('off')


def render_svg(frame, detections, out_path=None):
    """
    Draw the normalized channels stacked on one axis with the detections
    shaded, and the explanation trees beside them

    Args:
        frame: SeriesFrame
        detections: list of Detection
        out_path: file to write, nothing is written when None

    Returns:
        SVG text
    """

    trees = [(i, d) for i, d in enumerate(detections) if d.explanation is not None]
    rows = max(1, len(trees))
    fig = Figure(figsize=(12 if trees else 8, 2.0 + 1.6 * max(rows, frame.C)))
    gs = GridSpec(rows, 2 if trees else 1, figure=fig,
                  width_ratios=[3, 2] if trees else None)

    ax = fig.add_subplot(gs[:, 0])
    ax.set_gid('signals')
    t = list(range(frame.T))
    for k, ch in enumerate(frame.channels):
        x = frame.column(ch)
        y = (x - frame.median(ch)) / frame.robust_scale(ch) / 4.0 - 1.5 * k
        ax.plot(t, y, color=COLORS[k % len(COLORS)], lw=0.8, label=ch,
                gid='channel-{}'.format(ch))

    for i, d in enumerate(detections):
        ax.axvspan(d.interval.t_on, d.interval.t_off, color='orange', alpha=0.25,
                   gid='detection-{}'.format(i))
        ax.text(d.interval.t_on, 0.9, '{} {:.2f}'.format(d.event_type, d.confidence),
                transform=ax.get_xaxis_transform(), fontsize=7)

    ax.set_xlim(0, frame.T - 1)
    ax.set_yticks([-1.5 * k for k in range(frame.C)])
    ax.set_yticklabels(list(frame.channels))
    ax.set_xlabel('sample')

    for row, (i, d) in enumerate(trees):
        tax = fig.add_subplot(gs[row, 1])
        tax.set_gid('tree-{}'.format(i))
        draw_tree(tax, d.explanation)

    fig.tight_layout()

    buf = StringIO()
    fig.savefig(buf, format='svg', metadata={'Date': None})
    svg = buf.getvalue()
    if out_path is not None:
        with open(out_path, 'w') as f:
            f.write(svg)
        logger.info('Wrote {}'.format(out_path))
    return svg
