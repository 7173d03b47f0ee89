"""
Synthetic organization charts with known ground truth.

A random recursive tree is laid out top-down, drawn as boxes joined by
orthogonal bus connectors, and rendered to a grayscale bitmap together with
a textbox sidecar. Labels are never drawn as glyphs; only their boxes go in
the sidecar.
"""

from __future__ import annotations

import random
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import networkx as nx
import numpy as np

from .labels import OrgNetwork, Textbox

__all__ = [
    "LayoutOverflowError",
    "SynthSpec",
    "GroundTruth",
    "Stroke",
    "RoundTripScore",
    "gen_structure",
    "layout",
    "chart_strokes",
    "render_chart",
    "round_trip_score",
    "n_units_for_seed",
    "truth_to_document",
    "truth_from_document",
    "write_chart",
]

INK = 0
PAPER = 255


class LayoutOverflowError(ValueError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    seed: int = 0
    n_units: int = 10
    branching: int = 4
    boxed_fraction: float = 1.0
    dashed_fraction: float = 0.0
    dash_on: int = 4
    dash_off: int = 3
    line_px: int = 2
    cell: Tuple[int, int] = (56, 28)
    dpi: int = 150
    gap_x: int = 24
    gap_y: int = 48
    margin: int = 24
    top: int = 90
    header_junk: bool = True
    footer_junk: bool = True
    footer_gap: int = 40
    label_inset: int = 6
    rasterize_labels: bool = False
    max_canvas: Tuple[int, int] = (8000, 8000)

    def __post_init__(self):
        if self.n_units < 1:
            raise ValueError("n_units must be >= 1")
        if self.branching < 1:
            raise ValueError("branching must be >= 1")
        for name in ("boxed_fraction", "dashed_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")


@dataclass
class GroundTruth:
    """Labeled tree plus, once rendered, each unit's cell and box flag."""

    graph: nx.Graph
    cells: Dict[str, Tuple[int, int, int, int]] = field(default_factory=dict)
    boxed: Dict[str, bool] = field(default_factory=dict)
    parent: Dict[str, Optional[str]] = field(default_factory=dict)

    @property
    def labels(self) -> List[str]:
        return sorted(self.graph.nodes)


@dataclass(frozen=True)
class Stroke:
    """Axis-aligned centerline from ``(x0, y0)`` to ``(x1, y1)``."""

    x0: int
    y0: int
    x1: int
    y1: int
    dashed: bool = False


def _label(i: int) -> str:
    return f"U{i:03d}"


def gen_structure(spec: SynthSpec) -> GroundTruth:
    """Random recursive tree: unit k attaches to a uniformly chosen earlier
    unit that still has fewer than ``branching`` children."""
    rng = random.Random(spec.seed)
    g = nx.Graph()
    g.add_node(_label(1))
    parent = {_label(1): None}
    children = {_label(1): 0}
    for k in range(2, spec.n_units + 1):
        open_units = [u for u in children if children[u] < spec.branching]
        p = rng.choice(open_units)
        u = _label(k)
        g.add_edge(p, u)
        parent[u] = p
        children[p] += 1
        children[u] = 0
    return GroundTruth(g, parent=parent)


def _kids(truth: GroundTruth):
    kids = {u: [] for u in truth.graph.nodes}
    for u, p in truth.parent.items():
        if p is not None:
            kids[p].append(u)
    for k in kids.values():
        k.sort()
    return kids


def layout(truth: GroundTruth, spec: SynthSpec):
    """Tidy top-down layout: leaves fill consecutive columns in DFS order and
    each parent is centered over its children.

    Returns ``{label: (center_x, depth)}``, the image size and the row
    just below the deepest level.
    """
    kids = _kids(truth)
    root = next(u for u, p in truth.parent.items() if p is None)
    pitch = spec.cell[0] + spec.gap_x
    centers, depth = {}, {}
    slot = 0
    # iterative post-order so deep chains do not hit the recursion limit
    stack = [(root, 0, False)]
    while stack:
        u, d, done = stack.pop()
        if not done:
            depth[u] = d
            stack.append((u, d, True))
            for c in reversed(kids[u]):
                stack.append((c, d + 1, False))
            continue
        if not kids[u]:
            centers[u] = spec.margin + slot * pitch + spec.cell[0] // 2
            slot += 1
        else:
            xs = [centers[c] for c in kids[u]]
            mid = (xs[0] + xs[-1]) // 2
            near = [x for x in xs if abs(x - mid) <= 8]
            centers[u] = near[0] if near else mid

    levels = max(depth.values()) + 1
    width = 2 * spec.margin + slot * pitch - spec.gap_x
    chart_bottom = spec.top + levels * (spec.cell[1] + spec.gap_y) - spec.gap_y
    height = chart_bottom + spec.footer_gap + (30 if spec.footer_junk else 0) + spec.margin
    if width > spec.max_canvas[0] or height > spec.max_canvas[1]:
        raise LayoutOverflowError(
            f"layout needs {width}x{height} px, canvas limit is "
            f"{spec.max_canvas[0]}x{spec.max_canvas[1]}; enlarge max_canvas or shrink the cell"
        )
    return {u: (centers[u], depth[u]) for u in truth.graph.nodes}, (width, height), chart_bottom


def chart_strokes(truth: GroundTruth, spec: SynthSpec):
    """Lay out the chart and list every stroke that gets drawn.

    Returns ``(placed_truth, strokes, textboxes, (width, height),
    chart_bottom_row)``.
    """
    rng = random.Random(spec.seed * 7919 + 17)
    placement, size, chart_bottom = layout(truth, spec)
    kids = _kids(truth)
    cw, ch = spec.cell
    pitch_y = ch + spec.gap_y
    cells, boxed = {}, {}
    for u in sorted(truth.graph.nodes):
        cx, d = placement[u]
        x0 = cx - cw // 2
        y0 = spec.top + d * pitch_y
        cells[u] = (x0, y0, x0 + cw - 1, y0 + ch - 1)
        # connectors can only terminate on a box or a bare leaf label
        boxed[u] = bool(kids[u]) or rng.random() < spec.boxed_fraction

    def dashed():
        return spec.dashed_fraction > 0 and rng.random() < spec.dashed_fraction

    strokes: List[Stroke] = []
    t = spec.line_px
    for u in sorted(truth.graph.nodes):
        if boxed[u]:
            x0, y0, x1, y1 = cells[u]
            lo, hi = (t - 1) // 2, t - 1 - (t - 1) // 2
            # centerlines chosen so the stroke's ink sits inside the cell
            a, b, c, e = x0 + lo, y0 + lo, x1 - hi, y1 - hi
            dash = dashed()
            strokes += [
                Stroke(a, b, c, b, dash),
                Stroke(c, b, c, e, dash),
                Stroke(a, e, c, e, dash),
                Stroke(a, b, a, e, dash),
            ]
    for u in sorted(truth.graph.nodes):
        if not kids[u]:
            continue
        px = placement[u][0]
        y_bottom = cells[u][3]
        bus_y = y_bottom + spec.gap_y // 2
        xs = [placement[c][0] for c in kids[u]]
        strokes.append(Stroke(px, y_bottom, px, bus_y, dashed()))
        lo, hi = min(xs + [px]), max(xs + [px])
        if hi > lo:
            strokes.append(Stroke(lo, bus_y, hi, bus_y, dashed()))
        for c, x in zip(kids[u], xs):
            strokes.append(Stroke(x, bus_y, x, cells[c][1], dashed()))

    inset = spec.label_inset
    boxes = []
    for u in sorted(truth.graph.nodes):
        x0, y0, x1, y1 = cells[u]
        boxes.append(Textbox(u, x0 + inset, y0 + inset, x1 - x0 + 1 - 2 * inset, y1 - y0 + 1 - 2 * inset))

    placed = GroundTruth(truth.graph.copy(), cells, boxed, dict(truth.parent))
    return placed, strokes, boxes, size, chart_bottom


def _draw(img: np.ndarray, s: Stroke, spec: SynthSpec) -> None:
    t = spec.line_px
    lo, hi = (t - 1) // 2, t - 1 - (t - 1) // 2
    horizontal = s.y0 == s.y1
    a, b = sorted((s.x0, s.x1) if horizontal else (s.y0, s.y1))
    length = b - a + 1
    on = _dash_mask(length, spec) if s.dashed else np.ones(length, bool)
    # square caps: every inked position is widened by the stroke thickness
    span = np.zeros(length + t - 1, bool)
    for k in range(t):
        span[k : k + length] |= on
    if horizontal:
        img[s.y0 - lo : s.y0 + hi + 1, a - lo : a - lo + span.size][:, span] = INK
    else:
        img[a - lo : a - lo + span.size, s.x0 - lo : s.x0 + hi + 1][span, :] = INK


def _dash_mask(length: int, spec: SynthSpec) -> np.ndarray:
    period = spec.dash_on + spec.dash_off
    idx = np.arange(length)
    on = (idx % period) < spec.dash_on
    # both ends always carry ink so a dashed line keeps its full extent
    on[: spec.dash_on] = True
    on[max(length - spec.dash_on, 0) :] = True
    return on


def render_chart(truth: GroundTruth, spec: SynthSpec):
    """Render ``truth`` to ``(gray_image, sidecar_doc, placed_truth)``.

    The sidecar document uses pixel units with a top-left origin.
    """
    placed, strokes, boxes, (width, height), chart_bottom = chart_strokes(truth, spec)
    img = np.full((height, width), PAPER, dtype=np.uint8)
    if spec.header_junk:
        img[20:23, spec.margin : max(spec.margin + 1, width // 2)] = INK
        img[30:44, spec.margin : spec.margin + 60] = INK
    for s in strokes:
        _draw(img, s, spec)
    if spec.footer_junk:
        y = chart_bottom + spec.footer_gap
        img[y : y + 2, spec.margin : width - spec.margin] = INK
        img[y + 8 : y + 20, spec.margin : spec.margin + 40] = INK
    if spec.rasterize_labels:
        for b in boxes:
            img[b.y + 2 : b.y + b.h - 2, b.x + 2 : b.x + b.w - 2] = INK
    sidecar = {
        "units": "px",
        "origin": "top-left",
        "page_height": height,
        "dpi": spec.dpi,
        "boxes": [{"text": b.content, "x": b.x, "y": b.y, "w": b.w, "h": b.h} for b in boxes],
    }
    return img, sidecar, placed


@dataclass(frozen=True)
class RoundTripScore:
    exact: bool
    node_recall: float
    edge_recall: float
    spurious_edges: int
    unmatched_nodes: int
    duplicate_labels: int
    missing_units: Tuple[str, ...] = ()
    missing_edges: Tuple[Tuple[str, str], ...] = ()


def _resolved_edges(g: nx.Graph, truth_edges):
    """Label-pair edges implied by the extracted graph.

    Directly joined labeled nodes give a pair. Each connected cluster of
    unlabeled nodes (bus junctions) with labeled neighbours N is read as a
    star centered on the member of N that agrees with the most truth
    edges, ties to the smaller label.
    """
    label = {n: d.get("label") for n, d in g.nodes(data=True)}
    pairs = set()
    for u, v in g.edges:
        if label[u] is not None and label[v] is not None and label[u] != label[v]:
            pairs.add(tuple(sorted((label[u], label[v]))))
    unlabeled = [n for n in g.nodes if label[n] is None]
    for comp in nx.connected_components(g.subgraph(unlabeled)):
        nbrs = sorted({label[w] for n in comp for w in g.neighbors(n) if label[w] is not None})
        if len(nbrs) < 2:
            continue
        best = None
        for c in nbrs:
            hits = sum(tuple(sorted((c, o))) in truth_edges for o in nbrs if o != c)
            if best is None or hits > best[0]:
                best = (hits, c)
        c = best[1]
        for o in nbrs:
            if o != c:
                pairs.add(tuple(sorted((c, o))))
    return pairs


def round_trip_score(extracted: OrgNetwork, truth: GroundTruth) -> RoundTripScore:
    g = extracted.graph
    truth_labels = set(truth.graph.nodes)
    truth_edges = {tuple(sorted(e)) for e in truth.graph.edges}
    seen, duplicates, foreign = set(), 0, 0
    for n in sorted(g.nodes):
        lab = g.nodes[n].get("label")
        if lab is None:
            continue
        if lab not in truth_labels:
            foreign += 1
        elif lab in seen:
            duplicates += 1
        seen.add(lab)
    matched = seen & truth_labels
    node_recall = len(matched) / len(truth_labels) if truth_labels else 1.0
    pairs = _resolved_edges(g, truth_edges)
    hit = pairs & truth_edges
    edge_recall = len(hit) / len(truth_edges) if truth_edges else 1.0
    spurious = len(pairs - truth_edges)
    exact = (
        node_recall == 1.0
        and edge_recall == 1.0
        and spurious == 0
        and duplicates == 0
        and foreign == 0
    )
    return RoundTripScore(
        exact=exact,
        node_recall=node_recall,
        edge_recall=edge_recall,
        spurious_edges=spurious,
        unmatched_nodes=foreign,
        duplicate_labels=duplicates,
        missing_units=tuple(sorted(truth_labels - matched)),
        missing_edges=tuple(sorted(truth_edges - hit)),
    )


def n_units_for_seed(seed: int, lo: int = 3, hi: int = 60) -> int:
    """Chart size drawn uniformly from ``[lo, hi]``, fixed per seed."""
    return random.Random(f"n_units:{seed}").randint(lo, hi)


def truth_to_document(truth: GroundTruth, spec: SynthSpec = None) -> dict:
    labels = truth.labels
    ids = {u: i for i, u in enumerate(labels)}
    nodes = []
    for u in labels:
        rec = {"id": ids[u], "label": u, "x": None, "y": None, "kind": "box" if truth.boxed.get(u, True) else "label-only"}
        if u in truth.cells:
            x0, y0, x1, y1 = truth.cells[u]
            rec["x"], rec["y"] = (x0 + x1) // 2, (y0 + y1) // 2
            rec["cell"] = [x0, y0, x1, y1]
        rec["parent"] = truth.parent.get(u)
        nodes.append(rec)
    edges = sorted(tuple(sorted((ids[a], ids[b]))) for a, b in truth.graph.edges)
    return {
        "truth": True,
        "status": "ok",
        "warnings": [],
        "config": asdict(spec) if spec is not None else None,
        "nodes": nodes,
        "edges": [{"source": a, "target": b} for a, b in edges],
        "diagnostics": None,
    }


def truth_from_document(doc: dict) -> GroundTruth:
    g = nx.Graph()
    by_id = {}
    cells, boxed, parent = {}, {}, {}
    for rec in doc["nodes"]:
        u = rec["label"]
        by_id[rec["id"]] = u
        g.add_node(u)
        if rec.get("cell"):
            cells[u] = tuple(rec["cell"])
        boxed[u] = rec.get("kind") != "label-only"
        parent[u] = rec.get("parent")
    for rec in doc["edges"]:
        g.add_edge(by_id[rec["source"]], by_id[rec["target"]])
    return GroundTruth(g, cells, boxed, parent)


def write_chart(out_dir, stem: str, spec: SynthSpec, image_format: str = "png"):
    """Render one chart and write ``<stem>.<fmt>``, ``<stem>.sidecar.json``
    and ``<stem>.truth.json`` into ``out_dir``."""
    from .raster import write_pgm, write_png

    out_dir = Path(out_dir)
    img, sidecar, placed = render_chart(gen_structure(spec), spec)
    image_path = out_dir / f"{stem}.{image_format}"
    (write_png if image_format == "png" else write_pgm)(image_path, img)
    (out_dir / f"{stem}.sidecar.json").write_text(json.dumps(sidecar, indent=1) + "\n", encoding="utf-8")
    (out_dir / f"{stem}.truth.json").write_text(
        json.dumps(truth_to_document(placed, spec), indent=2) + "\n", encoding="utf-8"
    )
    return image_path, placed
