"""
Textbox sidecar ingestion and node-label matching.

The sidecar is a JSON document produced by whatever tool extracted text
from the source document::

    {"units": "pt", "origin": "bottom-left", "page_height": 842, "dpi": 150,
     "boxes": [{"text": "Sales", "x": 72, "y": 700, "w": 40, "h": 12}]}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import networkx as nx

from ._util import next_node_id, pos, round_half_up

__all__ = [
    "SidecarError",
    "Textbox",
    "OrgNetwork",
    "load_sidecar",
    "parse_sidecar",
    "write_sidecar",
    "split_multiline",
    "match_labels",
]


class SidecarError(ValueError):
    pass


@dataclass(frozen=True)
class Textbox:
    """A label with its pixel extent ``[x, x+w-1] x [y, y+h-1]``."""

    content: str
    x: int
    y: int
    w: int
    h: int

    @property
    def center(self):
        return self.x + (self.w - 1) / 2, self.y + (self.h - 1) / 2

    def contains(self, px, py, pad: float = 0.0) -> bool:
        return (
            self.x - pad <= px <= self.x + self.w - 1 + pad
            and self.y - pad <= py <= self.y + self.h - 1 + pad
        )


@dataclass
class OrgNetwork:
    """Final labeled network of one chart.

    ``graph`` nodes carry ``label`` (``None`` when unmatched), ``x``, ``y``
    and ``kind``. ``status`` is ``"ok"`` or ``"failed"``, with ``reason``
    set in the latter case.
    """

    graph: nx.Graph
    status: str = "ok"
    reason: Optional[str] = None
    warnings: List[str] = field(default_factory=list)

    def fail(self, reason: str) -> None:
        self.status = "failed"
        self.reason = reason

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def _number(rec, key, index):
    value = rec.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise SidecarError(f"box {index}: field {key!r} must be a finite number, got {value!r}")
    return float(value)


def parse_sidecar(doc) -> List[Textbox]:
    if not isinstance(doc, dict):
        raise SidecarError("sidecar must be a JSON object")
    units = doc.get("units", "px")
    origin = doc.get("origin", "top-left")
    if units not in ("px", "pt"):
        raise SidecarError(f"unknown units {units!r}")
    if origin not in ("top-left", "bottom-left"):
        raise SidecarError(f"unknown origin {origin!r}")
    scale = 1.0
    if units == "pt":
        dpi = doc.get("dpi")
        if isinstance(dpi, bool) or not isinstance(dpi, (int, float)) or not dpi > 0:
            raise SidecarError("dpi > 0 is required when units are pt")
        scale = dpi / 72.0
    page_height = None
    if origin == "bottom-left":
        page_height = doc.get("page_height")
        if isinstance(page_height, bool) or not isinstance(page_height, (int, float)):
            raise SidecarError("page_height is required for bottom-left origin")
    records = doc.get("boxes")
    if not isinstance(records, list):
        raise SidecarError("'boxes' must be an array")

    out = []
    for i, rec in enumerate(records):
        if not isinstance(rec, dict):
            raise SidecarError(f"box {i}: expected an object")
        text = rec.get("text")
        if not isinstance(text, str) or not text.strip():
            raise SidecarError(f"box {i}: 'text' must be a non-empty string")
        x, y, w, h = (_number(rec, k, i) for k in ("x", "y", "w", "h"))
        if origin == "bottom-left":
            y = page_height - y - h
        box = Textbox(
            text,
            round_half_up(x * scale),
            round_half_up(y * scale),
            round_half_up(w * scale),
            round_half_up(h * scale),
        )
        if box.w <= 0 or box.h <= 0:
            raise SidecarError(f"box {i}: non-positive size {box.w}x{box.h} px")
        out.append(box)
    return out


def load_sidecar(path) -> List[Textbox]:
    """Read a sidecar file and convert its boxes to top-left pixel coordinates."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SidecarError(f"{path}: invalid JSON: {exc}") from exc
    return parse_sidecar(doc)


def write_sidecar(path, boxes, page_height: Optional[int] = None, dpi: Optional[float] = None) -> None:
    doc = {"units": "px", "origin": "top-left"}
    if page_height is not None:
        doc["page_height"] = page_height
    if dpi is not None:
        doc["dpi"] = dpi
    doc["boxes"] = [{"text": b.content, "x": b.x, "y": b.y, "w": b.w, "h": b.h} for b in boxes]
    Path(path).write_text(json.dumps(doc, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")


def split_multiline(tb: Textbox) -> List[Textbox]:
    """Split a multi-line box into one box per non-blank line, stacked top-down."""
    lines = [line.strip() for line in tb.content.splitlines()]
    lines = [line for line in lines if line]
    if len(lines) <= 1:
        return [tb]
    k = len(lines)
    step = tb.h // k
    if step == 0:
        # too short to split into whole-pixel rows; keep one box per line anyway
        return [Textbox(line, tb.x, tb.y, tb.w, tb.h) for line in lines]
    out = []
    for i, line in enumerate(lines):
        h = step if i < k - 1 else tb.h - step * (k - 1)
        out.append(Textbox(line, tb.x, tb.y + i * step, tb.w, h))
    return out


def match_labels(g: nx.Graph, boxes: List[Textbox], radius: float = 40, attach_orphans: bool = True) -> OrgNetwork:
    """Attach textbox contents to nearby nodes.

    A node is a candidate for a box when it lies inside the box grown by
    ``radius / 4``. Its distance is 0 when inside the box itself and the
    Euclidean distance to the box center otherwise. Pairs are taken
    greedily in ascending ``(distance, node id, box index)`` order, each
    node and each box used at most once, ignoring distances over
    ``radius``. Unused boxes produce a warning and, with ``attach_orphans``,
    an isolated ``label-only`` node at the box center.
    """
    out = g.copy()
    for n in out.nodes:
        out.nodes[n].setdefault("label", None)
    pad = radius / 4
    candidates = []
    for n in sorted(g.nodes):
        x, y = pos(g, n)
        for j, tb in enumerate(boxes):
            if not tb.contains(x, y, pad):
                continue
            if tb.contains(x, y):
                d = 0.0
            else:
                cx, cy = tb.center
                d = math.hypot(x - cx, y - cy)
            if d <= radius:
                candidates.append((d, n, j))
    candidates.sort()
    used_nodes, used_boxes = set(), set()
    for d, n, j in candidates:
        if n in used_nodes or j in used_boxes:
            continue
        used_nodes.add(n)
        used_boxes.add(j)
        out.nodes[n]["label"] = boxes[j].content

    net = OrgNetwork(out)
    nid = next_node_id(out)
    for j, tb in enumerate(boxes):
        if j in used_boxes:
            continue
        net.warnings.append(f"unmatched textbox {j} {tb.content!r} at ({tb.x},{tb.y})")
        if attach_orphans:
            cx, cy = tb.center
            out.add_node(nid, x=round_half_up(cx), y=round_half_up(cy), kind="label-only", label=tb.content)
            nid += 1
    return net
