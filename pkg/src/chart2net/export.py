"""
Serialization of extracted networks and visual overlays.

The canonical graph document is JSON with nodes ordered by id and edges
ordered lexicographically as ``source < target``, so identical inputs
produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import networkx as nx
import numpy as np

from .labels import OrgNetwork

__all__ = [
    "FORMATS",
    "to_document",
    "dump_document",
    "graph_from_document",
    "network_from_document",
    "load_document",
    "to_graphml",
    "to_dot",
    "export",
    "render_overlay",
]

FORMATS = ("json", "graphml", "dot")


def _node_records(g: nx.Graph):
    out = []
    for n in sorted(g.nodes):
        d = g.nodes[n]
        out.append({"id": n, "label": d.get("label"), "x": d["x"], "y": d["y"], "kind": d.get("kind", "junction")})
    return out


def _edge_records(g: nx.Graph):
    return [{"source": a, "target": b} for a, b in sorted(tuple(sorted(e)) for e in g.edges)]


def to_document(net: OrgNetwork, diagnostics=None, config=None, stage: Optional[str] = None, **extra) -> dict:
    doc = {"status": net.status}
    if net.reason is not None:
        doc["reason"] = net.reason
    doc["warnings"] = list(net.warnings)
    if stage is not None:
        doc["stage"] = stage
    doc.update(extra)
    doc["config"] = config.to_dict() if hasattr(config, "to_dict") else config
    doc["nodes"] = _node_records(net.graph)
    doc["edges"] = _edge_records(net.graph)
    doc["diagnostics"] = diagnostics.to_dict() if hasattr(diagnostics, "to_dict") else diagnostics
    return doc


def dump_document(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def graph_from_document(doc: dict) -> nx.Graph:
    g = nx.Graph()
    for rec in doc.get("nodes", []):
        g.add_node(rec["id"], x=rec["x"], y=rec["y"], kind=rec.get("kind", "junction"), label=rec.get("label"))
    for rec in doc.get("edges", []):
        g.add_edge(rec["source"], rec["target"])
    return g


def network_from_document(doc: dict) -> OrgNetwork:
    return OrgNetwork(graph_from_document(doc), doc.get("status", "ok"), doc.get("reason"), list(doc.get("warnings", [])))


def load_document(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _display_label(n, d):
    return d.get("label") if d.get("label") is not None else f"n{n}"


def to_graphml(net: OrgNetwork) -> str:
    g = nx.Graph()
    for n in sorted(net.graph.nodes):
        d = net.graph.nodes[n]
        g.add_node(str(n), label=_display_label(n, d), x=int(d["x"]), y=int(d["y"]), kind=d.get("kind", "junction"))
    for a, b in sorted(tuple(sorted(e)) for e in net.graph.edges):
        g.add_edge(str(a), str(b))
    return "\n".join(nx.generate_graphml(g)) + "\n"


def _dot_quote(s: str) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(net: OrgNetwork) -> str:
    lines = ["graph org {"]
    for n in sorted(net.graph.nodes):
        d = net.graph.nodes[n]
        # graphviz y grows upward
        where = _dot_quote(f"{d['x']},{-d['y']}!")
        lines.append(
            f"  {n} [label={_dot_quote(_display_label(n, d))}, x={d['x']}, y={d['y']}, "
            f"kind={_dot_quote(d.get('kind', 'junction'))}, pos={where}];"
        )
    for a, b in sorted(tuple(sorted(e)) for e in net.graph.edges):
        lines.append(f"  {a} -- {b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export(net: OrgNetwork, fmt: str, path=None, diagnostics=None, config=None) -> str:
    """Serialize ``net`` as ``json`` (canonical document), ``graphml`` or ``dot``.

    Writes to ``path`` when given and returns the text either way.
    """
    if fmt == "json":
        text = dump_document(to_document(net, diagnostics, config))
    elif fmt == "graphml":
        text = to_graphml(net)
    elif fmt == "dot":
        text = to_dot(net)
    else:
        raise ValueError(f"unknown export format {fmt!r}; expected one of {', '.join(FORMATS)}")
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def render_overlay(image, net: OrgNetwork, out_path, boxes=(), disc_radius: int = 4) -> None:
    """Draw the network over a dimmed copy of the chart and save as PNG.

    ``image`` is a path or a grayscale array. Nodes become filled discs,
    edges straight lines, textboxes outlined rectangles.
    """
    from PIL import Image, ImageDraw

    if isinstance(image, (str, Path)):
        from .raster import read_image

        image = read_image(image)
    gray = np.asarray(image, dtype=np.float64)
    dimmed = (255 - (255 - gray) * 0.3).round().astype(np.uint8)
    canvas = Image.fromarray(dimmed).convert("RGB")
    draw = ImageDraw.Draw(canvas)
    g = net.graph
    for tb in boxes:
        draw.rectangle([tb.x, tb.y, tb.x + tb.w - 1, tb.y + tb.h - 1], outline=(0, 140, 0))
    for a, b in sorted(tuple(sorted(e)) for e in g.edges):
        da, db = g.nodes[a], g.nodes[b]
        draw.line([(da["x"], da["y"]), (db["x"], db["y"])], fill=(30, 60, 220), width=2)
    colors = {"box": (220, 30, 30), "junction": (250, 150, 0), "label-only": (150, 0, 200)}
    r = disc_radius
    for n in sorted(g.nodes):
        d = g.nodes[n]
        draw.ellipse([d["x"] - r, d["y"] - r, d["x"] + r, d["y"] + r], fill=colors.get(d.get("kind"), (0, 0, 0)))
    canvas.save(out_path, format="PNG")
