"""
Graph simplification: drawn boxes become single nodes, leftover cycles are
collapsed, and pass-through junctions are contracted away.
"""

from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import List, Tuple

import networkx as nx

from ._util import next_node_id, pos, round_half_up

__all__ = [
    "Box",
    "bounded_faces",
    "detect_boxes",
    "collapse_boxes",
    "remove_residual_cycles",
    "contract_degree2",
]


@dataclass(frozen=True)
class Box:
    members: Tuple[int, ...]  # perimeter nodes in cycle order
    rect: Tuple[int, int, int, int]  # x_min, y_min, x_max, y_max
    centroid: Tuple[int, int]

    @property
    def edges(self):
        m = self.members
        return {frozenset((m[i], m[(i + 1) % len(m)])) for i in range(len(m))}


def _angle(g, u, v):
    (xu, yu), (xv, yv) = pos(g, u), pos(g, v)
    # image rows grow downward; flip so angles run counter-clockwise
    return math.atan2(-(yv - yu), xv - xu)


def bounded_faces(g: nx.Graph) -> List[List[int]]:
    """Trace the faces of the straight-line drawing given by node positions.

    Returns the node walks of faces with positive (counter-clockwise)
    area, which for a plane drawing are exactly the bounded faces.
    """
    order = {}
    for v in g.nodes:
        nbrs = sorted(g.neighbors(v), key=lambda w: (_angle(g, v, w), w))
        order[v] = {w: i for i, w in enumerate(nbrs)}, nbrs
    seen = set()
    faces = []
    for u0, v0 in sorted(g.edges):
        for start in ((u0, v0), (v0, u0)):
            if start in seen:
                continue
            walk = []
            u, v = start
            while (u, v) not in seen:
                seen.add((u, v))
                walk.append(u)
                index, nbrs = order[v]
                w = nbrs[(index[u] - 1) % len(nbrs)]
                u, v = v, w
            area = 0.0
            for i, a in enumerate(walk):
                (xa, ya), (xb, yb) = pos(g, a), pos(g, walk[(i + 1) % len(walk)])
                area += xa * (-yb) - xb * (-ya)
            if area > 0:
                faces.append(walk)
    return faces


def _side_of(x, y, rect, tol):
    x0, y0, x1, y1 = rect
    sides = set()
    if abs(y - y0) <= tol:
        sides.add("top")
    if abs(y - y1) <= tol:
        sides.add("bottom")
    if abs(x - x0) <= tol:
        sides.add("left")
    if abs(x - x1) <= tol:
        sides.add("right")
    return sides


def _as_box(g, walk, rect_tol):
    if len(walk) < 4 or len(set(walk)) != len(walk):
        return None
    xs = [g.nodes[n]["x"] for n in walk]
    ys = [g.nodes[n]["y"] for n in walk]
    rect = (min(xs), min(ys), max(xs), max(ys))
    if rect[2] - rect[0] <= 2 * rect_tol or rect[3] - rect[1] <= 2 * rect_tol:
        return None
    sides = [_side_of(x, y, rect, rect_tol) for x, y in zip(xs, ys)]
    if not all(sides):
        return None
    for i in range(len(walk)):
        if not sides[i] & sides[(i + 1) % len(walk)]:
            return None
    centroid = (round_half_up((rect[0] + rect[2]) / 2), round_half_up((rect[1] + rect[3]) / 2))
    return Box(tuple(walk), rect, centroid)


def detect_boxes(g: nx.Graph, rect_tol: int = 3) -> List[Box]:
    """Find drawn rectangles among the bounded faces of the line graph.

    A face counts as a box when it is a simple cycle, every node lies
    within ``rect_tol`` of its bounding rectangle's border, and every edge
    runs along one side. Faces contain no smaller cycles, so each box is
    minimal. Neighbouring boxes may share border nodes and edges.
    """
    boxes = []
    for walk in bounded_faces(g):
        box = _as_box(g, walk, rect_tol)
        if box is not None:
            boxes.append(box)
    boxes.sort(key=lambda b: (b.rect, min(b.members)))
    return boxes


def _collapse_groups(g: nx.Graph, groups, kinds, centroids, drop_edges) -> nx.Graph:
    """Replace each node group by one new node, re-attaching outside edges.

    Nodes shared by several groups link those groups' new nodes together.
    """
    out = nx.Graph()
    nid = next_node_id(g)
    owner = defaultdict(list)
    new_ids = []
    for members in groups:
        new_ids.append(nid)
        for n in members:
            owner[n].append(nid)
        nid += 1
    for n, d in g.nodes(data=True):
        if n not in owner:
            out.add_node(n, **d)
    for i, new in enumerate(new_ids):
        out.add_node(new, x=centroids[i][0], y=centroids[i][1], kind=kinds[i])

    def images(n):
        return owner.get(n) or [n]

    for u, v in g.edges:
        if frozenset((u, v)) in drop_edges:
            continue
        for a in images(u):
            for b in images(v):
                if a != b:
                    out.add_edge(a, b)
    for n, new in sorted(owner.items()):
        for i, a in enumerate(new):
            for b in new[i + 1 :]:
                out.add_edge(a, b)
    return out


def collapse_boxes(g: nx.Graph, boxes: List[Box]) -> nx.Graph:
    """Replace each box by a single ``box`` node at its centroid.

    Edges leaving a box attach to its node, boxes sharing a border node or
    edge become adjacent box nodes, and a box with no outside connection
    ends up isolated.
    """
    drop = set()
    for b in boxes:
        drop |= b.edges
    return _collapse_groups(
        g,
        [b.members for b in boxes],
        ["box"] * len(boxes),
        [b.centroid for b in boxes],
        drop,
    )


def _shortest_cycle(g: nx.Graph):
    best = None
    bridges = {frozenset(e) for e in nx.bridges(g)}
    for u, v in sorted(tuple(sorted(e)) for e in g.edges):
        if frozenset((u, v)) in bridges:
            continue
        # BFS from u to v avoiding the edge itself
        prev = {u: None}
        queue = deque([u])
        while queue and v not in prev:
            a = queue.popleft()
            for b in sorted(g.neighbors(a)):
                if b in prev or (a == u and b == v):
                    continue
                prev[b] = a
                queue.append(b)
        if v not in prev:
            continue
        cycle = []
        n = v
        while n is not None:
            cycle.append(n)
            n = prev[n]
        xs = [g.nodes[n]["x"] for n in cycle]
        ys = [g.nodes[n]["y"] for n in cycle]
        area = (max(xs) - min(xs)) * (max(ys) - min(ys))
        key = (len(cycle), area, tuple(sorted(cycle)))
        if best is None or key < best[0]:
            best = (key, cycle)
    return None if best is None else best[1]


def remove_residual_cycles(g: nx.Graph) -> nx.Graph:
    """Collapse remaining cycles, shortest first, into single nodes.

    Ties are broken by smaller bounding-box area, then by the sorted member
    ids. A collapsed node takes kind ``box`` if any member was a box.
    """
    g = g.copy()
    while g.number_of_edges() > g.number_of_nodes() - nx.number_connected_components(g):
        cycle = _shortest_cycle(g)
        if cycle is None:
            break
        cx = round_half_up(sum(g.nodes[n]["x"] for n in cycle) / len(cycle))
        cy = round_half_up(sum(g.nodes[n]["y"] for n in cycle) / len(cycle))
        kind = "box" if any(g.nodes[n].get("kind") == "box" for n in cycle) else "junction"
        members = set(cycle)
        inner = {frozenset(e) for e in g.subgraph(members).edges}
        g = _collapse_groups(g, [tuple(cycle)], [kind], [(cx, cy)], inner)
    return g


def _contractible(g, n, contract_box_nodes):
    if g.degree(n) != 2:
        return False
    if not contract_box_nodes and g.nodes[n].get("kind") != "junction":
        return False
    if g.nodes[n].get("label") is not None:
        return False
    a, b = g.neighbors(n)
    return not g.has_edge(a, b)


def contract_degree2(g: nx.Graph, contract_box_nodes: bool = False) -> nx.Graph:
    """Remove pass-through degree-2 nodes and join their neighbours.

    Only ``junction`` nodes are touched unless ``contract_box_nodes`` is
    set. A contraction that would duplicate an existing edge is skipped.
    """
    g = g.copy()
    changed = True
    while changed:
        changed = False
        for n in sorted(g.nodes):
            if n in g and _contractible(g, n, contract_box_nodes):
                a, b = g.neighbors(n)
                g.remove_node(n)
                g.add_edge(a, b)
                changed = True
    return g
