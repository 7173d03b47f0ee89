"""
Line extraction: scanline runs to a positional graph of axis-aligned edges.

Graphs are plain :class:`networkx.Graph` objects whose nodes carry integer
pixel positions ``x``, ``y`` and a ``kind`` tag (``"junction"``, ``"box"``
or ``"label-only"``). Every operation returns a new graph.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import networkx as nx
import numpy as np

from ._util import chebyshev, next_node_id, pos, round_half_up

__all__ = [
    "Segment",
    "scan_segments",
    "format_segments",
    "parse_segments",
    "segments_to_graph",
    "merge_close_nodes",
    "insert_intersections",
    "crossing_pairs",
    "extend_pendants",
]

KIND_RANK = {"junction": 0, "label-only": 1, "box": 2}


@dataclass(frozen=True, order=True)
class Segment:
    """Centerline of a maximal horizontal (``H``) or vertical (``V``) run.

    ``perp`` is the row of an H segment or the column of a V segment;
    ``lo``/``hi`` bound the inclusive span along the running axis.
    """

    orientation: str
    perp: int
    lo: int
    hi: int

    @property
    def endpoints(self) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        if self.orientation == "H":
            return (self.lo, self.perp), (self.hi, self.perp)
        return (self.perp, self.lo), (self.perp, self.hi)


def _row_runs(mask: np.ndarray, min_run: int):
    h, w = mask.shape
    padded = np.zeros((h, w + 2), dtype=np.int8)
    padded[:, 1:-1] = mask
    d = np.diff(padded, axis=1)
    starts = np.argwhere(d == 1)
    ends = np.argwhere(d == -1)
    rows = starts[:, 0]
    lo = starts[:, 1]
    hi = ends[:, 1] - 1
    keep = hi - lo + 1 >= min_run
    return rows[keep], lo[keep], hi[keep]


def _merge_parallel(perps, los, his, eps: int):
    n = len(perps)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    buckets = defaultdict(list)
    for i, p in enumerate(perps):
        buckets[int(p)].append(i)
    for i in range(n):
        p = int(perps[i])
        for q in range(p + 1, p + eps + 1):
            for j in buckets.get(q, ()):
                if los[i] <= his[j] and los[j] <= his[i]:
                    ri, rj = find(i), find(j)
                    if ri != rj:
                        parent[max(ri, rj)] = min(ri, rj)

    groups = defaultdict(list)
    for i in range(n):
        groups[find(i)].append(i)
    merged = []
    for members in groups.values():
        perp = round_half_up(sum(int(perps[i]) for i in members) / len(members))
        lo = min(int(los[i]) for i in members)
        hi = max(int(his[i]) for i in members)
        merged.append((perp, lo, hi))
    return merged


def scan_segments(img: np.ndarray, min_run: int = 10, thickness_eps: int = 3) -> List[Segment]:
    """Detect horizontal and vertical strokes by scanning rows and columns.

    Runs shorter than ``min_run`` are dropped. Parallel runs whose fixed
    coordinates differ by at most ``thickness_eps`` and whose spans overlap
    are fused into a single centerline segment, so a stroke several pixels
    thick yields one segment.
    """
    if min_run < 2:
        raise ValueError("min_run must be >= 2")
    img = np.asarray(img, dtype=bool)
    segs = []
    for orientation, mask in (("H", img), ("V", img.T)):
        perps, los, his = _row_runs(mask, min_run)
        for perp, lo, hi in _merge_parallel(perps, los, his, thickness_eps):
            segs.append(Segment(orientation, perp, lo, hi))
    segs.sort()
    return segs


def format_segments(segs: Iterable[Segment]) -> str:
    return "".join(f"{s.orientation} {s.perp} {s.lo} {s.hi}\n" for s in segs)


def parse_segments(text: str) -> List[Segment]:
    out = []
    for line in text.splitlines():
        if line.strip():
            o, p, lo, hi = line.split()
            out.append(Segment(o, int(p), int(lo), int(hi)))
    return out


def segments_to_graph(segs: Iterable[Segment]) -> nx.Graph:
    g = nx.Graph()
    for seg in segs:
        a, b = next_node_id(g), next_node_id(g) + 1
        (xa, ya), (xb, yb) = seg.endpoints
        g.add_node(a, x=xa, y=ya, kind="junction")
        g.add_node(b, x=xb, y=yb, kind="junction")
        g.add_edge(a, b)
    return g


def _absorb(g: nx.Graph, keep, drop) -> None:
    """Fold ``drop`` into ``keep`` in place, discarding the self-loop."""
    for w in list(g.neighbors(drop)):
        if w != keep:
            g.add_edge(keep, w)
    kd, dd = g.nodes[keep], g.nodes[drop]
    if KIND_RANK.get(dd.get("kind"), 0) > KIND_RANK.get(kd.get("kind"), 0):
        kd["kind"] = dd["kind"]
    if kd.get("label") is None and dd.get("label") is not None:
        kd["label"] = dd["label"]
    g.remove_node(drop)


def _close_pairs(points: dict, eps: int):
    cell = eps + 1
    grid = defaultdict(list)
    for n, (x, y) in points.items():
        grid[(x // cell, y // cell)].append(n)
    pairs = []
    for (cx, cy), members in grid.items():
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                other = grid.get((cx + dx, cy + dy))
                if not other:
                    continue
                for a in members:
                    for b in other:
                        if a < b:
                            d = chebyshev(points[a], points[b])
                            if d <= eps:
                                pairs.append((d, a, b))
    return sorted(set(pairs))


def merge_close_nodes(g: nx.Graph, eps: int = 3) -> nx.Graph:
    """Aggregate nodes closer than ``eps`` (Chebyshev) until none remain.

    Each round merges a greedy set of disjoint closest pairs; a merged node
    sits at the rounded centroid of all original nodes it absorbed.
    Self-loops created along the way are dropped.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    g = g.copy()
    g.remove_edges_from(list(nx.selfloop_edges(g)))
    sums = {n: (d["x"], d["y"], 1) for n, d in g.nodes(data=True)}
    while True:
        points = {n: pos(g, n) for n in g.nodes}
        pairs = _close_pairs(points, eps)
        if not pairs:
            return g
        used = set()
        for _, a, b in pairs:
            if a in used or b in used:
                continue
            used.update((a, b))
            sa, sb = sums.pop(a), sums.pop(b)
            total = (sa[0] + sb[0], sa[1] + sb[1], sa[2] + sb[2])
            _absorb(g, a, b)
            sums[a] = total
            g.nodes[a]["x"] = round_half_up(total[0] / total[2])
            g.nodes[a]["y"] = round_half_up(total[1] / total[2])


def _classify(g: nx.Graph):
    hs, vs = [], []
    for a, b in sorted(tuple(sorted(e)) for e in g.edges):
        (xa, ya), (xb, yb) = pos(g, a), pos(g, b)
        dx, dy = abs(xb - xa), abs(yb - ya)
        if dx == 0 and dy == 0:
            continue
        if dx >= dy:
            hs.append((a, b, (ya + yb) / 2, min(xa, xb), max(xa, xb)))
        else:
            vs.append((a, b, (xa + xb) / 2, min(ya, yb), max(ya, yb)))
    return hs, vs


def crossing_pairs(g: nx.Graph, eps: int = 3):
    """All (H edge, V edge) pairs that cross or touch within ``eps``.

    Pairs already sharing an endpoint are excluded, so an empty result
    means every crossing carries a node.
    """
    hs, vs = _classify(g)
    if not hs or not vs:
        return []
    hy = np.array([h[2] for h in hs])
    hlo = np.array([h[3] for h in hs])
    hhi = np.array([h[4] for h in hs])
    vx = np.array([v[2] for v in vs])
    vlo = np.array([v[3] for v in vs])
    vhi = np.array([v[4] for v in vs])
    hit = (
        (vx[None, :] >= hlo[:, None] - eps)
        & (vx[None, :] <= hhi[:, None] + eps)
        & (hy[:, None] >= vlo[None, :] - eps)
        & (hy[:, None] <= vhi[None, :] + eps)
    )
    out = []
    for i, j in np.argwhere(hit):
        h, v = hs[i], vs[j]
        if {h[0], h[1]} & {v[0], v[1]}:
            continue
        out.append((h, v))
    return out


def _nearest(g: nx.Graph, candidates, q, eps: int) -> Optional[int]:
    best = None
    for n in candidates:
        d = chebyshev(pos(g, n), q)
        if d <= eps and (best is None or (d, n) < best):
            best = (d, n)
    return None if best is None else best[1]


def insert_intersections(g: nx.Graph, eps: int = 3) -> nx.Graph:
    """Split H and V edges wherever they cross or form a T-junction.

    Crossings are found on segment geometry with touch tolerance ``eps``.
    An endpoint already within ``eps`` of the crossing point is reused;
    otherwise a junction node is created there. Sub-edges are subsets of
    the original lines, so one pass over the original edges reaches the
    closure.
    """
    pairs = crossing_pairs(g, eps)
    g = g.copy()
    if not pairs:
        return g
    splits = defaultdict(set)
    axis = {}
    unions = []
    grid_cell = eps + 1
    grid = defaultdict(list)
    for n in g.nodes:
        x, y = pos(g, n)
        grid[(x // grid_cell, y // grid_cell)].append(n)

    def nearby(q):
        cx, cy = q[0] // grid_cell, q[1] // grid_cell
        return [n for dx in (-1, 0, 1) for dy in (-1, 0, 1) for n in grid.get((cx + dx, cy + dy), ())]

    nid = next_node_id(g)
    for h, v in pairs:
        hkey, vkey = (h[0], h[1]), (v[0], v[1])
        axis[hkey], axis[vkey] = "x", "y"
        q = (round_half_up(v[2]), round_half_up(h[2]))
        hn = _nearest(g, hkey, q, eps)
        vn = _nearest(g, vkey, q, eps)
        if hn is not None and vn is not None:
            unions.append((hn, vn))
            continue
        if hn is not None:
            splits[vkey].add(hn)
            continue
        if vn is not None:
            splits[hkey].add(vn)
            continue
        c = _nearest(g, nearby(q), q, eps)
        if c is None:
            c = nid
            nid += 1
            g.add_node(c, x=q[0], y=q[1], kind="junction")
            grid[(q[0] // grid_cell, q[1] // grid_cell)].append(c)
        for key in (hkey, vkey):
            if c not in key:
                splits[key].add(c)

    for (a, b), inner in sorted(splits.items()):
        ax = axis[(a, b)]
        chain = sorted({a, b} | inner, key=lambda n: (g.nodes[n][ax], n))
        if g.has_edge(a, b):
            g.remove_edge(a, b)
        for u, w in zip(chain, chain[1:]):
            if u != w:
                g.add_edge(u, w)

    # endpoints of both edges near the same crossing are the same junction
    parent = {}

    def find(n):
        while parent.get(n, n) != n:
            n = parent[n]
        return n

    for a, b in unions:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    for n in sorted(parent, reverse=True):
        r = find(n)
        if r != n and n in g and r in g:
            _absorb(g, r, n)
    g.remove_edges_from(list(nx.selfloop_edges(g)))
    return g


def extend_pendants(g: nx.Graph, delta: int = 8, bounds: Optional[Tuple[int, int]] = None) -> nx.Graph:
    """Push every degree-1 node ``delta`` px outward along its edge.

    ``bounds`` is ``(width, height)``; moved nodes are clamped inside it.
    """
    if delta < 0:
        raise ValueError("delta must be >= 0")
    out = g.copy()
    for n in sorted(g.nodes):
        if g.degree(n) != 1:
            continue
        (nb,) = g.neighbors(n)
        x, y = pos(g, n)
        px, py = pos(g, nb)
        dx, dy = x - px, y - py
        if dx == 0 and dy == 0:
            continue
        if abs(dx) >= abs(dy):
            x += delta if dx > 0 else -delta
        else:
            y += delta if dy > 0 else -delta
        if bounds is not None:
            x = min(max(x, 0), bounds[0] - 1)
            y = min(max(y, 0), bounds[1] - 1)
        out.nodes[n]["x"], out.nodes[n]["y"] = x, y
    return out
