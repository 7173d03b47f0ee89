import math


def round_half_up(value: float) -> int:
    # Python's round() is banker's rounding; pixel centroids need a fixed rule
    return int(math.floor(value + 0.5))


def next_node_id(g) -> int:
    return max(g.nodes, default=-1) + 1


def chebyshev(a, b) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def pos(g, n):
    d = g.nodes[n]
    return d["x"], d["y"]
