"""
Network diagnostics for extracted organization networks.

Conventions for disconnected graphs: the average shortest path length is
taken over the largest component, while algebraic connectivity is computed
on the whole graph (and is therefore zero whenever it is disconnected).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction

import networkx as nx
import numpy as np

__all__ = [
    "ConvergenceError",
    "DiagnosticsReport",
    "density",
    "avg_clustering",
    "components_count",
    "largest_component",
    "avg_shortest_path",
    "laplacian",
    "algebraic_connectivity",
    "diagnostics",
]


class ConvergenceError(RuntimeError):
    def __init__(self, residual: float, tol: float):
        super().__init__(f"eigensolver residual {residual:.3e} exceeds tolerance {tol:.1e}")
        self.residual = residual
        self.tol = tol


@dataclass(frozen=True)
class DiagnosticsReport:
    n: int
    m: int
    density: float
    avg_clustering: float
    components: int
    avg_shortest_path: float
    algebraic_connectivity: float

    def to_dict(self) -> dict:
        return asdict(self)


def density(g: nx.Graph) -> float:
    n = g.number_of_nodes()
    if n <= 1:
        return 0.0
    return 2.0 * g.number_of_edges() / (n * (n - 1))


def avg_clustering(g: nx.Graph) -> float:
    """Mean local clustering over all nodes; degree < 2 contributes 0.

    Accumulated as an exact fraction and rounded once at the end.
    """
    n = g.number_of_nodes()
    if n == 0:
        return 0.0
    total = Fraction(0)
    for v, tri in nx.triangles(g).items():
        k = g.degree(v)
        if k >= 2 and tri:
            total += Fraction(2 * tri, k * (k - 1))
    return float(total / n)


def components_count(g: nx.Graph) -> int:
    return nx.number_connected_components(g)


def largest_component(g: nx.Graph):
    """Node set of the largest component.

    Ties go to the component with more edges, then to the one holding the
    smallest node id.
    """
    best = None
    for comp in nx.connected_components(g):
        key = (-len(comp), -g.subgraph(comp).number_of_edges(), min(comp))
        if best is None or key < best[0]:
            best = (key, comp)
    return set() if best is None else best[1]


def avg_shortest_path(g: nx.Graph) -> float:
    comp = largest_component(g)
    if len(comp) < 2:
        return 0.0
    return float(nx.average_shortest_path_length(g.subgraph(comp)))


def laplacian(g: nx.Graph, nodelist=None) -> np.ndarray:
    nodes = sorted(g.nodes) if nodelist is None else list(nodelist)
    index = {n: i for i, n in enumerate(nodes)}
    L = np.zeros((len(nodes), len(nodes)))
    for u, v in g.edges:
        i, j = index[u], index[v]
        L[i, j] -= 1.0
        L[j, i] -= 1.0
        L[i, i] += 1.0
        L[j, j] += 1.0
    return L


def algebraic_connectivity(g: nx.Graph, tol: float = 1e-8) -> float:
    """Second-smallest eigenvalue of the combinatorial Laplacian ``D - A``.

    Raises :class:`ConvergenceError` if the computed eigenpair's residual
    ``||L v - lambda v||`` exceeds ``tol``.
    """
    n = g.number_of_nodes()
    if n == 0:
        raise ValueError("algebraic connectivity needs at least one node")
    if n == 1:
        return 0.0
    L = laplacian(g)
    try:
        w, vecs = np.linalg.eigh(L)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(float("inf"), tol) from exc
    lam, vec = w[1], vecs[:, 1]
    residual = float(np.linalg.norm(L @ vec - lam * vec))
    if residual > tol:
        raise ConvergenceError(residual, tol)
    lam = float(lam)
    if -1e-9 < lam < 0 or abs(lam) < 1e-12:
        lam = 0.0
    return lam


def diagnostics(g: nx.Graph) -> DiagnosticsReport:
    n = g.number_of_nodes()
    return DiagnosticsReport(
        n=n,
        m=g.number_of_edges(),
        density=density(g),
        avg_clustering=avg_clustering(g),
        components=components_count(g),
        avg_shortest_path=avg_shortest_path(g),
        algebraic_connectivity=algebraic_connectivity(g) if n else 0.0,
    )
