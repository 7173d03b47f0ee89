"""
Diagnostics on small graphs
===========================

The report computed for every extracted network, shown on graphs whose
values are easy to check by hand, then on a batch of synthetic charts.
"""

import tempfile
from pathlib import Path

import networkx as nx

from chart2net import metrics, pipeline, synthgen
from chart2net.synthgen import SynthSpec

examples = {
    "path P3": nx.path_graph(3),
    "triangle K3": nx.complete_graph(3),
    "star K1,4": nx.star_graph(4),
    "two disjoint edges": nx.Graph([(0, 1), (2, 3)]),
}
for name, g in examples.items():
    r = metrics.diagnostics(g)
    print(
        f"{name:<20} density={r.density:.3f} clustering={r.avg_clustering:.3f} "
        f"components={r.components} asp={r.avg_shortest_path:.3f} lambda2={r.algebraic_connectivity:.3f}"
    )

# Disconnected graphs: path length is averaged over the largest component
# only, while lambda2 is taken over the whole graph and so drops to 0.
g = nx.path_graph(4)
g.add_edge(10, 11)
print("P4 + K2: asp", metrics.avg_shortest_path(g), "lambda2", metrics.algebraic_connectivity(g))

# A small batch: per-chart documents plus a summary with mean and median
# of every metric over the charts that succeeded.
with tempfile.TemporaryDirectory() as d:
    for seed in range(1, 11):
        spec = SynthSpec(seed=seed, n_units=synthgen.n_units_for_seed(seed))
        synthgen.write_chart(d, f"chart_{seed:04d}", spec)
    summary = pipeline.batch(d)
    print(f"\n{summary.succeeded}/{summary.total} charts, success rate {summary.success_rate}")
    for key, stats in summary.aggregate.items():
        print(f"  {key:<24} mean {stats['mean']:8.3f}  median {stats['median']:8.3f}")
    print(sorted(p.name for p in Path(d).iterdir())[:4], "...")
