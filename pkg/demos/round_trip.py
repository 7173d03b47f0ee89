"""
Synthetic round trip
====================

Generate an organization tree, draw it as a chart bitmap, extract the
network back out of the pixels and compare it with the tree we started
from.

Run with ``python demos/round_trip.py [out_dir]``. When an output
directory is given the chart image, its sidecar and an overlay of the
extracted network are written there.
"""

import sys
from pathlib import Path

from chart2net import labels, pipeline, raster, synthgen
from chart2net.export import render_overlay
from chart2net.synthgen import SynthSpec

# A 25-unit tree with at most 4 children per unit. A third of the leaves
# come without a drawn rectangle and half of all strokes are dashed.
spec = SynthSpec(seed=42, n_units=25, boxed_fraction=0.7, dashed_fraction=0.5)
truth = synthgen.gen_structure(spec)
print("truth:", truth.graph.number_of_nodes(), "units,", truth.graph.number_of_edges(), "reporting lines")

# Rendering lays the tree out top-down and routes every connector as a
# vertical stub, a horizontal bus and one drop per child. Label text is
# not drawn; it travels in the sidecar, as it would from a PDF.
image, sidecar, placed = synthgen.render_chart(truth, spec)
print("image:", image.shape, "with", len(sidecar["boxes"]), "textboxes")

# The pipeline only ever sees the gray image and the textboxes.
boxes = labels.parse_sidecar(sidecar)
result = pipeline.run_pipeline(image, boxes, keep_stages=True)
net = result.network
print("status:", net.status)
for stage, g in result.stages.items():
    print(f"  after {stage:<13} {g.number_of_nodes():4d} nodes {g.number_of_edges():4d} edges")

# Bus junctions stay in the network as unlabeled hubs; scoring reads each
# hub as the parent linked to its children.
score = synthgen.round_trip_score(net, placed)
print("node recall", score.node_recall, "edge recall", score.edge_recall, "exact", score.exact)

print(result.diagnostics)

if len(sys.argv) > 1:
    out = Path(sys.argv[1])
    out.mkdir(parents=True, exist_ok=True)
    raster.write_png(out / "chart.png", image)
    labels.write_sidecar(out / "chart.sidecar.json", boxes)
    render_overlay(image, net, out / "chart.overlay.png", boxes)
    print("wrote", out / "chart.png", "and", out / "chart.overlay.png")
