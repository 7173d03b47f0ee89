"""
One chart, step by step
=======================

The same steps ``run_pipeline`` performs, called one at a time on a tiny
hand-drawn chart: a head office box above two department boxes.
"""

import numpy as np

from chart2net import extract, labels, raster, simplify
from chart2net.labels import Textbox

# White page, 2 px black strokes.
page = np.full((220, 260), 255, np.uint8)


def rect(x0, y0, x1, y1):
    page[y0 : y0 + 2, x0 : x1 + 1] = 0
    page[y1 - 1 : y1 + 1, x0 : x1 + 1] = 0
    page[y0 : y1 + 1, x0 : x0 + 2] = 0
    page[y0 : y1 + 1, x1 - 1 : x1 + 1] = 0


rect(100, 20, 160, 50)  # head office
rect(20, 140, 80, 170)  # sales
rect(180, 140, 240, 170)  # research
page[51:95, 130:132] = 0  # stub
page[94:96, 50:211] = 0  # bus
page[94:140, 50:52] = 0  # drops
page[94:140, 210:212] = 0
# a dashed gap in the right drop, 3 px wide
page[110:113, 210:212] = 255

boxes = [
    Textbox("Head office", 106, 26, 48, 18),
    Textbox("Sales", 26, 146, 48, 18),
    Textbox("Research", 186, 146, 48, 18),
]

ink = raster.binarize(page)
ink = raster.mask_textboxes(ink, boxes)
print("ink pixels:", ink.sum())

# Closing with radius 2 bridges any gap up to 4 px.
closed = raster.close_gaps(ink, 2)
print("pixels added by closing:", int(closed.sum() - ink.sum()))

segments = extract.scan_segments(closed, min_run=10)
print(extract.format_segments(segments), end="")

g = extract.segments_to_graph(segments)
g = extract.merge_close_nodes(g, 3)
g = extract.insert_intersections(g, 3)
g = extract.extend_pendants(g, 8, (page.shape[1], page.shape[0]))
print("line graph:", g.number_of_nodes(), "nodes", g.number_of_edges(), "edges")

found = simplify.detect_boxes(g)
for b in found:
    print("box at", b.rect, "centroid", b.centroid, "members", len(b.members))
g = simplify.collapse_boxes(g, found)
g = simplify.remove_residual_cycles(g)
g = simplify.contract_degree2(g)
print("simplified:", sorted(g.edges))

net = labels.match_labels(g, boxes)
for n, d in sorted(net.graph.nodes(data=True)):
    print(f"  node {n}: {d['kind']:<9} label={d['label']!r} at ({d['x']}, {d['y']})")
print("warnings:", net.warnings)
