"""End-to-end acceptance checks.

Every test prints a single ``PASS``/``FAIL`` line naming its criterion and
the measured numbers, then asserts. Run on its own with::

    python -m pytest tests/test_acceptance.py -v -s
"""

import random
import time
from itertools import combinations

import networkx as nx
import numpy as np
import pytest

from chart2net import extract, labels, metrics, pipeline, raster, simplify, synthgen
from chart2net.synthgen import SynthSpec
from conftest import write_corpus
from oracles import (
    all_graphs,
    avg_shortest_path_bf,
    closing_1d,
    clustering_bf,
    components_bf,
    density_bf,
    gaps,
    lambda2_charpoly,
    random_graph,
)

SEEDS = range(1, 201)
MIXED = dict(boxed_fraction=0.7, dashed_fraction=0.5, dash_on=4, dash_off=3)

pytestmark = pytest.mark.slow


@pytest.fixture
def report(capsys):
    def emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
        return ok

    return emit


def round_trip(seed, **style):
    spec = SynthSpec(seed=seed, n_units=synthgen.n_units_for_seed(seed), **style)
    img, sidecar, truth = synthgen.render_chart(synthgen.gen_structure(spec), spec)
    res = pipeline.run_pipeline(img, labels.parse_sidecar(sidecar))
    return synthgen.round_trip_score(res.network, truth)


def test_1_round_trip_exactness(report):
    t0 = time.perf_counter()
    solid = [round_trip(s) for s in SEEDS]
    mixed = [round_trip(s, **MIXED) for s in SEEDS]
    elapsed = time.perf_counter() - t0
    solid_exact = sum(s.exact for s in solid) / len(solid)
    mixed_exact = sum(s.exact for s in mixed) / len(mixed)
    mixed_recall = sum(s.edge_recall for s in mixed) / len(mixed)
    ok = solid_exact >= 0.98 and mixed_exact >= 0.90 and mixed_recall >= 0.99 and elapsed < 60
    report(
        "1 round-trip exactness",
        ok,
        f"solid exact {solid_exact:.3f} (>=0.98); dashed/unboxed exact {mixed_exact:.3f} (>=0.90), "
        f"mean edge recall {mixed_recall:.4f} (>=0.99); {elapsed:.1f}s for 400 charts (<60s)",
    )
    assert ok


def test_2_morphology_oracle(report):
    rng = np.random.default_rng(20240202)
    mismatches = wrong_gaps = checked_gaps = 0
    for _ in range(1000):
        n = int(rng.integers(1, 81))
        radius = int(rng.integers(1, 5))
        bits = (rng.random(n) < rng.uniform(0.2, 0.8)).tolist()
        out = raster.close_gaps(np.array([bits], bool), radius)[0].tolist()
        mismatches += out != closing_1d(bits, radius)
        for start, length in gaps(bits):
            checked_gaps += 1
            wrong_gaps += all(out[start : start + length]) != (length <= 2 * radius)
    ok = mismatches == 0 and wrong_gaps == 0
    report(
        "2 morphology oracle",
        ok,
        f"{mismatches} mismatches against brute-force closing in 1000 strings; "
        f"{wrong_gaps} of {checked_gaps} gaps violate the <=2r closed / >2r open rule",
    )
    assert ok


def _rect_segments(img, x0, y0, x1, y1):
    img[y0 : y0 + 2, x0 : x1 + 1] = True
    img[y1 - 1 : y1 + 1, x0 : x1 + 1] = True
    img[y0 : y1 + 1, x0 : x0 + 2] = True
    img[y0 : y1 + 1, x1 - 1 : x1 + 1] = True


def _after_boxes(ink):
    """Graph after box collapse, traced from a drawn binary image."""
    cfg = pipeline.PipelineConfig()
    g = extract.segments_to_graph(extract.scan_segments(ink, cfg.min_run, cfg.thickness_eps))
    g = extract.merge_close_nodes(g, cfg.merge_eps)
    g = extract.insert_intersections(g, cfg.merge_eps)
    g = extract.extend_pendants(g, cfg.pendant_delta, ink.shape[::-1])
    return simplify.collapse_boxes(g, simplify.detect_boxes(g, cfg.rect_tol))


def _box_nodes(g):
    return [n for n, d in g.nodes(data=True) if d["kind"] == "box"]


def test_3_box_scenarios(report):
    results = {}

    ink = np.zeros((200, 200), bool)
    _rect_segments(ink, 40, 40, 120, 80)
    ink[81:150, 80:82] = True  # line leaving the bottom side
    g = _after_boxes(ink)
    (b,) = _box_nodes(g)
    results["connected to the inside area"] = g.number_of_nodes() == 2 and g.degree(b) == 1

    ink = np.zeros((200, 260), bool)
    _rect_segments(ink, 40, 40, 120, 80)
    _rect_segments(ink, 119, 40, 200, 80)  # shares the x=119..120 side
    g = _after_boxes(ink)
    boxes = _box_nodes(g)
    results["shared edge"] = len(boxes) == 2 and g.number_of_nodes() == 2 and g.number_of_edges() == 1

    ink = np.zeros((200, 200), bool)
    _rect_segments(ink, 40, 40, 120, 80)
    g = _after_boxes(ink)
    results["no outside connection"] = len(_box_nodes(g)) == 1 and g.number_of_nodes() == 1 and g.number_of_edges() == 0

    ok = all(results.values())
    report("3 box scenarios", ok, "; ".join(f"{k}: {'ok' if v else 'WRONG'}" for k, v in results.items()))
    assert ok


def test_4_contraction_postcondition(report):
    violations = component_changes = contracted = 0
    for seed in range(1001, 1101):
        style = MIXED if seed % 2 else {}
        spec = SynthSpec(seed=seed, n_units=synthgen.n_units_for_seed(seed), **style)
        img, sidecar, _ = synthgen.render_chart(synthgen.gen_structure(spec), spec)
        res = pipeline.run_pipeline(img, labels.parse_sidecar(sidecar), keep_stages=True)
        before, after = res.stages["residual"], res.stages["contract"]
        contracted += before.number_of_nodes() - after.number_of_nodes()
        component_changes += nx.number_connected_components(before) != nx.number_connected_components(after)
        for n, d in after.nodes(data=True):
            if d["kind"] == "junction" and after.degree(n) == 2:
                a, b = after.neighbors(n)
                violations += not after.has_edge(a, b)
    ok = violations == 0 and component_changes == 0
    report(
        "4 degree-2 contraction",
        ok,
        f"{violations} unprotected degree-2 junctions, {component_changes} component-count changes "
        f"over 100 extractions ({contracted} nodes contracted)",
    )
    assert ok


def _graph(nodes, edges):
    g = nx.Graph()
    g.add_nodes_from(nodes)
    g.add_edges_from(edges)
    return g


def test_5_metrics_oracles(report):
    failures = []
    n_graphs = 0
    for n in range(0, 5):
        for nodes, edges in all_graphs(n):
            n_graphs += 1
            g = _graph(nodes, edges)
            if metrics.density(g) != density_bf(nodes, edges):
                failures.append(("density", nodes, edges))
            if metrics.avg_clustering(g) != clustering_bf(nodes, edges):
                failures.append(("clustering", nodes, edges))
            if metrics.avg_shortest_path(g) != avg_shortest_path_bf(nodes, edges):
                failures.append(("shortest path", nodes, edges))
            if n == 0:
                continue
            lam = metrics.algebraic_connectivity(g)
            if abs(lam - lambda2_charpoly(nodes, edges)) > 1e-6:
                failures.append(("lambda2", nodes, edges))
            if len(components_bf(nodes, edges)) > 1 and abs(lam) > 1e-9:
                failures.append(("lambda2 disconnected", nodes, edges))
    rng = np.random.default_rng(77)
    for _ in range(100):
        nodes, edges = random_graph(rng, 7)
        g = _graph(nodes, edges)
        for name, got, want in [
            ("density", metrics.density(g), density_bf(nodes, edges)),
            ("clustering", metrics.avg_clustering(g), clustering_bf(nodes, edges)),
            ("shortest path", metrics.avg_shortest_path(g), avg_shortest_path_bf(nodes, edges)),
        ]:
            if got != want:
                failures.append((name, nodes, edges))
        if len(components_bf(nodes, edges)) > 1 and abs(metrics.algebraic_connectivity(g)) > 1e-9:
            failures.append(("lambda2 disconnected", nodes, edges))
    fixed = {"P3": (nx.path_graph(3), 1.0), "K3": (nx.complete_graph(3), 3.0), "K1,3": (nx.star_graph(3), 1.0)}
    for name, (g, want) in fixed.items():
        if abs(metrics.algebraic_connectivity(g) - want) > 1e-6:
            failures.append(("lambda2 " + name, list(g.nodes), list(g.edges)))
    ok = not failures
    report(
        "5 metrics oracles",
        ok,
        f"{n_graphs} exhaustive graphs (n<=4) + 100 random (n<=7) + P3/K3/K1,3: {len(failures)} disagreements"
        + (f", first {failures[0]}" if failures else ""),
    )
    assert ok


def test_6_batch_determinism(tmp_path, report):
    src = tmp_path / "corpus"
    src.mkdir()
    write_corpus(src, SEEDS, **MIXED)
    a = pipeline.batch(src, out_dir=tmp_path / "serial", workers=1)
    b = pipeline.batch(src, out_dir=tmp_path / "parallel", workers=8)
    names = sorted(p.name for p in (tmp_path / "serial").iterdir())
    differing = [
        n for n in names if (tmp_path / "serial" / n).read_bytes() != (tmp_path / "parallel" / n).read_bytes()
    ]
    same_listing = names == sorted(p.name for p in (tmp_path / "parallel").iterdir())
    ok = a.to_dict() == b.to_dict() and not differing and same_listing and a.total == 200
    report(
        "6 batch determinism",
        ok,
        f"{len(names)} files compared, {len(differing)} differ; summaries "
        f"{'identical' if a.to_dict() == b.to_dict() else 'DIFFER'} (success rate {a.success_rate:.3f})",
    )
    assert ok


def _fuzz_graph(rng):
    n = rng.randint(1, 40)
    g = nx.Graph()
    span = rng.choice([10, 40, 200])
    kinds = ["junction"] * 6 + ["box"]
    for i in range(n):
        g.add_node(i, x=rng.randint(0, span), y=rng.randint(0, span), kind=rng.choice(kinds))
    p = rng.uniform(0.0, 0.3)
    g.add_edges_from((a, b) for a, b in combinations(range(n), 2) if rng.random() < p)
    return g


def _same(a, b):
    return sorted(a.nodes(data=True)) == sorted(b.nodes(data=True)) and sorted(map(sorted, a.edges)) == sorted(
        map(sorted, b.edges)
    )


def test_7_fixpoint_safety(report):
    rng = random.Random(4242)
    merge_bad = contract_bad = 0
    for _ in range(1000):
        g = _fuzz_graph(rng)
        m = extract.merge_close_nodes(g, 3)
        merge_bad += not _same(extract.merge_close_nodes(m, 3), m)
        flag = rng.random() < 0.5
        c = simplify.contract_degree2(g, flag)
        contract_bad += not _same(simplify.contract_degree2(c, flag), c)
    ok = merge_bad == 0 and contract_bad == 0
    report(
        "7 fixpoint safety",
        ok,
        f"1000 fuzz graphs: merge not idempotent on {merge_bad}, contraction not idempotent on {contract_bad}",
    )
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
