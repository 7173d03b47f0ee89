import json
import xml.etree.ElementTree as ET

import networkx as nx
import numpy as np
import pytest
from PIL import Image

from chart2net import export, labels, pipeline, synthgen
from chart2net.labels import OrgNetwork
from chart2net.pipeline import PipelineConfig
from chart2net.synthgen import SynthSpec


def p2():
    g = nx.Graph()
    g.add_node(7, x=10, y=20, kind="box", label="A")
    g.add_node(3, x=30, y=40, kind="box", label="B")
    g.add_edge(7, 3)
    return OrgNetwork(g)


class TestDocument:
    def test_empty_network(self):
        doc = export.to_document(OrgNetwork(nx.Graph()))
        assert doc["status"] == "ok" and doc["nodes"] == [] and doc["edges"] == []
        assert list(doc) == ["status", "warnings", "config", "nodes", "edges", "diagnostics"]

    def test_p2_order(self):
        doc = export.to_document(p2())
        assert [n["id"] for n in doc["nodes"]] == [3, 7]
        assert doc["edges"] == [{"source": 3, "target": 7}]

    def test_failed_reason_and_config(self):
        net = p2()
        net.fail("labeled fraction 0.00 < 0.5")
        doc = export.to_document(net, config=PipelineConfig())
        assert doc["reason"] == "labeled fraction 0.00 < 0.5"
        assert doc["config"]["closing_radius"] == 2

    def test_round_trip(self):
        net = p2()
        net.warnings.append("w")
        back = export.network_from_document(json.loads(export.dump_document(export.to_document(net))))
        assert back.warnings == ["w"]
        assert sorted(back.graph.nodes(data=True)) == sorted(net.graph.nodes(data=True))
        assert sorted(map(sorted, back.graph.edges)) == [[3, 7]]

    def test_byte_identical_reruns(self):
        spec = SynthSpec(seed=12, n_units=30, boxed_fraction=0.7, dashed_fraction=0.5)
        img, sidecar, _ = synthgen.render_chart(synthgen.gen_structure(spec), spec)
        boxes = labels.parse_sidecar(sidecar)
        texts = set()
        for _ in range(3):
            res = pipeline.run_pipeline(img, boxes)
            for fmt in export.FORMATS:
                texts.add((fmt, export.export(res.network, fmt, None, res.diagnostics, res.config)))
        assert len(texts) == len(export.FORMATS)


class TestFormats:
    def test_graphml_attributes(self):
        root = ET.fromstring(export.to_graphml(p2()))
        ns = {"g": "http://graphml.graphdrawing.org/xmlns"}
        keys = {k.get("id"): k.get("attr.name") for k in root.findall("g:key", ns)}
        nodes = {}
        for node in root.iter("{http://graphml.graphdrawing.org/xmlns}node"):
            nodes[node.get("id")] = {keys[d.get("key")]: d.text for d in node.findall("g:data", ns)}
        assert nodes["7"]["label"] == "A" and nodes["7"]["x"] == "10" and nodes["7"]["y"] == "20"
        assert len(list(root.iter("{http://graphml.graphdrawing.org/xmlns}edge"))) == 1

    def test_graphml_unlabeled_gets_auto_id(self):
        g = nx.Graph()
        g.add_node(5, x=1, y=2, kind="junction", label=None)
        assert "n5" in export.to_graphml(OrgNetwork(g))

    def test_dot(self):
        text = export.to_dot(p2())
        assert text.startswith("graph org {")
        assert '7 [label="A", x=10, y=20' in text
        assert "3 -- 7;" in text

    def test_dot_quotes_labels(self):
        g = nx.Graph()
        g.add_node(0, x=0, y=0, kind="box", label='Say "hi"')
        assert r'label="Say \"hi\""' in export.to_dot(OrgNetwork(g))

    def test_unknown_format(self):
        with pytest.raises(ValueError, match="unknown export format"):
            export.export(p2(), "csv")

    def test_writes_file(self, tmp_path):
        text = export.export(p2(), "dot", tmp_path / "g.dot")
        assert (tmp_path / "g.dot").read_text(encoding="utf-8") == text


class TestOverlay:
    def test_empty_network_is_dimmed_image(self, tmp_path):
        img = np.full((20, 30), 255, np.uint8)
        img[5, :] = 0
        export.render_overlay(img, OrgNetwork(nx.Graph()), tmp_path / "o.png")
        out = np.asarray(Image.open(tmp_path / "o.png"))
        assert out.shape == (20, 30, 3)
        assert (out[0] == 255).all()
        assert (out[5] == 178).all()

    def test_single_disc(self, tmp_path):
        g = nx.Graph()
        g.add_node(0, x=15, y=10, kind="box", label="A")
        export.render_overlay(np.full((20, 30), 255, np.uint8), OrgNetwork(g), tmp_path / "o.png", disc_radius=3)
        out = np.asarray(Image.open(tmp_path / "o.png")).astype(int)
        ys, xs = np.nonzero((np.abs(out - 255).sum(axis=2)) > 0)
        assert (xs.min() + xs.max()) / 2 == 15 and (ys.min() + ys.max()) / 2 == 10
        assert xs.max() - xs.min() <= 6

    def test_synth_overlay_one_disc_per_cell(self, tmp_path):
        spec = SynthSpec(seed=5, n_units=15)
        img, sidecar, truth = synthgen.render_chart(synthgen.gen_structure(spec), spec)
        res = pipeline.run_pipeline(img, labels.parse_sidecar(sidecar))
        export.render_overlay(img, res.network, tmp_path / "o.png")
        assert (tmp_path / "o.png").exists()
        g = res.network.graph
        for u, (x0, y0, x1, y1) in truth.cells.items():
            inside = [n for n in g if x0 <= g.nodes[n]["x"] <= x1 and y0 <= g.nodes[n]["y"] <= y1]
            assert len(inside) == 1, u
