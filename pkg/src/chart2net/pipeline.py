"""
End-to-end chart extraction and batch processing.
"""

from __future__ import annotations

import logging
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import networkx as nx

from . import extract, labels, metrics, raster, simplify
from .labels import OrgNetwork, Textbox

log = logging.getLogger(__name__)

__all__ = [
    "GRAPH_STAGES",
    "PipelineConfig",
    "Extraction",
    "BatchSummary",
    "run_pipeline",
    "resume_pipeline",
    "extract_file",
    "batch",
    "labeled_fraction",
]

IMAGE_SUFFIXES = (".png", ".pgm")
SIDECAR_SUFFIX = ".sidecar.json"
GRAPH_SUFFIX = ".graph.json"
TRUTH_SUFFIX = ".truth.json"
MIN_LABELED_FRACTION = 0.5

# graph-valued stages in execution order; any of them can be dumped and resumed
GRAPH_STAGES = ("graph", "merge", "intersections", "pendants", "boxes", "residual", "contract")


@dataclass(frozen=True)
class PipelineConfig:
    dpi: int = 150
    threshold: int = 128
    closing_radius: int = 2
    header_px: int = 60
    min_gap_rows: int = 20
    min_run: int = 10
    thickness_eps: int = 3
    merge_eps: int = 3
    pendant_delta: int = 8
    rect_tol: int = 3
    contract_box_nodes: bool = False
    match_radius: float = 40.0
    attach_orphans: bool = True
    export_format: str = "json"
    overlay: Optional[str] = None
    seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


@dataclass
class Extraction:
    network: OrgNetwork
    diagnostics: Optional[metrics.DiagnosticsReport]
    config: PipelineConfig
    segments: List[extract.Segment] = field(default_factory=list)
    stages: Dict[str, nx.Graph] = field(default_factory=dict)
    cut_row: Optional[int] = None


def labeled_fraction(g: nx.Graph) -> float:
    """Share of label-bearing candidates that received a label.

    Orphan label-only nodes and unlabeled junctions of degree >= 3 (bus
    hubs, which never carry text) are left out of the count.
    """
    pool = [
        n
        for n, d in g.nodes(data=True)
        if d.get("kind") != "label-only"
        and not (d.get("label") is None and d.get("kind") == "junction" and g.degree(n) >= 3)
    ]
    if not pool:
        return 0.0
    return sum(g.nodes[n].get("label") is not None for n in pool) / len(pool)


def _graph_stage(name: str, g: nx.Graph, cfg: PipelineConfig, size) -> nx.Graph:
    if name == "merge":
        return extract.merge_close_nodes(g, cfg.merge_eps)
    if name == "intersections":
        return extract.insert_intersections(g, cfg.merge_eps)
    if name == "pendants":
        return extract.extend_pendants(g, cfg.pendant_delta, size)
    if name == "boxes":
        return simplify.collapse_boxes(g, simplify.detect_boxes(g, cfg.rect_tol))
    if name == "residual":
        return simplify.remove_residual_cycles(g)
    if name == "contract":
        return simplify.contract_degree2(g, cfg.contract_box_nodes)
    raise ValueError(f"unknown stage {name!r}")


def _finish(g, boxes, cfg, result: Extraction, start_index: int, size, keep_stages) -> Extraction:
    stage = None
    try:
        for stage in GRAPH_STAGES[start_index:]:
            g = _graph_stage(stage, g, cfg, size)
            if keep_stages:
                result.stages[stage] = g
        stage = "labels"
        split = [piece for tb in boxes for piece in labels.split_multiline(tb)]
        net = labels.match_labels(g, split, cfg.match_radius, cfg.attach_orphans)
    except Exception as exc:  # any stage failure still yields a partial result
        log.exception("stage %s failed", stage)
        net = OrgNetwork(g.copy())
        for n in net.graph.nodes:
            net.graph.nodes[n].setdefault("label", None)
        net.fail(f"{stage}: {exc}")
    result.network = net
    if net.ok:
        if net.graph.number_of_nodes() == 0:
            net.fail("empty graph")
        else:
            frac = labeled_fraction(net.graph)
            if frac < MIN_LABELED_FRACTION:
                net.fail(f"labeled fraction {frac:.2f} < {MIN_LABELED_FRACTION}")
    try:
        result.diagnostics = metrics.diagnostics(net.graph) if net.graph.number_of_nodes() else None
    except metrics.ConvergenceError as exc:
        net.warnings.append(f"diagnostics: {exc}")
        if net.ok:
            net.fail(f"metrics: {exc}")
    return result


def run_pipeline(gray, boxes: List[Textbox], config: PipelineConfig = PipelineConfig(), keep_stages: bool = False) -> Extraction:
    """Run every step from a grayscale array and label boxes to a network."""
    cfg = config
    height, width = gray.shape
    result = Extraction(OrgNetwork(nx.Graph()), None, cfg)
    stage = "raster"
    try:
        ink = raster.binarize(gray, cfg.threshold)
        ink = raster.mask_textboxes(ink, boxes)
        ink = raster.close_gaps(ink, cfg.closing_radius)
        ink = raster.strip_header(ink, min(cfg.header_px, height))
        ink, result.cut_row = raster.strip_footer(ink, cfg.min_gap_rows)
        stage = "segments"
        segs = extract.scan_segments(ink, cfg.min_run, cfg.thickness_eps)
        result.segments = segs
        if not segs:
            result.network.fail("no segments")
            return result
        stage = "graph"
        g = extract.segments_to_graph(segs)
    except Exception as exc:
        log.exception("stage %s failed", stage)
        result.network.fail(f"{stage}: {exc}")
        return result
    if keep_stages:
        result.stages["graph"] = g
    return _finish(g, boxes, cfg, result, 1, (width, height), keep_stages)


def resume_pipeline(g: nx.Graph, after_stage: str, boxes: List[Textbox], size: Tuple[int, int], config: PipelineConfig = PipelineConfig(), keep_stages: bool = False) -> Extraction:
    """Continue from a graph dumped after ``after_stage``."""
    index = GRAPH_STAGES.index(after_stage) + 1
    result = Extraction(OrgNetwork(nx.Graph()), None, config)
    return _finish(g, boxes, config, result, index, size, keep_stages)


def extract_file(image_path, sidecar_path, config: PipelineConfig = PipelineConfig(), keep_stages: bool = False) -> Extraction:
    """Extract one chart. I/O and sidecar errors come back as a failed network."""
    try:
        gray = raster.read_image(image_path)
    except (OSError, ValueError) as exc:
        net = OrgNetwork(nx.Graph())
        net.fail(f"image: {exc}")
        return Extraction(net, None, config)
    try:
        boxes = labels.load_sidecar(sidecar_path)
    except (OSError, labels.SidecarError) as exc:
        net = OrgNetwork(nx.Graph())
        net.fail(f"sidecar: {exc}")
        return Extraction(net, None, config)
    return run_pipeline(gray, boxes, config, keep_stages)


@dataclass
class BatchSummary:
    total: int
    succeeded: int
    failed: List[Tuple[str, str]]
    success_rate: float
    aggregate: Dict[str, Dict[str, float]]
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "succeeded": self.succeeded,
            "failed": [{"path": p, "reason": r} for p, r in self.failed],
            "success_rate": self.success_rate,
            "aggregate": self.aggregate,
            "warnings": list(self.warnings),
        }


def _stem(path: Path) -> str:
    name = path.name
    if name.endswith(SIDECAR_SUFFIX):
        return name[: -len(SIDECAR_SUFFIX)]
    return path.stem


def discover(directory) -> List[Tuple[str, Optional[Path], Optional[Path]]]:
    directory = Path(directory)
    images, sidecars = {}, {}
    for p in sorted(directory.iterdir()):
        if p.name.endswith(SIDECAR_SUFFIX):
            sidecars[_stem(p)] = p
        elif p.suffix.lower() in IMAGE_SUFFIXES:
            images.setdefault(p.stem, p)
    stems = sorted(set(images) | set(sidecars))
    return [(s, images.get(s), sidecars.get(s)) for s in stems]


def _process(job):
    stem, image, sidecar, out_dir, cfg_dict = job
    from .export import dump_document, to_document

    cfg = PipelineConfig.from_dict(cfg_dict)
    if image is None or sidecar is None:
        reason = "missing image" if image is None else "missing sidecar"
        return stem, str(image or sidecar), "failed", reason, None
    result = extract_file(image, sidecar, cfg)
    doc = to_document(result.network, result.diagnostics, cfg)
    out = Path(out_dir) / f"{stem}{GRAPH_SUFFIX}"
    out.write_text(dump_document(doc), encoding="utf-8")
    if cfg.overlay:
        from .export import render_overlay

        render_overlay(image, result.network, Path(cfg.overlay) / f"{stem}.overlay.png")
    diag = result.diagnostics.to_dict() if result.diagnostics and result.network.ok else None
    return stem, str(image), result.network.status, result.network.reason, diag


def worker_count(requested: Optional[int] = None) -> int:
    n = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get("CHART2NET_THREADS")
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def batch(directory, config: PipelineConfig = PipelineConfig(), out_dir=None, workers: Optional[int] = 1) -> BatchSummary:
    """Extract every image/sidecar pair in ``directory``.

    Each chart gets a ``<stem>.graph.json`` document in ``out_dir``
    (default: beside the inputs); ``summary.json`` collects the outcome.
    """
    from .export import dump_document

    directory = Path(directory)
    out_dir = Path(out_dir) if out_dir is not None else directory
    out_dir.mkdir(parents=True, exist_ok=True)
    if config.overlay:
        Path(config.overlay).mkdir(parents=True, exist_ok=True)
    jobs = [(stem, img, sc, str(out_dir), config.to_dict()) for stem, img, sc in discover(directory)]
    n = worker_count(workers)
    if n > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(_process, jobs, chunksize=max(1, len(jobs) // (4 * n))))
    else:
        results = [_process(j) for j in jobs]
    results.sort(key=lambda r: r[0])

    failed = [(path, reason) for _, path, status, reason, _ in results if status != "ok"]
    ok_diags = [r[4] for r in results if r[2] == "ok" and r[4]]
    total = len(results)
    succeeded = total - len(failed)
    warnings = []
    if total == 0:
        warnings.append(f"no charts found in {directory}")
    aggregate = {}
    if ok_diags:
        for key in ok_diags[0]:
            values = [float(d[key]) for d in ok_diags]
            aggregate[key] = {"mean": statistics.fmean(values), "median": statistics.median(values)}
    summary = BatchSummary(total, succeeded, failed, succeeded / total if total else 0.0, aggregate, warnings)
    (out_dir / "summary.json").write_text(dump_document(summary.to_dict()), encoding="utf-8")
    return summary
