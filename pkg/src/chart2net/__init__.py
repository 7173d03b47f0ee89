"""Reconstruct labeled organization networks from org-chart images."""

from .extract import Segment
from .labels import OrgNetwork, Textbox
from .metrics import DiagnosticsReport, diagnostics
from .pipeline import BatchSummary, PipelineConfig, batch, extract_file, run_pipeline
from .synthgen import GroundTruth, SynthSpec, gen_structure, render_chart, round_trip_score

__all__ = [
    "Segment",
    "OrgNetwork",
    "Textbox",
    "DiagnosticsReport",
    "diagnostics",
    "BatchSummary",
    "PipelineConfig",
    "batch",
    "extract_file",
    "run_pipeline",
    "GroundTruth",
    "SynthSpec",
    "gen_structure",
    "render_chart",
    "round_trip_score",
]

__version__ = "0.1.0"
