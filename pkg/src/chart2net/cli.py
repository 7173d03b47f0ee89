"""Command line entry point: ``chart2net {extract,batch,synth,diag,overlay}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

from . import export, labels, metrics, pipeline, raster, synthgen
from .extract import format_segments
from .pipeline import GRAPH_STAGES, PipelineConfig

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    defaults = PipelineConfig()
    for f in fields(PipelineConfig):
        flag = "--" + f.name.replace("_", "-")
        default = getattr(defaults, f.name)
        if f.name == "export_format":
            p.add_argument(flag, choices=export.FORMATS, default=default)
        elif isinstance(default, bool):
            p.add_argument(flag, action=argparse.BooleanOptionalAction, default=default)
        elif f.name == "overlay":
            p.add_argument(flag, default=None, metavar="PATH")
        else:
            p.add_argument(flag, type=type(default), default=default)


def _config(args) -> PipelineConfig:
    return PipelineConfig(**{f.name: getattr(args, f.name) for f in fields(PipelineConfig)})


def _range(text: str):
    lo, _, hi = text.partition("-")
    lo, hi = int(lo), int(hi or lo)
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def cmd_extract(args) -> int:
    cfg = _config(args)
    if args.resume_from:
        dump = export.load_document(args.resume_from)
        boxes = labels.load_sidecar(args.sidecar)
        height, width = raster.read_image(args.image).shape
        size = tuple(dump.get("image_size") or (width, height))
        result = pipeline.resume_pipeline(export.graph_from_document(dump), dump["stage"], boxes, size, cfg)
    else:
        result = pipeline.extract_file(args.image, args.sidecar, cfg, keep_stages=bool(args.dump_stage))
    if args.dump_segments:
        Path(args.dump_segments).write_text(format_segments(result.segments), encoding="utf-8")
    if args.dump_stage:
        g = result.stages.get(args.dump_stage)
        if g is None:
            print(f"stage {args.dump_stage!r} was not reached", file=sys.stderr)
        else:
            height, width = raster.read_image(args.image).shape
            stage_net = labels.OrgNetwork(g)
            doc = export.to_document(stage_net, None, cfg, stage=args.dump_stage, image_size=[width, height])
            out = args.dump_out or f"{Path(args.image).stem}.{args.dump_stage}.json"
            Path(out).write_text(export.dump_document(doc), encoding="utf-8")
    text = export.export(result.network, cfg.export_format, None, result.diagnostics, cfg)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if cfg.overlay:
        boxes = labels.load_sidecar(args.sidecar)
        export.render_overlay(args.image, result.network, cfg.overlay, boxes)
    if not result.network.ok:
        print(f"{args.image}: failed: {result.network.reason}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def cmd_batch(args) -> int:
    cfg = _config(args)
    summary = pipeline.batch(args.directory, cfg, args.out, args.workers)
    doc = summary.to_dict()
    if args.score:
        doc["round_trip"] = _score_dir(args.directory, args.out or args.directory)
        out = Path(args.out or args.directory) / "summary.json"
        out.write_text(export.dump_document(doc), encoding="utf-8")
    print(f"{summary.succeeded}/{summary.total} charts extracted (success rate {summary.success_rate:.3f})")
    for w in summary.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if args.strict and summary.failed:
        return EXIT_FAILED
    return EXIT_OK


def _score_dir(directory, out_dir):
    scores = []
    for truth_path in sorted(Path(directory).glob(f"*{pipeline.TRUTH_SUFFIX}")):
        stem = truth_path.name[: -len(pipeline.TRUTH_SUFFIX)]
        graph_path = Path(out_dir) / f"{stem}{pipeline.GRAPH_SUFFIX}"
        if not graph_path.exists():
            continue
        truth = synthgen.truth_from_document(export.load_document(truth_path))
        net = export.network_from_document(export.load_document(graph_path))
        scores.append(synthgen.round_trip_score(net, truth))
    if not scores:
        return {"charts": 0}
    return {
        "charts": len(scores),
        "exact_rate": sum(s.exact for s in scores) / len(scores),
        "mean_node_recall": sum(s.node_recall for s in scores) / len(scores),
        "mean_edge_recall": sum(s.edge_recall for s in scores) / len(scores),
    }


def cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lo_seed, hi_seed = args.seeds
    lo_n, hi_n = args.n_units
    for seed in range(lo_seed, hi_seed + 1):
        spec = synthgen.SynthSpec(
            seed=seed,
            n_units=synthgen.n_units_for_seed(seed, lo_n, hi_n),
            branching=args.branching,
            boxed_fraction=args.boxed_fraction,
            dashed_fraction=args.dashed_fraction,
            dash_on=args.dash_on,
            dash_off=args.dash_off,
            line_px=args.line_px,
            dpi=args.dpi,
            rasterize_labels=args.rasterize_labels,
        )
        synthgen.write_chart(out, f"chart_{seed:04d}", spec, args.image_format)
    print(f"wrote {hi_seed - lo_seed + 1} charts to {out}")
    return EXIT_OK


def cmd_diag(args) -> int:
    doc = export.load_document(args.document)
    report = metrics.diagnostics(export.graph_from_document(doc))
    sys.stdout.write(export.dump_document(report.to_dict()))
    return EXIT_OK


def cmd_overlay(args) -> int:
    net = export.network_from_document(export.load_document(args.document))
    boxes = labels.load_sidecar(args.sidecar) if args.sidecar else ()
    export.render_overlay(args.image, net, args.output, boxes)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chart2net", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract one chart")
    p.add_argument("image")
    p.add_argument("sidecar")
    p.add_argument("-o", "--output")
    p.add_argument("--dump-stage", choices=GRAPH_STAGES)
    p.add_argument("--dump-out", metavar="PATH")
    p.add_argument("--resume-from", metavar="DUMP", help="continue from a --dump-stage document")
    p.add_argument("--dump-segments", metavar="PATH", help="write detected segments as 'H perp lo hi' lines")
    _add_config_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("batch", help="extract every image/sidecar pair in a directory")
    p.add_argument("directory")
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--strict", action="store_true", help="exit 1 if any chart failed")
    p.add_argument("--score", action="store_true", help="score against <stem>.truth.json files")
    _add_config_flags(p)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("synth", help="generate synthetic charts with ground truth")
    p.add_argument("--out", required=True)
    p.add_argument("--seeds", type=_range, default=(1, 10), metavar="LO-HI")
    p.add_argument("--n-units", type=_range, default=(3, 60), metavar="LO-HI")
    p.add_argument("--branching", type=int, default=4)
    p.add_argument("--boxed-fraction", type=float, default=1.0)
    p.add_argument("--dashed-fraction", type=float, default=0.0)
    p.add_argument("--dash-on", type=int, default=4)
    p.add_argument("--dash-off", type=int, default=3)
    p.add_argument("--line-px", type=int, default=2)
    p.add_argument("--dpi", type=int, default=150)
    p.add_argument("--rasterize-labels", action="store_true")
    p.add_argument("--image-format", choices=("png", "pgm"), default="png")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("diag", help="diagnostics of an existing graph document")
    p.add_argument("document")
    p.set_defaults(func=cmd_diag)

    p = sub.add_parser("overlay", help="draw a graph document over its chart image")
    p.add_argument("image")
    p.add_argument("document")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--sidecar")
    p.set_defaults(func=cmd_overlay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, labels.SidecarError, json.JSONDecodeError, KeyError) as exc:
        print(f"chart2net: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"chart2net: error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
