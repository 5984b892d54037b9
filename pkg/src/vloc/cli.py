"""Command-line interface: evaluation runs, baselines, and manifest export."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import VlocError
from .harness import EvalConfig, emit_report, random_baseline, run_eval, write_per_sample
from .ingest import load_samples, sample_key
from .metrics import report_to_dict
from .scoring import ScoreConfig
from .store import read_store
from .world import Scan, load_scan

_PROTOCOL_NAMES = {"full": "full_scan", "k20": "k_candidate"}


def _add_common_args(parser: argparse.ArgumentParser, stores_required: bool) -> None:
    parser.add_argument("--samples", required=True, help="line-delimited JSON sample file")
    parser.add_argument("--scans", required=True, help="directory of scan JSON documents")
    parser.add_argument("--text-emb", required=stores_required,
                        help="text embedding file keyed by sample key")
    parser.add_argument("--image-emb", required=stores_required,
                        help="image embedding file keyed by view id")
    parser.add_argument("--protocol", choices=sorted(_PROTOCOL_NAMES), default="full",
                        help="full = score every view in the scan; "
                             "k20 = target plus k-1 random distractors")
    parser.add_argument("--k", type=int, default=20, help="candidate count for the k20 protocol")
    parser.add_argument("--seed", type=int, default=0, help="unsigned 64-bit run seed")
    parser.add_argument("--threshold", type=float, default=3.0,
                        help="graph-distance success threshold in meters")
    parser.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=True,
                        help="L2-normalize embeddings before the dot product")
    parser.add_argument("--temperature", type=float, default=1.0,
                        help="logit multiplier applied before softmax")
    parser.add_argument("--out", required=True, help="report output path")
    parser.add_argument("--format", choices=["json", "csv"], default="json")
    parser.add_argument("--per-sample", help="also write per-sample results (JSONL)")
    parser.add_argument("--probs", action="store_true",
                        help="include per-candidate probabilities in per-sample output")
    parser.add_argument("--figures", help="directory for rendered figures")
    parser.add_argument("--figure-samples", type=int, default=4,
                        help="number of per-sample probability maps to render")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vloc",
        description="Localize text descriptions against a building's views and score the results.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="run an embedding-based evaluation")
    _add_common_args(p_eval, stores_required=True)

    p_base = sub.add_parser("baseline", help="run a reference baseline")
    p_base.add_argument("kind", choices=["random"], help="baseline to run")
    _add_common_args(p_base, stores_required=False)

    p_manifest = sub.add_parser(
        "manifest",
        help="export {key, text} lines for producing the text embedding store",
    )
    p_manifest.add_argument("--samples", required=True)
    p_manifest.add_argument("--out", required=True)
    return parser


def _load_scans(scan_dir: str) -> dict[str, Scan]:
    directory = Path(scan_dir)
    if not directory.is_dir():
        raise VlocError(f"--scans must be a directory, got '{scan_dir}'")
    paths = sorted(directory.glob("*.json"))
    if not paths:
        raise VlocError(f"no scan documents (*.json) in '{scan_dir}'")
    scans: dict[str, Scan] = {}
    for path in paths:
        scan = load_scan(path)
        if scan.scan_id in scans:
            raise VlocError(f"duplicate scan_id '{scan.scan_id}' in '{path}'")
        scans[scan.scan_id] = scan
    return scans


def _make_config(args: argparse.Namespace) -> EvalConfig:
    return EvalConfig(
        protocol=_PROTOCOL_NAMES[args.protocol],
        k=args.k,
        seed=args.seed,
        threshold_m=args.threshold,
        score_config=ScoreConfig(normalize=args.normalize, temperature=args.temperature),
    )


def _emit(args: argparse.Namespace, scans, report, outcomes) -> None:
    emit_report(report, None, args.out, format=args.format)
    if args.per_sample:
        write_per_sample(outcomes, args.per_sample, include_probs=args.probs)
    if args.figures:
        from .figures import render_eval_figures

        paths = render_eval_figures(scans, report, outcomes, args.figures,
                                    max_samples=args.figure_samples)
        print(f"wrote {len(paths)} figure(s) to {args.figures}")
    summary = report_to_dict(report)
    err = summary["mean_error_m"]
    print(
        f"{summary['n_samples']} samples: success {summary['success_pct']:.1f}%, "
        f"hits@1 {summary['hits_at_1_pct']:.1f}%, close {summary['close_pct']:.1f}%, "
        f"same room {summary['same_room_pct']:.1f}%, "
        f"error {'n/a' if err is None else f'{err:.2f} m'}, mrr {summary['mrr']:.4f}"
    )
    print(f"wrote {args.out}")


def _cmd_eval(args: argparse.Namespace) -> int:
    scans = _load_scans(args.scans)
    samples = load_samples(args.samples, scans=scans)
    text_store = read_store(args.text_emb)
    image_store = read_store(args.image_emb)
    cfg = _make_config(args)
    keep_probs = bool(args.figures) or args.probs
    report, outcomes = run_eval(samples, scans, text_store, image_store, cfg,
                                keep_probs=keep_probs)
    _emit(args, scans, report, outcomes)
    return 0


def _cmd_baseline(args: argparse.Namespace) -> int:
    scans = _load_scans(args.scans)
    samples = load_samples(args.samples, scans=scans)
    cfg = _make_config(args)
    keep_probs = bool(args.figures) or args.probs
    report, outcomes = random_baseline(samples, scans, cfg, keep_probs=keep_probs)
    _emit(args, scans, report, outcomes)
    return 0


def _cmd_manifest(args: argparse.Namespace) -> int:
    import json

    samples = load_samples(args.samples)
    lines = [json.dumps({"key": sample_key(p), "text": p.text}) for p in samples]
    Path(args.out).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    print(f"wrote {len(lines)} manifest line(s) to {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"eval": _cmd_eval, "baseline": _cmd_baseline, "manifest": _cmd_manifest}
    try:
        return handlers[args.command](args)
    except (VlocError, OSError, ValueError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
