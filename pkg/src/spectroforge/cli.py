"""Command-line entry points for corpus runs and analysis reports.

Exit codes: 0 when a run completes (even with per-file error entries in the
manifest), 1 for invalid configuration, unusable arguments, or an empty
input directory.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .audio import AudioFormatError
from .pipeline import (AugmentConfig, formant_stats_csv, inspect_report_csv,
                       run_augment, run_featurize, run_formant_stats,
                       run_inspect)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file with AugmentConfig fields")
    parser.add_argument("--preset", help="augmentation preset name")
    parser.add_argument("--seed", type=int, help="global random seed")
    parser.add_argument("--copies", type=int, help="augmented copies per utterance")
    parser.add_argument("--jobs", type=int,
                        help="parallel workers (default: $SPECTROFORGE_JOBS or 1)")


def _build_config(args) -> AugmentConfig:
    config = AugmentConfig.from_json_file(args.config) if args.config else AugmentConfig()
    overrides = {}
    if args.preset is not None:
        overrides["preset_name"] = args.preset
    if args.seed is not None:
        overrides["global_seed"] = args.seed
    if getattr(args, "copies", None) is not None:
        overrides["augment_copies"] = args.copies
    if args.jobs is not None:
        overrides["jobs"] = args.jobs
    return dataclasses.replace(config, **overrides) if overrides else config


def _write_or_print(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectroforge",
        description="Spectral augmentation of speech corpora: segmental LPC "
                    "envelope warping, formant-energy perturbation, and "
                    "baseline warps, producing log-mel feature archives.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("featurize", help="plain log-mel features for a corpus")
    p.add_argument("--in", dest="input_dir", required=True, help="directory of WAV files")
    p.add_argument("--out", dest="output_dir", required=True, help="output directory")
    _add_common(p)

    p = sub.add_parser("augment", help="augmented feature copies for a corpus")
    p.add_argument("--in", dest="input_dir", required=True, help="directory of WAV files")
    p.add_argument("--out", dest="output_dir", required=True, help="output directory")
    _add_common(p)

    p = sub.add_parser("inspect", help="single-frame report of the whole chain")
    p.add_argument("--in", dest="audio_path", required=True, help="WAV file")
    p.add_argument("--frame", type=int, required=True, help="frame index")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", dest="out_path", help="write report here instead of stdout")
    _add_common(p)

    p = sub.add_parser("formant-stats",
                       help="F1-F3 statistics of two corpora and their ratios")
    p.add_argument("--in-a", dest="corpus_a", required=True, help="reference corpus")
    p.add_argument("--in-b", dest="corpus_b", required=True, help="comparison corpus")
    p.add_argument("--out", dest="out_path", help="write CSV here instead of stdout")
    _add_common(p)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _build_config(args)
        if args.command in ("featurize", "augment"):
            runner = run_featurize if args.command == "featurize" else run_augment
            manifest = runner(config, args.input_dir, args.output_dir)
            ok = manifest.count("ok")
            degenerate = manifest.count("skipped-degenerate")
            errors = manifest.count("error")
            print(f"{args.command}: {ok} ok, {degenerate} skipped-degenerate, "
                  f"{errors} error -> {args.output_dir}/manifest.jsonl")
        elif args.command == "inspect":
            report = run_inspect(config, args.audio_path, args.frame)
            if args.format == "csv":
                _write_or_print(inspect_report_csv(report), args.out_path)
            else:
                _write_or_print(json.dumps(report, indent=2) + "\n", args.out_path)
        else:
            stats = run_formant_stats(config, args.corpus_a, args.corpus_b)
            _write_or_print(formant_stats_csv(stats), args.out_path)
    except (ValueError, AudioFormatError, OSError, json.JSONDecodeError,
            TypeError) as exc:
        print(f"spectroforge: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
