"""Command line entry point: ``treepose {validate,run,synth,evaluate}``.

Exit codes: 0 success, 1 runtime / I/O failure, 3 unparsable input,
4 invariant violation in the data, 5 bad configuration.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import DataError, TreePoseError
from .evaluation import emit_report, evaluate
from .io import ingest, read_poses, write_hypothesis_file, write_poses
from .pipeline import load_config, run_pipeline
from .synth import synth_scenario

log = logging.getLogger("treepose")

# flag name -> config key; None values are ignored when merging
_OVERRIDES = {
    "alpha": float,
    "sigma": float,
    "theta": float,
    "lambda_s": float,
    "lambda_c": float,
    "lambda_T": float,
    "window_length": int,
    "hyps_per_part": int,
    "tracklets_per_part": int,
    "coupled_cap": int,
    "limb_c": float,
    "pcp_threshold": float,
    "workers": int,
}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON configuration file.")
    for name, kind in _OVERRIDES.items():
        flag = "--" + name.replace("_", "-")
        p.add_argument(flag, dest=name, type=kind, default=None, help=f"Override '{name}'.")
    p.add_argument("--no-limbs", action="store_true", help="Skip limb alignment and refinement.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treepose", description="Tree-structured video pose estimation.")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log stage timings and progress.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="Parse and check a hypothesis file.")
    p.add_argument("input", type=Path)

    p = sub.add_parser("run", help="Estimate poses for every window of a hypothesis file.")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True, help="Pose sequence output (JSON).")
    p.add_argument("--timings", type=Path, help="Write per-window stage timings (JSON) here.")
    p.add_argument("--report", type=Path, help="Evaluate against the file's ground truth and write the report.")
    p.add_argument("--format", choices=("table", "json"), default="table")
    _add_config_flags(p)

    p = sub.add_parser("synth", help="Write a synthetic scenario with planted ground truth.")
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--frames", type=int, default=15)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--distractors", type=int, default=19)
    p.add_argument("--swap-rate", type=float, default=0.0)
    p.add_argument("--margin", type=float, default=0.3)
    p.add_argument("--reference-noise", type=float, default=1.0)
    p.add_argument("--reference-swap-rate", type=float, default=0.0)
    p.add_argument("--coincident", action="store_true")

    p = sub.add_parser("evaluate", help="Score a pose file against ground truth.")
    p.add_argument("poses", type=Path)
    p.add_argument("truth", type=Path, help="Hypothesis file carrying a ground-truth block.")
    p.add_argument("--pcp-threshold", type=float, default=0.5)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("-o", "--output", type=Path, help="Write the report here instead of stdout.")
    return parser


def _cmd_validate(args) -> int:
    data = ingest(args.input)
    h = data.header
    print(
        f"{args.input}: ok, {h.frames} frames, {len(data.hypotheses)} hypotheses, "
        f"reference={'yes' if data.reference is not None else 'no'}, "
        f"ground truth={'yes' if data.truth is not None else 'no'}"
    )
    return 0


def _cmd_run(args) -> int:
    overrides = {name: getattr(args, name) for name in _OVERRIDES}
    if args.no_limbs:
        overrides["limbs"] = False
    config = load_config(args.config, overrides)
    data = ingest(args.input)
    result = run_pipeline(data, config)
    pose = result.pose
    write_poses(pose, args.output)
    if args.timings is not None:
        args.timings.write_text(json.dumps(result.timings, indent=1) + "\n")
    if args.report is not None:
        if data.truth is None:
            raise DataError(f"{args.input}: no ground truth to evaluate against")
        emit_report(evaluate(pose, data.truth, config.pcp_threshold), args.format, args.report)
    return 0


def _cmd_synth(args) -> int:
    data = synth_scenario(
        args.seed,
        args.frames,
        args.noise,
        args.distractors,
        args.swap_rate,
        margin=args.margin,
        reference_noise=args.reference_noise,
        reference_swap_rate=args.reference_swap_rate,
        coincident=args.coincident,
    )
    write_hypothesis_file(data, args.output)
    return 0


def _cmd_evaluate(args) -> int:
    pose = read_poses(args.poses)
    truth = ingest(args.truth).truth
    if truth is None:
        raise DataError(f"{args.truth}: no ground truth block")
    text = emit_report(evaluate(pose, truth, args.pcp_threshold), args.format, args.output)
    if args.output is None:
        sys.stdout.write(text)
    return 0


_COMMANDS = {
    "validate": _cmd_validate,
    "run": _cmd_run,
    "synth": _cmd_synth,
    "evaluate": _cmd_evaluate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return _COMMANDS[args.command](args)
    except TreePoseError as exc:
        print(f"treepose: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        # range checks in library code outside the error hierarchy
        print(f"treepose: error: {exc}", file=sys.stderr)
        return 5
    except OSError as exc:
        print(f"treepose: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
