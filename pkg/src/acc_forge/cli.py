"""``acc-forge`` command line.

Exit codes: 0 on success, 2 for bad or missing inputs, 1 when inference
requests failed. Errors are printed to stderr as one JSON object prefixed
with ``error:``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import harness
from .errors import AccForgeError


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with default settings")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--parallelism", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="acc-forge", description="Build edit-pair audio datasets and score caption predictions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-pairs", parents=[common], help="sample triples and render six edit pairs each")
    p.add_argument("--bases", help="base caption manifest (JSONL)")
    p.add_argument("--events", help="event library taxonomy (JSONL)")
    p.add_argument("--triples", type=int)
    p.add_argument("--snr-min", type=float)
    p.add_argument("--snr-max", type=float)

    p = sub.add_parser("derive-acc", parents=[common], help="add commonality captions to an edit-pair manifest")
    p.add_argument("--pairs")
    p.add_argument("--min-length", type=int)

    p = sub.add_parser("emit-manifests", parents=[common], help="write AC/ADC/ACC sample files per split")
    p.add_argument("--pairs")
    p.add_argument("--bases")
    p.add_argument("--split", help="train,val,test ratios, e.g. 0.8,0.1,0.1")
    p.add_argument("--min-length", type=int)

    p = sub.add_parser("evaluate", parents=[common], help="score predictions against references")
    p.add_argument("--predictions")
    p.add_argument("--references")
    p.add_argument("--external-scores", help='JSON file {"spice": ..., "fense": ...}')

    p = sub.add_parser("score-labels", parents=[common], help="accuracy of label predictions")
    p.add_argument("--labels")

    p = sub.add_parser("infer", parents=[common], help="collect predictions from an HTTP endpoint")
    p.add_argument("--samples")
    p.add_argument("--endpoint")
    p.add_argument("--token-env", help="name of the environment variable holding the bearer token")
    p.add_argument("--timeout", type=float)
    p.add_argument("--retries", type=int)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    flags = {k: v for k, v in vars(args).items() if k not in ("config", "verbose")}
    try:
        config = harness.resolve_config(flags, config_file=args.config)
        summary = harness.run(config)
    except AccForgeError as exc:
        print("error: " + json.dumps(exc.to_record(), ensure_ascii=False), file=sys.stderr)
        return 2
    except OSError as exc:
        record = {"error": type(exc).__name__, "message": exc.strerror or str(exc)}
        if exc.filename:
            record["path"] = str(exc.filename)
        print("error: " + json.dumps(record), file=sys.stderr)
        return 2
    except ValueError as exc:
        print("error: " + json.dumps({"error": "InvalidArgument", "message": str(exc)}), file=sys.stderr)
        return 2

    if "table" in summary:
        print(summary["table"], end="")
    else:
        print(json.dumps(summary, ensure_ascii=False))
    return 1 if summary.get("failed") else 0


if __name__ == "__main__":
    sys.exit(main())
