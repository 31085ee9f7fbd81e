"""Command line: export pretrained-model hidden states as an EMB1 store.

    embfuse-bridge export --model hubert-base --audio clips/ --out store/
    embfuse-bridge models
"""

from __future__ import annotations

import argparse
import sys

from .export import ExportJob, export_hidden_states
from .models import MODEL_NAMES, ModelLoadError


def _cmd_export(args) -> int:
    job = ExportJob(model=args.model, audio_dir=args.audio, out_dir=args.out, device=args.device)
    entries = export_hidden_states(job)
    print(f"exported {len(entries)} clip(s) with {args.model} -> {args.out}")
    return 0


def _cmd_models(_args) -> int:
    for name in MODEL_NAMES:
        print(name)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="embfuse-bridge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_export = sub.add_parser("export", help="export hidden states for a directory of WAVs")
    p_export.add_argument("--model", required=True,
                          help=f"one of {', '.join(MODEL_NAMES)} or a local checkpoint path")
    p_export.add_argument("--audio", required=True, help="directory of 16-bit PCM WAVs")
    p_export.add_argument("--out", required=True, help="output store directory")
    p_export.add_argument("--device", default="cpu", help="torch device hint")
    p_export.set_defaults(func=_cmd_export)

    p_models = sub.add_parser("models", help="list known model names")
    p_models.set_defaults(func=_cmd_models)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ModelLoadError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
