"""Command line entry point.

Subcommands:
    extract   run synthetic extractors over a directory of WAV files into an
              embedding store
    run       execute a suite config and write report.csv / report.txt
    inspect   print the header of one EMB1 file
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

from .emb1 import read_header
from .errors import ConfigError
from .runner import load_suite_config, run_suite
from .store import EmbeddingStore
from .synth import ExtractorSpec, extract
from .wavio import read_wav


def _load_extractor_specs(path) -> list[ExtractorSpec]:
    raw = json.loads(Path(path).read_text())
    if isinstance(raw, dict):
        raw = raw.get("extractors", [])
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{path}: expected a non-empty list of extractor specs")
    known = {f.name for f in fields(ExtractorSpec)}
    specs = []
    for item in raw:
        unknown = set(item) - known
        if unknown:
            raise ConfigError(f"unknown extractor spec keys: {sorted(unknown)}")
        specs.append(ExtractorSpec(**item))
    ids = [s.id for s in specs]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"duplicate extractor ids: {ids}")
    return specs


def _cmd_extract(args) -> int:
    audio_dir = Path(args.audio)
    wavs = sorted(audio_dir.glob("*.wav"))
    if not wavs:
        print(f"no .wav files under {audio_dir}", file=sys.stderr)
        return 2
    specs = _load_extractor_specs(args.config)
    store = EmbeddingStore.create(args.out)
    for wav_path in wavs:
        clip = read_wav(wav_path)
        clip_id = wav_path.stem
        for spec in specs:
            store.add(spec.id, clip_id, extract(clip, spec))
    store.save()
    print(f"extracted {len(wavs)} clips x {len(specs)} extractors -> {args.out}")
    return 0


def _cmd_run(args) -> int:
    suite = load_suite_config(args.config)
    report = run_suite(suite, out_dir=args.out, seed=args.seed, jobs=args.jobs)
    sys.stdout.write(report.to_csv() if args.format == "csv" else report.to_text())
    failures = [r for r in report.sorted_rows() if r.status != "ok"]
    if failures:
        print(f"{len(failures)} cell(s) failed", file=sys.stderr)
        return 1
    return 0


def _cmd_inspect(args) -> int:
    header = read_header(args.path)
    print(f"path: {args.path}")
    print(f"version: {header.version}")
    print(f"dtype_code: {header.dtype_code}")
    print(f"layer_count: {header.layer_count}")
    print(f"frame_count: {header.frame_count}")
    print(f"channel_count: {header.channel_count}")
    print(f"frame_rate_hz: {header.frame_rate_hz}")
    print(f"t_start_s: {header.t_start_s}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="embfuse", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_extract = sub.add_parser("extract", help="extract synthetic embeddings from WAV files")
    p_extract.add_argument("--audio", required=True, help="directory of 16-bit PCM mono WAVs")
    p_extract.add_argument("--config", required=True, help="extractor spec list (JSON)")
    p_extract.add_argument("--out", required=True, help="embedding store directory")
    p_extract.set_defaults(func=_cmd_extract)

    p_run = sub.add_parser("run", help="run a suite config")
    p_run.add_argument("--config", required=True, help="suite config (JSON)")
    p_run.add_argument("--out", required=True, help="report output directory")
    p_run.add_argument("--seed", type=int, default=None, help="override the suite seed")
    p_run.add_argument("--jobs", type=int, default=1, help="parallel cells")
    p_run.add_argument("--format", choices=("csv", "table"), default="table")
    p_run.set_defaults(func=_cmd_run)

    p_inspect = sub.add_parser("inspect", help="print an EMB1 header")
    p_inspect.add_argument("path", help="EMB1 file")
    p_inspect.set_defaults(func=_cmd_inspect)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
