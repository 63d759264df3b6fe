"""``lectometer`` command line: score, stream, eval, synth.

Exit codes: 0 success, 2 usage or input error, 1 internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence, TextIO

from .audio import score_audio, window_index
from .config import ScoringConfig, resolve_config
from .errors import LectometerError, UsageError
from .evaluation import evaluate, render_evaluation_text
from .fusion import StreamState, render_report, score_session, stream_step, load_report_frames
from .observation import (
    build_session,
    load_session,
    parse_annotations,
    parse_frame_record,
    parse_wav,
    parse_words,
)
from .synth import SYNTH_MODALITIES, SynthProfile, generate, write_session

log = logging.getLogger("lectometer")

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT = 0, 1, 2

# flag -> ScoringConfig field
CONFIG_FLAGS = {
    "--fps": float,
    "--window-ms": int,
    "--min-final-window-ms": int,
    "--frame-ms": float,
    "--hop-ms": float,
    "--silence-rms": float,
    "--min-gap-ms": float,
    "--min-voiced-ms": float,
    "--pose-mild": float,
    "--pose-extreme": float,
    "--hand-moving-speed": float,
    "--hand-window-ms": float,
    "--alert-threshold": int,
    "--alert-sustain-ms": float,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("scoring configuration")
    g.add_argument("--config", help="JSON config file (default: $LECTOMETER_CONFIG)")
    for flag, kind in CONFIG_FLAGS.items():
        g.add_argument(flag, type=kind, default=None)


def _config(args) -> ScoringConfig:
    flags = {f.lstrip("-").replace("-", "_"): getattr(args, f.lstrip("-").replace("-", "_"))
             for f in CONFIG_FLAGS}
    return resolve_config(flags, args.config)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lectometer", description="Lecture-style quality scoring.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("score", help="score a recorded session")
    p.add_argument("--frames", required=True)
    p.add_argument("--audio")
    p.add_argument("--words")
    p.add_argument("--out", default=".")
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   help="csv also writes report.csv next to report.json")
    _add_config_flags(p)

    p = sub.add_parser("stream", help="score frame records from stdin as they arrive")
    p.add_argument("--audio")
    p.add_argument("--words")
    _add_config_flags(p)

    p = sub.add_parser("eval", help="evaluate a report against annotations")
    p.add_argument("--report", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--items", help="item_id,frame_idx alignment CSV")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", default=".")

    p = sub.add_parser("synth", help="generate a synthetic session")
    p.add_argument("--quality", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--duration-ms", type=int, default=60_000)
    p.add_argument("--out", default=".")
    for m in SYNTH_MODALITIES:
        p.add_argument(f"--p-{m}", type=float, default=None,
                       help=f"probability that {m} is positive (default: --quality)")
    _add_config_flags(p)
    return parser


def cmd_score(args, stdout: TextIO) -> int:
    cfg = _config(args)
    session = load_session(args.frames, cfg.fps, args.audio, args.words)
    alerts: list = []
    report = score_session(session, cfg, alerts)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(render_report(report, "json"))
    if args.format == "csv":
        (out / "report.csv").write_text(render_report(report, "csv"))
    for a in alerts:
        print(a.line(), file=stdout)
    print(f"frames={report.frame_count} average_score={report.average_score:.4f}", file=stdout)
    return EXIT_OK


def _stream_windows(args, cfg: ScoringConfig):
    audio = parse_wav(Path(args.audio).read_bytes()) if args.audio else None
    words = parse_words(Path(args.words).read_text()) if args.words else None
    if audio is None:
        return []
    session = build_session((), cfg.fps, audio, words)
    return score_audio(audio, words, session.duration_ms, cfg.voicing)


def cmd_stream(args, stdin: TextIO, stdout: TextIO, stderr: TextIO) -> int:
    cfg = _config(args)
    windows = _stream_windows(args, cfg)
    state = StreamState.from_config(cfg)
    for lineno, line in enumerate(iter(stdin.readline, ""), start=1):
        if not line.strip():
            continue
        try:
            obs = parse_frame_record(line, lineno)
            speech = windows[window_index(obs.t_ms, len(windows), cfg.window_ms)].speech_score if windows else 0
            state, score, alert = stream_step(state, obs, speech)
        except LectometerError as exc:
            msg = str(exc) if str(exc).startswith("line ") else f"line {lineno}: {exc}"
            print(f"lectometer: skipped {msg}", file=stderr, flush=True)
            continue
        parts = " ".join(f"{k}={v}" for k, v in score.parts.as_dict().items())
        print(f"SCORE t_ms={score.t_ms} frame={score.frame_idx} total={score.total} {parts}",
              file=stdout, flush=True)
        if alert is not None:
            print(alert.line(), file=stdout, flush=True)
    return EXIT_OK


def read_alignment(text: str) -> dict[str, int]:
    reader = csv.DictReader(io.StringIO(text))
    if not reader.fieldnames or {"item_id", "frame_idx"} - set(reader.fieldnames):
        raise UsageError("alignment file needs columns item_id,frame_idx")
    out = {}
    for row in reader:
        try:
            out[row["item_id"].strip()] = int(row["frame_idx"])
        except (TypeError, ValueError):
            raise UsageError(f"bad alignment row {row}") from None
    return out


def cmd_eval(args, stdout: TextIO) -> int:
    if not 0 < args.alpha < 1:
        raise UsageError("alpha must lie in (0, 1)")
    frames = load_report_frames(Path(args.report).read_text())
    ann = parse_annotations(Path(args.annotations).read_text())
    alignment = read_alignment(Path(args.items).read_text()) if args.items else None
    result = evaluate(frames, ann, alignment, args.alpha)
    text = render_evaluation_text(result)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "evaluation.json").write_text(json.dumps(result, indent=2) + "\n")
    (out / "evaluation.txt").write_text(text)
    stdout.write(text)
    return EXIT_OK


def cmd_synth(args, stdout: TextIO) -> int:
    cfg = _config(args)
    overrides = {m: getattr(args, f"p_{m}") for m in SYNTH_MODALITIES if getattr(args, f"p_{m}") is not None}
    profile = SynthProfile(args.quality, args.duration_ms, cfg.fps, args.seed, overrides)
    paths = write_session(generate(profile, cfg), args.out)
    for name, path in paths.items():
        print(f"{name}: {path}", file=stdout)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None, stdin=None, stdout=None, stderr=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=stderr)
    try:
        if args.command == "score":
            return cmd_score(args, stdout)
        if args.command == "stream":
            return cmd_stream(args, stdin, stdout, stderr)
        if args.command == "eval":
            return cmd_eval(args, stdout)
        return cmd_synth(args, stdout)
    except BrokenPipeError:
        # reader went away (e.g. piped into head); stop quietly
        if stdout is sys.stdout:
            os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except (LectometerError, OSError) as exc:
        print(f"lectometer: error: {exc}", file=stderr)
        return EXIT_INPUT
    except Exception:
        log.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
