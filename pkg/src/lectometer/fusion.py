"""Fusion of the five modality sub-scores into frame scores, session
reports and streaming alerts."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .audio import SpeechWindowMetrics, score_audio, window_index
from .config import ScoringConfig
from .errors import EmptySessionError, OrderingError, ParseError, UsageError
from .observation import FrameObservation, LectureSession
from .visual import (
    HandTracker,
    PoseThresholds,
    activity_score,
    expression_score,
    pose_classify,
    pose_score,
)

MODALITIES = ("expression", "activity", "pose", "hand", "speech")


@dataclass(frozen=True)
class ModalityScores:
    expression: int
    activity: int
    pose: int
    hand: int
    speech: int

    def __post_init__(self):
        for name in MODALITIES:
            if getattr(self, name) not in (0, 1):
                raise ValueError(f"{name} sub-score must be 0 or 1")

    @property
    def total(self) -> int:
        return self.expression + self.activity + self.pose + self.hand + self.speech

    def as_dict(self) -> dict[str, int]:
        return {name: getattr(self, name) for name in MODALITIES}


def frame_score(parts: ModalityScores) -> int:
    return parts.total


@dataclass(frozen=True)
class FrameScore:
    frame_idx: int
    t_ms: int
    parts: ModalityScores

    @property
    def total(self) -> int:
        return self.parts.total

    def to_dict(self) -> dict:
        return {
            "frame_idx": self.frame_idx,
            "t_ms": self.t_ms,
            "parts": self.parts.as_dict(),
            "total": self.total,
        }


@dataclass(frozen=True)
class AlertEvent:
    t_ms: int
    frame_idx: int
    total: int
    threshold: int
    sustained_frames: int

    def line(self) -> str:
        return f"ALERT t_ms={self.t_ms} frame={self.frame_idx} total={self.total}"


@dataclass(frozen=True)
class SessionReport:
    frames: tuple[FrameScore, ...]
    speech_windows: tuple[SpeechWindowMetrics, ...]
    modality_rates: dict
    config: dict = field(default_factory=dict)

    @property
    def frame_count(self) -> int:
        return len(self.frames)

    @property
    def average_score(self) -> float:
        if not self.frames:
            return 0.0
        return math.fsum(f.total for f in self.frames) / len(self.frames)


# -------------------------------------------------------------- streaming

@dataclass(frozen=True)
class StreamState:
    pose: PoseThresholds = PoseThresholds()
    hands: HandTracker = HandTracker()
    alert_threshold: int = 2
    alert_sustain: int = 60
    low_run: int = 0
    alerted: bool = False
    last_frame_idx: Optional[int] = None
    last_t_ms: Optional[int] = None

    @classmethod
    def from_config(cls, cfg: ScoringConfig) -> "StreamState":
        return cls(
            pose=PoseThresholds(cfg.pose_mild, cfg.pose_extreme),
            hands=HandTracker(cfg.hand_window_frames, cfg.hand_moving_speed),
            alert_threshold=cfg.alert_threshold,
            alert_sustain=cfg.alert_sustain_frames,
        )


def visual_parts(state: StreamState, obs: FrameObservation) -> tuple[HandTracker, tuple[int, int, int, int]]:
    """The four visual sub-scores (expression, activity, pose, hand)."""
    expr = expression_score(obs.expression) if obs.face is not None else 0
    act = activity_score(obs.activity)
    pose = pose_score(pose_classify(obs.face, state.pose)) if obs.face is not None else 0
    hands, hand, _ = state.hands.step(obs.frame_idx, obs.hands)
    return hands, (expr, act, pose, hand)


def stream_step(
    state: StreamState,
    obs: FrameObservation,
    speech_score_current: int = 0,
) -> tuple[StreamState, FrameScore, Optional[AlertEvent]]:
    """Score one frame as it arrives and decide whether to alert.

    An alert fires once the total has stayed at or below the threshold for
    ``alert_sustain`` consecutive frames, and not again until the run breaks.
    """
    if state.last_frame_idx is not None and (
        obs.frame_idx <= state.last_frame_idx or obs.t_ms <= state.last_t_ms
    ):
        raise OrderingError(
            f"frame {obs.frame_idx} at {obs.t_ms} ms arrived after frame "
            f"{state.last_frame_idx} at {state.last_t_ms} ms"
        )
    hands, (expr, act, pose, hand) = visual_parts(state, obs)
    parts = ModalityScores(expr, act, pose, hand, int(speech_score_current))
    score = FrameScore(obs.frame_idx, obs.t_ms, parts)

    low_run = state.low_run + 1 if score.total <= state.alert_threshold else 0
    alerted = state.alerted and low_run > 0
    alert = None
    if low_run >= state.alert_sustain and not alerted:
        alert = AlertEvent(obs.t_ms, obs.frame_idx, score.total, state.alert_threshold, low_run)
        alerted = True
    new_state = StreamState(
        state.pose, hands, state.alert_threshold, state.alert_sustain,
        low_run, alerted, obs.frame_idx, obs.t_ms,
    )
    return new_state, score, alert


# ------------------------------------------------------------------ batch

def modality_rates(frames: Sequence[FrameScore], windows: Sequence[SpeechWindowMetrics], window_ms: int) -> dict:
    """Fraction of positive frames per modality and speech window (None for
    windows without frames)."""
    counts = [[0] * len(MODALITIES) for _ in windows]
    sizes = [0] * len(windows)
    for f in frames:
        w = window_index(f.t_ms, len(windows), window_ms)
        sizes[w] += 1
        for m, name in enumerate(MODALITIES):
            counts[w][m] += getattr(f.parts, name)
    return {
        name: [counts[w][m] / sizes[w] if sizes[w] else None for w in range(len(windows))]
        for m, name in enumerate(MODALITIES)
    }


def score_session(
    session: LectureSession,
    cfg: ScoringConfig = ScoringConfig(),
    alerts: Optional[list] = None,
) -> SessionReport:
    """Score every frame of a recorded session.

    Speech windows are scored first; each frame takes the score of the window
    holding its timestamp. Alerts raised along the way are appended to
    ``alerts`` when a list is given.
    """
    if not session.frames:
        raise EmptySessionError("session has no frames")
    windows = score_audio(session.audio, session.words, session.duration_ms, cfg.voicing)
    state = StreamState.from_config(cfg)
    scores = []
    for obs in session.frames:
        w = window_index(obs.t_ms, len(windows), cfg.window_ms)
        speech = windows[w].speech_score if windows else 0
        state, score, alert = stream_step(state, obs, speech)
        scores.append(score)
        if alert is not None and alerts is not None:
            alerts.append(alert)
    return SessionReport(
        frames=tuple(scores),
        speech_windows=tuple(windows),
        modality_rates=modality_rates(scores, windows, cfg.window_ms),
        config=cfg.to_dict(),
    )


# ---------------------------------------------------------------- reports

CSV_COLUMNS = ("frame_idx", "t_ms") + MODALITIES + ("total",)


def report_to_dict(report: SessionReport) -> dict:
    return {
        "config": report.config,
        "frame_count": report.frame_count,
        "average_score": report.average_score,
        "frames": [f.to_dict() for f in report.frames],
        "speech_windows": [w.to_dict() for w in report.speech_windows],
        "modality_rates": report.modality_rates,
    }


def render_report(report: SessionReport, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report_to_dict(report), indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for f in report.frames:
            w.writerow([f.frame_idx, f.t_ms, *f.parts.as_dict().values(), f.total])
        return buf.getvalue()
    raise UsageError(f"unknown report format {fmt!r}; use 'json' or 'csv'")


def load_report_frames(text: str, fmt: Optional[str] = None) -> list[FrameScore]:
    """Read the per-frame scores back from a rendered report."""
    if fmt is None:
        fmt = "json" if text.lstrip().startswith("{") else "csv"
    try:
        if fmt == "json":
            data = json.loads(text)
            return [
                FrameScore(int(f["frame_idx"]), int(f["t_ms"]),
                           ModalityScores(**{m: int(f["parts"][m]) for m in MODALITIES}))
                for f in data["frames"]
            ]
        if fmt == "csv":
            rows = csv.DictReader(io.StringIO(text))
            return [
                FrameScore(int(r["frame_idx"]), int(r["t_ms"]),
                           ModalityScores(**{m: int(r[m]) for m in MODALITIES}))
                for r in rows
            ]
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ParseError(f"malformed report: {exc}") from None
    raise UsageError(f"unknown report format {fmt!r}")
