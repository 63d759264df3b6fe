"""Seeded synthetic lecture sessions with known per-frame sub-scores.

Each modality is drawn positive with probability ``quality`` (or a
per-modality override) and rendered as detector output the scorer must map
back to the intended sub-score:

* expression / activity: a label from the positive or negative set;
* pose: a nose offset placed in the middle of the chosen pose band, or
  eyes not detected for ``backwards``;
* hand: drawn per block of ``hand_window_frames + 1`` frames; a positive
  block shows a hand stepping 0.3 units per frame, a negative block shows
  none. The intended score at a frame is "a hand was seen within the last
  hand window", which is what the trailing-window rule yields for these
  speeds (requires ``hand_moving_speed`` < 0.3);
* speech: drawn per analysis window; a positive window is 16 kHz audio with
  900 ms bursts every 2 s alternating question/statement loudness (45 %
  density, 50 % questions) and words every 300 ms (200 wpm); a negative
  window has 1700 ms loud bursts (85 %, all questions) and 300 wpm. Windows
  shorter than 10 s cannot hit the tone band reliably.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .audio import window_bounds, window_index
from .config import ScoringConfig
from .errors import UsageError
from .observation import (
    ActivityLabel,
    AudioTrack,
    ExpressionLabel,
    FaceGeometry,
    FrameObservation,
    HandObservation,
    WordTimeline,
    dump_frames,
    dump_words,
    encode_wav,
)

SAMPLE_RATE = 16_000
TONE_HZ = 440.0
QUESTION_AMP = 0.3
STATEMENT_AMP = 0.008
CYCLE_MS = 2000
HAND_STEP = 0.3
HAND_TRACK_X = (0.2, 0.5, 0.8, 0.5)
FACE_BOX = (0.3, 0.2, 0.4, 0.5)

SYNTH_MODALITIES = ("expression", "activity", "pose", "hand", "speech")

_POS_EXPR = (ExpressionLabel.HAPPY, ExpressionLabel.SURPRISE, ExpressionLabel.NEUTRAL)
_NEG_EXPR = (ExpressionLabel.ANGER, ExpressionLabel.DISGUST, ExpressionLabel.FEAR, ExpressionLabel.SAD)
_POS_ACT = (ActivityLabel.ATTENDING, ActivityLabel.WRITING, ActivityLabel.HAND_RAISING)
_NEG_ACT = (
    ActivityLabel.ABSENT, ActivityLabel.TELEPHONE_CALL,
    ActivityLabel.TEXTING, ActivityLabel.LOOKING_ELSEWHERE,
)
# (dx sign, dy sign, band) ; band 0 = centre, 1 = mild, 2 = far
_POS_POSE = ((0, 0, 0), (-1, 0, 1), (1, 0, 1), (0, -1, 1), (0, 1, 1))
_NEG_POSE = ((-1, 0, 2), (1, 0, 2), (0, -1, 2), (0, 1, 2), None)  # None: backwards


@dataclass(frozen=True)
class SynthProfile:
    quality: float = 1.0
    duration_ms: int = 60_000
    fps: float = 30.0
    seed: int = 0
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        probs = {"quality": self.quality, **self.overrides}
        for name, p in probs.items():
            if name != "quality" and name not in SYNTH_MODALITIES:
                raise UsageError(f"unknown modality override {name!r}")
            if p is None or not 0.0 <= float(p) <= 1.0:
                raise UsageError(f"probability for {name} must lie in [0, 1], got {p!r}")
        if self.duration_ms <= 0 or not self.fps > 0:
            raise UsageError("duration_ms and fps must be positive")
        if self.seed < 0:
            raise UsageError("seed must be non-negative")

    def prob(self, modality: str) -> float:
        p = self.overrides.get(modality)
        return float(self.quality if p is None else p)


@dataclass
class SynthSession:
    frames: list[FrameObservation]
    words: WordTimeline
    audio: AudioTrack
    truth: dict


def _face(sign_x: int, sign_y: int, band: int, cfg: ScoringConfig, eyes: bool = True) -> FaceGeometry:
    x, y, w, h = FACE_BOX
    mag = (0.0, (cfg.pose_mild + cfg.pose_extreme) / 2, (cfg.pose_extreme + 1.0) / 2)[band]
    cx, cy = x + w / 2, y + h / 2
    nose = (cx + sign_x * mag * w / 2, cy + sign_y * mag * h / 2)
    return FaceGeometry(FACE_BOX, nose, eyes)


def _hand(frame_no: int) -> HandObservation:
    x = HAND_TRACK_X[frame_no % len(HAND_TRACK_X)]
    return HandObservation(((x - 0.02, 0.5), (x + 0.02, 0.5), (x, 0.53)))


def _burst(out: np.ndarray, start_ms: int, length_ms: int, amp: float) -> None:
    a = start_ms * SAMPLE_RATE // 1000
    b = min(out.size, (start_ms + length_ms) * SAMPLE_RATE // 1000)
    t = np.arange(b - a) / SAMPLE_RATE
    out[a:b] = amp * np.sin(2 * np.pi * TONE_HZ * t)


def _speech_window(out: np.ndarray, words: list, ws: int, we: int, positive: bool) -> None:
    burst_ms, word_gap = (900, 300) if positive else (1700, 200)
    k = 0
    start = ws
    while start + burst_ms <= we:
        amp = STATEMENT_AMP if positive and k % 2 else QUESTION_AMP
        _burst(out, start, burst_ms, amp)
        start += CYCLE_MS
        k += 1
    t = ws + word_gap // 2
    while t < we:
        words.append((t, "lorem"))
        t += word_gap


def generate(profile: SynthProfile, cfg: Optional[ScoringConfig] = None) -> SynthSession:
    if cfg is None:
        cfg = ScoringConfig(fps=profile.fps)
    if cfg.hand_moving_speed >= HAND_STEP:
        raise UsageError(f"synthetic hands move {HAND_STEP} units/frame; hand_moving_speed must be below that")
    rng = np.random.default_rng(profile.seed)

    # speech intent per analysis window
    bounds = window_bounds(profile.duration_ms, cfg.window_ms)
    speech_intent: list[int] = []
    for i, (ws, we) in enumerate(bounds):
        draw = int(rng.random() < profile.prob("speech"))
        if i > 0 and i == len(bounds) - 1 and we - ws < cfg.min_final_window_ms:
            draw = speech_intent[-1]
        speech_intent.append(draw)

    samples = np.zeros(profile.duration_ms * SAMPLE_RATE // 1000)
    words: list[tuple[int, str]] = []
    for (ws, we), positive in zip(bounds, speech_intent):
        _speech_window(samples, words, ws, we, bool(positive))
    samples = np.round(samples * 32768.0) / 32768.0

    n_frames = int(profile.duration_ms * profile.fps // 1000)
    while n_frames > 0 and round((n_frames - 1) * 1000 / profile.fps) >= profile.duration_ms:
        n_frames -= 1
    block = cfg.hand_window_frames + 1
    hand_blocks = [int(rng.random() < profile.prob("hand")) for _ in range(-(-n_frames // block))]

    frames: list[FrameObservation] = []
    truth_frames: list[dict] = []
    seen_hand: list[bool] = []
    window_frames = cfg.hand_window_frames
    for i in range(n_frames):
        t_ms = int(round(i * 1000 / profile.fps))
        e_pos = rng.random() < profile.prob("expression")
        expr = (_POS_EXPR if e_pos else _NEG_EXPR)[rng.integers(3 if e_pos else 4)]
        a_pos = rng.random() < profile.prob("activity")
        act = (_POS_ACT if a_pos else _NEG_ACT)[rng.integers(3 if a_pos else 4)]
        p_pos = rng.random() < profile.prob("pose")
        pose = (_POS_POSE if p_pos else _NEG_POSE)[rng.integers(5)]
        face = _face(0, 0, 0, cfg, eyes=False) if pose is None else _face(*pose, cfg)
        visible = bool(hand_blocks[i // block])
        hands = (_hand(i),) if visible else ()
        seen_hand.append(visible)

        frames.append(FrameObservation(i, t_ms, expr, act, face, hands))
        truth_frames.append({
            "frame_idx": i,
            "t_ms": t_ms,
            "expression": int(e_pos),
            "activity": int(a_pos),
            "pose": int(p_pos),
            "hand": int(any(seen_hand[max(0, i - window_frames + 1):i + 1])),
            "speech": speech_intent[window_index(t_ms, len(bounds), cfg.window_ms)],
        })

    truth = {
        "profile": asdict(profile),
        "config": cfg.to_dict(),
        "speech_windows": [
            {"window_start_ms": ws, "window_end_ms": we, "speech": s}
            for (ws, we), s in zip(bounds, speech_intent)
        ],
        "frames": truth_frames,
    }
    return SynthSession(frames, WordTimeline(tuple(words)), AudioTrack(SAMPLE_RATE, samples), truth)


def write_session(session: SynthSession, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "frames": out / "frames.jsonl",
        "words": out / "words.jsonl",
        "audio": out / "audio.wav",
        "truth": out / "truth.json",
    }
    paths["frames"].write_text(dump_frames(session.frames))
    paths["words"].write_text(dump_words(session.words))
    paths["audio"].write_bytes(encode_wav(session.audio))
    paths["truth"].write_text(json.dumps(session.truth, indent=1) + "\n")
    return paths
