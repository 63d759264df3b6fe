"""Speech figures per analysis window: word density, speaking speed and
intonation, combined by majority vote into a binary speech score."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .config import VoicingConfig
from .errors import RangeError
from .observation import AudioTrack, WordTimeline

DENSITY_BAND = (35.0, 55.0)  # percent voiced
SPEED_BAND = (150.0, 250.0)  # words per minute
QUESTION_BAND = (40.0, 60.0)  # percent question-tone utterances


class Tone(str, Enum):
    QUESTION = "question"
    STATEMENT = "statement"


@dataclass(frozen=True)
class VoicedInterval:
    start_ms: float
    end_ms: float

    def __post_init__(self):
        if not self.end_ms > self.start_ms:
            raise RangeError("voiced interval must have end > start")

    @property
    def length_ms(self) -> float:
        return self.end_ms - self.start_ms


@dataclass(frozen=True)
class SpeechWindowMetrics:
    window_start_ms: int
    window_end_ms: int
    word_density_pct: Optional[float]
    speaking_speed_wpm: Optional[float]
    question_pct: Optional[float]
    density_ok: bool
    speed_ok: bool
    tone_ok: bool
    speech_score: int
    inherited: bool = False

    def to_dict(self) -> dict:
        def num(v):
            return None if v is None else float(v)

        return {
            "window_start_ms": int(self.window_start_ms),
            "window_end_ms": int(self.window_end_ms),
            "word_density_pct": num(self.word_density_pct),
            "speaking_speed_wpm": num(self.speaking_speed_wpm),
            "question_pct": num(self.question_pct),
            "density_ok": bool(self.density_ok),
            "speed_ok": bool(self.speed_ok),
            "tone_ok": bool(self.tone_ok),
            "speech_score": int(self.speech_score),
            "inherited": bool(self.inherited),
        }


def _samples(ms: float, rate: int) -> int:
    return max(1, int(round(ms * rate / 1000.0)))


def frame_rms(samples: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    """Short-time RMS for frames starting every ``hop`` samples.

    Every start position inside the signal gets a frame; frames running past
    the end are computed over the samples that exist.
    """
    n = samples.size
    if n == 0:
        return np.zeros(0)
    starts = np.arange(0, n, hop)
    ends = np.minimum(starts + frame_len, n)
    csum = np.concatenate(([0.0], np.cumsum(samples * samples)))
    energy = (csum[ends] - csum[starts]) / (ends - starts)
    return np.sqrt(np.maximum(energy, 0.0))


def detect_voiced_intervals(track: AudioTrack, cfg: VoicingConfig = VoicingConfig()) -> list[VoicedInterval]:
    """Segment a track into voiced intervals by short-time RMS.

    A run of voiced frames starts one hop before the end of its first frame
    and ends one hop after the start of its last frame (runs touching the
    track edges extend to them), which places onsets and offsets within one
    hop of where the signal actually starts and stops.
    """
    x = track.samples
    n = x.size
    if n == 0:
        return []
    rate = track.sample_rate
    frame_len = _samples(cfg.frame_ms, rate)
    hop = _samples(cfg.hop_ms, rate)
    voiced = frame_rms(x, frame_len, hop) >= cfg.silence_rms
    if not voiced.any():
        return []

    edges = np.diff(np.concatenate(([0], voiced.astype(np.int8), [0])))
    run_starts = np.flatnonzero(edges == 1)
    run_ends = np.flatnonzero(edges == -1) - 1
    last = voiced.size - 1

    to_ms = 1000.0 / rate
    spans: list[list[float]] = []
    for a, b in zip(run_starts, run_ends):
        lo = 0 if a == 0 else min(n, a * hop + frame_len - hop)
        hi = n if b == last else min(n, b * hop + hop)
        s, e = lo * to_ms, hi * to_ms
        if e <= s:
            continue
        if spans and s - spans[-1][1] < cfg.min_gap_ms:
            spans[-1][1] = max(spans[-1][1], e)
        else:
            spans.append([s, e])
    return [VoicedInterval(float(s), float(e)) for s, e in spans if e - s >= cfg.min_voiced_ms]


def word_density(intervals: Sequence[VoicedInterval], window_start_ms: float, window_end_ms: float) -> float:
    """Percent of the window covered by voiced intervals."""
    length = window_end_ms - window_start_ms
    if length <= 0:
        raise RangeError("window must have positive length")
    voiced = 0.0
    for iv in intervals:
        lo = max(iv.start_ms, window_start_ms)
        hi = min(iv.end_ms, window_end_ms)
        if hi > lo:
            voiced += hi - lo
    return float(min(100.0, 100.0 * voiced / length))


def speaking_speed(words: Optional[WordTimeline], window_start_ms: float, window_end_ms: float) -> Optional[float]:
    """Words per minute in ``[start, end)``; None when no word timeline exists."""
    length = window_end_ms - window_start_ms
    if length <= 0:
        raise RangeError("window must have positive length")
    if words is None:
        return None
    return words.count_between(window_start_ms, window_end_ms) / (length / 60_000.0)


def classify_utterance_tone(
    track: AudioTrack,
    interval: VoicedInterval,
    cfg: VoicingConfig = VoicingConfig(),
) -> Tone:
    """Question iff the mean per-frame RMS over the interval exceeds
    ``cfg.question_rms`` (strictly)."""
    if interval.start_ms < 0 or interval.end_ms > track.duration_ms + 1e-6:
        raise RangeError(
            f"interval [{interval.start_ms}, {interval.end_ms}] ms outside track "
            f"of {track.duration_ms} ms"
        )
    rate = track.sample_rate
    a = int(math.floor(interval.start_ms * rate / 1000.0))
    b = max(a + 1, int(math.ceil(interval.end_ms * rate / 1000.0)))
    seg = track.samples[a:min(b, track.samples.size)]
    if seg.size == 0:
        return Tone.STATEMENT
    frame_len = _samples(cfg.frame_ms, rate)
    hop = _samples(cfg.hop_ms, rate)
    if seg.size <= frame_len:
        rms = np.array([math.sqrt(float(np.mean(seg * seg)))])
    else:
        windows = np.lib.stride_tricks.sliding_window_view(seg * seg, frame_len)[::hop]
        rms = np.sqrt(windows.mean(axis=1))
    level = float(rms.mean())
    # guard against float noise deciding the boundary case
    if level > cfg.question_rms and not math.isclose(level, cfg.question_rms, rel_tol=1e-9):
        return Tone.QUESTION
    return Tone.STATEMENT


def intonation_percent(tones: Sequence[Tone]) -> Optional[float]:
    if not tones:
        return None
    questions = sum(1 for t in tones if t == Tone.QUESTION)
    return 100.0 * questions / len(tones)


def _in_band(value: Optional[float], band: tuple[float, float]) -> bool:
    return value is not None and band[0] <= value <= band[1]


def speech_window_score(
    density_pct: Optional[float],
    speed_wpm: Optional[float],
    question_pct: Optional[float],
    window_start_ms: int = 0,
    window_end_ms: int = 0,
) -> SpeechWindowMetrics:
    density_ok = bool(_in_band(density_pct, DENSITY_BAND))
    speed_ok = bool(_in_band(speed_wpm, SPEED_BAND))
    tone_ok = bool(_in_band(question_pct, QUESTION_BAND))
    votes = density_ok + speed_ok + tone_ok
    return SpeechWindowMetrics(
        window_start_ms=window_start_ms,
        window_end_ms=window_end_ms,
        word_density_pct=density_pct,
        speaking_speed_wpm=speed_wpm,
        question_pct=question_pct,
        density_ok=density_ok,
        speed_ok=speed_ok,
        tone_ok=tone_ok,
        speech_score=int(votes >= 2),
    )


def window_bounds(duration_ms: int, window_ms: int) -> list[tuple[int, int]]:
    """Consecutive windows tiling ``[0, duration_ms)``; the last may be short."""
    if window_ms <= 0:
        raise RangeError("window_ms must be positive")
    bounds = []
    start = 0
    while start < duration_ms:
        bounds.append((start, min(start + window_ms, duration_ms)))
        start += window_ms
    return bounds


def window_index(t_ms: int, n_windows: int, window_ms: int) -> int:
    """Window holding timestamp ``t_ms``; timestamps past the end map to the last one."""
    return min(int(t_ms // window_ms), max(n_windows - 1, 0))


def score_audio(
    track: Optional[AudioTrack],
    words: Optional[WordTimeline],
    duration_ms: int,
    cfg: VoicingConfig = VoicingConfig(),
) -> list[SpeechWindowMetrics]:
    """Score every analysis window of a session.

    A trailing window shorter than ``cfg.min_final_window_ms`` keeps its
    figures for diagnostics but inherits the previous window's score.
    """
    bounds = window_bounds(duration_ms, cfg.window_ms)
    intervals = detect_voiced_intervals(track, cfg) if track is not None else []
    out: list[SpeechWindowMetrics] = []
    for i, (ws, we) in enumerate(bounds):
        if track is None:
            density = question = None
        else:
            density = word_density(intervals, ws, we)
            tones = []
            for iv in intervals:
                lo, hi = max(iv.start_ms, ws), min(iv.end_ms, we)
                # slivers of an utterance that belongs to the neighbouring window
                if hi - lo >= cfg.min_voiced_ms:
                    tones.append(classify_utterance_tone(track, VoicedInterval(lo, hi), cfg))
            question = intonation_percent(tones)
        speed = speaking_speed(words, ws, we)
        metrics = speech_window_score(density, speed, question, ws, we)
        short_tail = i > 0 and i == len(bounds) - 1 and (we - ws) < cfg.min_final_window_ms
        if short_tail:
            metrics = replace(metrics, speech_score=out[-1].speech_score, inherited=True)
        out.append(metrics)
    return out
