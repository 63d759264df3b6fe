"""Domain types and parsers for detector output, audio and annotations.

All geometry is in normalized image coordinates: origin top-left, x to the
right, y downward, both in [0, 1].
"""

from __future__ import annotations

import csv
import io
import json
import math
import struct
import wave
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    DuplicateError,
    ParseError,
    RangeError,
    UnsupportedFormatError,
    ValidationError,
)

Point = tuple[float, float]


class ExpressionLabel(str, Enum):
    ANGER = "anger"
    DISGUST = "disgust"
    FEAR = "fear"
    HAPPY = "happy"
    NEUTRAL = "neutral"
    SAD = "sad"
    SURPRISE = "surprise"
    NONE = "none"  # no face detected


class ActivityLabel(str, Enum):
    ABSENT = "absent"
    ATTENDING = "attending"
    HAND_RAISING = "hand_raising"
    WRITING = "writing"
    TELEPHONE_CALL = "telephone_call"
    TEXTING = "texting"
    LOOKING_ELSEWHERE = "looking_elsewhere"
    NONE = "none"  # detector produced no output


def _in_unit(v: float) -> bool:
    return 0.0 <= v <= 1.0


def _check_point(p, what: str) -> Point:
    if len(p) != 2:
        raise ValidationError(f"{what} must have two coordinates")
    x, y = float(p[0]), float(p[1])
    if not (_in_unit(x) and _in_unit(y)):
        raise ValidationError(f"{what} ({x}, {y}) outside the unit square")
    return (x, y)


@dataclass(frozen=True)
class FaceGeometry:
    bbox: tuple[float, float, float, float]  # x, y, w, h
    nose: Point
    eyes_detected: bool = True

    def __post_init__(self):
        if len(self.bbox) != 4:
            raise ValidationError("bbox must be [x, y, w, h]")
        x, y, w, h = (float(v) for v in self.bbox)
        if w <= 0 or h <= 0:
            raise ValidationError("bbox width and height must be positive")
        # small slack for detectors that emit x + w == 1 with rounding
        if x < 0 or y < 0 or x + w > 1 + 1e-9 or y + h > 1 + 1e-9:
            raise ValidationError("bbox must lie inside the unit square")
        object.__setattr__(self, "bbox", (x, y, w, h))
        object.__setattr__(self, "nose", _check_point(self.nose, "nose"))
        object.__setattr__(self, "eyes_detected", bool(self.eyes_detected))

    @property
    def center(self) -> Point:
        x, y, w, h = self.bbox
        return (x + w / 2, y + h / 2)


@dataclass(frozen=True)
class HandObservation:
    landmarks: tuple[Point, ...]

    def __post_init__(self):
        if len(self.landmarks) == 0:
            raise ValidationError("hand must have at least one landmark")
        pts = tuple(_check_point(p, "landmark") for p in self.landmarks)
        object.__setattr__(self, "landmarks", pts)

    @property
    def centroid(self) -> Point:
        n = len(self.landmarks)
        return (
            math.fsum(p[0] for p in self.landmarks) / n,
            math.fsum(p[1] for p in self.landmarks) / n,
        )


@dataclass(frozen=True)
class FrameObservation:
    frame_idx: int
    t_ms: int
    expression: ExpressionLabel
    activity: ActivityLabel
    face: Optional[FaceGeometry] = None
    hands: tuple[HandObservation, ...] = ()

    def __post_init__(self):
        if self.frame_idx < 0 or self.t_ms < 0:
            raise ValidationError("frame_idx and t_ms must be non-negative")
        object.__setattr__(self, "expression", ExpressionLabel(self.expression))
        object.__setattr__(self, "activity", ActivityLabel(self.activity))
        object.__setattr__(self, "hands", tuple(self.hands))


@dataclass(frozen=True, eq=False)
class AudioTrack:
    sample_rate: int
    samples: np.ndarray

    def __post_init__(self):
        if int(self.sample_rate) < 8000:
            raise ValidationError("sample_rate must be at least 8000 Hz")
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise ValidationError("audio must be mono")
        if arr.size and (arr.min() < -1.0 or arr.max() > 1.0):
            raise ValidationError("samples must lie within [-1, 1]")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "sample_rate", int(self.sample_rate))
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return self.samples.size

    @property
    def duration_ms(self) -> float:
        return 1000.0 * self.samples.size / self.sample_rate

    def __eq__(self, other):
        if not isinstance(other, AudioTrack):
            return NotImplemented
        return self.sample_rate == other.sample_rate and np.array_equal(
            self.samples, other.samples
        )

    __hash__ = None


@dataclass(frozen=True)
class WordTimeline:
    events: tuple[tuple[int, str], ...] = ()

    def __post_init__(self):
        events = tuple((int(t), str(w)) for t, w in self.events)
        for (a, _), (b, _) in zip(events, events[1:]):
            if b < a:
                raise ValidationError("word timestamps must be non-decreasing")
        object.__setattr__(self, "events", events)

    def count_between(self, start_ms: float, end_ms: float) -> int:
        return sum(1 for t, _ in self.events if start_ms <= t < end_ms)


@dataclass(frozen=True)
class LectureSession:
    frames: tuple[FrameObservation, ...]
    fps: float
    duration_ms: int
    audio: Optional[AudioTrack] = None
    words: Optional[WordTimeline] = None

    def __post_init__(self):
        if not self.fps > 0:
            raise ValidationError("fps must be positive")
        object.__setattr__(self, "frames", tuple(self.frames))
        if self.frames and self.duration_ms < self.frames[-1].t_ms:
            raise ValidationError("duration_ms is shorter than the last frame")


@dataclass(frozen=True)
class FrameRating:
    annotator_id: str
    item_id: str
    expression: int
    activity: int
    hand: int
    head: int
    overall: int


@dataclass(frozen=True)
class AudioRating:
    annotator_id: str
    item_id: str
    speech: int


@dataclass(frozen=True)
class AnnotationSet:
    frame_items: tuple[FrameRating, ...] = ()
    audio_items: tuple[AudioRating, ...] = ()

    def annotators(self) -> list[str]:
        ids = {r.annotator_id for r in self.frame_items}
        ids.update(r.annotator_id for r in self.audio_items)
        return sorted(ids)


# ---------------------------------------------------------------- frames

FRAME_REQUIRED = ("frame_idx", "t_ms", "expression", "activity")


def _int_field(rec: dict, key: str) -> int:
    v = rec[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValidationError(f"field {key!r} must be an integer")
    return v


def _parse_face(raw) -> Optional[FaceGeometry]:
    if raw is None:
        return None
    if not isinstance(raw, dict):
        raise ValidationError("field 'face' must be an object or null")
    for key in ("bbox", "nose", "eyes_detected"):
        if key not in raw:
            raise ValidationError(f"missing field 'face.{key}'")
    if not isinstance(raw["eyes_detected"], bool):
        raise ValidationError("field 'face.eyes_detected' must be a boolean")
    return FaceGeometry(tuple(raw["bbox"]), tuple(raw["nose"]), raw["eyes_detected"])


def _parse_hands(raw) -> tuple[HandObservation, ...]:
    if not isinstance(raw, list):
        raise ValidationError("field 'hands' must be a list")
    hands = []
    for h in raw:
        if not isinstance(h, dict) or "landmarks" not in h:
            raise ValidationError("each hand needs a 'landmarks' list")
        hands.append(HandObservation(tuple(tuple(p) for p in h["landmarks"])))
    return tuple(hands)


def parse_frame_record(line: str, lineno: Optional[int] = None) -> FrameObservation:
    """Parse one ``frames.jsonl`` record.

    ``face`` and ``hands`` may be omitted (null / empty); the other four
    fields are required.
    """
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", lineno) from None
    if not isinstance(rec, dict):
        raise ParseError("record must be a JSON object", lineno)
    try:
        for key in FRAME_REQUIRED:
            if key not in rec:
                raise ValidationError(f"missing required field {key!r}")
        try:
            expression = ExpressionLabel(rec["expression"])
        except ValueError:
            raise ValidationError(f"unknown expression {rec['expression']!r}") from None
        try:
            activity = ActivityLabel(rec["activity"])
        except ValueError:
            raise ValidationError(f"unknown activity {rec['activity']!r}") from None
        return FrameObservation(
            frame_idx=_int_field(rec, "frame_idx"),
            t_ms=_int_field(rec, "t_ms"),
            expression=expression,
            activity=activity,
            face=_parse_face(rec.get("face")),
            hands=_parse_hands(rec.get("hands", [])),
        )
    except ValidationError as exc:
        raise ValidationError(str(exc), lineno) from None
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"malformed record: {exc}", lineno) from None


def frame_to_record(frame: FrameObservation) -> dict:
    face = None
    if frame.face is not None:
        face = {
            "bbox": list(frame.face.bbox),
            "nose": list(frame.face.nose),
            "eyes_detected": frame.face.eyes_detected,
        }
    return {
        "frame_idx": frame.frame_idx,
        "t_ms": frame.t_ms,
        "expression": frame.expression.value,
        "activity": frame.activity.value,
        "face": face,
        "hands": [{"landmarks": [list(p) for p in h.landmarks]} for h in frame.hands],
    }


def dump_frames(frames: Iterable[FrameObservation]) -> str:
    return "".join(json.dumps(frame_to_record(f)) + "\n" for f in frames)


def frames_duration_ms(frames: Sequence[FrameObservation], fps: float) -> int:
    """Session length implied by the frames: the last frame is shown for one period."""
    if not frames:
        return 0
    return int(round(frames[-1].t_ms + 1000.0 / fps))


def parse_frame_stream(lines, fps: float) -> LectureSession:
    """Parse a whole ``frames.jsonl`` document into a session without audio.

    ``lines`` may be a string or an iterable of lines. Blank lines are skipped.
    """
    if isinstance(lines, str):
        lines = lines.splitlines()
    frames: list[FrameObservation] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        frame = parse_frame_record(line, lineno)
        if frames:
            prev = frames[-1]
            if frame.t_ms <= prev.t_ms:
                raise ValidationError("t_ms is not strictly increasing", lineno)
            if frame.frame_idx <= prev.frame_idx:
                raise ValidationError("frame_idx is not strictly increasing", lineno)
        frames.append(frame)
    return LectureSession(frames=tuple(frames), fps=fps, duration_ms=frames_duration_ms(frames, fps))


# ----------------------------------------------------------------- audio

_PCM = 1
_EXTENSIBLE = 0xFFFE


def parse_wav(data: bytes) -> AudioTrack:
    """Decode a 16-bit PCM mono RIFF/WAVE file.

    Samples are normalized as ``raw / 32768`` so the result always lies in
    [-1, 1).
    """
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise ParseError("not a RIFF/WAVE file")
    pos = 12
    fmt = None
    pcm = None
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + size]
        if len(body) < size:
            raise ParseError(f"truncated {cid.decode('latin-1')!r} chunk")
        if cid == b"fmt ":
            if size < 16:
                raise ParseError("fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
            if fmt[0] == _EXTENSIBLE and size >= 40:
                (sub,) = struct.unpack_from("<H", body, 24)
                fmt = (sub,) + fmt[1:]
        elif cid == b"data":
            pcm = body
        pos += 8 + size + (size & 1)
    if fmt is None:
        raise ParseError("missing fmt chunk")
    if pcm is None:
        raise ParseError("missing data chunk")
    tag, channels, rate, _, _, bits = fmt
    if tag != _PCM:
        raise UnsupportedFormatError(f"compressed WAV (format tag {tag:#x}) is not supported")
    if bits != 16:
        raise UnsupportedFormatError(f"{bits}-bit PCM is not supported, need 16-bit")
    if channels != 1:
        raise UnsupportedFormatError(f"{channels}-channel audio is not supported, need mono")
    if len(pcm) % 2:
        raise ParseError("data chunk length is not a whole number of samples")
    raw = np.frombuffer(pcm, dtype="<i2")
    try:
        return AudioTrack(rate, raw.astype(np.float64) / 32768.0)
    except ValidationError as exc:
        raise UnsupportedFormatError(str(exc)) from None


def encode_wav(track: AudioTrack) -> bytes:
    """Encode a track as 16-bit PCM mono. Inverse of :func:`parse_wav` for
    samples that are multiples of 1/32768."""
    raw = np.clip(np.round(track.samples * 32768.0), -32768, 32767).astype("<i2")
    buf = io.BytesIO()
    with wave.open(buf, "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(track.sample_rate)
        w.writeframes(raw.tobytes())
    return buf.getvalue()


# ----------------------------------------------------------------- words

def parse_words(lines) -> WordTimeline:
    if isinstance(lines, str):
        lines = lines.splitlines()
    events = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            t, word = rec["t_ms"], rec["word"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ParseError(f"malformed word record: {exc}", lineno) from None
        if isinstance(t, bool) or not isinstance(t, int) or t < 0:
            raise ValidationError("t_ms must be a non-negative integer", lineno)
        if events and t < events[-1][0]:
            raise ValidationError("word timestamps must be non-decreasing", lineno)
        events.append((t, str(word)))
    return WordTimeline(tuple(events))


def dump_words(words: WordTimeline) -> str:
    return "".join(json.dumps({"t_ms": t, "word": w}) + "\n" for t, w in words.events)


# ----------------------------------------------------------- annotations

ANNOTATION_COLUMNS = (
    "annotator_id", "item_id", "item_type",
    "expression", "activity", "hand", "head", "overall", "speech",
)
FRAME_FIELDS = ("expression", "activity", "hand", "head", "overall")


def _rating(value: str, column: str, lineno: int) -> int:
    value = (value or "").strip()
    if not value:
        raise ParseError(f"missing rating in column {column!r}", lineno)
    try:
        r = int(value)
    except ValueError:
        raise ParseError(f"rating {value!r} in column {column!r} is not an integer", lineno) from None
    if r not in (1, 2, 3, 4):
        raise RangeError(f"line {lineno}: rating {r} in column {column!r} outside 1..4")
    return r


def parse_annotations(text: str) -> AnnotationSet:
    """Parse ``annotations.csv``; rows are either frame or audio items."""
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames or []
    if sorted(h.strip() for h in header) != sorted(ANNOTATION_COLUMNS):
        raise ParseError(f"annotation header must be {','.join(ANNOTATION_COLUMNS)}", 1)
    frame_rows: list[FrameRating] = []
    audio_rows: list[AudioRating] = []
    seen: set[tuple[str, str, str]] = set()
    for lineno, row in enumerate(reader, start=2):
        row = {k.strip(): (v or "").strip() for k, v in row.items() if k is not None}
        ann, item, kind = row["annotator_id"], row["item_id"], row["item_type"]
        if not ann or not item:
            raise ParseError("annotator_id and item_id are required", lineno)
        key = (kind, ann, item)
        if key in seen:
            raise DuplicateError(f"line {lineno}: duplicate rating of {kind} item {item!r} by {ann!r}")
        seen.add(key)
        if kind == "frame":
            vals = {c: _rating(row[c], c, lineno) for c in FRAME_FIELDS}
            frame_rows.append(FrameRating(ann, item, **vals))
        elif kind == "audio":
            audio_rows.append(AudioRating(ann, item, _rating(row["speech"], "speech", lineno)))
        else:
            raise ParseError(f"item_type must be 'frame' or 'audio', got {kind!r}", lineno)
    return AnnotationSet(tuple(frame_rows), tuple(audio_rows))


def dump_annotations(ann: AnnotationSet) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ANNOTATION_COLUMNS)
    for r in ann.frame_items:
        w.writerow([r.annotator_id, r.item_id, "frame", r.expression, r.activity,
                    r.hand, r.head, r.overall, ""])
    for r in ann.audio_items:
        w.writerow([r.annotator_id, r.item_id, "audio", "", "", "", "", "", r.speech])
    return buf.getvalue()


# --------------------------------------------------------------- session

def build_session(
    frames: Sequence[FrameObservation],
    fps: float,
    audio: Optional[AudioTrack] = None,
    words: Optional[WordTimeline] = None,
) -> LectureSession:
    duration = frames_duration_ms(frames, fps)
    if audio is not None:
        duration = max(duration, int(round(audio.duration_ms)))
    return LectureSession(tuple(frames), fps, duration, audio, words)


def load_session(frames_path, fps: float, audio_path=None, words_path=None) -> LectureSession:
    partial = parse_frame_stream(Path(frames_path).read_text(), fps)
    audio = parse_wav(Path(audio_path).read_bytes()) if audio_path else None
    words = parse_words(Path(words_path).read_text()) if words_path else None
    return build_session(partial.frames, fps, audio, words)
