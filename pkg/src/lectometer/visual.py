"""Per-frame visual sub-scores: expression, activity, facial pose, hand motion."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .errors import GeometryError, OrderingError
from .observation import (
    ActivityLabel,
    ExpressionLabel,
    FaceGeometry,
    HandObservation,
    Point,
)

POSITIVE_EXPRESSIONS = frozenset(
    {ExpressionLabel.HAPPY, ExpressionLabel.SURPRISE, ExpressionLabel.NEUTRAL}
)
POSITIVE_ACTIVITIES = frozenset(
    {ActivityLabel.ATTENDING, ActivityLabel.WRITING, ActivityLabel.HAND_RAISING}
)


class PoseLabel(str, Enum):
    FORWARD = "forward"
    LEFT = "left"
    RIGHT = "right"
    UP = "up"
    DOWN = "down"
    FAR_LEFT = "far_left"
    FAR_RIGHT = "far_right"
    FAR_UP = "far_up"
    FAR_DOWN = "far_down"
    BACKWARDS = "backwards"


POSITIVE_POSES = frozenset(
    {PoseLabel.FORWARD, PoseLabel.LEFT, PoseLabel.RIGHT, PoseLabel.UP, PoseLabel.DOWN}
)


@dataclass(frozen=True)
class PoseThresholds:
    """Pose bands as fractions of the bbox half-extent."""

    mild: float = 0.35
    extreme: float = 0.75

    def __post_init__(self):
        if not 0 < self.mild < self.extreme:
            raise ValueError("need 0 < mild < extreme")


def expression_score(label: ExpressionLabel) -> int:
    return int(ExpressionLabel(label) in POSITIVE_EXPRESSIONS)


def activity_score(label: ActivityLabel) -> int:
    return int(ActivityLabel(label) in POSITIVE_ACTIVITIES)


def pose_offsets(face: FaceGeometry) -> tuple[float, float]:
    """Nose offset from the bbox centre in units of the half-width/half-height."""
    x, y, w, h = face.bbox
    if w <= 0 or h <= 0:
        raise GeometryError("bbox has zero width or height")
    cx, cy = x + w / 2, y + h / 2
    return (face.nose[0] - cx) / (w / 2), (face.nose[1] - cy) / (h / 2)


def pose_classify(face: FaceGeometry, th: PoseThresholds = PoseThresholds()) -> PoseLabel:
    """Looking direction from where the nose tip sits inside the face box.

    No eyes found means the lecturer faces away. Otherwise the axis with the
    larger offset decides (horizontal on ties); right and down are positive
    dx and dy.
    """
    if not face.eyes_detected:
        return PoseLabel.BACKWARDS
    dx, dy = pose_offsets(face)
    if max(abs(dx), abs(dy)) < th.mild:
        return PoseLabel.FORWARD
    if abs(dx) >= abs(dy):
        far = abs(dx) >= th.extreme
        if dx > 0:
            return PoseLabel.FAR_RIGHT if far else PoseLabel.RIGHT
        return PoseLabel.FAR_LEFT if far else PoseLabel.LEFT
    far = abs(dy) >= th.extreme
    if dy > 0:
        return PoseLabel.FAR_DOWN if far else PoseLabel.DOWN
    return PoseLabel.FAR_UP if far else PoseLabel.UP


def pose_score(label: Optional[PoseLabel]) -> int:
    # None: no face in the frame
    return int(label is not None and PoseLabel(label) in POSITIVE_POSES)


# ------------------------------------------------------------------ hands

def centroid(points: Sequence[Point]) -> Point:
    if not points:
        raise GeometryError("centroid of an empty point set")
    n = len(points)
    return (math.fsum(p[0] for p in points) / n, math.fsum(p[1] for p in points) / n)


@dataclass(frozen=True)
class HandTrackState:
    """Kinematic state of one tracked hand.

    ``speed_history`` holds ``(frame_idx, speed)`` pairs; speed is None for
    the observation that started the track (no displacement yet).
    """

    prev_centroid: Optional[Point] = None
    prev_frame_idx: Optional[int] = None
    speed_history: tuple[tuple[int, Optional[float]], ...] = ()


def hand_kinematics(
    state: HandTrackState,
    centroid_now: Point,
    frame_idx: int,
    history_frames: Optional[int] = None,
) -> tuple[float, Optional[float], HandTrackState]:
    """Advance a hand track by one observation.

    Returns ``(speed, direction_deg, new_state)``. Speed is distance per
    elapsed frame in normalized units; direction is measured with y flipped,
    so 90 degrees points up the screen. A fresh track yields speed 0 and no
    direction. ``history_frames`` bounds how much speed history is kept.
    """
    if state.prev_centroid is None:
        speed, direction, entry = 0.0, None, None
    else:
        elapsed = frame_idx - state.prev_frame_idx
        if elapsed <= 0:
            raise OrderingError(
                f"frame {frame_idx} does not follow frame {state.prev_frame_idx}"
            )
        ddx = centroid_now[0] - state.prev_centroid[0]
        ddy = centroid_now[1] - state.prev_centroid[1]
        speed = math.hypot(ddx, ddy) / elapsed
        direction = math.degrees(math.atan2(-ddy, ddx))
        if direction == -180.0:
            direction = 180.0
        entry = speed
    history = state.speed_history + ((frame_idx, entry),)
    if history_frames is not None:
        history = tuple(h for h in history if h[0] > frame_idx - history_frames)
    return speed, direction, HandTrackState(centroid_now, frame_idx, history)


def hand_motion_score(
    speed_history: Sequence[tuple[int, Optional[float]]],
    window_frames: int,
    moving_speed: float = 0.002,
    frame_idx: Optional[int] = None,
) -> int:
    """1 if hands moved over the trailing ``window_frames`` frames.

    ``speed_history`` holds one ``(frame_idx, speed)`` entry per frame in
    which a hand was seen; ``frame_idx`` defaults to the latest entry. The
    verdict is the mean measured speed against ``moving_speed``. A window
    whose only sightings are hands that just appeared counts as moving:
    the hand entered the view.
    """
    if not speed_history:
        return 0
    now = speed_history[-1][0] if frame_idx is None else frame_idx
    recent = [s for f, s in speed_history if now - window_frames < f <= now]
    if not recent:
        return 0
    measured = [s for s in recent if s is not None]
    if not measured:
        return 1
    return int(math.fsum(measured) / len(measured) >= moving_speed)


@dataclass(frozen=True)
class HandTracker:
    """Tracks every visible hand across frames.

    Hands in a new frame are matched to the nearest unmatched previous track
    (closest pairs first). Tracks unseen for more than ``window_frames``
    frames are dropped. The frame speed is the fastest matched hand; the
    frame-level history feeds :func:`hand_motion_score`.
    """

    window_frames: int = 30
    moving_speed: float = 0.002
    tracks: tuple[HandTrackState, ...] = ()
    history: tuple[tuple[int, Optional[float]], ...] = field(default=())
    last_frame_idx: Optional[int] = None

    def step(self, frame_idx: int, hands: Sequence[HandObservation]) -> tuple["HandTracker", int, Optional[float]]:
        """Feed one frame; returns ``(new_tracker, hand_score, frame_speed)``."""
        if self.last_frame_idx is not None and frame_idx <= self.last_frame_idx:
            raise OrderingError(f"frame {frame_idx} does not follow frame {self.last_frame_idx}")
        live = [t for t in self.tracks if frame_idx - t.prev_frame_idx <= self.window_frames]
        cents = [centroid(h.landmarks) for h in hands]

        pairs = sorted(
            (math.dist(c, t.prev_centroid), ci, ti)
            for ci, c in enumerate(cents)
            for ti, t in enumerate(live)
        )
        match: dict[int, int] = {}
        used: set[int] = set()
        for _, ci, ti in pairs:
            if ci not in match and ti not in used:
                match[ci] = ti
                used.add(ti)

        new_tracks = [t for ti, t in enumerate(live) if ti not in used]
        speeds: list[Optional[float]] = []
        for ci, c in enumerate(cents):
            base = live[match[ci]] if ci in match else HandTrackState()
            speed, _, nxt = hand_kinematics(base, c, frame_idx, self.window_frames)
            new_tracks.append(nxt)
            speeds.append(None if ci not in match else speed)

        history = self.history
        frame_speed: Optional[float] = None
        if cents:
            measured = [s for s in speeds if s is not None]
            frame_speed = max(measured) if measured else None
            history = history + ((frame_idx, frame_speed),)
        history = tuple(h for h in history if h[0] > frame_idx - self.window_frames)
        score = hand_motion_score(history, self.window_frames, self.moving_speed, frame_idx)
        tracker = HandTracker(
            self.window_frames,
            self.moving_speed,
            tuple(sorted(new_tracks, key=lambda t: (t.prev_centroid, t.prev_frame_idx))),
            history,
            frame_idx,
        )
        return tracker, score, frame_speed
