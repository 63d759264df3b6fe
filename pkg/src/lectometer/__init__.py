"""Multimodal lecture-style quality scoring and evaluation."""

from .config import ScoringConfig, VoicingConfig
from .fusion import ModalityScores, SessionReport, render_report, score_session, stream_step
from .observation import (
    ActivityLabel,
    AnnotationSet,
    AudioTrack,
    ExpressionLabel,
    FaceGeometry,
    FrameObservation,
    HandObservation,
    LectureSession,
    WordTimeline,
    load_session,
    parse_annotations,
    parse_frame_stream,
    parse_wav,
)

__version__ = "0.1.0"
