"""Scoring configuration.

One flat dataclass holds every tunable knob so that CLI flags, config-file
keys and the config echo written into reports all share the same names.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping, Optional

from .errors import UsageError

CONFIG_ENV = "LECTOMETER_CONFIG"


@dataclass(frozen=True)
class VoicingConfig:
    frame_ms: float = 25.0
    hop_ms: float = 10.0
    silence_rms: float = 0.005
    min_gap_ms: float = 200.0
    min_voiced_ms: float = 100.0
    window_ms: int = 180_000
    min_final_window_ms: int = 30_000
    question_rms: float = 0.01


@dataclass(frozen=True)
class ScoringConfig:
    fps: float = 30.0
    # audio
    window_ms: int = 180_000
    min_final_window_ms: int = 30_000
    frame_ms: float = 25.0
    hop_ms: float = 10.0
    silence_rms: float = 0.005
    min_gap_ms: float = 200.0
    min_voiced_ms: float = 100.0
    # visual
    pose_mild: float = 0.35
    pose_extreme: float = 0.75
    hand_moving_speed: float = 0.002
    hand_window_ms: float = 1000.0
    # alerts
    alert_threshold: int = 2
    alert_sustain_ms: float = 2000.0

    def __post_init__(self):
        if not self.fps > 0:
            raise UsageError("fps must be positive")
        if self.window_ms <= 0:
            raise UsageError("window_ms must be positive")
        if self.hop_ms <= 0 or self.frame_ms <= 0:
            raise UsageError("frame_ms and hop_ms must be positive")
        if not 0 < self.pose_mild < self.pose_extreme:
            raise UsageError("need 0 < pose_mild < pose_extreme")

    @property
    def voicing(self) -> VoicingConfig:
        return VoicingConfig(
            frame_ms=self.frame_ms,
            hop_ms=self.hop_ms,
            silence_rms=self.silence_rms,
            min_gap_ms=self.min_gap_ms,
            min_voiced_ms=self.min_voiced_ms,
            window_ms=self.window_ms,
            min_final_window_ms=self.min_final_window_ms,
        )

    @property
    def hand_window_frames(self) -> int:
        return max(1, int(round(self.hand_window_ms * self.fps / 1000.0)))

    @property
    def alert_sustain_frames(self) -> int:
        return max(1, int(round(self.alert_sustain_ms * self.fps / 1000.0)))

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def updated(self, values: Mapping[str, Any]) -> "ScoringConfig":
        known = {f.name for f in fields(self)}
        clean = {}
        for key, value in values.items():
            name = key.replace("-", "_")
            if name not in known:
                raise UsageError(f"unknown config key {key!r}")
            if value is None:
                continue
            kind = type(getattr(self, name))
            try:
                clean[name] = kind(value)
            except (TypeError, ValueError):
                raise UsageError(f"config key {key!r} needs a {kind.__name__}") from None
        return replace(self, **clean)


def load_config_file(path) -> dict[str, Any]:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    return data


def resolve_config(
    flags: Optional[Mapping[str, Any]] = None,
    config_path=None,
    env: Optional[Mapping[str, str]] = None,
) -> ScoringConfig:
    """Defaults, overlaid by the config file, overlaid by explicit flags."""
    env = os.environ if env is None else env
    cfg = ScoringConfig()
    path = config_path or env.get(CONFIG_ENV)
    if path:
        cfg = cfg.updated(load_config_file(path))
    if flags:
        cfg = cfg.updated(flags)
    return cfg
