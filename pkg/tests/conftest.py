import struct

import numpy as np
import pytest

from lectometer.observation import (
    AudioTrack,
    FaceGeometry,
    FrameObservation,
    HandObservation,
)

FACE_BOX = (0.3, 0.2, 0.4, 0.5)


def face(dx=0.0, dy=0.0, eyes=True, bbox=FACE_BOX):
    """Face whose nose sits at offset (dx, dy) in half-extent units."""
    x, y, w, h = bbox
    nose = (x + w / 2 + dx * w / 2, y + h / 2 + dy * h / 2)
    return FaceGeometry(bbox, nose, eyes)


def hand_at(x, y):
    return HandObservation(((x, y),))


def frame(i, expression="happy", activity="attending", face_=..., hands=(), fps=30):
    if face_ is ...:
        face_ = face()
    return FrameObservation(i, int(round(i * 1000 / fps)), expression, activity, face_, tuple(hands))


def wav_bytes(raw, rate=16000, bits=16, channels=1, fmt_tag=1, data_len=None):
    """Hand-assembled RIFF/WAVE container; independent of the encoder under test."""
    if bits == 16:
        payload = struct.pack(f"<{len(raw)}h", *raw)
    else:
        payload = bytes(int(v) & 0xFF for v in raw)
    block = channels * bits // 8
    fmt = struct.pack("<HHIIHH", fmt_tag, channels, rate, rate * block, block, bits)
    size = len(payload) if data_len is None else data_len
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt + b"data" + struct.pack("<I", size) + payload
    return b"RIFF" + struct.pack("<I", len(body)) + body


def tone(amplitude, seconds, rate=16000, hz=440.0):
    t = np.arange(int(seconds * rate)) / rate
    return amplitude * np.sin(2 * np.pi * hz * t)


def constant_track(amplitude, seconds, rate=16000):
    return AudioTrack(rate, np.full(int(seconds * rate), amplitude))


@pytest.fixture
def burst_track():
    """1 s tone, 1 s silence, 1 s tone at amplitude 0.5."""
    rate = 16000
    x = np.concatenate([tone(0.5, 1.0), np.zeros(rate), tone(0.5, 1.0)])
    return AudioTrack(rate, x)


# ------------------------------------------------------ evaluation fixtures

ANNOTATION_HEADER = "annotator_id,item_id,item_type,expression,activity,hand,head,overall,speech\n"

# rows = actual (High, Low), columns = predicted (High, Low)
EXPRESSIONS_MATRIX = ((64, 4), (13, 19))


def expressions_items():
    """(actual_high, predicted_high) per item for the expressions matrix."""
    (hh, hl), (lh, ll) = EXPRESSIONS_MATRIX
    return [(True, True)] * hh + [(True, False)] * hl + [(False, True)] * lh + [(False, False)] * ll


def expressions_fixture(annotators=3):
    """Annotation CSV text and machine frame scores reproducing the matrix.

    Every annotator gives the same ratings; all modalities other than
    expression agree with the machine.
    """
    from lectometer.fusion import FrameScore, ModalityScores

    rows, frames = [], []
    for i, (actual, predicted) in enumerate(expressions_items()):
        expr = 4 if actual else 1
        for a in range(annotators):
            rows.append(f"a{a},{i},frame,{expr},4,4,4,4,\n")
            rows.append(f"a{a},{i},audio,,,,,,4\n")
        frames.append(FrameScore(i, i * 33, ModalityScores(int(predicted), 1, 1, 1, 1)))
    return ANNOTATION_HEADER + "".join(rows), frames


def report_text(frames):
    from lectometer.fusion import SessionReport, render_report

    return render_report(SessionReport(tuple(frames), (), {}, {}), "json")
