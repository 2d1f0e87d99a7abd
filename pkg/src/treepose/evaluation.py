"""PCP and KLE against ground truth, and report emission."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assembly import PoseSequence
from .body import PART_INDEX, RealPart as R
from .errors import DataError

CATEGORIES = ("Head", "Torso", "U.L", "L.L", "U.A.", "L.A.")

# Segments per category.  Torso runs from the shoulder centre to the hip centre.
_SEGMENTS = {
    "Head": [(R.HEAD_TOP, R.HEAD_BOTTOM)],
    "Torso": [((R.LEFT_SHOULDER, R.RIGHT_SHOULDER), (R.LEFT_HIP, R.RIGHT_HIP))],
    "U.L": [(R.LEFT_HIP, R.LEFT_KNEE), (R.RIGHT_HIP, R.RIGHT_KNEE)],
    "L.L": [(R.LEFT_KNEE, R.LEFT_ANKLE), (R.RIGHT_KNEE, R.RIGHT_ANKLE)],
    "U.A.": [(R.LEFT_SHOULDER, R.LEFT_ELBOW), (R.RIGHT_SHOULDER, R.RIGHT_ELBOW)],
    "L.A.": [(R.LEFT_ELBOW, R.LEFT_HAND), (R.RIGHT_ELBOW, R.RIGHT_HAND)],
}
# Keypoints whose errors make up each KLE column.
_KEYPOINTS = {
    "Head": [R.HEAD_TOP, R.HEAD_BOTTOM],
    "Torso": [R.LEFT_SHOULDER, R.RIGHT_SHOULDER, R.LEFT_HIP, R.RIGHT_HIP],
    "U.L": [R.LEFT_HIP, R.LEFT_KNEE, R.RIGHT_HIP, R.RIGHT_KNEE],
    "L.L": [R.LEFT_KNEE, R.LEFT_ANKLE, R.RIGHT_KNEE, R.RIGHT_ANKLE],
    "U.A.": [R.LEFT_SHOULDER, R.LEFT_ELBOW, R.RIGHT_SHOULDER, R.RIGHT_ELBOW],
    "L.A.": [R.LEFT_ELBOW, R.LEFT_HAND, R.RIGHT_ELBOW, R.RIGHT_HAND],
}


@dataclass
class EvaluationReport:
    """Per-category PCP / KLE with their averages and per-frame traces."""

    frames: list = field(default_factory=list)
    pcp: dict = field(default_factory=dict)
    kle: dict = field(default_factory=dict)
    pcp_average: float | None = None
    kle_average: float | None = None
    frame_pcp: list = field(default_factory=list)
    frame_kle: list = field(default_factory=list)
    threshold: float = 0.5

    def to_json(self) -> dict:
        return {
            "threshold": self.threshold,
            "frames": list(self.frames),
            "pcp": dict(self.pcp),
            "kle": dict(self.kle),
            "pcp_average": self.pcp_average,
            "kle_average": self.kle_average,
            "frame_pcp": list(self.frame_pcp),
            "frame_kle": list(self.frame_kle),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "EvaluationReport":
        return cls(
            frames=list(doc["frames"]),
            pcp=dict(doc["pcp"]),
            kle=dict(doc["kle"]),
            pcp_average=doc["pcp_average"],
            kle_average=doc["kle_average"],
            frame_pcp=list(doc["frame_pcp"]),
            frame_kle=list(doc["frame_kle"]),
            threshold=doc["threshold"],
        )


def _point(joints: np.ndarray, where) -> np.ndarray:
    """Joint location, or the midpoint of a pair of joints."""
    if isinstance(where, tuple):
        return 0.5 * (joints[..., PART_INDEX[where[0]], :] + joints[..., PART_INDEX[where[1]], :])
    return joints[..., PART_INDEX[where], :]


def segment_correct(est: np.ndarray, gt: np.ndarray, segment, threshold: float) -> np.ndarray:
    """Per frame: both endpoints within ``threshold`` x true segment length."""
    a, b = segment
    ea, eb, ga, gb = _point(est, a), _point(est, b), _point(gt, a), _point(gt, b)
    length = np.linalg.norm(ga - gb, axis=-1)
    ok_a = np.linalg.norm(ea - ga, axis=-1) <= threshold * length
    ok_b = np.linalg.norm(eb - gb, axis=-1) <= threshold * length
    return ok_a & ok_b


def evaluate(pose: PoseSequence, truth, pcp_threshold: float = 0.5) -> EvaluationReport:
    """PCP per limb category and head-normalised keypoint error."""
    if not 0.0 < pcp_threshold <= 1.0:
        raise ValueError(f"pcp_threshold must lie in (0, 1], got {pcp_threshold}")
    report = EvaluationReport(frames=list(pose.frames), threshold=pcp_threshold)
    if not pose.frames:
        return report
    if truth is None:
        raise DataError("evaluation needs ground truth")
    gt, head = truth.rows_for(pose.frames)
    est = pose.joints
    norm_err = np.linalg.norm(est - gt, axis=-1) / head[:, None]  # (F, 14)

    frame_hits = np.zeros(len(pose.frames))
    n_segments = 0
    for cat in CATEGORIES:
        hits = np.stack([segment_correct(est, gt, seg, pcp_threshold) for seg in _SEGMENTS[cat]])
        report.pcp[cat] = float(hits.mean())
        frame_hits += hits.sum(axis=0)
        n_segments += len(_SEGMENTS[cat])
        cols = [PART_INDEX[p] for p in _KEYPOINTS[cat]]
        report.kle[cat] = float(norm_err[:, cols].mean())
    report.pcp_average = float(np.mean([report.pcp[c] for c in CATEGORIES]))
    report.kle_average = float(np.mean([report.kle[c] for c in CATEGORIES]))
    report.frame_pcp = [float(v) for v in frame_hits / n_segments]
    report.frame_kle = [float(v) for v in norm_err.mean(axis=1)]
    return report


def format_table(report: EvaluationReport) -> str:
    """Fixed-width table with one PCP row and one KLE row."""
    cols = ("Metric",) + CATEGORIES + ("Average",)
    lines = ["".join(f"{c:>9}" for c in cols)]
    if report.pcp:
        for name, values, avg in (
            ("PCP", report.pcp, report.pcp_average),
            ("KLE", report.kle, report.kle_average),
        ):
            lines.append(f"{name:>9}" + "".join(f"{values[c]:>9.3f}" for c in CATEGORIES) + f"{avg:>9.3f}")
    return "\n".join(lines) + "\n"


def emit_report(report: EvaluationReport, fmt: str = "table", path=None) -> str:
    """Render ``report`` as ``table`` or ``json``; write it when ``path`` is given."""
    if fmt == "table":
        text = format_table(report)
    elif fmt == "json":
        text = json.dumps(report.to_json(), indent=1, sort_keys=True) + "\n"
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text


def read_report(path) -> EvaluationReport:
    return EvaluationReport.from_json(json.loads(Path(path).read_text()))
