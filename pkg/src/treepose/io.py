"""Hypothesis / reference / ground-truth files and pose output files.

Hypothesis files are JSON with one hypothesis record per line, so that a
diff or an error message can point at a single record::

    {
     "format": "treepose-hypotheses",
     "version": 1,
     "header": {"frames": F, "width": W, "height": H,
                "feature_dim": D, "hist_dim": B, "parts": [...]},
     "hypotheses": [
      {"frame": 0, "part": "HeadTop", "location": [x, y], "max_marginal": .., ...},
      ...
     ],
     "reference": [{"frame": 0, "joints": {"HeadTop": [x, y], ...}}, ...],
     "ground_truth": [{"frame": 0, "head_size": h, "joints": {...}}, ...]
    }

``reference`` and ``ground_truth`` are optional.  A reference frame may omit
joints; ground truth must list all 14.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assembly import PoseSequence
from .body import PART_INDEX, REAL_PARTS, PartHypothesis, RealPart, abstract_part_of
from .errors import DataError, ParseError
from .limbs import ReferencePose

FORMAT = "treepose-hypotheses"
POSE_FORMAT = "treepose-poses"
VERSION = 1


@dataclass(frozen=True)
class FileHeader:
    frames: int
    width: float
    height: float
    feature_dim: int
    hist_dim: int
    parts: tuple = tuple(p.value for p in REAL_PARTS)

    def to_json(self) -> dict:
        return {
            "frames": self.frames,
            "width": self.width,
            "height": self.height,
            "feature_dim": self.feature_dim,
            "hist_dim": self.hist_dim,
            "parts": list(self.parts),
        }


@dataclass(frozen=True, eq=False)
class GroundTruth:
    frames: tuple
    joints: np.ndarray  # (F, 14, 2)
    head_size: np.ndarray  # (F,)

    def rows_for(self, frames):
        pos = {f: i for i, f in enumerate(self.frames)}
        missing = [f for f in frames if f not in pos]
        if missing:
            raise DataError(f"ground truth is missing frame {missing[0]}")
        idx = [pos[f] for f in frames]
        return self.joints[idx], self.head_size[idx]


@dataclass(frozen=True, eq=False)
class HypothesisFile:
    header: FileHeader
    hypotheses: tuple
    reference: ReferencePose | None = None
    truth: GroundTruth | None = None
    _index: dict = field(default=None, repr=False)

    def __post_init__(self):
        index = {}
        for h in self.hypotheses:
            index.setdefault((h.frame, h.part), []).append(h)
        object.__setattr__(self, "_index", index)

    def hyps(self, frame: int, part: RealPart) -> list:
        return self._index.get((frame, RealPart(part)), [])

    def validate(self) -> None:
        """Check file-level invariants (coverage, dimensions, bounds)."""
        hd = self.header
        for i, h in enumerate(self.hypotheses):
            where = f"record {i} (frame {h.frame}, {h.part})"
            if not 0 <= h.frame < hd.frames:
                raise DataError(f"{where}: frame outside [0, {hd.frames})")
            x, y = h.location
            if not (0.0 <= x <= hd.width and 0.0 <= y <= hd.height):
                raise DataError(f"{where}: location ({x}, {y}) outside the frame bounds")
            if h.appearance.shape != (hd.feature_dim,):
                raise DataError(f"{where}: appearance has {h.appearance.size} entries, expected {hd.feature_dim}")
            if h.color_hist is None:
                if abstract_part_of(h.part).coupled:
                    raise DataError(f"{where}: coupled-part hypotheses need a color histogram")
            elif h.color_hist.shape != (hd.hist_dim,):
                raise DataError(f"{where}: color_hist has {h.color_hist.size} bins, expected {hd.hist_dim}")
            if h.flow_next is None and h.frame < hd.frames - 1:
                raise DataError(f"{where}: flow_next is required before the last frame")
        for f in range(hd.frames):
            for part in REAL_PARTS:
                if not self.hyps(f, part):
                    raise DataError(f"no hypotheses for frame {f}, part {part}")
        if self.truth is not None:
            self.truth.rows_for(range(hd.frames))
            if np.any(~np.isfinite(self.truth.joints)):
                raise DataError("ground truth must locate all 14 parts in every frame")
            if np.any(self.truth.head_size <= 0):
                raise DataError("ground-truth head sizes must be positive")
        if self.reference is not None:
            self.reference.rows_for(range(hd.frames))


# -- writing -----------------------------------------------------------------

def _vec(a):
    return None if a is None else [float(v) for v in a]


def _hyp_record(h: PartHypothesis) -> dict:
    return {
        "frame": h.frame,
        "part": h.part.value,
        "location": _vec(h.location),
        "max_marginal": h.max_marginal,
        "foreground": h.foreground,
        "appearance": _vec(h.appearance),
        "color_hist": _vec(h.color_hist),
        "flow_next": _vec(h.flow_next),
    }


def _joints_json(row: np.ndarray, skip_missing: bool) -> dict:
    out = {}
    for j, part in enumerate(REAL_PARTS):
        if skip_missing and not np.all(np.isfinite(row[j])):
            continue
        out[part.value] = [float(row[j, 0]), float(row[j, 1])]
    return out


def _dump_line(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _array_block(key: str, records: list) -> list[str]:
    lines = [f' "{key}": [']
    for i, rec in enumerate(records):
        lines.append("  " + _dump_line(rec) + ("," if i < len(records) - 1 else ""))
    lines.append(" ]")
    return lines


def dumps_hypothesis_file(data: HypothesisFile) -> str:
    head = [
        "{",
        f' "format": "{FORMAT}",',
        f' "version": {VERSION},',
        ' "header": ' + _dump_line(data.header.to_json()) + ",",
    ]
    blocks = [_array_block("hypotheses", [_hyp_record(h) for h in data.hypotheses])]
    if data.reference is not None:
        ref = data.reference
        blocks.append(
            _array_block(
                "reference",
                [{"frame": f, "joints": _joints_json(ref.joints[i], True)} for i, f in enumerate(ref.frames)],
            )
        )
    if data.truth is not None:
        gt = data.truth
        blocks.append(
            _array_block(
                "ground_truth",
                [
                    {"frame": f, "head_size": float(gt.head_size[i]), "joints": _joints_json(gt.joints[i], False)}
                    for i, f in enumerate(gt.frames)
                ],
            )
        )
    body = []
    for i, block in enumerate(blocks):
        if i < len(blocks) - 1:
            block[-1] += ","
        body.extend(block)
    return "\n".join(head + body + ["}"]) + "\n"


def write_hypothesis_file(data: HypothesisFile, path) -> None:
    Path(path).write_text(dumps_hypothesis_file(data))


# -- reading -----------------------------------------------------------------

def _load_json(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _joints_from(obj, where: str, require_all: bool) -> np.ndarray:
    row = np.full((len(REAL_PARTS), 2), np.nan)
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: 'joints' must be an object")
    for name, xy in obj.items():
        try:
            part = RealPart(name)
        except ValueError:
            raise DataError(f"{where}: unknown part {name!r}") from None
        if not (isinstance(xy, list) and len(xy) == 2):
            raise ParseError(f"{where}: joint {name} must be [x, y]")
        row[PART_INDEX[part]] = xy
    if require_all:
        missing = [p.value for p in REAL_PARTS if not np.all(np.isfinite(row[PART_INDEX[p]]))]
        if missing:
            raise DataError(f"{where}: missing joints {', '.join(missing)}")
    return row


def loads_hypothesis_file(text: str, source: str = "<string>") -> HypothesisFile:
    doc = _load_json(text, source)
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise ParseError(f"{source}: not a {FORMAT} file")
    if doc.get("version") != VERSION:
        raise ParseError(f"{source}: unsupported version {doc.get('version')!r}")
    try:
        hd = doc["header"]
        header = FileHeader(
            int(hd["frames"]), float(hd["width"]), float(hd["height"]),
            int(hd["feature_dim"]), int(hd["hist_dim"]), tuple(hd.get("parts", FileHeader.parts)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{source}: malformed header ({exc})") from None
    unknown = set(header.parts) - {p.value for p in REAL_PARTS}
    if unknown or len(header.parts) != len(REAL_PARTS):
        raise DataError(f"{source}: part vocabulary must be the 14 real parts, got {list(header.parts)}")

    hyps = []
    for i, rec in enumerate(doc.get("hypotheses", [])):
        where = f"{source}: record {i}"
        try:
            hyps.append(
                PartHypothesis(
                    frame=rec["frame"],
                    part=rec["part"],
                    location=rec["location"],
                    max_marginal=rec["max_marginal"],
                    foreground=rec["foreground"],
                    appearance=rec["appearance"],
                    color_hist=rec.get("color_hist"),
                    flow_next=rec.get("flow_next"),
                )
            )
        except KeyError as exc:
            raise ParseError(f"{where}: missing field {exc}") from None
        except DataError as exc:
            raise DataError(f"{where}: {exc}") from None
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{where}: {exc}") from None

    reference = None
    if "reference" in doc:
        frames, rows = [], []
        for i, rec in enumerate(doc["reference"]):
            frames.append(int(rec["frame"]))
            rows.append(_joints_from(rec.get("joints", {}), f"{source}: reference {i}", False))
        reference = ReferencePose(tuple(frames), np.array(rows).reshape(-1, len(REAL_PARTS), 2))

    truth = None
    if "ground_truth" in doc:
        frames, rows, heads = [], [], []
        for i, rec in enumerate(doc["ground_truth"]):
            where = f"{source}: ground_truth {i}"
            try:
                frames.append(int(rec["frame"]))
                heads.append(float(rec["head_size"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"{where}: {exc}") from None
            rows.append(_joints_from(rec.get("joints", {}), where, True))
        truth = GroundTruth(tuple(frames), np.array(rows).reshape(-1, len(REAL_PARTS), 2), np.array(heads))

    data = HypothesisFile(header, tuple(hyps), reference, truth)
    data.validate()
    return data


def ingest(path) -> HypothesisFile:
    """Load and fully validate a hypothesis file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    return loads_hypothesis_file(text, str(path))


# -- pose sequences ----------------------------------------------------------

def dumps_poses(pose: PoseSequence, timings: dict | None = None) -> str:
    doc = {
        "format": POSE_FORMAT,
        "version": VERSION,
        "objective": pose.objective,
        "frames": [
            {"frame": f, "joints": _joints_json(pose.joints[i], False)} for i, f in enumerate(pose.frames)
        ],
    }
    if timings is not None:
        doc["timings"] = timings
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def write_poses(pose: PoseSequence, path, timings: dict | None = None) -> None:
    Path(path).write_text(dumps_poses(pose, timings))


def read_poses(path) -> PoseSequence:
    path = Path(path)
    try:
        doc = _load_json(path.read_text(), str(path))
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    if not isinstance(doc, dict) or doc.get("format") != POSE_FORMAT:
        raise ParseError(f"{path}: not a {POSE_FORMAT} file")
    frames = [int(r["frame"]) for r in doc["frames"]]
    rows = [_joints_from(r["joints"], f"{path}: frame {r['frame']}", True) for r in doc["frames"]]
    joints = np.array(rows).reshape(-1, len(REAL_PARTS), 2)
    return PoseSequence(tuple(frames), joints, {}, float(doc.get("objective", 0.0)))
