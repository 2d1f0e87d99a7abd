"""End-to-end run: windows -> tracklets -> pose assembly -> limb inference."""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .assembly import PoseSequence, assemble_pose, concat_poses
from .body import (
    ABSTRACT_PARTS,
    DEFAULT_COUPLED_CAP,
    PART_INDEX,
    POSE_EDGES,
    REAL_PARTS,
    AbstractPart,
    compose_coupled,
    members,
)
from .errors import ConfigError, DataError, ParseError
from .io import HypothesisFile
from .limbs import DEFAULT_C, align_limbs, apply_assignment, refine_limbs
from .scoring import Deformation, ScoringParams, detection_scores
from .tracklets import coupled_part_tracklets, single_part_tracklets

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineConfig:
    scoring: ScoringParams = field(default_factory=ScoringParams)
    lambda_s: float = 1.0
    lambda_c: float = 1.0
    lambda_T: float = 1.0
    window_length: int = 15
    hyps_per_part: int = 20
    tracklets_per_part: int = 10
    coupled_cap: int = DEFAULT_COUPLED_CAP
    limb_c: float = DEFAULT_C
    pcp_threshold: float = 0.5
    # defaults derived from the person height when not configured explicitly
    height_fraction: float = 0.1
    deform_scale_fraction: float = 0.2
    limbs: bool = True
    workers: int = 1

    def __post_init__(self):
        for name in ("window_length", "hyps_per_part", "tracklets_per_part", "coupled_cap", "workers"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not 0.0 < self.pcp_threshold <= 1.0:
            raise ConfigError(f"pcp_threshold must lie in (0, 1], got {self.pcp_threshold}")
        if not 0.0 < self.limb_c < 1.0:
            raise ConfigError(f"limb_c must lie in (0, 1), got {self.limb_c}")
        if not (self.height_fraction > 0 and self.deform_scale_fraction > 0):
            raise ConfigError("height fractions must be > 0")


def _edge_key(edge) -> str:
    return f"{edge[0].value}-{edge[1].value}"


def config_from_dict(doc: dict) -> PipelineConfig:
    """Build a config from the JSON layout documented in the README."""
    doc = dict(doc)
    scoring_keys = {"alpha", "sigma", "theta", "chi_eps"}
    scoring = {k: doc.pop(k) for k in list(doc) if k in scoring_keys}
    deform = {}
    by_name = {_edge_key(e): e for e in POSE_EDGES}
    for name, entry in doc.pop("deformation", {}).items():
        if name not in by_name:
            raise ConfigError(f"unknown deformation edge {name!r}; expected one of {sorted(by_name)}")
        deform[by_name[name]] = Deformation(**entry)
    known = {f.name for f in fields(PipelineConfig)} - {"scoring"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    try:
        return PipelineConfig(scoring=ScoringParams(deformation=deform, **scoring), **doc)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path=None, overrides: dict | None = None) -> PipelineConfig:
    doc = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ParseError(f"{path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    doc.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return config_from_dict(doc)


# -- per-window parameter resolution ---------------------------------------------

def _top_joints(window: dict, params: ScoringParams) -> np.ndarray:
    """``(F, 14, 2)`` location of the best-scored hypothesis per frame and part."""
    frames = sorted({f for f, _ in window})
    out = np.zeros((len(frames), len(REAL_PARTS), 2))
    for i, f in enumerate(frames):
        for part in REAL_PARTS:
            hyps = window[(f, part)]
            out[i, PART_INDEX[part]] = hyps[int(np.argmax(detection_scores(hyps, params)))].location
    return out


def resolve_params(window: dict, config: PipelineConfig) -> ScoringParams:
    """Fill unset sigma / theta / deformation kernels from the window's data.

    sigma and theta default to ``height_fraction`` of the median person height
    (vertical extent of the best hypotheses per frame).  Missing deformation
    kernels are centred on the median parent-child offset of those same best
    hypotheses, with scale ``deform_scale_fraction`` of the height.
    """
    params = config.scoring
    top = _top_joints(window, params)
    height = float(np.median(top[..., 1].max(axis=1) - top[..., 1].min(axis=1)))
    if height <= 0:
        height = 1.0
    updates = {}
    if params.sigma is None:
        updates["sigma"] = config.height_fraction * height
    if params.theta is None:
        updates["theta"] = config.height_fraction * height
    deform = dict(params.deformation)
    for edge in POSE_EDGES:
        if edge in deform:
            continue
        pa, pb = members(edge[0]), members(edge[1])
        if len(pa) == len(pb):
            pairs = list(zip(pa, pb))
        else:
            pairs = [(a, b) for a in pa for b in pb]
        offsets = np.mean([top[:, PART_INDEX[a]] - top[:, PART_INDEX[b]] for a, b in pairs], axis=0)
        deform[edge] = Deformation(
            tuple(np.median(offsets, axis=0)), config.deform_scale_fraction * height, 1.0
        )
    updates["deformation"] = deform
    return replace(params, **updates)


# -- running ---------------------------------------------------------------------

@dataclass
class PipelineResult:
    windows: list
    timings: list

    @property
    def pose(self) -> PoseSequence:
        return concat_poses(self.windows)


def _window_hyps(data: HypothesisFile, frames, config: PipelineConfig) -> dict:
    window = {}
    for f in frames:
        for part in REAL_PARTS:
            hyps = data.hyps(f, part)
            if not hyps:
                raise DataError(f"no hypotheses for frame {f}, part {part}")
            scores = detection_scores(hyps, config.scoring)
            keep = np.sort(np.argsort(-scores, kind="stable")[: config.hyps_per_part])
            window[(f, part)] = [hyps[i] for i in keep]
    return window


def part_tracklets(part: AbstractPart, window: dict, frames, params: ScoringParams, config: PipelineConfig):
    real = members(part)
    if len(real) == 1:
        per_frame = [window[(f, real[0])] for f in frames]
        return single_part_tracklets(per_frame, params, config.lambda_s, config.tracklets_per_part)
    per_frame = [
        compose_coupled(window[(f, real[0])], window[(f, real[1])], params, config.coupled_cap) for f in frames
    ]
    return coupled_part_tracklets(per_frame, params, config.lambda_c, config.tracklets_per_part)


def run_window(data: HypothesisFile, frames, config: PipelineConfig):
    """Process one window; returns (pose, per-stage seconds)."""
    timings = {}
    t0 = time.perf_counter()
    window = _window_hyps(data, frames, config)
    params = resolve_params(window, config)

    def build(part):
        try:
            return part_tracklets(part, window, frames, params, config)
        except DataError as exc:
            raise DataError(f"window starting at frame {frames[0]}, part {part}: {exc}") from None

    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            tracklets = dict(zip(ABSTRACT_PARTS, pool.map(build, ABSTRACT_PARTS)))
    else:
        tracklets = {part: build(part) for part in ABSTRACT_PARTS}
    t1 = time.perf_counter()
    timings["tracklets"] = t1 - t0
    pose = assemble_pose(tracklets, params, config.lambda_T)
    t2 = time.perf_counter()
    timings["assembly"] = t2 - t1
    if config.limbs and data.reference is not None:
        assignment = align_limbs(pose, data.reference, config.limb_c)
        if len(frames) >= 2:
            assignment = refine_limbs(pose, data.reference, assignment, config.limb_c)
        pose = apply_assignment(pose, assignment)
    timings["limbs"] = time.perf_counter() - t2
    return pose, timings


def windows_of(n_frames: int, length: int) -> list[tuple]:
    """Consecutive non-overlapping blocks; the last one may be shorter."""
    return [tuple(range(s, min(s + length, n_frames))) for s in range(0, n_frames, length)]


def run_pipeline(data: HypothesisFile, config: PipelineConfig | None = None) -> PipelineResult:
    config = config or PipelineConfig()
    poses, timings = [], []
    for frames in windows_of(data.header.frames, config.window_length):
        pose, t = run_window(data, frames, config)
        log.info(
            "frames %d-%d: tracklets %.3fs, assembly %.3fs, limbs %.3fs",
            frames[0], frames[-1], t["tracklets"], t["assembly"], t["limbs"],
        )
        poses.append(pose)
        timings.append(t)
    return PipelineResult(poses, timings)
