"""Select one tracklet per abstract part with tree DP over the pose graph."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .body import ABSTRACT_PARTS, PART_INDEX, POSE_TREE, REAL_PARTS, AbstractPart, RealPart, members
from .errors import DataError
from .graph import HypothesisGraph, RelationalGraph, Selection, solve_tree
from .scoring import ScoringParams, relative_location, relative_location_array
from .tracklets import Tracklet


@dataclass(frozen=True, eq=False)
class PoseSequence:
    """Per-frame locations of the 14 real parts.

    ``joints`` has shape ``(F, 14, 2)`` in ``REAL_PARTS`` order.  ``source``
    maps each abstract part to the rank of its chosen tracklet.
    """

    frames: tuple
    joints: np.ndarray
    source: Mapping[AbstractPart, int] = field(default_factory=dict)
    objective: float = 0.0

    def __post_init__(self):
        joints = np.array(self.joints, dtype=np.float64)
        if joints.shape != (len(self.frames), len(REAL_PARTS), 2):
            raise DataError(f"pose joints have shape {joints.shape}")
        joints.setflags(write=False)
        object.__setattr__(self, "joints", joints)
        object.__setattr__(self, "frames", tuple(int(f) for f in self.frames))

    def joint(self, frame_pos: int, part: RealPart | str) -> np.ndarray:
        return self.joints[frame_pos, PART_INDEX[RealPart(part)]]

    def as_dicts(self) -> list[dict]:
        return [
            {p: tuple(self.joints[i, j]) for j, p in enumerate(REAL_PARTS)}
            for i in range(len(self.frames))
        ]

    def with_joints(self, joints) -> "PoseSequence":
        return PoseSequence(self.frames, joints, self.source, self.objective)


def concat_poses(poses: Sequence[PoseSequence]) -> PoseSequence:
    """Join window results into one sequence (objective is summed)."""
    if not poses:
        return PoseSequence((), np.zeros((0, len(REAL_PARTS), 2)))
    frames = tuple(f for p in poses for f in p.frames)
    return PoseSequence(
        frames,
        np.concatenate([p.joints for p in poses]),
        {},
        float(sum(p.objective for p in poses)),
    )


def tracklet_unary(t: Tracklet) -> float:
    return float(t.objective)


def _check_pair(a: Tracklet, b: Tracklet, edge) -> None:
    if a.frames != b.frames:
        raise DataError(f"tracklets for {a.part} and {b.part} span different frame windows")
    if (a.part, b.part) != tuple(edge):
        raise DataError(f"tracklets ({a.part}, {b.part}) do not match edge {tuple(edge)}")


def tracklet_binary(a: Tracklet, b: Tracklet, edge, params: ScoringParams) -> float:
    """Frame-summed deformation score between two adjacent tracklets.

    Coupled members are paired left-left and right-right.
    """
    _check_pair(a, b, edge)
    total = 0.0
    for sa, sb in zip(a.states, b.states):
        if not a.coupled and not b.coupled:
            total += relative_location(sa.location, sb.location, edge, params)
        elif not a.coupled:
            total += relative_location(sa.location, sb.left.location, edge, params)
            total += relative_location(sa.location, sb.right.location, edge, params)
        elif not b.coupled:
            total += relative_location(sa.left.location, sb.location, edge, params)
            total += relative_location(sa.right.location, sb.location, edge, params)
        else:
            total += relative_location(sa.left.location, sb.left.location, edge, params)
            total += relative_location(sa.right.location, sb.right.location, edge, params)
    return total


def _side_tracks(t: Tracklet) -> np.ndarray:
    """``(F, sides, 2)`` locations."""
    loc = t.locations()
    return loc if t.coupled else loc[:, None, :]


def tracklet_binary_matrix(
    parent: Sequence[Tracklet], child: Sequence[Tracklet], edge, params: ScoringParams
) -> np.ndarray:
    """``tracklet_binary`` for every (parent, child) tracklet combination."""
    for a in parent:
        _check_pair(a, child[0], edge)
    for b in child:
        _check_pair(parent[0], b, edge)
    P = np.stack([_side_tracks(t) for t in parent])  # (m, F, sp, 2)
    Q = np.stack([_side_tracks(t) for t in child])  # (n, F, sq, 2)
    # left-left / right-right when both sides are coupled, otherwise broadcast
    scores = relative_location_array(P[:, None], Q[None, :], edge, params)  # (m, n, F, s)
    return scores.sum(axis=(2, 3))


def pose_graph(
    tracklets: Mapping[AbstractPart, Sequence[Tracklet]], params: ScoringParams, tree: RelationalGraph = POSE_TREE
) -> HypothesisGraph:
    for part in tree.entities:
        if not tracklets.get(part):
            raise DataError(f"no tracklets for abstract part {part}")
    unary = {p: np.array([tracklet_unary(t) for t in tracklets[p]]) for p in tree.entities}
    binary = {}
    for a, b in tree.edges:
        binary[(a, b)] = tracklet_binary_matrix(tracklets[a], tracklets[b], (a, b), params)
    return HypothesisGraph(unary, binary)


def pose_from_selection(
    tracklets: Mapping[AbstractPart, Sequence[Tracklet]], selection: Selection
) -> PoseSequence:
    chosen = {p: tracklets[p][i] for p, i in selection.chosen.items()}
    frames = next(iter(chosen.values())).frames
    joints = np.zeros((len(frames), len(REAL_PARTS), 2))
    for part, t in chosen.items():
        loc = _side_tracks(t)
        for side, real in enumerate(members(part)):
            joints[:, PART_INDEX[real]] = loc[:, side]
    return PoseSequence(frames, joints, dict(selection.chosen), selection.objective)


def assemble_pose(
    tracklets: Mapping[AbstractPart, Sequence[Tracklet]],
    params: ScoringParams,
    lambda_T: float = 1.0,
    tree: RelationalGraph = POSE_TREE,
) -> PoseSequence:
    """Best compatible tracklet per abstract part, unpacked to per-frame joints."""
    if set(tree.entities) != set(ABSTRACT_PARTS):
        raise DataError("pose tree must span the 8 abstract parts")
    graph = pose_graph(tracklets, params, tree)
    selection = solve_tree(graph, tree, lambda_T)
    return pose_from_selection(tracklets, selection)
