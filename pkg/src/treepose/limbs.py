"""Anatomical left/right resolution of limbs.

A limb pair joins two adjacent coupled parts (e.g. knees and ankles).  Its
flag in a ``LimbAssignment`` says whether the distal joints of that pair must
exchange their left/right labels.  Pairs are handled proximal to distal so a
correction of the knees is visible when the lower legs are examined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

import numpy as np

from .assembly import PoseSequence
from .body import PART_INDEX, AbstractPart, members
from .errors import DataError
from .graph import HypothesisGraph, RelationalGraph, solve_tree

DEFAULT_C = 1.0 / 3.0


class LimbPair(str, Enum):
    UPPER_ARM = "UpperArm"
    LOWER_ARM = "LowerArm"
    UPPER_LEG = "UpperLeg"
    LOWER_LEG = "LowerLeg"

    def __str__(self):
        return self.value


# proximal -> distal abstract parts, processing order matters
LIMB_PAIRS = {
    LimbPair.UPPER_ARM: (AbstractPart.SHOULDER, AbstractPart.ELBOW),
    LimbPair.LOWER_ARM: (AbstractPart.ELBOW, AbstractPart.HAND),
    LimbPair.UPPER_LEG: (AbstractPart.HIP, AbstractPart.KNEE),
    LimbPair.LOWER_LEG: (AbstractPart.KNEE, AbstractPart.ANKLE),
}


@dataclass(frozen=True)
class Limb:
    joint1: tuple
    joint2: tuple

    def __post_init__(self):
        j1 = tuple(float(v) for v in self.joint1)
        j2 = tuple(float(v) for v in self.joint2)
        object.__setattr__(self, "joint1", j1)
        object.__setattr__(self, "joint2", j2)


@dataclass(frozen=True, eq=False)
class ReferencePose:
    """Reference joints with anatomical labels; NaN marks a missing joint."""

    frames: tuple
    joints: np.ndarray

    def __post_init__(self):
        joints = np.array(self.joints, dtype=np.float64)
        joints.setflags(write=False)
        object.__setattr__(self, "joints", joints)
        object.__setattr__(self, "frames", tuple(int(f) for f in self.frames))

    def rows_for(self, frames) -> np.ndarray:
        pos = {f: i for i, f in enumerate(self.frames)}
        missing = [f for f in frames if f not in pos]
        if missing:
            raise DataError(f"reference pose is missing frame {missing[0]}")
        return self.joints[[pos[f] for f in frames]]


LimbAssignment = Mapping[LimbPair, np.ndarray]


def limb_mismatch(L: Limb, ref: Limb) -> float:
    """Sum of squared endpoint distances."""
    a = np.subtract(L.joint1, ref.joint1)
    b = np.subtract(L.joint2, ref.joint2)
    return float(a @ a + b @ b)


def _orient(p, q, r) -> float:
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def _on_segment(p, q, r) -> bool:
    return min(p[0], q[0]) <= r[0] <= max(p[0], q[0]) and min(p[1], q[1]) <= r[1] <= max(p[1], q[1])


def segments_intersect(a: Limb, b: Limb) -> bool:
    """Closed-segment test: crossings, touching endpoints and collinear overlap count."""
    p1, p2, q1, q2 = a.joint1, a.joint2, b.joint1, b.joint2
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    if d1 == 0 and _on_segment(q1, q2, p1):
        return True
    if d2 == 0 and _on_segment(q1, q2, p2):
        return True
    if d3 == 0 and _on_segment(p1, p2, q1):
        return True
    if d4 == 0 and _on_segment(p1, p2, q2):
        return True
    return False


def compatibility(Ll: Limb, Lr: Limb, refL: Limb, refR: Limb, c: float) -> float:
    """``c`` if both pairs agree on crossing, else ``1 - c``."""
    agree = segments_intersect(Ll, Lr) == segments_intersect(refL, refR)
    return c if agree else 1.0 - c


def pair_mismatch(Ll: Limb, Lr: Limb, refL: Limb, refR: Limb, c: float = DEFAULT_C) -> float:
    _check_c(c)
    return compatibility(Ll, Lr, refL, refR, c) * (limb_mismatch(Ll, refL) + limb_mismatch(Lr, refR))


def _check_c(c: float) -> None:
    if not 0.0 < c < 1.0:
        raise ValueError(f"c must lie in (0, 1), got {c}")


def _joint_ids(pair: LimbPair):
    prox, dist = LIMB_PAIRS[pair]
    (pl, pr), (dl, dr) = members(prox), members(dist)
    return tuple(PART_INDEX[p] for p in (pl, pr, dl, dr))


def _limbs(joints: np.ndarray, pair: LimbPair, swap: bool):
    """(left limb, right limb) in one frame, optionally exchanging the distal joints."""
    pl, pr, dl, dr = _joint_ids(pair)
    if swap:
        dl, dr = dr, dl
    return Limb(joints[pl], joints[dl]), Limb(joints[pr], joints[dr])


def _ref_limbs(ref_row: np.ndarray, pair: LimbPair):
    L, R = _limbs(ref_row, pair, False)
    if not np.all(np.isfinite(L.joint1 + L.joint2 + R.joint1 + R.joint2)):
        return None
    return L, R


def apply_assignment(pose: PoseSequence, assignment: LimbAssignment) -> PoseSequence:
    """Exchange the distal left/right joints wherever a flag is set."""
    joints = np.array(pose.joints)
    for pair, flags in assignment.items():
        _, _, dl, dr = _joint_ids(LimbPair(pair))
        flags = np.asarray(flags, dtype=bool)
        joints[flags, dl], joints[flags, dr] = pose.joints[flags, dr], pose.joints[flags, dl]
    return pose.with_joints(joints)


def _frame_costs(joints, ref_row, pair, c):
    """(keep, swap) alignment mismatch in one frame; ``None`` without a reference."""
    ref = _ref_limbs(ref_row, pair)
    if ref is None:
        return None
    return tuple(pair_mismatch(*_limbs(joints, pair, s), *ref, c) for s in (False, True))


def align_limbs(pose: PoseSequence, refs: ReferencePose, c: float = DEFAULT_C) -> dict:
    """Per frame and limb pair, keep or swap whichever matches the reference better."""
    _check_c(c)
    ref_rows = refs.rows_for(pose.frames)
    out = {}
    current = pose
    for pair in LIMB_PAIRS:
        flags = np.zeros(len(pose.frames), dtype=bool)
        for f in range(len(pose.frames)):
            costs = _frame_costs(current.joints[f], ref_rows[f], pair, c)
            flags[f] = costs is not None and costs[1] < costs[0]
        out[pair] = flags
        current = apply_assignment(current, {pair: flags})
    return out


def _temporal_cost(joints_a, joints_b, ref_a, ref_b, pair, swap_a, swap_b, c) -> float:
    la, ra = _limbs(joints_a, pair, swap_a)
    lb, rb = _limbs(joints_b, pair, swap_b)
    ca = _frame_compat(la, ra, ref_a, pair, c)
    cb = _frame_compat(lb, rb, ref_b, pair, c)
    # exactly rounded, so relabelings with the same four terms tie exactly
    terms = [
        _sq(la.joint1, lb.joint1), _sq(la.joint2, lb.joint2),
        _sq(ra.joint1, rb.joint1), _sq(ra.joint2, rb.joint2),
    ]
    return ca * cb * math.fsum(terms)


def _sq(p, q) -> float:
    dx, dy = p[0] - q[0], p[1] - q[1]
    return dx * dx + dy * dy


def _frame_compat(L, R, ref_row, pair, c) -> float:
    ref = _ref_limbs(ref_row, pair)
    if ref is None:
        return c
    return compatibility(L, R, *ref, c)


def refinement_cost(joints: np.ndarray, ref_rows: np.ndarray, pair: LimbPair, flags, c: float = DEFAULT_C) -> float:
    """Sum of neighbouring-frame mismatches for one limb pair under ``flags``."""
    flags = np.asarray(flags, dtype=bool)
    return float(
        sum(
            _temporal_cost(joints[f], joints[f + 1], ref_rows[f], ref_rows[f + 1], pair, flags[f], flags[f + 1], c)
            for f in range(len(flags) - 1)
        )
    )


def refine_limbs(pose: PoseSequence, refs: ReferencePose, aligned: LimbAssignment, c: float = DEFAULT_C) -> dict:
    """Temporally consistent flags per limb pair by chain DP.

    Each frame has two states: follow the aligned flag (state 0) or invert it
    (state 1).  Transition costs are negated and maximised with the tree
    solver, so equal-cost choices fall back to the aligned flag.
    """
    _check_c(c)
    n = len(pose.frames)
    if n < 2:
        raise DataError("limb refinement needs a window of at least two frames")
    ref_rows = refs.rows_for(pose.frames)
    chain = RelationalGraph.chain(range(n))
    out = {}
    current = pose
    for pair in LIMB_PAIRS:
        base = np.asarray(aligned[pair], dtype=bool)
        unary = {f: np.zeros(2) for f in range(n)}
        binary = {}
        for f in range(n - 1):
            w = np.empty((2, 2))
            for a in (0, 1):
                for b in (0, 1):
                    w[a, b] = -_temporal_cost(
                        current.joints[f], current.joints[f + 1], ref_rows[f], ref_rows[f + 1],
                        pair, bool(base[f] ^ a), bool(base[f + 1] ^ b), c,
                    )
            binary[(f, f + 1)] = w
        sel = solve_tree(HypothesisGraph(unary, binary), chain, 1.0)
        flags = np.array([bool(base[f] ^ sel.chosen[f]) for f in range(n)])
        out[pair] = flags
        current = apply_assignment(current, {pair: flags})
    return out
