"""Real and abstract body parts, part hypotheses and the pose tree."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DataError
from .graph import RelationalGraph
from .scoring import ScoringParams, coupled_unary_matrix

DEFAULT_COUPLED_CAP = 400


class RealPart(str, Enum):
    HEAD_TOP = "HeadTop"
    HEAD_BOTTOM = "HeadBottom"
    LEFT_SHOULDER = "LeftShoulder"
    RIGHT_SHOULDER = "RightShoulder"
    LEFT_ELBOW = "LeftElbow"
    RIGHT_ELBOW = "RightElbow"
    LEFT_HAND = "LeftHand"
    RIGHT_HAND = "RightHand"
    LEFT_HIP = "LeftHip"
    RIGHT_HIP = "RightHip"
    LEFT_KNEE = "LeftKnee"
    RIGHT_KNEE = "RightKnee"
    LEFT_ANKLE = "LeftAnkle"
    RIGHT_ANKLE = "RightAnkle"

    def __str__(self):
        return self.value


class AbstractPart(str, Enum):
    HEAD_TOP = "HeadTop"
    HEAD_BOTTOM = "HeadBottom"
    SHOULDER = "Shoulder"
    ELBOW = "Elbow"
    HAND = "Hand"
    HIP = "Hip"
    KNEE = "Knee"
    ANKLE = "Ankle"

    def __str__(self):
        return self.value

    @property
    def coupled(self) -> bool:
        return len(MEMBERS[self]) == 2


REAL_PARTS = tuple(RealPart)
ABSTRACT_PARTS = tuple(AbstractPart)
PART_INDEX = {p: i for i, p in enumerate(REAL_PARTS)}

MEMBERS = {
    AbstractPart.HEAD_TOP: (RealPart.HEAD_TOP,),
    AbstractPart.HEAD_BOTTOM: (RealPart.HEAD_BOTTOM,),
    AbstractPart.SHOULDER: (RealPart.LEFT_SHOULDER, RealPart.RIGHT_SHOULDER),
    AbstractPart.ELBOW: (RealPart.LEFT_ELBOW, RealPart.RIGHT_ELBOW),
    AbstractPart.HAND: (RealPart.LEFT_HAND, RealPart.RIGHT_HAND),
    AbstractPart.HIP: (RealPart.LEFT_HIP, RealPart.RIGHT_HIP),
    AbstractPart.KNEE: (RealPart.LEFT_KNEE, RealPart.RIGHT_KNEE),
    AbstractPart.ANKLE: (RealPart.LEFT_ANKLE, RealPart.RIGHT_ANKLE),
}
_ABSTRACT_OF = {real: ab for ab, members in MEMBERS.items() for real in members}
MIRROR = {
    left: right for ab, m in MEMBERS.items() if len(m) == 2 for left, right in (m, m[::-1])
}

# (parent, child), parents listed before children
POSE_EDGES = (
    (AbstractPart.HEAD_TOP, AbstractPart.HEAD_BOTTOM),
    (AbstractPart.HEAD_BOTTOM, AbstractPart.SHOULDER),
    (AbstractPart.SHOULDER, AbstractPart.ELBOW),
    (AbstractPart.ELBOW, AbstractPart.HAND),
    (AbstractPart.SHOULDER, AbstractPart.HIP),
    (AbstractPart.HIP, AbstractPart.KNEE),
    (AbstractPart.KNEE, AbstractPart.ANKLE),
)
POSE_TREE = RelationalGraph(ABSTRACT_PARTS, POSE_EDGES, AbstractPart.HEAD_TOP)


def abstract_part_of(part: RealPart | str) -> AbstractPart:
    return _ABSTRACT_OF[RealPart(part)]


def members(part: AbstractPart) -> tuple:
    """Real parts merged into ``part``: ``(left, right)`` or ``(single,)``."""
    return MEMBERS[AbstractPart(part)]


def _vector(values, name, frame, part):
    if values is None:
        return None
    arr = np.array(values, dtype=np.float64).reshape(-1)
    arr.setflags(write=False)
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} of hypothesis (frame {frame}, {part}) is not finite")
    return arr


@dataclass(frozen=True, eq=False)
class PartHypothesis:
    """One candidate location of one real part in one frame."""

    frame: int
    part: RealPart
    location: np.ndarray
    max_marginal: float
    foreground: float
    appearance: np.ndarray
    color_hist: np.ndarray | None = None
    flow_next: np.ndarray | None = None

    def __post_init__(self):
        part = RealPart(self.part)
        object.__setattr__(self, "part", part)
        object.__setattr__(self, "frame", int(self.frame))
        where = (self.frame, part.value)
        loc = _vector(self.location, "location", *where)
        if loc.shape != (2,):
            raise DataError(f"location of hypothesis (frame {self.frame}, {part}) must be 2D")
        object.__setattr__(self, "location", loc)
        for name in ("max_marginal", "foreground"):
            v = float(getattr(self, name))
            if not 0.0 <= v <= 1.0:
                raise DataError(f"{name} of hypothesis (frame {self.frame}, {part}) outside [0, 1]: {v}")
            object.__setattr__(self, name, v)
        app = _vector(self.appearance, "appearance", *where)
        if np.any(app < 0):
            raise DataError(f"appearance of hypothesis (frame {self.frame}, {part}) has negative entries")
        object.__setattr__(self, "appearance", app)
        hist = _vector(self.color_hist, "color_hist", *where)
        if hist is not None:
            if np.any(hist < 0) or abs(hist.sum() - 1.0) > 1e-6:
                raise DataError(
                    f"color_hist of hypothesis (frame {self.frame}, {part}) must be non-negative "
                    f"and sum to 1 (sum={hist.sum():.8f})"
                )
        object.__setattr__(self, "color_hist", hist)
        flow = _vector(self.flow_next, "flow_next", *where)
        if flow is not None and flow.shape != (2,):
            raise DataError(f"flow_next of hypothesis (frame {self.frame}, {part}) must be 2D")
        object.__setattr__(self, "flow_next", flow)


@dataclass(frozen=True, eq=False)
class CoupledHypothesis:
    """Ordered (left, right) pair forming one state of a coupled part."""

    left: PartHypothesis
    right: PartHypothesis

    def __post_init__(self):
        if self.left.frame != self.right.frame:
            raise DataError(
                f"coupled members come from frames {self.left.frame} and {self.right.frame}"
            )
        pair = MEMBERS[_ABSTRACT_OF[self.left.part]]
        if pair != (self.left.part, self.right.part):
            raise DataError(f"({self.left.part}, {self.right.part}) is not a (left, right) mirror pair")

    @property
    def frame(self) -> int:
        return self.left.frame

    @property
    def part(self) -> AbstractPart:
        return abstract_part_of(self.left.part)


def compose_coupled(
    left_hyps: Sequence[PartHypothesis],
    right_hyps: Sequence[PartHypothesis],
    params: ScoringParams,
    cap: int = DEFAULT_COUPLED_CAP,
) -> list[CoupledHypothesis]:
    """All left x right combinations, best coupled score first, at most ``cap``.

    Equal scores keep the (left index, right index) order.
    """
    if cap < 1:
        raise ValueError(f"cap must be >= 1, got {cap}")
    if not left_hyps or not right_hyps:
        raise DataError("cannot compose coupled hypotheses from an empty list")
    frame, lpart = left_hyps[0].frame, left_hyps[0].part
    pair = MEMBERS[_ABSTRACT_OF[lpart]]
    if len(pair) != 2 or pair[0] != lpart:
        raise DataError(f"{lpart} is not the left member of a symmetric part")
    rpart = pair[1]
    for h in left_hyps:
        if h.frame != frame or h.part != lpart:
            raise DataError(f"left hypotheses mix frames/parts ({h.frame}, {h.part})")
    for h in right_hyps:
        if h.frame != frame or h.part != rpart:
            raise DataError(
                f"right hypothesis ({h.frame}, {h.part}) does not mirror ({frame}, {lpart})"
            )
    scores = coupled_unary_matrix(left_hyps, right_hyps, params).reshape(-1)
    order = np.argsort(-scores, kind="stable")[:cap]
    n_right = len(right_hyps)
    return [CoupledHypothesis(left_hyps[k // n_right], right_hyps[k % n_right]) for k in order]
