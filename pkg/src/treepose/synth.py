"""Synthetic walking-person scenarios with planted ground truth.

The true joints are emitted as the best-scoring hypotheses; distractors get
detection scores at least ``margin`` lower, random appearance and random
colour histograms.  Symmetric parts share appearance and colour (as clothing
does), so only geometry separates left from right.
"""

from __future__ import annotations

import numpy as np

from .body import PART_INDEX, REAL_PARTS, PartHypothesis, RealPart as R
from .io import FileHeader, GroundTruth, HypothesisFile
from .limbs import LIMB_PAIRS, ReferencePose, _joint_ids

WIDTH, HEIGHT = 640.0, 480.0
FEATURE_DIM = 32
HIST_DIM = 16
TRUE_SCORE_LOW = 0.85

# limb chains below the torso; a planted swap exchanges a suffix of one chain
_CHAINS = (
    ((R.LEFT_ELBOW, R.RIGHT_ELBOW), (R.LEFT_HAND, R.RIGHT_HAND)),
    ((R.LEFT_KNEE, R.RIGHT_KNEE), (R.LEFT_ANKLE, R.RIGHT_ANKLE)),
)


def skeleton(t: float) -> np.ndarray:
    """True ``(14, 2)`` joints at time ``t`` (frames)."""
    phase = 2.0 * np.pi * t / 12.0
    hip_c = np.array([220.0 + 4.0 * t, 300.0])
    neck = hip_c + [0.0, -110.0]
    out = np.zeros((len(REAL_PARTS), 2))

    def put(part, xy):
        out[PART_INDEX[part]] = xy

    put(R.HEAD_TOP, neck + [0.0, -45.0])
    put(R.HEAD_BOTTOM, neck)
    for side, sign, ph in (("LEFT", 1.0, 0.0), ("RIGHT", -1.0, np.pi)):
        shoulder = neck + [sign * 32.0, 12.0]
        hip = hip_c + [sign * 20.0, 0.0]
        a1 = 0.3 + 0.2 * np.sin(phase + ph)
        a2 = a1 + 0.15 + 0.1 * np.sin(phase + ph + 0.5)
        elbow = shoulder + 55.0 * np.array([sign * np.sin(a1), np.cos(a1)])
        hand = elbow + 50.0 * np.array([sign * np.sin(a2), np.cos(a2)])
        l1 = 0.12 + 0.08 * np.sin(phase + ph + np.pi)
        l2 = l1 - 0.04 + 0.06 * np.sin(phase + ph + 2.0)
        knee = hip + 70.0 * np.array([sign * np.sin(l1), np.cos(l1)])
        ankle = knee + 65.0 * np.array([sign * np.sin(l2), np.cos(l2)])
        put(R[f"{side}_SHOULDER"], shoulder)
        put(R[f"{side}_ELBOW"], elbow)
        put(R[f"{side}_HAND"], hand)
        put(R[f"{side}_HIP"], hip)
        put(R[f"{side}_KNEE"], knee)
        put(R[f"{side}_ANKLE"], ankle)
    return out


def _hist(rng, base=None):
    if base is None:
        return rng.dirichlet(np.ones(HIST_DIM))
    h = base + 0.02 * np.abs(rng.standard_normal(HIST_DIM))
    return h / h.sum()


def _clip(xy):
    return np.clip(xy, [0.0, 0.0], [WIDTH, HEIGHT])


def synth_scenario(
    seed: int,
    frames: int = 15,
    noise: float = 1.0,
    distractors: int = 19,
    swap_rate: float = 0.0,
    *,
    margin: float = 0.3,
    reference_noise: float = 1.0,
    reference_swap_rate: float = 0.0,
    coincident: bool = False,
) -> HypothesisFile:
    """Generate hypotheses, references and ground truth for ``frames`` frames.

    ``swap_rate`` of the frames get left/right labels exchanged on a suffix
    of the arm and leg chains (elbows+hands or hands only, knees+ankles or
    ankles only).  ``reference_swap_rate`` plants the same kind of error in
    the reference stream instead.  With ``coincident`` every coupled part
    also gets a right-side copy of the true right hypothesis placed exactly
    on the true left joint.
    """
    if frames < 1:
        raise ValueError("frames must be >= 1")
    if not 0.0 <= margin <= TRUE_SCORE_LOW:
        raise ValueError(f"margin must lie in [0, {TRUE_SCORE_LOW}]")
    rng = np.random.default_rng(seed)
    truth = np.stack([skeleton(t) for t in range(frames)])
    head = np.linalg.norm(truth[:, PART_INDEX[R.HEAD_TOP]] - truth[:, PART_INDEX[R.HEAD_BOTTOM]], axis=1)

    signature = {}
    palette = {}
    for part in REAL_PARTS:
        key = part.value.replace("Left", "").replace("Right", "")
        if key not in signature:
            signature[key] = rng.gamma(2.0, 1.0, FEATURE_DIM)
            palette[key] = rng.dirichlet(0.3 * np.ones(HIST_DIM))

    # noisy observed locations of the true joints, and where flow sends them
    observed = truth + noise * rng.standard_normal(truth.shape)
    flow = np.empty_like(truth)
    flow[:-1] = truth[1:] + noise * rng.standard_normal(truth[1:].shape)

    labels = np.tile(np.arange(len(REAL_PARTS)), (frames, 1))
    for f in _pick_frames(rng, frames, swap_rate):
        for chain in _CHAINS:
            for left, right in chain[rng.integers(len(chain)):]:
                i, j = PART_INDEX[left], PART_INDEX[right]
                labels[f, i], labels[f, j] = labels[f, j], labels[f, i]

    hyps = []
    low = TRUE_SCORE_LOW
    for f in range(frames):
        last = f == frames - 1
        for j, part in enumerate(REAL_PARTS):
            key = part.value.replace("Left", "").replace("Right", "")
            label = REAL_PARTS[labels[f, j]]
            true_hyp = dict(
                frame=f,
                location=_clip(observed[f, j]),
                max_marginal=rng.uniform(low, 1.0),
                foreground=rng.uniform(low, 1.0),
                appearance=signature[key] * np.abs(1.0 + 0.05 * rng.standard_normal(FEATURE_DIM)),
                color_hist=_hist(rng, palette[key]),
                flow_next=None if last else flow[f, j],
            )
            hyps.append(PartHypothesis(part=label, **true_hyp))
            if coincident and label.value.startswith("Right"):
                # same scores and looks as the true right joint, on top of the left one
                mirror = PART_INDEX[R(label.value.replace("Right", "Left"))]
                src = int(np.flatnonzero(labels[f] == mirror)[0])
                hyps.append(
                    PartHypothesis(
                        part=label,
                        **{**true_hyp, "location": _clip(observed[f, src]),
                           "flow_next": None if last else flow[f, src]},
                    )
                )
            for _ in range(distractors):
                loc = _clip(truth[f, j] + rng.uniform(-60.0, 60.0, 2))
                hyps.append(
                    PartHypothesis(
                        frame=f,
                        part=label,
                        location=loc,
                        max_marginal=rng.uniform(0.0, low - margin),
                        foreground=rng.uniform(0.0, low - margin),
                        appearance=rng.gamma(2.0, 1.0, FEATURE_DIM),
                        color_hist=_hist(rng),
                        flow_next=None if last else loc + 3.0 * rng.standard_normal(2),
                    )
                )
    hyps.sort(key=lambda h: (h.frame, PART_INDEX[h.part]))

    ref = truth + reference_noise * rng.standard_normal(truth.shape)
    for f in _pick_frames(rng, frames, reference_swap_rate):
        for chain in _CHAINS:
            for left, right in chain[rng.integers(len(chain)):]:
                i, j = PART_INDEX[left], PART_INDEX[right]
                ref[f, [i, j]] = ref[f, [j, i]]

    header = FileHeader(frames, WIDTH, HEIGHT, FEATURE_DIM, HIST_DIM)
    ids = tuple(range(frames))
    return HypothesisFile(
        header,
        tuple(hyps),
        ReferencePose(ids, ref),
        GroundTruth(ids, truth, head),
    )


def _pick_frames(rng, frames: int, rate: float) -> list[int]:
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rates must lie in [0, 1], got {rate}")
    n = int(round(rate * frames))
    return sorted(int(f) for f in rng.choice(frames, size=n, replace=False))


def planted_assignment(pose_joints: np.ndarray, truth_joints: np.ndarray) -> dict:
    """Flags that would restore ``pose_joints`` to the anatomical labels.

    A distal pair is flagged when its left joint lies closer to the true right
    joint than to the true left one.
    """
    out = {}
    for pair in LIMB_PAIRS:
        _, _, dl, dr = _joint_ids(pair)
        est_left = pose_joints[:, dl]
        to_left = np.linalg.norm(est_left - truth_joints[:, dl], axis=1)
        to_right = np.linalg.norm(est_left - truth_joints[:, dr], axis=1)
        out[pair] = to_right < to_left
    return out
