"""Per-part tracklets: chain graphs over a frame window solved with top-K DP."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .body import AbstractPart, abstract_part_of
from .errors import DataError
from .graph import HypothesisGraph, RelationalGraph, solve_top_k
from .scoring import (
    ScoringParams,
    coupled_unary_matrix,
    detection_scores,
    index_distinct,
    single_binary_matrix,
)

DEFAULT_TRACKLETS = 10


@dataclass(frozen=True, eq=False)
class Tracklet:
    """One hypothesis per frame for one abstract part."""

    part: AbstractPart
    frames: tuple
    states: tuple
    indices: tuple
    objective: float

    @property
    def coupled(self) -> bool:
        return self.part.coupled

    def locations(self) -> np.ndarray:
        """``(F, 2)`` for single parts, ``(F, 2, 2)`` ([left, right]) for coupled."""
        if self.coupled:
            return np.stack([np.stack([s.left.location, s.right.location]) for s in self.states])
        return np.stack([s.location for s in self.states])


def normalize_per_frame(weights) -> np.ndarray:
    """Affine map onto [0, 1]; a constant input maps to zeros."""
    w = np.asarray(weights, dtype=np.float64)
    if w.size == 0:
        raise DataError("cannot normalise an empty weight list")
    lo, hi = w.min(), w.max()
    if hi - lo <= 0:
        return np.zeros_like(w)
    return (w - lo) / (hi - lo)


def _check_window(hyps: Sequence[Sequence]) -> None:
    if not hyps:
        raise DataError("tracklet window has no frames")
    for f, frame_hyps in enumerate(hyps):
        if not frame_hyps:
            raise DataError(f"no hypotheses in frame {f} of the tracklet window")


def single_part_graph(hyps, params: ScoringParams):
    """Chain hypothesis graph with normalised detection / temporal weights."""
    _check_window(hyps)
    frames = list(range(len(hyps)))
    unary = {f: normalize_per_frame(detection_scores(hyps[f], params)) for f in frames}
    binary = {
        (f, f + 1): normalize_per_frame(single_binary_matrix(hyps[f], hyps[f + 1], params))
        for f in frames[:-1]
    }
    return HypothesisGraph(unary, binary), RelationalGraph.chain(frames)


def coupled_part_graph(hyps, params: ScoringParams):
    """Chain graph over coupled hypotheses; member scores are shared across pairs."""
    _check_window(hyps)
    frames = list(range(len(hyps)))
    sides = [
        [index_distinct([getattr(r, side) for r in hyps[f]]) for side in ("left", "right")]
        for f in frames
    ]
    unary = {}
    for f in frames:
        (li, lu), (ri, ru) = sides[f]
        unary[f] = normalize_per_frame(coupled_unary_matrix(lu, ru, params)[li, ri])
    binary = {}
    for f in frames[:-1]:
        total = 0.0
        for (idx_f, uniq_f), (idx_n, uniq_n) in zip(sides[f], sides[f + 1]):
            m = single_binary_matrix(uniq_f, uniq_n, params)
            total = total + m[np.ix_(idx_f, idx_n)]
        binary[(f, f + 1)] = normalize_per_frame(total)
    return HypothesisGraph(unary, binary), RelationalGraph.chain(frames)


def _extract(hyps, graph, relational, lam, k, part) -> list[Tracklet]:
    out = []
    for sel in solve_top_k(graph, relational, lam, k):
        idx = tuple(sel.chosen[f] for f in relational.entities)
        states = tuple(hyps[f][i] for f, i in enumerate(idx))
        frames = tuple(s.frame for s in states)
        out.append(Tracklet(part, frames, states, idx, sel.objective))
    return out


def single_part_tracklets(
    hyps: Sequence[Sequence], params: ScoringParams, lambda_s: float = 1.0, k: int = DEFAULT_TRACKLETS
) -> list[Tracklet]:
    graph, rel = single_part_graph(hyps, params)
    part = abstract_part_of(hyps[0][0].part)
    return _extract(hyps, graph, rel, lambda_s, k, part)


def coupled_part_tracklets(
    hyps: Sequence[Sequence], params: ScoringParams, lambda_c: float = 1.0, k: int = DEFAULT_TRACKLETS
) -> list[Tracklet]:
    graph, rel = coupled_part_graph(hyps, params)
    return _extract(hyps, graph, rel, lambda_c, k, hyps[0][0].part)
