"""Unary and binary weight formulas.

Every scalar formula has a vectorised twin (``*_matrix``) used when building
large hypothesis graphs; the tests check that both agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, DataError


@dataclass(frozen=True)
class Deformation:
    """Isotropic Gaussian kernel on the offset between two adjacent parts."""

    mean: tuple[float, float] = (0.0, 0.0)
    scale: float = 1.0
    omega: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "mean", tuple(float(v) for v in self.mean))
        if len(self.mean) != 2:
            raise ConfigError("deformation mean must be a 2D offset")
        if not self.scale > 0:
            raise ConfigError(f"deformation scale must be > 0, got {self.scale}")
        if not self.omega >= 0:
            raise ConfigError(f"deformation omega must be >= 0, got {self.omega}")


@dataclass(frozen=True)
class ScoringParams:
    """Weight parameters.

    ``sigma`` and ``theta`` may be left as ``None`` and filled in per window
    from the person height (see ``pipeline.resolve_params``).  ``deformation``
    maps an ordered relational edge ``(parent, child)`` to its kernel.
    """

    alpha: float = 0.5
    sigma: float | None = None
    theta: float | None = None
    deformation: Mapping[tuple, Deformation] = field(default_factory=dict)
    chi_eps: float = 1e-10

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        for name in ("sigma", "theta"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ConfigError(f"{name} must be > 0, got {value}")
        if not self.chi_eps > 0:
            raise ConfigError(f"chi_eps must be > 0, got {self.chi_eps}")
        object.__setattr__(self, "deformation", dict(self.deformation))

    def with_updates(self, **kw) -> "ScoringParams":
        return replace(self, **kw)

    def _require(self, name: str) -> float:
        value = getattr(self, name)
        if value is None:
            raise ConfigError(f"scoring parameter {name!r} has not been set")
        return value

    def kernel(self, edge) -> Deformation:
        try:
            return self.deformation[tuple(edge)]
        except KeyError:
            raise ConfigError(f"no deformation parameters configured for edge {edge!r}") from None


def detection_score(h, params: ScoringParams) -> float:
    """Mix of max-marginal and foreground score."""
    return params.alpha * h.max_marginal + (1.0 - params.alpha) * h.foreground


def detection_scores(hyps: Sequence, params: ScoringParams) -> np.ndarray:
    mm = np.array([h.max_marginal for h in hyps], dtype=np.float64)
    fg = np.array([h.foreground for h in hyps], dtype=np.float64)
    return params.alpha * mm + (1.0 - params.alpha) * fg


def chi_square(a, b, eps: float = 1e-10) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DataError(f"feature length mismatch: {a.shape} vs {b.shape}")
    return float(np.sum((a - b) ** 2 / (a + b + eps)))


def chi_square_matrix(A, B, eps: float = 1e-10) -> np.ndarray:
    """Pairwise chi-square distances between the rows of ``A`` and ``B``."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.shape[1] != B.shape[1]:
        raise DataError(f"feature length mismatch: {A.shape[1]} vs {B.shape[1]}")
    diff = A[:, None, :] - B[None, :, :]
    return np.sum(diff * diff / (A[:, None, :] + B[None, :, :] + eps), axis=2)


def _flow(h):
    if h.flow_next is None:
        raise DataError(f"hypothesis at frame {h.frame} ({h.part}) has no flow prediction")
    return h.flow_next


def single_binary(h_f, h_next, params: ScoringParams) -> float:
    """Temporal affinity of two hypotheses in consecutive frames.

    Appearance distance times squared flow residual, through ``exp(-x / sigma^2)``.
    """
    if h_next.frame != h_f.frame + 1:
        raise DataError(f"frames {h_f.frame} and {h_next.frame} are not consecutive")
    sigma = params._require("sigma")
    chi = chi_square(h_f.appearance, h_next.appearance, params.chi_eps)
    d2 = float(np.sum((np.asarray(_flow(h_f)) - np.asarray(h_next.location)) ** 2))
    return float(np.exp(-(chi * d2) / sigma**2))


def single_binary_matrix(hyps_f: Sequence, hyps_next: Sequence, params: ScoringParams) -> np.ndarray:
    sigma = params._require("sigma")
    chi = chi_square_matrix(
        np.stack([h.appearance for h in hyps_f]),
        np.stack([h.appearance for h in hyps_next]),
        params.chi_eps,
    )
    flow = np.stack([_flow(h) for h in hyps_f])
    loc = np.stack([h.location for h in hyps_next])
    d2 = np.sum((flow[:, None, :] - loc[None, :, :]) ** 2, axis=2)
    return np.exp(-(chi * d2) / sigma**2)


def coupled_unary(r, params: ScoringParams) -> float:
    """Joint score of a symmetric pair; overlapping pairs are halved."""
    theta = params._require("theta")
    p, q = r.left, r.right
    num = (detection_score(p, params) + detection_score(q, params)) * float(
        np.dot(p.color_hist, q.color_hist)
    )
    dist = float(np.linalg.norm(np.asarray(p.location) - np.asarray(q.location)))
    return num / (1.0 + np.exp(-dist / theta))


def coupled_unary_matrix(left: Sequence, right: Sequence, params: ScoringParams) -> np.ndarray:
    """``coupled_unary`` for every (left[i], right[j]) combination."""
    theta = params._require("theta")
    sl = detection_scores(left, params)
    sr = detection_scores(right, params)
    hl = np.stack([h.color_hist for h in left])
    hr = np.stack([h.color_hist for h in right])
    pl = np.stack([h.location for h in left])
    pr = np.stack([h.location for h in right])
    dist = np.sqrt(np.sum((pl[:, None, :] - pr[None, :, :]) ** 2, axis=2))
    return (sl[:, None] + sr[None, :]) * (hl @ hr.T) / (1.0 + np.exp(-dist / theta))


def coupled_binary(r_f, r_next, params: ScoringParams) -> float:
    return single_binary(r_f.left, r_next.left, params) + single_binary(
        r_f.right, r_next.right, params
    )


def coupled_binary_matrix(pairs_f: Sequence, pairs_next: Sequence, params: ScoringParams) -> np.ndarray:
    """``coupled_binary`` for all pairs, computed once per distinct member."""
    total = 0.0
    for side in ("left", "right"):
        idx_f, uniq_f = index_distinct([getattr(r, side) for r in pairs_f])
        idx_n, uniq_n = index_distinct([getattr(r, side) for r in pairs_next])
        m = single_binary_matrix(uniq_f, uniq_n, params)
        total = total + m[np.ix_(idx_f, idx_n)]
    return total


def index_distinct(items):
    """Positions into a list of distinct objects (by identity)."""
    seen = {}
    uniq = []
    idx = np.empty(len(items), dtype=np.intp)
    for i, item in enumerate(items):
        j = seen.get(id(item))
        if j is None:
            j = seen[id(item)] = len(uniq)
            uniq.append(item)
        idx[i] = j
    return idx, uniq


def relative_location(p, q, edge, params: ScoringParams) -> float:
    """Deformation score of parent at ``p`` and child at ``q`` on ``edge``."""
    k = params.kernel(edge)
    off = np.asarray(p, dtype=np.float64) - np.asarray(q, dtype=np.float64) - np.asarray(k.mean)
    return float(k.omega * np.exp(-float(off @ off) / (2.0 * k.scale**2)))


def relative_location_array(P, Q, edge, params: ScoringParams) -> np.ndarray:
    """Vectorised ``relative_location`` over broadcastable ``(..., 2)`` arrays."""
    k = params.kernel(edge)
    off = np.asarray(P, dtype=np.float64) - np.asarray(Q, dtype=np.float64) - np.asarray(k.mean)
    return k.omega * np.exp(-np.sum(off * off, axis=-1) / (2.0 * k.scale**2))
