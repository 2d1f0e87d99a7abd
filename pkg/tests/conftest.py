import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from treepose.body import ABSTRACT_PARTS, MIRROR, POSE_EDGES, CoupledHypothesis, PartHypothesis, RealPart, members  # noqa: E402
from treepose.graph import HypothesisGraph, RelationalGraph  # noqa: E402
from treepose.scoring import Deformation, ScoringParams  # noqa: E402
from treepose.tracklets import Tracklet  # noqa: E402


def random_hyp(rng, frame, part, loc=None, dim=6, bins=5):
    return PartHypothesis(
        frame=frame,
        part=part,
        location=rng.uniform(0, 100, 2) if loc is None else loc,
        max_marginal=rng.uniform(),
        foreground=rng.uniform(),
        appearance=rng.gamma(2.0, 1.0, dim),
        color_hist=rng.dirichlet(np.ones(bins)),
        flow_next=rng.uniform(0, 100, 2),
    )


def random_single_window(rng, frames, n, part=RealPart.HEAD_TOP):
    return [[random_hyp(rng, f, part) for _ in range(n)] for f in range(frames)]


def random_coupled_window(rng, frames, n, part=RealPart.LEFT_KNEE):
    """``n`` coupled hypotheses per frame, members shared between pairs as in practice."""
    out = []
    for f in range(frames):
        lefts = [random_hyp(rng, f, part) for _ in range(2)]
        rights = [random_hyp(rng, f, MIRROR[part]) for _ in range(2)]
        combos = [(a, b) for a in lefts for b in rights]
        picks = rng.permutation(len(combos))[:n]
        out.append([CoupledHypothesis(*combos[i]) for i in picks])
    return out


def random_params(rng, **kw):
    return ScoringParams(
        alpha=float(rng.uniform()),
        sigma=float(rng.uniform(20, 80)),
        theta=float(rng.uniform(5, 30)),
        **kw,
    )


def random_tree(rng, n, labels=None):
    labels = labels or [f"e{i}" for i in rng.permutation(n)]
    edges = []
    for i in range(1, n):
        j = int(rng.integers(i))
        e = (labels[j], labels[i]) if rng.uniform() < 0.5 else (labels[i], labels[j])
        edges.append(e)
    root = labels[int(rng.integers(n))]
    return RelationalGraph(tuple(labels), tuple(edges), root)


def random_instance(rng, rel, max_h, dyadic=False):
    """Random weights; ``dyadic`` draws multiples of 1/4 so exact ties are common."""
    sizes = {e: int(rng.integers(1, max_h + 1)) for e in rel.entities}

    def draw(shape):
        if dyadic:
            return rng.integers(-4, 5, shape) / 4.0
        return rng.normal(size=shape)

    unary = {e: draw(sizes[e]) for e in rel.entities}
    binary = {(a, b): draw((sizes[a], sizes[b])) for a, b in rel.edges}
    return HypothesisGraph(unary, binary), unary, binary


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_tracklets(rng, frames, per_part, objective_scale=1.0):
    """Random tracklets for every abstract part (objectives drawn at random)."""
    out = {}
    for part in ABSTRACT_PARTS:
        real = members(part)
        n = per_part if isinstance(per_part, int) else int(rng.integers(per_part[0], per_part[1] + 1))
        tracks = []
        for k in range(n):
            states = []
            for f in range(frames):
                if len(real) == 1:
                    states.append(random_hyp(rng, f, real[0]))
                else:
                    states.append(CoupledHypothesis(random_hyp(rng, f, real[0]), random_hyp(rng, f, real[1])))
            obj = float(rng.normal() * objective_scale)
            tracks.append(Tracklet(part, tuple(range(frames)), tuple(states), (k,) * frames, obj))
        out[part] = tracks
    return out


def random_deformation(rng):
    return {
        e: Deformation(tuple(rng.uniform(-40, 40, 2)), float(rng.uniform(10, 60)), float(rng.uniform(0.2, 2)))
        for e in POSE_EDGES
    }


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    verdicts = getattr(mod, "VERDICTS", None)
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in verdicts.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
