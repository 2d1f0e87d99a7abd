import numpy as np
import pytest

from conftest import random_coupled_window, random_params, random_single_window
from oracles import brute_force, chain_weights_coupled, chain_weights_single, top_k_brute
from treepose.body import AbstractPart as A, CoupledHypothesis, PartHypothesis, RealPart as R
from treepose.errors import DataError
from treepose.scoring import ScoringParams
from treepose.tracklets import (
    coupled_part_graph,
    coupled_part_tracklets,
    normalize_per_frame,
    single_part_graph,
    single_part_tracklets,
)


@pytest.mark.parametrize("w, want", [([2, 4, 6], [0, 0.5, 1]), ([5, 5], [0, 0]), ([3.3], [0])])
def test_normalize_per_frame(w, want):
    assert np.allclose(normalize_per_frame(w), want)


def test_normalize_empty():
    with pytest.raises(DataError):
        normalize_per_frame([])


def test_single_frame_single_part():
    p = ScoringParams(sigma=10.0)
    hyps = [[PartHypothesis(0, R.HEAD_TOP, (1, 1), s, s, (1.0,)) for s in (0.3, 0.9)]]
    out = single_part_tracklets(hyps, p, 1.0, 1)
    assert len(out) == 1 and out[0].indices == (1,)
    assert out[0].part == A.HEAD_TOP and out[0].frames == (0,)


def test_single_part_matches_paths():
    rng = np.random.default_rng(21)
    p = random_params(rng)
    hyps = random_single_window(rng, 3, 3)
    unary, binary = chain_weights_single(hyps, p.alpha, p.sigma, p.chi_eps)
    chosen, val = brute_force(unary, binary, range(3), [(0, 1), (1, 2)], 0, 1.0)
    (t,) = single_part_tracklets(hyps, p, 1.0, 1)
    assert t.indices == tuple(chosen[f] for f in range(3))
    assert t.objective == pytest.approx(val, abs=1e-9)


def test_coupled_matches_paths():
    rng = np.random.default_rng(22)
    p = random_params(rng)
    hyps = random_coupled_window(rng, 4, 4)
    unary, binary = chain_weights_coupled(hyps, p.alpha, p.sigma, p.theta, p.chi_eps)
    chosen, val = brute_force(unary, binary, range(4), [(f, f + 1) for f in range(3)], 0, 1.0)
    (t,) = coupled_part_tracklets(hyps, p, 1.0, 1)
    assert t.indices == tuple(chosen[f] for f in range(4))
    assert t.objective == pytest.approx(val, abs=1e-9)
    assert t.part == A.KNEE and t.locations().shape == (4, 2, 2)


def test_graph_weights_match_hand_computation():
    rng = np.random.default_rng(23)
    p = random_params(rng)
    hyps = random_coupled_window(rng, 3, 3)
    g, _ = coupled_part_graph(hyps, p)
    unary, binary = chain_weights_coupled(hyps, p.alpha, p.sigma, p.theta, p.chi_eps)
    for f in range(3):
        assert np.allclose(g.unary[f], unary[f], atol=1e-12)
    for key in binary:
        assert np.allclose(g.binary[key], binary[key], atol=1e-12)
    single = random_single_window(rng, 3, 4)
    g, _ = single_part_graph(single, p)
    unary, binary = chain_weights_single(single, p.alpha, p.sigma, p.chi_eps)
    assert all(np.allclose(g.unary[f], unary[f], atol=1e-12) for f in range(3))
    assert all(np.allclose(g.binary[k], binary[k], atol=1e-12) for k in binary)


def test_top_k_rounds_match_brute_force():
    rng = np.random.default_rng(24)
    p = random_params(rng)
    hyps = random_single_window(rng, 4, 4)
    unary, binary = chain_weights_single(hyps, p.alpha, p.sigma, p.chi_eps)
    want = top_k_brute(unary, binary, range(4), [(f, f + 1) for f in range(3)], 0, 1.0, 10)
    got = single_part_tracklets(hyps, p, 1.0, 10)
    assert len(got) == len(want) == 4
    for t, (chosen, val) in zip(got, want):
        assert t.indices == tuple(chosen[f] for f in range(4))
        assert t.objective == pytest.approx(val, abs=1e-9)


def test_default_window_sizes():
    rng = np.random.default_rng(25)
    p = random_params(rng)
    out = single_part_tracklets(random_single_window(rng, 15, 20), p, 1.0, 10)
    assert len(out) == 10
    assert all(len(t.states) == 15 and t.frames == tuple(range(15)) for t in out)
    # removal makes the extracted tracklets node-disjoint
    for f in range(15):
        assert len({t.indices[f] for t in out}) == 10


def test_double_counting_pair_loses():
    p = ScoringParams(alpha=0.5, sigma=10.0, theta=5.0)

    def h(part, x):
        return PartHypothesis(0, part, (x, 50.0), 0.9, 0.9, (1.0,), (0.5, 0.5))

    left = h(R.LEFT_ANKLE, 40.0)
    coincident = CoupledHypothesis(left, h(R.RIGHT_ANKLE, 40.0))
    separated = CoupledHypothesis(left, h(R.RIGHT_ANKLE, 90.0))
    (t,) = coupled_part_tracklets([[coincident, separated]], p, 1.0, 1)
    assert t.states[0] is separated


def test_empty_frame_named():
    rng = np.random.default_rng(0)
    hyps = random_single_window(rng, 3, 2)
    hyps[1] = []
    with pytest.raises(DataError, match="frame 1"):
        single_part_tracklets(hyps, random_params(rng), 1.0, 2)


def test_last_frame_may_lack_flow():
    rng = np.random.default_rng(1)
    hyps = random_single_window(rng, 2, 2)
    last = [PartHypothesis(1, R.HEAD_TOP, h.location, h.max_marginal, h.foreground, h.appearance) for h in hyps[1]]
    out = single_part_tracklets([hyps[0], last], random_params(rng), 1.0, 2)
    assert len(out) == 2


def test_missing_flow_before_last_frame():
    rng = np.random.default_rng(2)
    hyps = random_single_window(rng, 2, 2)
    first = [PartHypothesis(0, R.HEAD_TOP, h.location, h.max_marginal, h.foreground, h.appearance) for h in hyps[0]]
    with pytest.raises(DataError):
        single_part_tracklets([first, hyps[1]], random_params(rng), 1.0, 1)


def test_deterministic():
    rng = np.random.default_rng(3)
    p = random_params(rng)
    hyps = random_coupled_window(rng, 5, 4)
    a = coupled_part_tracklets(hyps, p, 1.0, 3)
    b = coupled_part_tracklets(hyps, p, 1.0, 3)
    assert [(t.indices, t.objective) for t in a] == [(t.indices, t.objective) for t in b]


def test_tracklet_states_belong_to_frames():
    rng = np.random.default_rng(4)
    hyps = random_coupled_window(rng, 3, 3)
    for t in coupled_part_tracklets(hyps, random_params(rng), 1.0, 3):
        for f, (s, i) in enumerate(zip(t.states, t.indices)):
            assert s is hyps[f][i]

