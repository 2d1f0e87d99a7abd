"""Brute-force reference implementations used by the tests.

Nothing here calls the solver or the vectorised scoring code; weights are
recomputed with plain loops and optima are found by enumeration.
"""

from __future__ import annotations

import itertools
import math
from collections import deque

import numpy as np

# -- generic enumeration ---------------------------------------------------------

def bfs_order(entities, edges, root):
    nb = {e: [] for e in entities}
    for a, b in edges:
        nb[a].append(b)
        nb[b].append(a)
    order, seen, queue = [root], {root}, deque([root])
    while queue:
        node = queue.popleft()
        for other in nb[node]:
            if other not in seen:
                seen.add(other)
                order.append(other)
                queue.append(other)
    return order


def weight(binary, a, b, i, j):
    if (a, b) in binary:
        return float(binary[(a, b)][i][j])
    return float(binary[(b, a)][j][i])


def objective(unary, binary, edges, lam, chosen):
    total = sum(float(unary[e][chosen[e]]) for e in unary)
    return total + lam * sum(weight(binary, a, b, chosen[a], chosen[b]) for a, b in edges)


def objective_exact(unary, binary, edges, lam, chosen):
    """Correctly rounded objective, so equal multisets of terms tie exactly."""
    terms = [float(unary[e][chosen[e]]) for e in unary]
    terms += [lam * weight(binary, a, b, chosen[a], chosen[b]) for a, b in edges]
    return math.fsum(terms)


def brute_force(unary, binary, entities, edges, root, lam, groups=None):
    """Best selection; ties go to the lexicographically smallest in BFS order.

    Returns ``(chosen, value)``.  The lexicographic rule over a parents-first
    order is what "lowest index at every max" amounts to on a tree.
    """
    order = bfs_order(entities, edges, root)
    pools = [groups[e] if groups else range(len(unary[e])) for e in order]
    best, best_val = None, -math.inf
    for combo in itertools.product(*pools):
        chosen = dict(zip(order, combo))
        val = objective_exact(unary, binary, edges, lam, chosen)
        if val > best_val:
            best, best_val = chosen, val
    return best, best_val


def brute_force_array(unary, binary, entities, edges, root, lam, groups=None):
    """Same answer as ``brute_force``; numpy screens, ``fsum`` decides near-ties."""
    order = bfs_order(entities, edges, root)
    pos = {e: i for i, e in enumerate(order)}
    pools = [np.asarray(groups[e] if groups else range(len(unary[e]))) for e in order]
    grids = np.meshgrid(*pools, indexing="ij")
    combos = np.stack([g.reshape(-1) for g in grids], axis=1)  # lexicographic rows
    total = np.zeros(len(combos))
    for e in order:
        total += np.asarray(unary[e], dtype=float)[combos[:, pos[e]]]
    pair = np.zeros(len(combos))
    for a, b in edges:
        w = np.asarray(binary[(a, b)] if (a, b) in binary else np.asarray(binary[(b, a)]).T, dtype=float)
        pair += w[combos[:, pos[a]], combos[:, pos[b]]]
    total = total + lam * pair
    top = total.max()
    best, best_val = None, -math.inf
    for row in np.flatnonzero(total >= top - 1e-9 * max(1.0, abs(top))):
        chosen = {e: int(combos[row, pos[e]]) for e in order}
        val = objective_exact(unary, binary, edges, lam, chosen)
        if val > best_val:
            best, best_val = chosen, val
    return best, best_val


def top_k_brute(unary, binary, entities, edges, root, lam, k):
    """Round i = brute force after deleting rounds 1..i-1's choices."""
    groups = {e: list(range(len(unary[e]))) for e in entities}
    out = []
    for _ in range(k):
        chosen, val = brute_force_array(unary, binary, entities, edges, root, lam, groups)
        out.append((chosen, val))
        for e, i in chosen.items():
            groups[e].remove(i)
        if any(not g for g in groups.values()):
            break
    return out


# -- weights by hand -------------------------------------------------------------

def det(h, alpha):
    return alpha * h.max_marginal + (1 - alpha) * h.foreground


def chi2(a, b, eps):
    return sum((x - y) ** 2 / (x + y + eps) for x, y in zip(a, b))


def temporal(h, g, sigma, eps):
    d2 = (h.flow_next[0] - g.location[0]) ** 2 + (h.flow_next[1] - g.location[1]) ** 2
    return math.exp(-chi2(h.appearance, g.appearance, eps) * d2 / sigma**2)


def coupled(r, alpha, theta):
    p, q = r.left, r.right
    dot = sum(x * y for x, y in zip(p.color_hist, q.color_hist))
    dist = math.hypot(p.location[0] - q.location[0], p.location[1] - q.location[1])
    return (det(p, alpha) + det(q, alpha)) * dot / (1 + math.exp(-dist / theta))


def deform(p, q, mean, scale, omega):
    dx = p[0] - q[0] - mean[0]
    dy = p[1] - q[1] - mean[1]
    return omega * math.exp(-(dx * dx + dy * dy) / (2 * scale * scale))


def normalise(values):
    flat = [v for row in values for v in row] if isinstance(values[0], list) else list(values)
    lo, hi = min(flat), max(flat)
    if hi - lo <= 0:
        scale = lambda v: 0.0  # noqa: E731
    else:
        scale = lambda v: (v - lo) / (hi - lo)  # noqa: E731
    if isinstance(values[0], list):
        return [[scale(v) for v in row] for row in values]
    return [scale(v) for v in values]


def chain_weights_single(hyps, alpha, sigma, eps):
    F = len(hyps)
    unary = {f: normalise([det(h, alpha) for h in hyps[f]]) for f in range(F)}
    binary = {
        (f, f + 1): normalise([[temporal(h, g, sigma, eps) for g in hyps[f + 1]] for h in hyps[f]])
        for f in range(F - 1)
    }
    return unary, binary


def chain_weights_coupled(hyps, alpha, sigma, theta, eps):
    F = len(hyps)
    unary = {f: normalise([coupled(r, alpha, theta) for r in hyps[f]]) for f in range(F)}
    binary = {
        (f, f + 1): normalise(
            [
                [temporal(r.left, s.left, sigma, eps) + temporal(r.right, s.right, sigma, eps) for s in hyps[f + 1]]
                for r in hyps[f]
            ]
        )
        for f in range(F - 1)
    }
    return unary, binary


def tracklet_pair_score(a_locs, b_locs, a_coupled, b_coupled, kernel):
    """Frame sum of deformation terms; coupled sides pair left-left, right-right."""
    total = 0.0
    for f in range(len(a_locs)):
        A = a_locs[f] if a_coupled else [a_locs[f]]
        B = b_locs[f] if b_coupled else [b_locs[f]]
        if a_coupled and b_coupled:
            pairs = [(A[0], B[0]), (A[1], B[1])]
        else:
            pairs = [(p, q) for p in A for q in B]
        for p, q in pairs:
            total += deform(p, q, *kernel)
    return total


# -- limbs -------------------------------------------------------------------------

def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def crosses(p1, p2, q1, q2):
    """Closed segments p1p2 and q1q2 share a point."""
    def between(a, b, c):
        return min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])

    d1, d2 = _cross(q1, q2, p1), _cross(q1, q2, p2)
    d3, d4 = _cross(p1, p2, q1), _cross(p1, p2, q2)
    if d1 * d2 < 0 and d3 * d4 < 0:
        return True
    return (
        (d1 == 0 and between(q1, q2, p1))
        or (d2 == 0 and between(q1, q2, p2))
        or (d3 == 0 and between(p1, p2, q1))
        or (d4 == 0 and between(p1, p2, q2))
    )


def limb_cost_sequence(joints, refs, ids, flags, c):
    """Temporal cost of one limb pair under a flag sequence, by hand."""
    pl, pr, dl, dr = ids
    total = 0.0
    for f in range(len(flags) - 1):
        per = []
        for g in (f, f + 1):
            a, b = (dr, dl) if flags[g] else (dl, dr)
            J = joints[g]
            ref = refs[g]
            agree = crosses(J[pl], J[a], J[pr], J[b]) == crosses(ref[pl], ref[dl], ref[pr], ref[dr])
            per.append(((J[pl], J[a]), (J[pr], J[b]), c if agree else 1 - c))
        (la, ra, ca), (lb, rb, cb) = per
        sq = 0.0
        for u, v in ((la[0], lb[0]), (la[1], lb[1]), (ra[0], rb[0]), (ra[1], rb[1])):
            sq += (u[0] - v[0]) ** 2 + (u[1] - v[1]) ** 2
        total += ca * cb * sq
    return total


# -- metrics -------------------------------------------------------------------------

def pcp_kle(est, gt, head, thr):
    """Scalar PCP / KLE per category; torso runs between the shoulder and hip centres."""
    LS, RS, LE, RE, LH, RH = 2, 3, 4, 5, 6, 7
    LP, RP, LK, RK, LA, RA = 8, 9, 10, 11, 12, 13
    segs = {
        "Head": [(0, 1)],
        "Torso": [((LS, RS), (LP, RP))],
        "U.L": [(LP, LK), (RP, RK)],
        "L.L": [(LK, LA), (RK, RA)],
        "U.A.": [(LS, LE), (RS, RE)],
        "L.A.": [(LE, LH), (RE, RH)],
    }
    keys = {
        "Head": [0, 1],
        "Torso": [LS, RS, LP, RP],
        "U.L": [LP, LK, RP, RK],
        "L.L": [LK, LA, RK, RA],
        "U.A.": [LS, LE, RS, RE],
        "L.A.": [LE, LH, RE, RH],
    }

    def pt(J, s):
        if isinstance(s, tuple):
            return ((J[s[0]][0] + J[s[1]][0]) / 2, (J[s[0]][1] + J[s[1]][1]) / 2)
        return (J[s][0], J[s][1])

    def dist(p, q):
        return math.hypot(p[0] - q[0], p[1] - q[1])

    pcp, kle = {}, {}
    for cat in segs:
        hits = n = 0
        for f in range(len(est)):
            for a, b in segs[cat]:
                length = dist(pt(gt[f], a), pt(gt[f], b))
                ok = dist(pt(est[f], a), pt(gt[f], a)) <= thr * length and dist(pt(est[f], b), pt(gt[f], b)) <= thr * length
                hits += ok
                n += 1
        pcp[cat] = hits / n
        errs = [dist(est[f][j], gt[f][j]) / head[f] for f in range(len(est)) for j in keys[cat]]
        kle[cat] = sum(errs) / len(errs)
    return pcp, kle
