"""Relational / hypothesis graphs and exact max-sum inference on trees.

A relational graph is a tree over entities (body parts, frames...).  The
hypothesis graph expands each entity into a group of candidate states with
unary weights, and each relational edge into a dense matrix of binary weights
between the two groups.  ``solve_tree`` maximises

    M(s) = sum_i unary(s_i) + lam * sum_(i,j) binary(s_i, s_j)

by leaf-to-root dynamic programming.

Hypotheses are identified by their integer position inside their entity's
group.  Removing hypotheses (``HypothesisGraph.without``) keeps those
positions stable, so a selection made on a reduced graph still refers to the
original candidates.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

from .errors import DataError, StructureError

Entity = Hashable


@dataclass(frozen=True)
class RelationalGraph:
    """Tree over ``entities``; ``edges`` are unordered pairs."""

    entities: tuple
    edges: tuple
    root: Entity

    def __post_init__(self):
        object.__setattr__(self, "entities", tuple(self.entities))
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        ents = set(self.entities)
        if len(ents) != len(self.entities):
            raise StructureError("duplicate entity identifiers")
        if self.root not in ents:
            raise StructureError(f"root {self.root!r} is not an entity")
        seen = set()
        for a, b in self.edges:
            if a not in ents or b not in ents:
                raise StructureError(f"edge ({a!r}, {b!r}) references an unknown entity")
            if a == b:
                raise StructureError(f"self-loop on {a!r}")
            key = frozenset((a, b))
            if key in seen:
                raise StructureError(f"duplicate edge ({a!r}, {b!r})")
            seen.add(key)
        if len(self.edges) != len(self.entities) - 1:
            raise StructureError(
                f"{len(self.entities)} entities need {len(self.entities) - 1} edges "
                f"for a tree, got {len(self.edges)}"
            )
        order, _ = self._traverse()
        if len(order) != len(self.entities):
            raise StructureError("relational graph is not connected (or contains a cycle)")

    @classmethod
    def chain(cls, entities: Sequence[Entity]) -> "RelationalGraph":
        """Degenerate tree ``e0 - e1 - ... - en`` rooted at ``e0``."""
        entities = tuple(entities)
        if not entities:
            raise StructureError("a chain needs at least one entity")
        edges = tuple(zip(entities[:-1], entities[1:]))
        return cls(entities, edges, entities[0])

    def rerooted(self, root: Entity) -> "RelationalGraph":
        return RelationalGraph(self.entities, self.edges, root)

    def neighbours(self) -> dict:
        nb = {e: [] for e in self.entities}
        for a, b in self.edges:
            nb[a].append(b)
            nb[b].append(a)
        return nb

    def _traverse(self):
        nb = self.neighbours()
        order = [self.root]
        parent = {self.root: None}
        queue = deque([self.root])
        while queue:
            node = queue.popleft()
            for other in nb[node]:
                if other in parent:
                    continue
                parent[other] = node
                order.append(other)
                queue.append(other)
        return order, parent

    def order(self) -> list:
        """Entities in breadth-first order from the root (parents first)."""
        return self._traverse()[0]

    def parents(self) -> dict:
        return self._traverse()[1]

    def children(self) -> dict:
        order, parent = self._traverse()
        kids = {e: [] for e in order}
        for e in order[1:]:
            kids[parent[e]].append(e)
        return kids


def _frozen(array) -> np.ndarray:
    if isinstance(array, np.ndarray) and array.dtype == np.float64 and not array.flags.writeable:
        return array
    out = np.array(array, dtype=np.float64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class HypothesisGraph:
    """Groups of candidate states with dense unary / binary weights.

    ``unary[e]`` holds one weight per hypothesis of entity ``e``.
    ``binary[(a, b)]`` is an ``(n_a, n_b)`` matrix for the relational edge
    ``a - b``; it may be stored under either orientation.  ``groups[e]``
    lists the hypothesis positions still active (all of them by default).
    """

    unary: Mapping[Entity, np.ndarray]
    binary: Mapping[tuple, np.ndarray]
    groups: Mapping[Entity, tuple] = field(default=None)

    def __post_init__(self):
        unary = {e: _frozen(w).reshape(-1) for e, w in self.unary.items()}
        binary = {tuple(k): _frozen(w) for k, w in self.binary.items()}
        if self.groups is None:
            groups = {e: tuple(range(len(w))) for e, w in unary.items()}
        else:
            groups = {e: tuple(int(i) for i in g) for e, g in self.groups.items()}
        object.__setattr__(self, "unary", unary)
        object.__setattr__(self, "binary", binary)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "_finite", False)

    def pair(self, a: Entity, b: Entity) -> np.ndarray:
        """Binary matrix oriented ``(n_a, n_b)``."""
        if (a, b) in self.binary:
            return self.binary[(a, b)]
        if (b, a) in self.binary:
            return self.binary[(b, a)].T
        raise DataError(f"missing binary weights for relational edge ({a!r}, {b!r})")

    def without(self, chosen: Mapping[Entity, int]) -> "HypothesisGraph":
        """Copy of the graph with the given hypothesis removed from each group."""
        groups = dict(self.groups)
        for e, i in chosen.items():
            g = groups[e]
            if i in g:
                j = g.index(i)
                groups[e] = g[:j] + g[j + 1:]
        # weights are shared read-only arrays, so skip re-freezing them
        out = object.__new__(HypothesisGraph)
        object.__setattr__(out, "unary", self.unary)
        object.__setattr__(out, "binary", self.binary)
        object.__setattr__(out, "groups", groups)
        object.__setattr__(out, "_finite", self._finite)
        return out

    def check(self, relational: RelationalGraph) -> None:
        """Raise unless the graph matches ``relational`` and holds finite weights."""
        if set(self.unary) != set(relational.entities):
            raise DataError("hypothesis groups do not match relational entities")
        for e in relational.entities:
            if e not in self.groups or not self.groups[e]:
                raise DataError(f"empty hypothesis group for entity {e!r}")
            n = len(self.unary[e])
            if min(self.groups[e]) < 0 or max(self.groups[e]) >= n:
                raise DataError(f"group of {e!r} references unknown hypotheses")
        wanted = {frozenset(e) for e in relational.edges}
        for key in self.binary:
            if frozenset(key) not in wanted:
                raise DataError(f"binary weights given for non-adjacent pair {key!r}")
        for a, b in relational.edges:
            w = self.pair(a, b)
            if w.shape != (len(self.unary[a]), len(self.unary[b])):
                raise DataError(
                    f"binary weights for ({a!r}, {b!r}) have shape {w.shape}, expected "
                    f"{(len(self.unary[a]), len(self.unary[b]))}"
                )
        if self._finite:
            return
        for e in relational.entities:
            if not np.all(np.isfinite(self.unary[e])):
                raise DataError(f"non-finite unary weight for entity {e!r}")
        for a, b in relational.edges:
            if not np.all(np.isfinite(self.pair(a, b))):
                raise DataError(f"non-finite binary weight on edge ({a!r}, {b!r})")
        object.__setattr__(self, "_finite", True)


@dataclass(frozen=True)
class Selection:
    """One chosen hypothesis position per entity and the objective value."""

    chosen: Mapping[Entity, int]
    objective: float


def solve_tree(graph: HypothesisGraph, relational: RelationalGraph, lam: float) -> Selection:
    """Exact maximiser of the tree objective.

    Ties resolve to the lowest remaining hypothesis position at every max.
    """
    graph.check(relational)
    order = relational.order()
    kids = relational.children()
    best_score = {}
    backpointer = {}
    # removed hypotheses stay in the arrays with score -inf, so positions never shift
    for e in reversed(order):
        unary = graph.unary[e]
        group = graph.groups[e]
        if len(group) == len(unary):
            score = unary.copy()
        else:
            score = np.full(len(unary), -np.inf)
            ids = np.fromiter(group, dtype=np.intp, count=len(group))
            score[ids] = unary[ids]
        for c in kids[e]:
            w = graph.pair(e, c)
            table = (w if lam == 1.0 else lam * w) + best_score[c][None, :]
            arg = np.argmax(table, axis=1)
            score += np.take_along_axis(table, arg[:, None], axis=1)[:, 0]
            backpointer[c] = arg
        best_score[e] = score

    root = relational.root
    chosen = {root: int(np.argmax(best_score[root]))}
    parent = relational.parents()
    for e in order[1:]:
        chosen[e] = int(backpointer[e][chosen[parent[e]]])
    chosen = {e: chosen[e] for e in order}
    return Selection(chosen, float(best_score[root][chosen[root]]))


def solve_top_k(
    graph: HypothesisGraph, relational: RelationalGraph, lam: float, k: int
) -> list[Selection]:
    """Repeatedly solve, then delete the chosen hypotheses, up to ``k`` times."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    out = []
    current = graph
    for _ in range(k):
        sel = solve_tree(current, relational, lam)
        out.append(sel)
        current = current.without(sel.chosen)
        if any(not g for g in current.groups.values()):
            break
    return out


def evaluate_selection(
    graph: HypothesisGraph, relational: RelationalGraph, selection: Selection | Mapping, lam: float
) -> float:
    """Recompute the objective of ``selection`` from scratch."""
    chosen = selection.chosen if isinstance(selection, Selection) else selection
    for e in relational.entities:
        if e not in chosen:
            raise DataError(f"selection does not cover entity {e!r}")
        if chosen[e] not in graph.groups[e]:
            raise DataError(f"hypothesis {chosen[e]!r} is not in the group of {e!r}")
    total = 0.0
    for e in relational.entities:
        total += float(graph.unary[e][chosen[e]])
    pairwise = 0.0
    for a, b in relational.edges:
        pairwise += float(graph.pair(a, b)[chosen[a], chosen[b]])
    return total + lam * pairwise

