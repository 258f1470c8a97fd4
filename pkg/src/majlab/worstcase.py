"""Exact worst-case stabilisation time on odd-degree trees.

The stabilisation time of a tree is governed by a family of candidate
paths: simple paths whose vertices are all activity-prone except possibly
the final one.  A vertex qualifies as an interior path vertex when fewer
than half of its remaining neighbours are pendant ("active"), and as a
path endpoint when at most half are ("active" or "balky").  A candidate
path of length n scores n + 1 steps when its endpoint touches a pendant
vertex and n otherwise, and the worst case over all initial opinions is
exactly the maximum score.

``worst_case_tau`` evaluates that maximum with two linear-time sweeps
over directed edges (down scores from leaves, up scores from the root)
and reconstructs the lexicographically smallest maximising path.
``worst_case_witness`` builds an initial opinion vector that attains the
score of a given candidate path, and ``brute_force_tau`` provides the
independent exhaustive check used to validate both.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bitsliced import batch_max_tau, tt_column
from .dynamics import OpinionVector
from .errors import BadPathError, BudgetExceededError, TooSmallError
from .trees import RootedTree, VertexClass, classify_all, reroot

__all__ = [
    "CandidatePath",
    "WorstCaseReport",
    "active_path_bounds",
    "brute_force_tau",
    "worst_case_tau",
    "worst_case_witness",
]

_NEG = -(1 << 30)  # effectively -inf for the integer DP

BRUTE_FORCE_BUDGET = 1 << 24


@dataclass(frozen=True)
class CandidatePath:
    """A maximising candidate path together with its score t(Q)."""

    vertices: tuple[int, ...]
    t_value: int
    end_adjacent_to_leaf: bool

    @property
    def n(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class WorstCaseReport:
    tau: int
    argmax: CandidatePath
    witness: OpinionVector
    per_vertex_bound: dict[int, int]


def _pendant_adjacency(tree: RootedTree) -> np.ndarray:
    pend = tree.degree == 1
    return np.add.reduceat(pend[tree.adj_flat], tree.adj_offsets[:-1]) > 0


def _terminal_scores(tree: RootedTree, codes: np.ndarray) -> np.ndarray:
    """Score of the single-vertex path ending at v, or -inf if v cannot end one."""
    touches = _pendant_adjacency(tree)
    scores = np.where(touches, 2, 1).astype(np.int64)
    scores[codes == VertexClass.PASSIVE] = _NEG
    return scores


def _down_scores(tree: RootedTree, active: np.ndarray, base: np.ndarray) -> list[int]:
    """down[v] = best score of a candidate path starting at v inside v's subtree."""
    down = [int(x) for x in base]
    for v in reversed(tree.order.tolist()):
        if not active[v]:
            continue
        best = _NEG
        for c in tree.children(v):
            if down[c] > best:
                best = down[c]
        if best > _NEG and 1 + best > down[v]:
            down[v] = 1 + best
    return down


def _up_scores(
    tree: RootedTree, active: np.ndarray, base: np.ndarray, down: list[int]
) -> list[int]:
    """up[c] = best score of a candidate path starting at parent(c) avoiding c."""
    up = [_NEG] * tree.n
    for u in tree.order.tolist():
        kids = tree.children(u)
        if kids.size == 0:
            continue
        # top two child down-scores let us exclude any one child in O(1)
        best1 = best2 = _NEG
        arg1 = -1
        for c in kids:
            d = down[c]
            if d > best1:
                best1, best2, arg1 = d, best1, int(c)
            elif d > best2:
                best2 = d
        above = up[u] if u != tree.root else _NEG
        for c in kids:
            score = int(base[u])
            if active[u]:
                other = best2 if int(c) == arg1 else best1
                through = max(above, other)
                if through > _NEG:
                    score = max(score, 1 + through)
            up[int(c)] = score
    return up


def _full_scores(
    tree: RootedTree, active: np.ndarray, base: np.ndarray, down: list[int], up: list[int]
) -> list[int]:
    full = [int(x) for x in base]
    for v in range(tree.n):
        if not active[v]:
            continue
        best = up[v] if v != tree.root else _NEG
        for c in tree.children(v):
            if down[c] > best:
                best = down[c]
        if best > _NEG and 1 + best > full[v]:
            full[v] = 1 + best
    return full


def _reconstruct_path(
    tree: RootedTree,
    active: np.ndarray,
    base: np.ndarray,
    down: list[int],
    up: list[int],
    full: list[int],
    target: int,
) -> list[int]:
    """Lexicographically smallest vertex sequence attaining ``target``.

    Prefix order: stopping beats extending, and among continuations the
    smallest vertex id wins.  ``down``/``up`` give the residual score of
    continuing into a neighbour, so the greedy choice is safe.
    """
    cur = min(v for v in range(tree.n) if full[v] == target)
    came = -1
    path = [cur]
    remaining = target
    while base[cur] != remaining:
        assert active[cur]
        nxt = -1
        for x in tree.neighbours(cur):
            x = int(x)
            if x == came:
                continue
            residual = down[x] if tree.parent[x] == cur else up[cur]
            if residual == remaining - 1:
                nxt = x
                break
        assert nxt >= 0
        path.append(nxt)
        came, cur = cur, nxt
        remaining -= 1
    return path


def active_path_bounds(tree: RootedTree) -> dict[int, int]:
    """Per-vertex flip deadlines: an active vertex v cannot flip after L(v) + 1.

    L(v) is the maximum number of vertices of a simple path of active
    vertices starting at v.  Non-active vertices are not listed (they
    settle within two steps regardless).
    """
    codes = classify_all(tree)
    active = codes == VertexClass.ACTIVE
    down = [0] * tree.n
    for v in reversed(tree.order.tolist()):
        if not active[v]:
            continue
        best = 0
        for c in tree.children(v):
            if down[c] > best:
                best = down[c]
        down[v] = 1 + best
    up = [0] * tree.n
    for u in tree.order.tolist():
        kids = tree.children(u)
        if kids.size == 0:
            continue
        best1 = best2 = 0
        arg1 = -1
        for c in kids:
            d = down[c]
            if d > best1:
                best1, best2, arg1 = d, best1, int(c)
            elif d > best2:
                best2 = d
        for c in kids:
            score = 0
            if active[u]:
                other = best2 if int(c) == arg1 else best1
                score = 1 + max(up[u] if u != tree.root else 0, other)
            up[int(c)] = score
    bounds: dict[int, int] = {}
    for v in range(tree.n):
        if not active[v]:
            continue
        best = up[v] if v != tree.root else 0
        for c in tree.children(v):
            if down[c] > best:
                best = down[c]
        bounds[v] = 1 + best
    return bounds


def worst_case_tau(tree: RootedTree) -> WorstCaseReport:
    """Exact worst-case stabilisation time, maximising path, and witness."""
    if tree.n < 5:
        raise TooSmallError(
            f"worst-case analysis needs at least 5 vertices, got {tree.n}"
        )
    codes = classify_all(tree)
    active = codes == VertexClass.ACTIVE
    base = _terminal_scores(tree, codes)
    down = _down_scores(tree, active, base)
    up = _up_scores(tree, active, base, down)
    full = _full_scores(tree, active, base, down, up)
    tau = max(full)
    assert tau >= 1
    vertices = _reconstruct_path(tree, active, base, down, up, full, tau)
    touches = bool(_pendant_adjacency(tree)[vertices[-1]])
    assert tau == len(vertices) + (1 if touches else 0)
    argmax = CandidatePath(tuple(vertices), tau, touches)
    witness = worst_case_witness(tree, list(argmax.vertices))
    return WorstCaseReport(tau, argmax, witness, active_path_bounds(tree))


def _validate_candidate_path(tree: RootedTree, path: list[int]) -> None:
    if len(path) == 0:
        raise BadPathError("candidate path is empty")
    if len(set(path)) != len(path):
        raise BadPathError("candidate path repeats a vertex")
    for v in path:
        if not 0 <= v < tree.n:
            raise BadPathError(f"vertex {v} out of range")
    for a, b in zip(path, path[1:]):
        if b not in tree.neighbours(a):
            raise BadPathError(f"vertices {a} and {b} are not adjacent")
    codes = classify_all(tree)
    for v in path[:-1]:
        if codes[v] != VertexClass.ACTIVE:
            raise BadPathError(f"interior path vertex {v} is not active")
    if codes[path[-1]] == VertexClass.PASSIVE:
        raise BadPathError(f"end vertex {path[-1]} is passive")


def worst_case_witness(tree: RootedTree, path: list[int]) -> OpinionVector:
    """Initial opinions forcing the end of ``path`` to keep flipping.

    With the tree rooted at the far end of the path, each path vertex
    starts positive but is outvoted one step after its predecessor: the
    recipe hands exactly half of its non-path subtrees a negative block,
    so the lone positive parent edge decides, one step too late.
    """
    _validate_candidate_path(tree, path)
    rt = reroot(tree, path[-1])
    signs = np.full(tree.n, -1, dtype=np.int8)
    for v in path:
        signs[v] = 1
    first = path[0]
    # below the path head: children agree with it, deeper vertices do not
    for c in rt.children(first):
        c = int(c)
        signs[rt.subtree_mask(c)] = -1
        signs[c] = 1
    on_path = np.zeros(tree.n, dtype=bool)
    on_path[path] = True
    for i in range(1, len(path)):
        v = path[i]
        need = (rt.degree[v] - 1) // 2
        negatives = 0
        for c in rt.children(v):
            c = int(c)
            if on_path[c]:
                continue
            if rt.pendant[c]:
                signs[c] = 1
                continue
            # children are id-sorted, so the first `need` non-pendant ones
            sign = -1 if negatives < need else 1
            negatives += sign == -1
            signs[rt.subtree_mask(c)] = sign
        assert negatives == need or rt.pendant[v]
    return OpinionVector.from_signs(signs)


def brute_force_tau(
    tree: RootedTree, budget: int = BRUTE_FORCE_BUDGET
) -> tuple[int, OpinionVector]:
    """Maximum stabilisation time over all initial opinions, by enumeration.

    Negating every opinion negates the whole trajectory, so only vectors
    with a positive first vertex are enumerated; the result is unchanged.
    Returns the maximum together with the smallest-index maximiser among
    the enumerated half.
    """
    if 1 << tree.n > budget:
        raise BudgetExceededError(
            f"2^{tree.n} assignments exceed the enumeration budget {budget}"
        )
    m = tree.n - 1
    width = 1 << m
    mask = (1 << width) - 1
    cols = [mask] + [tt_column(v - 1, m) for v in range(1, tree.n)]
    tau, index = batch_max_tau(tree, cols, mask)
    signs = np.empty(tree.n, dtype=np.int8)
    signs[0] = 1
    for v in range(1, tree.n):
        signs[v] = 1 if (index >> (v - 1)) & 1 else -1
    return tau, OpinionVector.from_signs(signs)
