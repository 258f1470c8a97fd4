"""Stability predicates against exhaustive extension enumeration.

Both hosts are small enough to quantify over every extension with the
scalar engine, so each decider is checked against a literal transcription
of its definition.
"""

import numpy as np
import pytest

from majlab.dynamics import OpinionVector, stabilise
from majlab.errors import (
    BadHostError,
    BadTimeError,
    BadVertexError,
    BudgetExceededError,
)
from majlab.stability import (
    is_le_t_stable,
    is_one_close_to_stability,
    is_strongly_t_stable,
    is_weakly_t_stable,
    le_t_stable_extreme_runs,
    strong_t_stable_extreme_runs,
)
from majlab.trees import RootedTree, build_perfect_tree

# binary host whose depth-1 vertex has height 2: strong verdicts go both ways
HOST = RootedTree.from_edges(
    [(0, 1), (0, 2), (0, 3), (1, 4), (1, 5), (4, 6), (4, 7)]
)
# 4-ary host for the (<= t) decider, which has no binary restriction
KARY = RootedTree.from_edges(
    [(0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (1, 6), (1, 7), (1, 8), (1, 9)]
)
PERFECT2 = build_perfect_tree(2, 2)

# frozen instance where the two extreme runs settle v at opposite opinions
EXTREMES_OPEN = (HOST, 1, 2, 1)  # (host, v, pattern bits, t)


def subtree_ids(tree, v):
    return [int(u) for u in np.flatnonzero(tree.subtree_mask(v))]


def pattern_vector(tree, ids, bits, outside_fill=1):
    signs = np.full(tree.n, outside_fill, dtype=np.int8)
    for i, u in enumerate(ids):
        signs[u] = 1 if (bits >> i) & 1 else -1
    return OpinionVector.from_signs(signs)


def extensions(tree, v, signs):
    """Every full vector that agrees with ``signs`` on the subtree of v."""
    outside = [u for u in range(tree.n) if u not in set(subtree_ids(tree, v))]
    for fill in range(1 << len(outside)):
        full = np.asarray(signs, dtype=np.int8).copy()
        for j, u in enumerate(outside):
            full[u] = 1 if (fill >> j) & 1 else -1
        yield OpinionVector.from_signs(full)


def tail_state(hist, s):
    if s < len(hist):
        return hist[s]
    return hist[len(hist) - 2 + ((s - len(hist)) % 2)]


def strong_oracle(tree, xi0, v, t):
    return all(
        stabilise(tree, ext).is_vertex_t_stable(v, t)
        for ext in extensions(tree, v, xi0.to_signs())
    )


def weak_oracle(tree, xi0, v, t):
    hist = stabilise(tree, xi0, keep_history=True).history
    state = tail_state(hist, t)
    return any(
        stabilise(tree, ext).is_vertex_t_stable(v, 0)
        for ext in extensions(tree, v, state)
    )


def le_t_oracle(tree, xi0, v, t):
    for ext in extensions(tree, v, xi0.to_signs()):
        hist = stabilise(tree, ext, keep_history=True).history
        values = {int(tail_state(hist, s)[v]) for s in range(t % 2, t + 1, 2)}
        if len(values) > 1:
            return False
    return True


def one_close_oracle(tree, xi0, v):
    for ext in extensions(tree, v, xi0.to_signs()):
        hist = stabilise(tree, ext, keep_history=True).history
        flip = next(
            (s for s in range(2, len(hist), 2) if hist[s][v] != hist[s - 2][v]),
            None,
        )
        if flip is not None and not weak_oracle(tree, ext, v, flip):
            return False
    return True


def all_patterns(tree, v):
    ids = subtree_ids(tree, v)
    for bits in range(1 << len(ids)):
        yield pattern_vector(tree, ids, bits)


def test_strong_matches_enumeration_oracle():
    verdicts = set()
    for tree, v in ((HOST, 1), (HOST, 4), (PERFECT2, 1)):
        for t in range(5):
            for xi0 in all_patterns(tree, v):
                got = is_strongly_t_stable(tree, xi0, v, t)
                assert got.verdict == strong_oracle(tree, xi0, v, t)
                verdicts.add(got.verdict)
    assert verdicts == {True, False}


def test_strong_depends_only_on_the_subtree_restriction():
    ids = subtree_ids(HOST, 1)
    for bits in (0, 2, 5, 31):
        plus = pattern_vector(HOST, ids, bits, outside_fill=1)
        minus = pattern_vector(HOST, ids, bits, outside_fill=-1)
        for t in range(3):
            assert (
                is_strongly_t_stable(HOST, plus, 1, t).verdict
                == is_strongly_t_stable(HOST, minus, 1, t).verdict
            )


def test_strong_is_monotone_in_t():
    for xi0 in all_patterns(HOST, 1):
        for t in range(3):
            if is_strongly_t_stable(HOST, xi0, 1, t).verdict:
                assert is_strongly_t_stable(HOST, xi0, 1, t + 2).verdict


def test_strong_verdict_certificates():
    seen_false = 0
    for xi0 in all_patterns(HOST, 1):
        got = is_strongly_t_stable(HOST, xi0, 1, 0)
        assert got.kind == "strong" and got.vertex == 1 and got.t == 0
        assert got.checked >= 2
        if got.verdict:
            assert got.certificate is None
            assert got.method in ("extremes", "brute-force")
        else:
            seen_false += 1
            cert = got.certificate
            inside = subtree_ids(HOST, 1)
            assert all(cert.sign(u) == xi0.sign(u) for u in inside)
            assert not stabilise(HOST, cert).is_vertex_t_stable(1, 0)
    assert seen_false > 0


def test_strong_extreme_runs_are_three_valued():
    outcomes = set()
    for tree, v in ((HOST, 1), (PERFECT2, 1)):
        for t in range(4):
            for xi0 in all_patterns(tree, v):
                fast = strong_t_stable_extreme_runs(tree, xi0, v, t)
                full = is_strongly_t_stable(tree, xi0, v, t)
                outcomes.add(fast)
                if fast is None:
                    assert full.method == "brute-force"
                else:
                    assert fast == full.verdict
    assert outcomes == {True, False, None}


def test_strong_budget_applies_to_enumeration_only():
    tree, v, bits, t = EXTREMES_OPEN
    xi0 = pattern_vector(tree, subtree_ids(tree, v), bits)
    assert strong_t_stable_extreme_runs(tree, xi0, v, t) is None
    got = is_strongly_t_stable(tree, xi0, v, t)
    assert got.verdict is True and got.method == "brute-force"
    assert got.checked == 2 + 8  # two extremes plus 2^3 outside fills
    with pytest.raises(BudgetExceededError):
        is_strongly_t_stable(tree, xi0, v, t, budget=2)
    # decisive extremes need no enumeration, so the budget never triggers
    for bits in range(32):
        cand = pattern_vector(tree, subtree_ids(tree, v), bits)
        fast = strong_t_stable_extreme_runs(tree, cand, v, 0)
        if fast is not None:
            got = is_strongly_t_stable(tree, cand, v, 0, budget=2)
            assert got.verdict == fast and got.method == "extremes"
            break
    else:
        pytest.fail("no extremes-decisive pattern found")


def test_weak_matches_enumeration_oracle():
    rng = np.random.default_rng(12)
    for tree, v in ((HOST, 1), (HOST, 4), (PERFECT2, 1)):
        for _ in range(8):
            xi0 = OpinionVector.random(tree.n, rng)
            for t in range(4):
                got = is_weakly_t_stable(tree, xi0, v, t)
                assert got.verdict == weak_oracle(tree, xi0, v, t)


def test_weak_negative_exists_and_is_confirmed_by_enumeration():
    tree = build_perfect_tree(2, 3)
    ids = subtree_ids(tree, 1)
    verdicts = [
        is_weakly_t_stable(tree, pattern_vector(tree, ids, bits), 1, 0).verdict
        for bits in range(1 << len(ids))
    ]
    assert sum(verdicts) == 120  # 15/16 of the 128 subtree patterns
    bad = verdicts.index(False)
    assert not weak_oracle(tree, pattern_vector(tree, ids, bad), 1, 0)
    good = verdicts.index(True)
    assert weak_oracle(tree, pattern_vector(tree, ids, good), 1, 0)


def test_weak_certificate_is_a_replayable_extension():
    rng = np.random.default_rng(13)
    for _ in range(10):
        xi0 = OpinionVector.random(HOST.n, rng)
        got = is_weakly_t_stable(HOST, xi0, 1, 2)
        assert got.method == "canonical"
        replay = stabilise(HOST, got.certificate)
        assert replay.is_vertex_t_stable(1, 0) == got.verdict


def test_le_t_matches_enumeration_oracle():
    verdicts = set()
    for tree, v, ts in ((HOST, 1, (2, 3, 4)), (KARY, 1, (2, 3))):
        for t in ts:
            for xi0 in all_patterns(tree, v):
                got = is_le_t_stable(tree, xi0, v, t)
                assert got.verdict == le_t_oracle(tree, xi0, v, t)
                verdicts.add(got.verdict)
                if not got.verdict:
                    # certificate exhibits a flip at or before t, at t's parity
                    hist = stabilise(tree, got.certificate, keep_history=True).history
                    vals = {int(tail_state(hist, s)[v]) for s in range(t % 2, t + 1, 2)}
                    assert len(vals) > 1
    assert verdicts == {True, False}


def test_le_t_extreme_runs_decide_even_t():
    for tree, v in ((HOST, 1), (KARY, 1), (PERFECT2, 1)):
        for t in (2, 4):
            for xi0 in all_patterns(tree, v):
                assert (
                    le_t_stable_extreme_runs(tree, xi0, v, t)
                    == is_le_t_stable(tree, xi0, v, t).verdict
                )


def test_le_t_allows_leaves_and_kary_hosts():
    xi0 = OpinionVector.filled(KARY.n, 1)
    # neither the leaf subject nor the 4-ary host is rejected
    assert is_le_t_stable(KARY, xi0, 6, 2).verdict == le_t_oracle(KARY, xi0, 6, 2)
    assert is_le_t_stable(KARY, xi0, 1, 3).verdict == le_t_oracle(KARY, xi0, 1, 3)


def test_one_close_matches_enumeration_oracle():
    for xi0 in all_patterns(HOST, 1):
        got = is_one_close_to_stability(HOST, xi0, 1)
        assert got.verdict == one_close_oracle(HOST, xi0, 1)
    for xi0 in all_patterns(PERFECT2, 1):
        got = is_one_close_to_stability(PERFECT2, xi0, 1)
        assert got.verdict == one_close_oracle(PERFECT2, xi0, 1)


def test_vertex_and_time_preconditions():
    xi0 = OpinionVector.filled(HOST.n, 1)
    with pytest.raises(BadVertexError):
        is_strongly_t_stable(HOST, xi0, HOST.root, 0)
    with pytest.raises(BadVertexError):
        is_weakly_t_stable(HOST, xi0, HOST.n, 0)
    with pytest.raises(BadVertexError):
        is_strongly_t_stable(HOST, xi0, 7, 0)  # leaf
    with pytest.raises(BadVertexError):
        is_one_close_to_stability(HOST, xi0, 7)
    with pytest.raises(BadTimeError):
        is_weakly_t_stable(HOST, xi0, 1, -1)
    with pytest.raises(BadTimeError):
        is_le_t_stable(HOST, xi0, 1, 1)


def test_binary_host_restriction():
    xi0 = OpinionVector.filled(KARY.n, 1)
    with pytest.raises(BadHostError):
        is_weakly_t_stable(KARY, xi0, 1, 0)
    with pytest.raises(BadHostError):
        is_strongly_t_stable(KARY, xi0, 1, 0)
    with pytest.raises(BadHostError):
        is_one_close_to_stability(KARY, xi0, 1)
