"""Probability estimates for stability events on perfect k-ary hosts.

The subject vertex is always a child of the root of a perfect k-ary
host one level taller than the requested subject height, so that its
subtree is a perfect k-ary tree of exactly that height.  Opinions on
the subtree are the random input; the universal predicates (strong,
(<= t), 1-close) do not depend on anything else, while weak stability
at t >= 1 additionally depends on the rest of the host and is averaged
over it.

Exact values enumerate the relevant opinions with the bit-sliced batch
engine and return dyadic fractions; Monte Carlo estimates pack sampled
opinions into the same batches.  Universal predicates are evaluated
through the two extreme extensions (see ``stability``), which decide
(<= t)-stability outright and strong t-stability except for patterns
whose extremes settle the subject at opposite opinions; those are
re-decided by extension enumeration when the budget allows and are
otherwise scored unstable and reported as ``unresolved``, making the
estimate a lower bound.

``fixed_point_q`` locates the fixed point of the one-level recursion
for the probability that a vertex fails to be weakly stable, and
``mc_tau`` samples stabilisation times of uniformly random opinions on
perfect hosts with reproducible per-trial seeds.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from multiprocessing import get_context

import numpy as np

from .bitsliced import BatchRun, lowest_bit_index, pack_bit_rows, tt_column
from .dynamics import OpinionVector, stabilise, step_budget
from .errors import (
    BadHostError,
    BadTimeError,
    BadVertexError,
    BudgetExceededError,
    MajlabError,
)
from .stability import EXTENSION_BUDGET, is_one_close_to_stability
from .trees import RootedTree, build_perfect_tree

__all__ = [
    "ProbEstimate",
    "FixedPointResult",
    "McSummary",
    "estimate_probability",
    "le_t_positive_check",
    "fixed_point_q",
    "mc_tau",
]

TARGETS = ("weak", "strong", "le_t", "one_close")


@dataclass(frozen=True)
class ProbEstimate:
    """A probability value; exact ones are dyadic, MC ones carry a 3-sigma CI."""

    target: str
    k: int
    height: int
    t: int | None
    method: str
    value: float
    count: int | None = None
    denominator: int | None = None
    trials: int | None = None
    ci_halfwidth: float | None = None
    seed: int | None = None
    xi: int | None = None
    unresolved: int | None = None


@dataclass(frozen=True)
class FixedPointResult:
    q: float
    residual: float
    lower: float
    upper: float
    iterations: int
    tolerance: float


@dataclass(frozen=True)
class McSummary:
    k: int
    h: int
    n: int
    diameter: int
    budget: int
    trials: int
    seed: int
    workers: int
    taus: list[int] = field(repr=False)
    trial_seeds: list[int] = field(repr=False)

    def stats(self) -> dict:
        taus = np.asarray(self.taus, dtype=np.int64)
        hist = {str(int(v)): int(c) for v, c in zip(*np.unique(taus, return_counts=True))}
        ratios = taus / self.diameter
        return {
            "mean": float(taus.mean()),
            "std": float(taus.std()),
            "min": int(taus.min()),
            "max": int(taus.max()),
            "median": float(np.median(taus)),
            "quantiles": {
                str(p): float(np.quantile(taus, p / 100)) for p in (5, 25, 75, 95)
            },
            "histogram": hist,
            "ratio_mean": float(ratios.mean()),
            "ratio_median": float(np.median(ratios)),
            "ratio_max": float(ratios.max()),
        }


def _host_and_subject(k: int, height: int) -> tuple[RootedTree, int]:
    if k < 2 or k % 2:
        raise MajlabError(f"arity must be even and at least 2, got {k}")
    if height < 0:
        raise BadVertexError(f"subject height must be non-negative, got {height}")
    host = build_perfect_tree(k, height + 1)
    return host, 1


def _subtree_ids(host: RootedTree, v: int) -> list[int]:
    return [int(u) for u in np.flatnonzero(host.subtree_mask(v))]


def _pattern_strong(
    host: RootedTree,
    v: int,
    inside: list[int],
    cols_in: list[int],
    bit: int,
    outside: list[int],
    t: int,
) -> bool:
    """Strong t-stability of one pattern by full extension enumeration."""
    mo = len(outside)
    width = 1 << mo
    emask = (1 << width) - 1
    cols = [0] * host.n
    for u, col in zip(inside, cols_in):
        cols[u] = emask if (col >> bit) & 1 else 0
    for i, u in enumerate(outside):
        cols[u] = tt_column(i, mo)
    run = BatchRun(host, cols, emask)
    parity = t & 1
    flips = 0
    while run.undecided:
        run.advance()
        if run.t >= t + 2 and (run.t & 1) == parity:
            flips |= run.flip_col(v)
    return flips == 0


def _strong_ok_bits(
    host: RootedTree,
    v: int,
    inside: list[int],
    cols_in: list[int],
    mask: int,
    t: int,
    budget: int,
) -> tuple[int, int]:
    """(stable bits, unresolved bits) for strong t-stability per pattern.

    The extreme extensions decide almost everything: a parity flip after t
    in either one is a counterexample, and equal settled opinions pin all
    extensions in between.  Patterns whose extremes settle at opposite
    opinions are re-decided by enumerating the extensions, or reported
    unresolved (and excluded from the stable count) when 2^m exceeds the
    budget.
    """
    parity = t & 1
    bad = 0
    values = []
    for fill in (0, mask):
        cols = [fill] * host.n
        for u, col in zip(inside, cols_in):
            cols[u] = col
        run = BatchRun(host, cols, mask)
        while run.undecided:
            run.advance()
            if run.t >= t + 2 and (run.t & 1) == parity:
                bad |= run.flip_col(v)
        while (run.t & 1) != parity:
            run.advance()
        values.append(run.cols[v])
    ok = mask & ~bad & ~(values[0] ^ values[1])
    pending = mask & ~bad & (values[0] ^ values[1])
    if not pending:
        return ok, 0
    outside = [u for u in range(host.n) if u not in set(inside)]
    if 1 << len(outside) > budget:
        return ok, pending
    cache: dict[int, bool] = {}
    while pending:
        bit = lowest_bit_index(pending)
        pending &= pending - 1
        key = sum(((col >> bit) & 1) << j for j, col in enumerate(cols_in))
        if key not in cache:
            cache[key] = _pattern_strong(host, v, inside, cols_in, bit, outside, t)
        if cache[key]:
            ok |= 1 << bit
    return ok, 0


def _le_t_ok_bits(
    host: RootedTree, v: int, inside: list[int], cols_in: list[int], mask: int, t: int
) -> int:
    """Bits whose pattern is (<= t)-stable at ``v`` (even t only)."""
    verdict = mask
    for fill in (0, mask):
        cols = [fill] * host.n
        for u, col in zip(inside, cols_in):
            cols[u] = col
        run = BatchRun(host, cols, mask)
        start = run.cols[v]
        diff = 0
        while run.t < t and run.undecided:
            run.advance()
            if (run.t & 1) == 0:
                diff |= run.cols[v] ^ start
        verdict &= mask & ~diff
    return verdict


def _weak_ok_bits(host: RootedTree, v: int, cols0: list[int], mask: int, t: int) -> int:
    """Bits whose full-host pattern leaves ``v`` weakly t-stable."""
    run = BatchRun(host, cols0, mask)
    while run.t < t and run.undecided:
        run.advance()
    while (run.t & 1) != (t & 1):
        run.advance()
    inside = host.subtree_mask(v)
    pad = run.cols[v]
    cols = [run.cols[int(u)] if inside[u] else pad for u in range(host.n)]
    side = BatchRun(host, cols, mask)
    flips = 0
    while side.undecided:
        side.advance()
        if (side.t & 1) == 0:
            flips |= side.flip_col(v)
    return mask & ~flips


def _weak_zero_ok_bits(
    host: RootedTree, v: int, inside: list[int], cols_in: list[int], mask: int
) -> int:
    """Bits whose subtree pattern leaves ``v`` weakly 0-stable."""
    pad = cols_in[inside.index(v)]
    cols = [pad] * host.n
    for u, col in zip(inside, cols_in):
        cols[u] = col
    run = BatchRun(host, cols, mask)
    flips = 0
    while run.undecided:
        run.advance()
        if (run.t & 1) == 0:
            flips |= run.flip_col(v)
    return mask & ~flips


def _tt_cols(m: int) -> list[int]:
    return [tt_column(i, m) for i in range(m)]


def _random_cols(m: int, trials: int, rng: np.random.Generator) -> list[int]:
    rows = rng.integers(0, 2, size=(m, trials), dtype=np.uint8)
    return pack_bit_rows(rows)


def _estimate(
    ok: int, want: int, mask: int, exact: bool, denominator: int, **meta
) -> ProbEstimate:
    good = ok & want & mask
    count = good.bit_count()
    value = count / denominator
    if exact:
        return ProbEstimate(
            method="exact", value=value, count=count, denominator=denominator, **meta
        )
    sigma = (value * (1.0 - value) / denominator) ** 0.5
    return ProbEstimate(
        method="mc",
        value=value,
        count=count,
        trials=denominator,
        ci_halfwidth=3.0 * sigma,
        **meta,
    )


def _validate_t(target: str, t: int | None) -> int | None:
    if target == "one_close":
        if t is not None:
            raise BadTimeError("1-close stability takes no time parameter")
        return None
    if t is None or t < 0:
        raise BadTimeError(f"target {target!r} needs a non-negative t, got {t}")
    if target == "le_t" and (t < 2 or t & 1):
        raise BadTimeError(f"(<=t) estimates support even t >= 2 only, got {t}")
    return t


def estimate_probability(
    target: str,
    height: int,
    t: int | None = None,
    *,
    k: int = 2,
    method: str = "auto",
    trials: int = 100_000,
    seed: int = 0,
    budget: int = EXTENSION_BUDGET,
) -> ProbEstimate:
    """Probability that the subject vertex satisfies a stability predicate.

    The opinion on the subject's subtree is uniform; for weak stability
    at t >= 1 the rest of the host is uniform as well.  ``method`` is
    ``"exact"``, ``"mc"``, or ``"auto"`` (exact when the enumeration
    fits the budget).
    """
    if target not in TARGETS:
        raise MajlabError(f"unknown target {target!r}")
    t = _validate_t(target, t)
    if target != "le_t" and k != 2:
        raise BadHostError(f"target {target!r} is defined on binary hosts, got k={k}")
    host, v = _host_and_subject(k, height)
    if target == "one_close" and host.is_leaf(v):
        raise BadVertexError("1-close stability needs a non-leaf subject")
    inside = _subtree_ids(host, v)
    m = len(inside)
    full_host = target == "weak" and t > 0
    exact_bits = host.n if full_host else m
    feasible = 1 << exact_bits <= budget
    if target in ("one_close", "strong"):
        feasible = feasible and 1 << (host.n - m) <= budget
    if method == "auto":
        method = "exact" if feasible else "mc"
    if method == "exact" and not feasible:
        raise BudgetExceededError(
            f"exact evaluation needs 2^{exact_bits} patterns, over budget {budget}"
        )
    meta = {"target": target, "k": k, "height": height, "t": t}
    if method == "exact":
        if target == "one_close":
            return _one_close_exact(host, v, inside, budget, meta)
        width = 1 << exact_bits
        mask = (1 << width) - 1
        cols = _tt_cols(exact_bits)
        if target == "weak":
            ok = (
                _weak_ok_bits(host, v, cols, mask, t)
                if full_host
                else _weak_zero_ok_bits(host, v, inside, cols, mask)
            )
        elif target == "strong":
            ok, _ = _strong_ok_bits(host, v, inside, cols, mask, t, budget)
        else:
            ok = _le_t_ok_bits(host, v, inside, cols, mask, t)
        return _estimate(ok, mask, mask, True, width, **meta)
    if method != "mc":
        raise MajlabError(f"unknown method {method!r}")
    if trials < 1:
        raise MajlabError(f"trials must be positive, got {trials}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    mask = (1 << trials) - 1
    if target == "one_close":
        return _one_close_mc(host, v, inside, trials, rng, budget, meta, seed)
    cols = _random_cols(exact_bits, trials, rng)
    if target == "weak":
        ok = (
            _weak_ok_bits(host, v, cols, mask, t)
            if full_host
            else _weak_zero_ok_bits(host, v, inside, cols, mask)
        )
    elif target == "strong":
        ok, pending = _strong_ok_bits(host, v, inside, cols, mask, t, budget)
        est = _estimate(ok, mask, mask, False, trials, **meta)
        return replace(est, seed=seed, unresolved=pending.bit_count())
    else:
        ok = _le_t_ok_bits(host, v, inside, cols, mask, t)
    return replace(_estimate(ok, mask, mask, False, trials, **meta), seed=seed)


def _one_close_pattern_vector(
    host: RootedTree, inside: list[int], pattern: int
) -> OpinionVector:
    signs = np.ones(host.n, dtype=np.int8)
    for i, u in enumerate(inside):
        signs[u] = 1 if (pattern >> i) & 1 else -1
    return OpinionVector.from_signs(signs)


def _one_close_exact(
    host: RootedTree, v: int, inside: list[int], budget: int, meta: dict
) -> ProbEstimate:
    m = len(inside)
    count = 0
    for pattern in range(1 << m):
        xi0 = _one_close_pattern_vector(host, inside, pattern)
        if is_one_close_to_stability(host, xi0, v, budget).verdict:
            count += 1
    return ProbEstimate(
        method="exact", value=count / (1 << m), count=count, denominator=1 << m, **meta
    )


def _one_close_mc(
    host: RootedTree,
    v: int,
    inside: list[int],
    trials: int,
    rng: np.random.Generator,
    budget: int,
    meta: dict,
    seed: int,
) -> ProbEstimate:
    m = len(inside)
    patterns = rng.integers(0, 1 << m, size=trials, dtype=np.uint64)
    cache: dict[int, bool] = {}
    count = 0
    for p in patterns:
        p = int(p)
        if p not in cache:
            xi0 = _one_close_pattern_vector(host, inside, p)
            cache[p] = is_one_close_to_stability(host, xi0, v, budget).verdict
        count += cache[p]
    value = count / trials
    sigma = (value * (1.0 - value) / trials) ** 0.5
    return ProbEstimate(
        method="mc",
        value=value,
        count=count,
        trials=trials,
        ci_halfwidth=3.0 * sigma,
        seed=seed,
        **meta,
    )


def le_t_positive_check(
    k: int,
    t: int,
    xi: int,
    *,
    height: int = 2,
    method: str = "auto",
    trials: int = 100_000,
    seed: int = 0,
    budget: int = EXTENSION_BUDGET,
) -> ProbEstimate:
    """P[subject is (<= t)-stable with time-t opinion ``xi``] (even t).

    On the stable event the time-t opinion equals the time-0 one, so the
    joint event is decided from the subtree pattern alone.
    """
    if xi not in (-1, 1):
        raise MajlabError(f"xi must be +1 or -1, got {xi}")
    _validate_t("le_t", t)
    host, v = _host_and_subject(k, height)
    inside = _subtree_ids(host, v)
    m = len(inside)
    feasible = 1 << m <= budget
    if method == "auto":
        method = "exact" if feasible else "mc"
    if method == "exact" and not feasible:
        raise BudgetExceededError(
            f"exact evaluation needs 2^{m} patterns, over budget {budget}"
        )
    meta = {"target": "le_t", "k": k, "height": height, "t": t}
    pos = inside.index(v)
    if method == "exact":
        width = 1 << m
        mask = (1 << width) - 1
        cols = _tt_cols(m)
        ok = _le_t_ok_bits(host, v, inside, cols, mask, t)
        want = cols[pos] if xi > 0 else mask ^ cols[pos]
        return replace(_estimate(ok, want, mask, True, width, **meta), xi=xi)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    mask = (1 << trials) - 1
    cols = _random_cols(m, trials, rng)
    ok = _le_t_ok_bits(host, v, inside, cols, mask, t)
    want = cols[pos] if xi > 0 else mask ^ cols[pos]
    return replace(_estimate(ok, want, mask, False, trials, **meta), xi=xi, seed=seed)


def _recursion_map(x: float) -> float:
    """One level of the weak-instability recursion on the infinite binary tree."""
    both_agree = (0.25 + 0.25 * x * x) ** 2
    child_fails = (1.0 - (1.0 - x * x) / 4.0) ** 2
    split = (0.5 + 0.5 * x) ** 4 - both_agree
    return both_agree + child_fails * split


def fixed_point_q(
    lower: float = 1.0 / 16.0,
    upper: float = 3.0 / 40.0,
    tolerance: float = 1e-12,
) -> FixedPointResult:
    """Bisect the fixed point of the weak-instability recursion.

    The map is continuous with g(lower) > 0 > g(upper) for the default
    bracket, so bisection converges to the unique fixed point there.
    """
    lo, hi = float(lower), float(upper)
    g_lo = _recursion_map(lo) - lo
    g_hi = _recursion_map(hi) - hi
    if not (g_lo > 0.0 > g_hi):
        raise MajlabError(
            f"bracket [{lo}, {hi}] does not straddle the fixed point"
        )
    iterations = 0
    while hi - lo > tolerance and iterations < 200:
        mid = 0.5 * (lo + hi)
        if _recursion_map(mid) - mid > 0.0:
            lo = mid
        else:
            hi = mid
        iterations += 1
    q = 0.5 * (lo + hi)
    return FixedPointResult(
        q=q,
        residual=abs(_recursion_map(q) - q),
        lower=lo,
        upper=hi,
        iterations=iterations,
        tolerance=tolerance,
    )


_POOL_TREE: RootedTree | None = None
_POOL_SHAPE: tuple[int, int] | None = None


def _pool_init(k: int, h: int) -> None:
    global _POOL_TREE, _POOL_SHAPE
    _POOL_TREE = build_perfect_tree(k, h)
    _POOL_SHAPE = (k, h)


def trial_seed(seed: int, index: int) -> int:
    """The derived 64-bit seed recorded for trial ``index``."""
    return int(
        np.random.SeedSequence(entropy=seed, spawn_key=(index,)).generate_state(
            1, np.uint64
        )[0]
    )


def _run_trial(tree: RootedTree, seed: int, index: int) -> int:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    rng = np.random.default_rng(ss)
    xi0 = OpinionVector.random(tree.n, rng)
    return stabilise(tree, xi0).tau


def _pool_chunk(args: tuple[int, int, int]) -> list[int]:
    seed, start, stop = args
    assert _POOL_TREE is not None
    return [_run_trial(_POOL_TREE, seed, i) for i in range(start, stop)]


def mc_tau(
    k: int,
    h: int,
    trials: int,
    seed: int,
    workers: int = 1,
) -> McSummary:
    """Sample stabilisation times of uniform opinions on a perfect host.

    Trial ``i`` draws its opinions from a generator seeded by spawning
    ``seed`` with key ``(i,)``; results are therefore independent of the
    worker count and reproducible trial by trial.
    """
    if trials < 1:
        raise MajlabError(f"trials must be positive, got {trials}")
    tree = build_perfect_tree(k, h)
    if workers <= 1:
        taus = [_run_trial(tree, seed, i) for i in range(trials)]
    else:
        chunk = max(1, trials // (workers * 8))
        bounds = list(range(0, trials, chunk)) + [trials]
        jobs = [(seed, a, b) for a, b in zip(bounds, bounds[1:])]
        ctx = get_context("fork")
        with ProcessPoolExecutor(
            max_workers=workers, mp_context=ctx, initializer=_pool_init, initargs=(k, h)
        ) as pool:
            taus = [t for part in pool.map(_pool_chunk, jobs) for t in part]
    return McSummary(
        k=k,
        h=h,
        n=tree.n,
        diameter=tree.diameter,
        budget=step_budget(tree),
        trials=trials,
        seed=seed,
        workers=workers,
        taus=taus,
        trial_seeds=[trial_seed(seed, i) for i in range(trials)],
    )
