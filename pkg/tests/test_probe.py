"""Probability estimation: frozen exact values, MC consistency, fixed point."""

from fractions import Fraction

import numpy as np
import pytest

from majlab.dynamics import step_budget
from majlab.errors import (
    BadHostError,
    BadTimeError,
    BudgetExceededError,
    MajlabError,
)
from majlab.probe import (
    estimate_probability,
    fixed_point_q,
    le_t_positive_check,
    mc_tau,
    trial_seed,
)
from majlab.trees import build_perfect_tree


def exact_fraction(est):
    assert est.method == "exact"
    return Fraction(est.count, est.denominator)


def test_strong_base_cases_height_one():
    for t in range(4):
        est = estimate_probability("strong", 1, t)
        assert est.denominator == 8
        assert exact_fraction(est) == 1


def test_strong_base_cases_height_two():
    expected = {0: Fraction(9, 16), 1: Fraction(1, 2), 2: Fraction(5, 8), 3: 1}
    for t, want in expected.items():
        est = estimate_probability("strong", 2, t)
        assert est.denominator == 128
        assert exact_fraction(est) == want
        assert est.value == pytest.approx(float(want), abs=0)
        assert est.unresolved is None


def test_weak_base_cases():
    for height, denominator in ((2, 128), (3, 32768)):
        est = estimate_probability("weak", height, 0)
        assert est.denominator == denominator
        assert exact_fraction(est) == Fraction(15, 16)
    leaf = estimate_probability("weak", 0, 0)
    assert leaf.denominator == 2
    assert exact_fraction(leaf) == 1


def test_one_close_exact_height_two():
    est = estimate_probability("one_close", 2)
    assert est.count == est.denominator == 128
    assert est.value == 1.0


def test_mc_agrees_with_exact_within_four_sigma():
    cases = (
        ("strong", 2, 0),
        ("strong", 2, 2),
        ("weak", 2, 0),
        ("le_t", 2, 2),
    )
    for target, height, t in cases:
        exact = estimate_probability(target, height, t)
        mc = estimate_probability(target, height, t, method="mc", trials=4000, seed=11)
        assert mc.method == "mc"
        assert mc.trials == 4000
        assert mc.seed == 11
        sigma = mc.ci_halfwidth / 3
        assert abs(mc.value - exact.value) <= 4 * sigma + 1e-12


def test_mc_strong_reports_unresolved_patterns():
    # at height 2 every sampled pattern is decided (enumeration fits the budget)
    decided = estimate_probability("strong", 2, 2, method="mc", trials=1000, seed=3)
    assert decided.unresolved == 0
    # at height 3 the outside is too large to enumerate; the estimate is a
    # lower bound and the pending trials are reported
    open_t2 = estimate_probability("strong", 3, 2, method="mc", trials=2000, seed=3)
    assert open_t2.unresolved > 0
    assert open_t2.count + open_t2.unresolved <= open_t2.trials
    # at t = 0 the settled parity-0 opinion is forced, so nothing is pending
    open_t0 = estimate_probability("strong", 3, 0, method="mc", trials=2000, seed=3)
    assert open_t0.unresolved == 0


def test_le_t_positive_split_is_symmetric():
    whole = estimate_probability("le_t", 2, 2)
    pos = le_t_positive_check(2, 2, 1)
    neg = le_t_positive_check(2, 2, -1)
    assert pos.xi == 1 and neg.xi == -1
    assert pos.method == neg.method == "exact"
    assert pos.count == neg.count
    assert pos.count + neg.count == whole.count
    assert pos.denominator == whole.denominator


def test_le_t_on_kary_hosts():
    exact = estimate_probability("le_t", 1, 2, k=4)
    assert exact.denominator == 32
    mc = estimate_probability("le_t", 1, 2, k=4, method="mc", trials=2000, seed=5)
    sigma = mc.ci_halfwidth / 3
    assert abs(mc.value - exact.value) <= 4 * sigma + 1e-12


def test_auto_method_selection():
    assert estimate_probability("strong", 2, 0).method == "exact"
    assert estimate_probability("weak", 3, 0).method == "exact"
    assert (
        estimate_probability("strong", 4, 0, trials=200, seed=1).method == "mc"
    )
    assert estimate_probability("weak", 4, 0, trials=200, seed=1).method == "mc"


def test_estimate_validation_errors():
    with pytest.raises(MajlabError):
        estimate_probability("typo", 2, 0)
    with pytest.raises(MajlabError):
        estimate_probability("weak", 2, 0, method="typo")
    with pytest.raises(MajlabError):
        estimate_probability("weak", 2, 0, method="mc", trials=0)
    with pytest.raises(MajlabError):
        estimate_probability("weak", 2, 0, k=3)
    with pytest.raises(BadTimeError):
        estimate_probability("weak", 2, None)
    with pytest.raises(BadTimeError):
        estimate_probability("one_close", 2, 0)
    with pytest.raises(BadTimeError):
        estimate_probability("le_t", 2, 1)
    with pytest.raises(BadTimeError):
        estimate_probability("strong", 2, -1)
    with pytest.raises(BadHostError):
        estimate_probability("strong", 2, 0, k=4)
    with pytest.raises(BudgetExceededError):
        estimate_probability("strong", 4, 0, method="exact")
    # a leaf subject is never strongly stable, but the question is well posed
    leaf = estimate_probability("strong", 0, 0)
    assert (leaf.count, leaf.denominator) == (0, 2)


def test_fixed_point_of_the_weak_stability_recursion():
    res = fixed_point_q()
    assert res.q == pytest.approx(0.07456477142222867, abs=1e-12)
    assert 1 / 16 < res.q < 3 / 40
    assert res.residual <= 1e-12
    # lower/upper report the final bisection bracket around q
    assert res.lower <= res.q <= res.upper
    assert res.upper - res.lower <= 1e-12
    assert res.tolerance == 1e-12
    assert 20 <= res.iterations <= 60
    with pytest.raises(MajlabError):
        fixed_point_q(lower=0.2, upper=0.3)  # no sign change on this bracket


def test_mc_tau_is_worker_invariant_and_seeded():
    one = mc_tau(2, 3, trials=40, seed=9, workers=1)
    many = mc_tau(2, 3, trials=40, seed=9, workers=3)
    other = mc_tau(2, 3, trials=40, seed=10, workers=1)
    assert one.taus == many.taus
    assert one.trial_seeds == many.trial_seeds
    assert one.taus != other.taus
    assert one.trial_seeds == [trial_seed(9, i) for i in range(40)]

    host = build_perfect_tree(2, 3)
    assert one.n == host.n and one.diameter == host.diameter
    assert one.budget == step_budget(host)
    assert max(one.taus) <= one.budget
    stats = one.stats()
    assert sum(stats["histogram"].values()) == 40
    assert stats["max"] == max(one.taus)
    assert stats["ratio_median"] == pytest.approx(
        float(np.median(np.array(one.taus) / host.diameter))
    )


def test_mc_tau_validation():
    with pytest.raises(MajlabError):
        mc_tau(2, 3, trials=0, seed=0)
    with pytest.raises(MajlabError):
        mc_tau(3, 3, trials=10, seed=0)
