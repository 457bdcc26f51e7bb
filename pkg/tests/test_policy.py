from fractions import Fraction

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import distributions, exact_cost
from skirental.adversary import gen_thm7_prediction
from skirental.dist import FiniteDistribution, point_mass
from skirental.policy import (
    INFINITY,
    Policy,
    additive_loss,
    all_policy_costs,
    hindsight_cost,
    optimal_policy,
    policy_cost,
    policy_cost_tail_form,
)

TWO_MODES = FiniteDistribution.from_atoms([(8, 0.5), (32, 0.5)])


def exact_optimum(d, b):
    """Exhaustive scan in rationals with the smallest-threshold and strict never-buy rules."""
    costs = [exact_cost(d, K, b) for K in range(d.N)]
    best = min(costs)
    never = exact_cost(d, math.inf, b)
    tol = Fraction(1, 10**9)
    if never < best - tol:
        return Policy(INFINITY), never
    K = next(k for k, c in enumerate(costs) if c <= best + tol)
    return Policy(K), costs[K]


def test_policy_render_and_parse():
    assert str(Policy(15)) == "A_15" and str(Policy(INFINITY)) == "A_inf"
    assert Policy.parse("A_inf") == Policy.never_buy()
    assert Policy.parse("7") == Policy(7)
    assert Policy(30).normalized(20).is_infinite
    with pytest.raises(ValueError):
        Policy(-1)
    with pytest.raises(ValueError):
        Policy(1.5)


def test_policy_cost_examples():
    assert policy_cost(point_mass(5, 5), Policy(3), 16) == 19
    assert policy_cost(point_mass(5, 5), Policy(INFINITY), 16) == 5
    assert policy_cost(TWO_MODES, Policy(8), 16) == 16


def test_policy_cost_rejects_bad_b():
    with pytest.raises(ValueError):
        policy_cost(TWO_MODES, Policy(0), 1)
    with pytest.raises(ValueError):
        policy_cost(TWO_MODES, Policy(0), 2.5)


def test_tail_form_examples():
    d = FiniteDistribution.from_atoms([(2, 0.5), (8, 0.5)])
    assert policy_cost_tail_form(d, 2, 4) == 4
    assert policy_cost_tail_form(d, 0, 4) == 4
    assert policy_cost_tail_form(point_mass(5, 5), 5, 16) == 5
    with pytest.raises(ValueError):
        policy_cost_tail_form(d, INFINITY, 4)


def test_optimal_policy_examples():
    best = optimal_policy(point_mass(40, 40), 16)
    assert best.policy == Policy(0) and best.cost == 16
    best = optimal_policy(TWO_MODES, 16)
    assert best.policy == Policy(0) and best.cost == 16 and best.is_optimal
    assert optimal_policy(gen_thm7_prediction(16).prediction, 16).policy == Policy(23)


def test_point_mass_inside_support_follows_it():
    # T < b with room above: renting through T is optimal and A_T is the smallest tie
    assert optimal_policy(point_mass(10, 20), 16).policy == Policy(10)


def test_never_buy_needs_strict_improvement():
    # with one spare day A_5 ties never buying and the finite threshold wins
    assert optimal_policy(point_mass(5, 6), 16).policy == Policy(5)
    # with no spare day every finite threshold buys too early
    assert optimal_policy(point_mass(5, 5), 16).policy == Policy(INFINITY)


def test_additive_loss_examples():
    assert additive_loss(TWO_MODES, optimal_policy(TWO_MODES, 16).policy, 16) == 0
    assert additive_loss(point_mass(256, 256), Policy(INFINITY), 16) == 240
    assert additive_loss(TWO_MODES, Policy(INFINITY), 16) == 4


def test_hindsight_examples():
    assert hindsight_cost(TWO_MODES, 16) == 12
    assert hindsight_cost(point_mass(9, 9), 16) == 9
    assert hindsight_cost(point_mass(30, 30), 16) == 16


@settings(max_examples=150, deadline=None)
@given(distributions(max_n=30), st.integers(2, 40))
def test_costs_match_exact_oracle(d, b):
    costs = all_policy_costs(d, b)
    for K in range(d.N + 1):
        want = float(exact_cost(d, K, b))
        assert abs(policy_cost(d, Policy(K), b) - want) <= 1e-9
        assert abs(policy_cost_tail_form(d, K, b) - want) <= 1e-9
        assert abs(costs[K] - want) <= 1e-9
    assert abs(policy_cost(d, Policy(INFINITY), b) - float(exact_cost(d, math.inf, b))) <= 1e-9


@settings(max_examples=150, deadline=None)
@given(distributions(max_n=30), st.integers(2, 40))
def test_optimum_matches_exhaustive_scan(d, b):
    pol, cost = exact_optimum(d, b)
    got = optimal_policy(d, b)
    assert got.policy == pol
    assert abs(got.cost - float(cost)) <= 1e-9


@settings(max_examples=150, deadline=None)
@given(distributions(max_n=30), st.integers(2, 40), st.integers(0, 35))
def test_loss_nonnegative_and_hindsight_below(d, b, K):
    assert additive_loss(d, Policy(K), b) >= -1e-9
    assert hindsight_cost(d, b) <= optimal_policy(d, b).cost + 1e-9


@settings(max_examples=150, deadline=None)
@given(distributions(max_n=40), st.integers(4, 60))
def test_optimality_certificate_and_mass_bounds(d, b):
    q = d.tails
    K = optimal_policy(d, b).policy.threshold
    if K == INFINITY:
        for L in range(d.N + 1):
            assert q[L:].sum() <= b * q[L] + 1e-9
        return
    for L in range(K):
        assert q[L:K].sum() <= b * (q[L] - q[K]) + 1e-9
    for T in range(1, b + 1):
        window = d.mass[K : min(K + T, d.N)].sum()
        assert window <= T / b * q[K] + 1e-9
    if K >= 1:
        assert d.mass[:K].sum() >= K / (K + b) - 1e-9
    r = (b - 1) / b
    for j in range(K + 1):
        assert q[K - j] >= q[K] / r**j - 1e-9


@settings(max_examples=150, deadline=None)
@given(distributions(max_n=40), st.integers(4, 60))
def test_delay_costs_at_most_the_delay(d, b):
    s = math.isqrt(b)
    for K in range(d.N + 1):
        later = policy_cost(d, Policy(K + s), b)
        assert later <= policy_cost(d, Policy(K), b) + s + 1e-9
