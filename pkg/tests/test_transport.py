import numpy as np
import pytest
from hypothesis import given, settings

from conftest import distributions
from skirental.adversary import gen_thm5_pair
from skirental.dist import DistributionError, FiniteDistribution, point_mass
from skirental.transport import (
    ORACLE_MAX_ATOMS,
    TransportPlan,
    centroid_gap,
    emd,
    emd_oracle,
    optimal_plan,
    plan_cost,
)

U12 = FiniteDistribution.from_atoms([(1, 0.5), (2, 0.5)], N=3)
U23 = FiniteDistribution.from_atoms([(2, 0.5), (3, 0.5)], N=3)


def test_emd_examples():
    d = FiniteDistribution.from_atoms([(2, 0.3), (5, 0.7)])
    assert emd(d, d) == 0
    assert emd(point_mass(3, 3), point_mass(7, 7)) == 4
    assert emd(U12, U23) == pytest.approx(1, abs=1e-12)


def test_emd_pads_shorter_support():
    assert emd(point_mass(2, 2), point_mass(2, 50)) == 0


def test_emd_rejects_invalid_input():
    with pytest.raises(DistributionError):
        emd(FiniteDistribution([0.5]), point_mass(1, 1))


def test_oracle_examples():
    assert emd_oracle(point_mass(3, 3), point_mass(7, 7)) == pytest.approx(4, abs=1e-9)
    assert emd_oracle(U12, U23) == pytest.approx(1, abs=1e-9)
    p1, p2 = gen_thm5_pair(16).truths
    assert emd_oracle(p1, p2) == pytest.approx(0.75, abs=1e-9)
    assert emd(p1, p2) == pytest.approx(0.75, abs=1e-12)


def test_oracle_size_limit():
    big = FiniteDistribution(np.full(ORACLE_MAX_ATOMS, 1 / ORACLE_MAX_ATOMS))
    with pytest.raises(DistributionError):
        emd_oracle(big, point_mass(1, 1))


def test_plan_examples():
    d = FiniteDistribution.from_atoms([(2, 0.5), (4, 0.5)])
    diag = optimal_plan(d, d)
    assert diag.entries == ((2, 2, 0.5), (4, 4, 0.5)) and plan_cost(diag) == 0
    assert optimal_plan(point_mass(3, 3), point_mass(7, 7)).entries == ((3, 7, 1.0),)
    plan = optimal_plan(U12, U23)
    assert plan.entries == ((1, 2, 0.5), (2, 3, 0.5))
    assert plan_cost(plan) == 1


def test_plan_cost_examples():
    assert plan_cost(TransportPlan()) == 0
    assert plan_cost(TransportPlan(((3, 7, 1.0),))) == 4


def test_plan_csv():
    text = optimal_plan(U12, U23).to_csv()
    assert text == "x,y,mass\n1,2,0.5\n2,3,0.5\n"


def test_centroid_examples():
    assert centroid_gap(U12, U12) == 0
    assert centroid_gap(point_mass(3, 3), point_mass(7, 7)) == 4
    spread = FiniteDistribution.from_atoms([(1, 0.5), (3, 0.5)])
    assert centroid_gap(spread, point_mass(2, 3)) == 0
    assert emd(spread, point_mass(2, 3)) == 1


@settings(max_examples=200, deadline=None)
@given(distributions(max_n=30, max_atoms=12), distributions(max_n=30, max_atoms=12))
def test_closed_form_matches_oracle(p, q):
    assert abs(emd(p, q) - emd_oracle(p, q)) <= 1e-9


@settings(max_examples=200, deadline=None)
@given(distributions(), distributions(), distributions())
def test_metric_axioms(p, q, r):
    assert abs(emd(p, q) - emd(q, p)) <= 1e-12
    assert emd(p, p) == 0
    assert emd(p, r) <= emd(p, q) + emd(q, r) + 1e-9


@settings(max_examples=200, deadline=None)
@given(distributions(), distributions())
def test_plan_marginals_and_cost(p, q):
    N = max(p.N, q.N)
    plan = optimal_plan(p, q)
    rows, cols = plan.marginals(N)
    assert all(m > 0 for _, _, m in plan.entries)
    assert np.abs(rows - p.padded(N).mass).max() <= 1e-9
    assert np.abs(cols - q.padded(N).mass).max() <= 1e-9
    assert abs(plan_cost(plan) - emd(p, q)) <= 1e-9


@settings(max_examples=200, deadline=None)
@given(distributions(), distributions())
def test_centroid_never_exceeds_emd(p, q):
    assert centroid_gap(p, q) <= emd(p, q) + 1e-9


@settings(max_examples=100, deadline=None)
@given(distributions(max_n=25), distributions(max_n=25))
def test_tail_transfer(phat, p):
    N = max(phat.N, p.N)
    qh, qp = phat.padded(N).tails, p.padded(N).tails
    eta = emd(phat, p)
    for a in range(N + 1):
        for s in range(1, N + 1):
            lhs = qp[a + s] if a + s <= N else 0.0
            assert lhs <= qh[a] + eta / s + 1e-9
