"""Lower-bound instance families and worked examples.

Each generator returns an :class:`InstanceFamily` whose claimed optimal
policies can be re-derived by exhaustive scan with :func:`self_check`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from skirental.dist import FiniteDistribution, point_mass
from skirental.policy import (
    COST_TOL,
    INFINITY,
    Policy,
    all_policy_costs,
    hindsight_cost,
    optimal_policy,
)

STRICT_MARGIN = 1e-6


class InfeasibleParameters(ValueError):
    pass


@dataclass
class InstanceFamily:
    name: str
    b: int
    truths: list[FiniteDistribution]
    claimed_opts: list[Policy]
    prediction: Optional[FiniteDistribution] = None
    params: dict = field(default_factory=dict)
    # truths whose claimed optimum is a documented tie (no strict margin)
    boundary: set = field(default_factory=set)


@dataclass
class SelfCheck:
    family: str
    index: int
    claimed: Policy
    found: Policy
    margin: float
    ok: bool
    strict: bool

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "truth": self.index,
            "claimed": str(self.claimed),
            "found": str(self.found),
            "margin": self.margin,
            "ok": self.ok,
            "strict": self.strict,
        }


def optimality_margin(d: FiniteDistribution, pol: Policy, b: int) -> float:
    """Cost gap between ``pol`` and the best policy other than ``pol``."""
    costs = all_policy_costs(d, b)
    k = d.N if pol.threshold >= d.N else int(pol.threshold)
    others = np.delete(costs, k)
    return float(others.min() - costs[k]) if others.size else math.inf


def self_check(family: InstanceFamily) -> list[SelfCheck]:
    out = []
    for i, (truth, claimed) in enumerate(zip(family.truths, family.claimed_opts)):
        found = optimal_policy(truth, family.b).policy
        margin = optimality_margin(truth, claimed, family.b)
        ok = found.normalized(truth.N) == claimed.normalized(truth.N)
        strict = margin > STRICT_MARGIN or i in family.boundary
        out.append(SelfCheck(family.name, i, claimed, found, margin, ok, ok and strict))
    return out


def thm7_horizon(b: int) -> int:
    return math.ceil(8 * b * math.log(b))


def thm7_threshold(b: int) -> int:
    return math.ceil(0.5 * b * math.log(b))


def thm7_tails(b: int, N: Optional[int] = None) -> np.ndarray:
    """Predicted tails ``Q_0..Q_N``: decay ``1 - 2/b`` up to ``K``, then ``1 - 1/(2b)``."""
    K = thm7_threshold(b)
    N = thm7_horizon(b) if N is None else N
    t = np.arange(N + 1)
    fast = (1.0 - 2.0 / b) ** np.minimum(t, K)
    slow = (1.0 - 1.0 / (2 * b)) ** np.maximum(t - K, 0)
    q = fast * slow
    q[N] = 0.0
    return q


def gen_thm7_prediction(b: int) -> InstanceFamily:
    """Prediction whose optimum is ``A_K`` with ``K = ceil(b ln b / 2)``.

    The horizon is cut at ``N = ceil(8 b ln b)`` and the leftover tail is
    put on day ``N``.  The companion truth is a point mass at ``N``, a
    stand-in for a horizon far beyond every candidate threshold.
    """
    if b < 4:
        raise InfeasibleParameters(f"b must be >= 4, got {b}")
    N = thm7_horizon(b)
    K = thm7_threshold(b)
    q = thm7_tails(b, N)
    mass = q[:-1] - q[1:]
    phat = FiniteDistribution(mass)
    return InstanceFamily(
        name="thm7",
        b=b,
        prediction=phat,
        truths=[phat, point_mass(N, N)],
        claimed_opts=[Policy(K), Policy(0)],
        params={"K": K, "N": N, "r": 1 - 2 / b, "slow_rate": 1 - 1 / (2 * b)},
    )


def gen_thm3_family(b: int, epsilon: float = 0.5) -> InstanceFamily:
    """Truths with mass ``delta`` at day ``j`` and the rest far past ``b``."""
    if not 0 < epsilon <= 1:
        raise InfeasibleParameters(f"epsilon must lie in (0, 1], got {epsilon}")
    r = 1.0 - epsilon
    expo = (r + 1) / 2
    m0 = math.floor(b**expo + 1e-9)
    delta = b ** (expo - 1) + 2 / b + 1 / b**2
    if delta >= 1:
        raise InfeasibleParameters(f"delta = {delta:g} >= 1 for b={b}, epsilon={epsilon}")
    far = m0 + 1 + b
    truths, claims, boundary = [], [], set()
    for j in range(1, m0 + 3):
        truths.append(FiniteDistribution.from_atoms([(j, delta), (far, 1 - delta)], N=far))
        if j <= m0:
            claims.append(Policy(j))
        elif j == m0 + 1:
            # A_j and A_inf cost the same here; the smallest-threshold rule picks A_j
            claims.append(Policy(j))
            boundary.add(j - 1)
        else:
            claims.append(Policy(INFINITY))
    prediction = FiniteDistribution(np.mean([t.mass for t in truths], axis=0))
    return InstanceFamily(
        name="thm3",
        b=b,
        prediction=prediction,
        truths=truths,
        claimed_opts=claims,
        params={"epsilon": epsilon, "r": r, "delta": delta, "M": m0 + 2, "far_day": far, "N": far},
        boundary=boundary,
    )


def gen_thm4_pair(b: int, delta: float = 1e-3) -> InstanceFamily:
    eps = 1 / (2 * b) + delta
    if delta < 0 or eps >= 0.25:
        raise InfeasibleParameters(f"delta={delta} gives masses outside [0, 1]")
    N = b + 3
    p1 = FiniteDistribution.from_atoms([(1, 0.5), (2, 0.25), (4, eps), (N, 0.25 - eps)], N=N)
    p2 = FiniteDistribution.from_atoms([(1, 0.5), (2, 0.25 + eps), (N, 0.25 - eps)], N=N)
    return InstanceFamily(
        name="thm4",
        b=b,
        truths=[p1, p2],
        claimed_opts=[Policy(INFINITY), Policy(2)],
        params={"delta": delta, "epsilon": eps, "emd": 1 / b + 2 * delta, "N": N},
    )


def gen_thm5_pair(b: int) -> InstanceFamily:
    s = math.isqrt(b)
    if s * s != b or b < 16:
        raise InfeasibleParameters(f"b must be a perfect square >= 16, got {b}")
    eps = 1 / s
    N = b - 1 + s
    p1 = FiniteDistribution.from_atoms([(1, 0.5), (s, eps), (N, 0.5 - eps)], N=N)
    p2 = FiniteDistribution.from_atoms([(1, 0.5 + eps), (N, 0.5 - eps)], N=N)
    return InstanceFamily(
        name="thm5",
        b=b,
        truths=[p1, p2],
        claimed_opts=[Policy(INFINITY), Policy(1)],
        params={"epsilon": eps, "emd": eps * (s - 1), "N": N},
    )


def gen_hindsight_example(b: int) -> InstanceFamily:
    if b % 2:
        raise InfeasibleParameters(f"b must be even, got {b}")
    p = FiniteDistribution.from_atoms([(b // 2, 0.5), (2 * b, 0.5)], N=2 * b)
    return InstanceFamily(
        name="hindsight",
        b=b,
        truths=[p],
        claimed_opts=[Policy(0)],
        params={"opt_cost": float(b), "hindsight_cost": hindsight_cost(p, b), "tied_with": b // 2},
        boundary={0},
    )


def gen_bimodal_intro(b: int) -> FiniteDistribution:
    if b < 4:
        raise InfeasibleParameters(f"b must be >= 4, got {b}")
    return FiniteDistribution.from_atoms([(2, 0.5), (2 * b, 0.5)], N=2 * b)


def gen_blind_following_example(b: int, n: int = 16) -> InstanceFamily:
    """Prediction nearly all at ``b - 1`` with a ``2**-n`` sliver at ``2b``.

    Its optimum is ``A_{b-1}``; blindly following it against the point truth
    ``b + 1`` loses ``b - 1``.  ``n`` must satisfy ``2**-n < 1/b`` and keep the
    optimality margin ``2**-n`` above the strictness margin.
    """
    sliver = 2.0**-n
    if not (sliver < 1 / b and sliver > STRICT_MARGIN):
        raise InfeasibleParameters(f"n={n} outside the usable range for b={b}")
    N = 2 * b
    phat = FiniteDistribution.from_atoms([(b - 1, 1 - sliver), (2 * b, sliver)], N=N)
    return InstanceFamily(
        name="blind-following",
        b=b,
        prediction=phat,
        truths=[phat, point_mass(b + 1, N)],
        claimed_opts=[Policy(b - 1), Policy(0)],
        params={"n": n, "N": N, "truth_day": b + 1},
    )


FAMILIES = {
    "thm3": gen_thm3_family,
    "thm4": gen_thm4_pair,
    "thm5": gen_thm5_pair,
    "thm7": gen_thm7_prediction,
    "hindsight": gen_hindsight_example,
    "blind-following": gen_blind_following_example,
}


def minimax_loss(truths: list[FiniteDistribution], b: int) -> tuple[float, Policy]:
    """Best worst-case additive loss of a single deterministic policy over ``truths``."""
    N = max(t.N for t in truths)
    worst = np.full(N + 1, -np.inf)
    for t in truths:
        costs = all_policy_costs(t.padded(N), b)
        worst = np.maximum(worst, costs - optimal_policy(t, b).cost)
    k = int(np.argmin(worst))
    pol = Policy(INFINITY) if k == N else Policy(k)
    return float(worst[k]), pol


def consistency_threshold(phat: FiniteDistribution, b: int, slack: float) -> int:
    """Smallest ``B`` whose cost under ``phat`` is within ``slack`` of the optimum."""
    costs = all_policy_costs(phat, b)
    best = optimal_policy(phat, b).cost
    return int(np.nonzero(costs <= best + slack + COST_TOL)[0][0])
