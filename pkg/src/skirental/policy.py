"""Deterministic rent-or-buy policies and their expected costs.

A policy ``A_K`` rents for ``K`` days and buys at the start of day ``K + 1``;
``A_0`` buys immediately and ``A_inf`` never buys.  On a support ``1..N`` the
policies ``A_K`` with ``K >= N`` cost the same as ``A_inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from skirental.dist import FiniteDistribution

INFINITY = math.inf
COST_TOL = 1e-9


@dataclass(frozen=True, order=True)
class Policy:
    threshold: Union[int, float]

    def __post_init__(self):
        k = self.threshold
        if k != INFINITY:
            if k < 0 or int(k) != k:
                raise ValueError(f"policy threshold must be a nonnegative integer or inf, got {k}")
            object.__setattr__(self, "threshold", int(k))

    @classmethod
    def never_buy(cls) -> "Policy":
        return cls(INFINITY)

    @property
    def is_infinite(self) -> bool:
        return self.threshold == INFINITY

    def normalized(self, N: int) -> "Policy":
        """Map ``A_K`` with ``K >= N`` to ``A_inf``."""
        return Policy(INFINITY) if self.threshold >= N else self

    def render(self) -> str:
        return "inf" if self.is_infinite else str(self.threshold)

    @classmethod
    def parse(cls, text: str) -> "Policy":
        text = text.strip()
        if text.startswith("A_"):
            text = text[2:]
        return cls(INFINITY if text in ("inf", "INFINITY", "∞") else int(text))

    def __str__(self) -> str:
        return f"A_{self.render()}"


@dataclass(frozen=True)
class CostBreakdown:
    policy: Policy
    cost: float
    is_optimal: bool


def _check_b(b) -> None:
    if int(b) != b or b < 2:
        raise ValueError(f"buy cost must be an integer >= 2, got {b}")


def policy_cost(d: FiniteDistribution, pol: Policy, b: int) -> float:
    """Expected cost of ``pol`` when the number of ski days is drawn from ``d``."""
    _check_b(b)
    t = d.days
    K = pol.threshold
    if K >= d.N:
        return float(np.dot(t, d.mass))
    K = int(K)
    return float(np.dot(t[:K], d.mass[:K]) + (K + b) * d.mass[K:].sum())


def policy_cost_tail_form(d: FiniteDistribution, K: int, b: int) -> float:
    """Cost of ``A_K`` from tails alone: ``sum(Q_0..Q_{K-1}) + b * Q_K``."""
    if K == INFINITY:
        raise ValueError("tail form is defined for finite thresholds only; use policy_cost")
    _check_b(b)
    q = d.tails
    K = int(K)
    if K >= d.N:
        return float(q[: d.N].sum())
    return float(q[:K].sum() + b * q[K])


def all_policy_costs(d: FiniteDistribution, b: int) -> np.ndarray:
    """Costs of ``A_0..A_N``; the last entry is also the cost of ``A_inf``."""
    q = d.tails
    prefix = np.concatenate(([0.0], np.cumsum(q[:-1])))
    return prefix + b * q


def optimal_policy(d: FiniteDistribution, b: int) -> CostBreakdown:
    """Minimum expected-cost policy.

    Finite thresholds ``0..N-1`` are scanned; among those within ``1e-9`` of
    the minimum the smallest wins.  ``A_inf`` (equivalently ``A_N``) is
    returned only when it beats every finite threshold by more than ``1e-9``.
    """
    _check_b(b)
    costs = all_policy_costs(d, b)
    finite = costs[: d.N]
    best = float(finite.min())
    k_hat = int(np.nonzero(finite <= best + COST_TOL)[0][0])
    inf_cost = float(costs[d.N])
    if inf_cost < best - COST_TOL:
        return CostBreakdown(Policy(INFINITY), inf_cost, True)
    return CostBreakdown(Policy(k_hat), float(finite[k_hat]), True)


def additive_loss(d: FiniteDistribution, pol: Policy, b: int) -> float:
    return policy_cost(d, pol, b) - optimal_policy(d, b).cost


def hindsight_cost(d: FiniteDistribution, b: int) -> float:
    """Expected cost of the per-realization optimum, ``E[min(T, b)]``."""
    _check_b(b)
    return float(np.dot(np.minimum(d.days, b), d.mass))


def sqrt_floor(b: int) -> int:
    return math.isqrt(int(b))
