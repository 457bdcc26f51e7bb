"""Prediction-driven rent-or-buy algorithms.

Every predictor reads only the predicted distribution and the buy cost and
returns a policy together with a trace of the quantities it computed.  The
square root of ``b`` is always taken as ``isqrt(b)``, including in the tail
level ``1 / isqrt(b)`` used for truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

from skirental.dist import FiniteDistribution, hit_time
from skirental.policy import INFINITY, Policy, optimal_policy, sqrt_floor

PREFIX_SLACK = 1e-12
POINT_TRUTH_LONG = 1.0 / 3.0
POINT_TRUTH_SHORT = 0.025

Threshold = Union[int, float]


@dataclass(frozen=True)
class AlgorithmTrace:
    k_hat: Threshold
    u: Optional[int]
    k_star: Threshold
    branch: str
    sqrt_b: int


def _check_b(b) -> None:
    if int(b) != b or b < 4:
        raise ValueError(f"predictors need an integer buy cost >= 4, got {b}")


def base_predictor(phat: FiniteDistribution, b: int) -> tuple[Policy, AlgorithmTrace]:
    """Delay the prediction's optimal buy time by ``isqrt(b)`` days."""
    _check_b(b)
    s = sqrt_floor(b)
    k_hat = optimal_policy(phat, b).policy.threshold
    if k_hat == INFINITY:
        return Policy(INFINITY), AlgorithmTrace(k_hat, None, INFINITY, "keep-renting", s)
    k_star = k_hat + s
    return Policy(k_star), AlgorithmTrace(k_hat, None, k_star, "delay", s)


def _truncated_threshold(phat: FiniteDistribution, b: int) -> tuple[Threshold, int, int, int, str]:
    s = sqrt_floor(b)
    k_hat = optimal_policy(phat, b).policy.threshold
    u = hit_time(phat, 1.0 / s)
    if u < k_hat:
        return k_hat, u, u + s, s, "truncate"
    return k_hat, u, int(k_hat) + s, s, "delay"


def main_predictor(phat: FiniteDistribution, b: int) -> tuple[Policy, AlgorithmTrace]:
    """Buy after ``min(K_hat, U) + isqrt(b)`` days.

    ``K_hat`` is the prediction's optimal threshold (possibly infinite) and
    ``U`` the first day whose predicted tail is at most ``1 / isqrt(b)``.
    ``U`` is always finite, so the result always buys eventually.
    """
    _check_b(b)
    k_hat, u, k_star, s, branch = _truncated_threshold(phat, b)
    return Policy(k_star), AlgorithmTrace(k_hat, u, k_star, branch, s)


def lambda_robust_predictor(phat: FiniteDistribution, b: int, lam: float) -> tuple[Policy, AlgorithmTrace]:
    """Pull the main algorithm's buy day toward the classical day ``b``.

    ``lam`` is the distrust in the prediction: ``0`` runs the main algorithm
    unchanged, ``1`` recovers the 2-competitive rule.  Buying "at the start
    of day D" is the policy ``A_{D-1}``.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    _check_b(b)
    if lam == 0:
        pol, trace = main_predictor(phat, b)
        return pol, AlgorithmTrace(trace.k_hat, trace.u, trace.k_star, "lambda0-" + trace.branch, trace.sqrt_b)
    k_hat, u, k_star, s, _ = _truncated_threshold(phat, b)
    early = math.ceil(lam * b)
    late = math.ceil(b / lam)
    if k_star <= b and k_star < early:
        return Policy(early - 1), AlgorithmTrace(k_hat, u, k_star, "raise-to-lambda-b", s)
    if k_star > b and k_star >= late:
        return Policy(late - 1), AlgorithmTrace(k_hat, u, k_star, "cap-at-b-over-lambda", s)
    return Policy(k_star), AlgorithmTrace(k_hat, u, k_star, "keep-k-star", s)


def point_truth_predictor(phat: FiniteDistribution, b: int) -> tuple[Policy, AlgorithmTrace]:
    """Deterministic rule with loss linear in EMD when the truth is one day."""
    _check_b(b)
    s = sqrt_floor(b)
    k = optimal_policy(phat, b).policy.threshold
    if k == 0:
        return Policy(0), AlgorithmTrace(0, None, 0, "follow-buy", s)
    if k == INFINITY:
        return Policy(INFINITY), AlgorithmTrace(k, None, INFINITY, "follow-rent", s)
    if k >= b:
        early_mass = float(phat.mass[: min(b, phat.N)].sum())
        if early_mass >= POINT_TRUTH_LONG - PREFIX_SLACK:
            return Policy(INFINITY), AlgorithmTrace(k, None, INFINITY, "late-k-rent", s)
        return Policy(0), AlgorithmTrace(k, None, 0, "late-k-buy", s)
    prefix = float(phat.mass[:k].sum())
    if prefix >= POINT_TRUTH_SHORT - PREFIX_SLACK:
        return Policy(INFINITY), AlgorithmTrace(k, None, INFINITY, "early-k-rent", s)
    return Policy(k), AlgorithmTrace(k, None, k, "early-k-follow", s)


def classical_predictor(b: int) -> Policy:
    _check_b(b)
    return Policy(b - 1)


Predictor = Callable[[FiniteDistribution, int], tuple[Policy, Optional[AlgorithmTrace]]]


def resolve_predictor(name: str) -> Predictor:
    """Look up a predictor by CLI name: base, main, lambda:<x>, point-truth, classical."""
    name = name.strip()
    if name == "base":
        return base_predictor
    if name == "main":
        return main_predictor
    if name == "point-truth":
        return point_truth_predictor
    if name == "classical":
        return lambda phat, b: (classical_predictor(b), None)
    if name.startswith("lambda:"):
        try:
            lam = float(name.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad lambda in predictor name {name!r}") from None
        if not 0.0 <= lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {lam}")
        return lambda phat, b: lambda_robust_predictor(phat, b, lam)
    raise ValueError(f"unknown predictor {name!r}")
