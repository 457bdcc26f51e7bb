"""Ski rental with distributional predictions.

Policy cost evaluation, Wasserstein-1 machinery on the integer line,
prediction-driven rent-or-buy algorithms, lower-bound instance generators
and an invariant verification harness.
"""

from skirental.dist import (
    DistributionError,
    FiniteDistribution,
    expectation,
    hit_time,
    point_mass,
    shift_perturb,
    tail_mass,
    validate,
)
from skirental.policy import (
    INFINITY,
    CostBreakdown,
    Policy,
    additive_loss,
    hindsight_cost,
    optimal_policy,
    policy_cost,
    policy_cost_tail_form,
)
from skirental.predictors import (
    AlgorithmTrace,
    base_predictor,
    classical_predictor,
    lambda_robust_predictor,
    main_predictor,
    point_truth_predictor,
    resolve_predictor,
)
from skirental.transport import (
    TransportPlan,
    centroid_gap,
    emd,
    emd_oracle,
    optimal_plan,
    plan_cost,
)

__version__ = "0.1.0"

__all__ = [
    "INFINITY",
    "AlgorithmTrace",
    "CostBreakdown",
    "DistributionError",
    "FiniteDistribution",
    "Policy",
    "TransportPlan",
    "additive_loss",
    "base_predictor",
    "centroid_gap",
    "classical_predictor",
    "emd",
    "emd_oracle",
    "expectation",
    "hindsight_cost",
    "hit_time",
    "lambda_robust_predictor",
    "main_predictor",
    "optimal_plan",
    "optimal_policy",
    "plan_cost",
    "point_mass",
    "point_truth_predictor",
    "policy_cost",
    "policy_cost_tail_form",
    "resolve_predictor",
    "shift_perturb",
    "tail_mass",
    "validate",
]
