"""Run predictors against truths, sweep prediction error, and write reports."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from skirental.dist import FiniteDistribution, DistributionError, check, median_day, shift_perturb
from skirental.policy import Policy, optimal_policy, policy_cost, sqrt_floor
from skirental.predictors import AlgorithmTrace, resolve_predictor
from skirental.transport import emd

CSV_FIELDS = (
    "instance_id",
    "b",
    "predictor",
    "emd",
    "alg_policy",
    "opt_policy",
    "alg_cost",
    "opt_cost",
    "diff",
    "ratio_sqrt",
    "ratio_blog",
)
SEED_ENV = "SKIRENT_SEED"
EMD_BAND = 0.05


@dataclass(frozen=True)
class ExperimentReport:
    instance_id: str
    b: int
    predictor: str
    emd: float
    alg_policy: Policy
    opt_policy: Policy
    alg_cost: float
    opt_cost: float
    diff: float
    bound_sqrt: float
    bound_blog: float
    ratio_sqrt: float
    ratio_blog: float
    trace: Optional[AlgorithmTrace] = field(default=None, compare=False)

    def row(self) -> dict:
        out = {}
        for name in CSV_FIELDS:
            v = getattr(self, name)
            if isinstance(v, Policy):
                out[name] = v.render()
            elif isinstance(v, float):
                out[name] = f"{v:.12g}"
            else:
                out[name] = str(v)
        return out


@dataclass
class SweepSpec:
    base_truth: FiniteDistribution
    b: int
    emd_targets: list
    seed: int
    predictor: str = "main"
    support_bound: Optional[int] = None

    def __post_init__(self):
        t = [float(x) for x in self.emd_targets]
        if any(x < 0 for x in t) or any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError("emd_targets must be nonnegative and strictly increasing")
        self.emd_targets = t


def load_sweep_spec(path) -> SweepSpec:
    """Read a sweep spec; ``base_truth`` is inline JSON or a path relative to that file."""
    path = Path(path)
    obj = json.loads(path.read_text())
    truth = obj["base_truth"]
    if isinstance(truth, str):
        truth = json.loads((path.parent / truth).read_text())
    seed = int(obj.get("seed", 0))
    if os.environ.get(SEED_ENV):
        seed = int(os.environ[SEED_ENV])
    return SweepSpec(
        base_truth=FiniteDistribution.from_json(truth),
        b=int(obj["b"]),
        emd_targets=obj["emd_targets"],
        seed=seed,
        predictor=obj.get("predictor", "main"),
        support_bound=obj.get("support_bound"),
    )


def run_instance(
    phat: FiniteDistribution,
    p: FiniteDistribution,
    b: int,
    predictor: str,
    instance_id: str = "instance",
) -> ExperimentReport:
    """Pick a policy from ``phat`` alone and score it against the truth ``p``."""
    check(phat)
    check(p)
    pol, trace = resolve_predictor(predictor)(phat, b)
    eta = emd(phat, p)
    opt = optimal_policy(p, b)
    alg_cost = policy_cost(p, pol, b)
    diff = alg_cost - opt.cost
    bound_sqrt = sqrt_floor(b) * max(eta, 1.0)
    bound_blog = b * math.log(b)
    return ExperimentReport(
        instance_id=instance_id,
        b=int(b),
        predictor=predictor,
        emd=eta,
        alg_policy=pol,
        opt_policy=opt.policy,
        alg_cost=alg_cost,
        opt_cost=opt.cost,
        diff=diff,
        bound_sqrt=bound_sqrt,
        bound_blog=bound_blog,
        ratio_sqrt=diff / bound_sqrt,
        ratio_blog=diff / bound_blog,
        trace=trace,
    )


def perturb_to_emd(truth: FiniteDistribution, target: float, rng: np.random.Generator) -> FiniteDistribution:
    """Move mass rightward until the EMD to ``truth`` lands within 5% of ``target``.

    The leftmost loaded atom at or past the median sends a random share of
    its mass a geometrically growing distance 1, 2, 4, ... to the right.
    Moved mass may move again later.  Every move goes right, so tails only
    grow and the EMD is exactly the sum of mass times distance moved.
    """
    if target <= 0:
        return truth
    N = truth.N
    med = median_day(truth)
    t = truth.days
    right = t >= med
    capacity = float(np.dot(truth.mass[right], N - t[right]))
    if capacity < (1 - EMD_BAND) * target:
        raise DistributionError(
            f"EMD target {target:g} unreachable within support bound {N} (max {capacity:g})"
        )
    d = truth
    achieved = 0.0
    step = 1
    while achieved < (1 - EMD_BAND) * target:
        loaded = np.nonzero(d.mass[med - 1 : N - 1] > 1e-15)[0]
        if loaded.size == 0:
            raise DistributionError(f"EMD target {target:g} unreachable within support bound {N}")
        src = med + int(loaded[0])
        dist = min(step, N - src)
        avail = float(d.mass[src - 1])
        need = target - achieved
        share = avail if dist == N - src else avail * rng.uniform(0.25, 0.75)
        eps = min(share, need / dist)
        d = shift_perturb(d, src, src + dist, eps)
        achieved += eps * dist
        step *= 2
    return d


def sweep_emd(spec: SweepSpec, jobs: int = 1) -> list[ExperimentReport]:
    truth = spec.base_truth
    if spec.support_bound is not None:
        truth = truth.padded(int(spec.support_bound))

    def one(i: int) -> ExperimentReport:
        rng = np.random.default_rng([spec.seed, i])
        phat = perturb_to_emd(truth, spec.emd_targets[i], rng)
        return run_instance(phat, truth, spec.b, spec.predictor, instance_id=f"sweep-{i:04d}")

    idx = range(len(spec.emd_targets))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            reports = list(ex.map(one, idx))
    else:
        reports = [one(i) for i in idx]
    return sorted(reports, key=lambda r: (r.instance_id, r.predictor))


def reports_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in reports:
        w.writerow(r.row())
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, Policy):
        return v.render() if v.is_infinite else v.threshold
    if isinstance(v, float):
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")
    return v


def reports_json(reports) -> str:
    rows = [{name: _json_value(getattr(r, name)) for name in CSV_FIELDS} for r in reports]
    return json.dumps(rows, indent=1) + "\n"


def emit_reports(reports, fmt: str = "csv", path=None) -> str:
    """Render reports as CSV or JSON; write to ``path`` when given."""
    if fmt == "csv":
        text = reports_csv(reports)
    elif fmt == "json":
        text = reports_json(reports)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text
