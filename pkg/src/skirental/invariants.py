"""Registry of numerical invariants and the suite that runs them over a corpus.

Each invariant has a scope:

* ``dist``: one distribution with a buy cost (every distinct prediction and truth),
* ``pair``: one (prediction, truth, b) triple,
* ``family``: one generated instance family.

A check returns the violations it found as ``(lhs, rhs, detail)`` tuples,
where the inequality that should hold is ``lhs <= rhs`` (or equality within
the stated tolerance, reported the same way).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from skirental import adversary, calibration
from skirental.corpus import CorpusItem
from skirental.dist import (
    FiniteDistribution,
    expectation,
    hit_time,
    median_day,
    point_mass,
    shift_perturb,
)
from skirental.policy import (
    INFINITY,
    Policy,
    additive_loss,
    all_policy_costs,
    hindsight_cost,
    optimal_policy,
    policy_cost,
    sqrt_floor,
)
from skirental.predictors import lambda_robust_predictor, main_predictor, point_truth_predictor
from skirental.transport import aligned, centroid_gap, emd, emd_oracle, optimal_plan, plan_cost

TOL = 1e-9
FINE_TOL = 1e-12
ORACLE_ATOMS = 12
LAMBDAS = (0.1, 0.25, 0.5, 1.0)
HIT_SAMPLES = 200
DYADIC_LEVELS = 30

Found = Iterable[tuple]


@dataclass(frozen=True)
class Invariant:
    name: str
    module: str
    scope: str
    check: Callable[..., Found]
    doc: str


@dataclass(frozen=True)
class Violation:
    invariant: str
    instance: str
    lhs: float
    rhs: float
    detail: str = ""

    def line(self) -> str:
        extra = f" ({self.detail})" if self.detail else ""
        return f"FAIL {self.invariant} [{self.instance}]: lhs={self.lhs:.12g} rhs={self.rhs:.12g}{extra}"


@dataclass
class SuiteResult:
    violations: list[Violation] = field(default_factory=list)
    checked: dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def failures_for(self, name: str) -> list[Violation]:
        return [v for v in self.violations if v.invariant == name]

    def summary(self) -> str:
        lines = []
        for name, count in self.checked.items():
            bad = len(self.failures_for(name))
            lines.append(f"{'PASS' if not bad else 'FAIL'} {name}: {count} checked, {bad} violations")
        lines.extend(v.line() for v in self.violations[:50])
        return "\n".join(lines)


REGISTRY: dict[str, Invariant] = {}


def invariant(name: str, module: str, scope: str):
    def register(fn):
        if name in REGISTRY:
            raise ValueError(f"duplicate invariant {name!r}")
        REGISTRY[name] = Invariant(name, module, scope, fn, (fn.__doc__ or "").strip())
        return fn

    return register


def _worst(lhs: np.ndarray, rhs: np.ndarray, label: str) -> list[tuple]:
    """Report the single worst index where ``lhs <= rhs`` fails."""
    gap = lhs - rhs
    if gap.size == 0 or not (gap > 0).any():
        return []
    i = int(np.argmax(gap))
    return [(float(lhs[i]), float(rhs[i]), f"{label}={i}")]


def _direct_costs(d: FiniteDistribution, b: int) -> np.ndarray:
    # c(A_K) = sum_{t<=K} t p_t + (K + b) * P(T > K), built from masses only
    t, m = d.days, d.mass
    paid = np.concatenate(([0.0], np.cumsum(t * m)))
    above = np.clip(m.sum() - np.concatenate(([0.0], np.cumsum(m))), 0.0, None)
    return paid + (np.arange(d.N + 1) + b) * above


# core-dist


@invariant("tail_difference", "core-dist", "dist")
def _tail_difference(d, b):
    """Consecutive tails differ by exactly the mass of the next day."""
    q = d.tails
    return _worst(np.abs(q[:-1] - q[1:] - d.mass), np.full(d.N, FINE_TOL), "K")


@invariant("hit_time_at_own_tail", "core-dist", "dist")
def _hit_time_at_own_tail(d, b):
    """Hitting the level of tail K happens no later than K."""
    q = d.tails
    ks = np.unique(np.linspace(0, d.N, min(HIT_SAMPLES, d.N + 1)).astype(int))
    hits = np.array([hit_time(d, float(q[k])) for k in ks])
    return _worst(hits.astype(float), ks.astype(float), "K")


@invariant("layer_cake", "core-dist", "dist")
def _layer_cake(d, b):
    """The expectation equals the sum of all tails."""
    return _worst(np.array([abs(expectation(d) - float(d.tails.sum()))]), np.array([TOL]), "gap")


@invariant("shift_roundtrip", "core-dist", "dist")
def _shift_roundtrip(d, b):
    """Moving mass and moving it back restores the original masses."""
    src = int(np.argmax(d.mass)) + 1
    dst = d.N if src != d.N else 1
    if src == dst:
        return []
    eps = float(d.mass[src - 1]) / 2
    back = shift_perturb(shift_perturb(d, src, dst, eps), dst, src, eps)
    return _worst(np.abs(back.mass - d.mass), np.full(d.N, FINE_TOL), "t-1")


# transport


@invariant("emd_symmetry", "transport", "pair")
def _emd_symmetry(it):
    """emd(p, q) = emd(q, p)."""
    return _worst(np.array([abs(emd(it.phat, it.p) - emd(it.p, it.phat))]), np.array([TOL]), "gap")


@invariant("emd_identity", "transport", "pair")
def _emd_identity(it):
    """emd(p, p) = 0 for both sides of the pair."""
    return _worst(np.array([emd(it.phat, it.phat), emd(it.p, it.p)]), np.zeros(2), "side")


@invariant("emd_triangle", "transport", "pair")
def _emd_triangle(it):
    """emd(p, r) <= emd(p, q) + emd(q, r) with q the even mixture and a point mass."""
    p, r = aligned(it.phat, it.p)
    mids = [FiniteDistribution((p.mass + r.mass) / 2), point_mass(median_day(r), r.N)]
    lhs = np.full(len(mids), emd(p, r))
    rhs = np.array([emd(p, q) + emd(q, r) + TOL for q in mids])
    return _worst(lhs, rhs, "midpoint")


@invariant("emd_oracle_agreement", "transport", "pair")
def _emd_oracle_agreement(it):
    """The tail formula matches a generic transportation LP on small supports."""
    if len(it.phat.atoms()) > ORACLE_ATOMS or len(it.p.atoms()) > ORACLE_ATOMS:
        return []
    gap = abs(emd(it.phat, it.p) - emd_oracle(it.phat, it.p))
    return _worst(np.array([gap]), np.array([TOL]), "gap")


@invariant("plan_validity", "transport", "pair")
def _plan_validity(it):
    """The monotone plan meets both marginals and costs exactly the EMD."""
    p, q = aligned(it.phat, it.p)
    plan = optimal_plan(p, q)
    rows, cols = plan.marginals(p.N)
    gaps = np.array(
        [
            np.abs(rows - p.mass).max(),
            np.abs(cols - q.mass).max(),
            abs(plan_cost(plan) - emd(p, q)),
            -min((m for _, _, m in plan.entries), default=1.0),
        ]
    )
    return _worst(gaps, np.array([TOL, TOL, TOL, 0.0]), "row/col/cost/sign")


@invariant("tail_transfer", "transport", "pair")
def _tail_transfer(it):
    """Q_p(a + s) <= Q_phat(a) + emd / s for all a and s >= 1."""
    phat, p = aligned(it.phat, it.p)
    qh, qp = phat.tails, p.tails
    N = p.N
    eta = emd(phat, p)
    worst = None
    for s in range(1, N + 1):
        gap = qp[s:] - (qh[: N + 1 - s] + eta / s + TOL)
        i = int(np.argmax(gap))
        if gap[i] > 0 and (worst is None or gap[i] > worst[0]):
            worst = (gap[i], float(qp[s + i]), float(qh[i] + eta / s + TOL), f"a={i},s={s}")
    return [] if worst is None else [worst[1:]]


@invariant("centroid_bound", "transport", "pair")
def _centroid_bound(it):
    """|E[p] - E[q]| <= emd(p, q)."""
    return _worst(np.array([centroid_gap(it.phat, it.p)]), np.array([emd(it.phat, it.p) + TOL]), "pair")


# policy


@invariant("tail_form_equivalence", "policy", "dist")
def _tail_form_equivalence(d, b):
    """Tail-form costs equal the direct expected-cost formula for every K."""
    return _worst(np.abs(all_policy_costs(d, b) - _direct_costs(d, b)), np.full(d.N + 1, TOL), "K")


@invariant("optimality_certificate", "policy", "dist")
def _optimality_certificate(d, b):
    """Partial tail sums before the optimum are paid for by the tail drop."""
    q = d.tails
    csum = np.concatenate(([0.0], np.cumsum(q)))
    k = optimal_policy(d, b).policy.threshold
    if k == INFINITY:
        L = np.arange(d.N + 1)
        return _worst(csum[-1] - csum[L], b * q[L] + TOL, "L")
    L = np.arange(k)
    return _worst(csum[k] - csum[L], b * (q[L] - q[k]) + TOL, "L")


@invariant("window_mass_bound", "policy", "dist")
def _window_mass_bound(d, b):
    """Mass in the T days after an optimal threshold is at most T/b of the tail."""
    k = optimal_policy(d, b).policy.threshold
    if k == INFINITY:
        return []
    q = d.tails
    T = np.arange(1, b + 1)
    ahead = np.minimum(k + T, d.N)
    return _worst(q[k] - q[ahead], T / b * q[k] + TOL, "T-1")


@invariant("prefix_mass_bound", "policy", "dist")
def _prefix_mass_bound(d, b):
    """An optimal finite K >= 1 has at least K / (K + b) mass on days 1..K."""
    k = optimal_policy(d, b).policy.threshold
    if k == INFINITY or k == 0:
        return []
    prefix = float(d.mass[:k].sum())
    return _worst(np.array([k / (k + b)]), np.array([prefix + TOL]), "K")


@invariant("geometric_tail_growth", "policy", "dist")
def _geometric_tail_growth(d, b):
    """Walking back j days from an optimal K multiplies the tail by at least (b/(b-1))^j."""
    k = optimal_policy(d, b).policy.threshold
    if k == INFINITY:
        return []
    q = d.tails
    j = np.arange(k + 1)
    r = (b - 1) / b
    return _worst(q[k] / r**j - TOL, q[k - j], "j")


@invariant("hitting_time_jumps", "policy", "dist")
def _hitting_time_jumps(d, b):
    """Between dyadic tail levels alpha > beta the hitting time grows by at most b*alpha/beta."""
    k = optimal_policy(d, b).policy.threshold
    levels = [2.0**-i for i in range(DYADIC_LEVELS)]
    hits = [hit_time(d, a) for a in levels]
    out = []
    for i, (a, ta) in enumerate(zip(levels, hits)):
        if k == INFINITY:
            # no finite optimum: halving the level costs fewer than 2b days
            if i + 1 < len(levels):
                out.append((hits[i + 1], ta + 2 * b - 1, f"alpha=2^-{i}"))
            continue
        if ta >= k:
            continue
        for j in range(i + 1, len(levels)):
            tb = hits[j]
            if tb <= k:
                out.append((tb, ta + b * a / levels[j] + TOL, f"alpha=2^-{i},beta=2^-{j}"))
    return [v for v in out if v[0] > v[1]][:1]


@invariant("delay_cost_bound", "policy", "dist")
def _delay_cost_bound(d, b):
    """Delaying any threshold by isqrt(b) days costs at most isqrt(b) more."""
    s = sqrt_floor(b)
    costs = all_policy_costs(d, b)
    K = np.arange(d.N + 1)
    return _worst(costs[np.minimum(K + s, d.N)], costs + s + TOL, "K")


@invariant("hindsight_dominates", "policy", "dist")
def _hindsight_dominates(d, b):
    """E[min(T, b)] never exceeds the best policy cost."""
    return _worst(np.array([hindsight_cost(d, b)]), np.array([optimal_policy(d, b).cost + TOL]), "b")


# predictors


@invariant("trace_consistency", "predictors", "dist")
def _trace_consistency(d, b):
    """The main trace records U = hit_time(1/isqrt(b)) and K* = min(K_hat, U) + isqrt(b)."""
    pol, tr = main_predictor(d, b)
    s = sqrt_floor(b)
    u = hit_time(d, 1.0 / s)
    want = min(tr.k_hat, u) + s
    bad = []
    if tr.u != u:
        bad.append((tr.u, u, "u"))
    if tr.k_star != want or pol.threshold != want or tr.sqrt_b != s:
        bad.append((float(tr.k_star), float(want), "k_star"))
    return bad


@invariant("main_always_buys", "predictors", "dist")
def _main_always_buys(d, b):
    """The main algorithm never keeps renting forever."""
    pol, _ = main_predictor(d, b)
    return [(math.inf, 0.0, "A_inf")] if pol.is_infinite else []


def buy_time_cap(b: int) -> int:
    """2b * ceil(log4 b) + isqrt(b), with the ceiling computed in integers."""
    j = 0
    while 4**j < b:
        j += 1
    return 2 * b * j + sqrt_floor(b)


@invariant("buy_time_cap", "predictors", "dist")
def _buy_time_cap(d, b):
    """The main algorithm's threshold stays below 2b*ceil(log4 b) + isqrt(b)."""
    _, tr = main_predictor(d, b)
    return _worst(np.array([float(tr.k_star)]), np.array([float(buy_time_cap(b))]), "k_star")


@invariant("robust_loss_bound", "predictors", "pair")
def _robust_loss_bound(it):
    """Against any truth the main algorithm loses at most K* + b."""
    pol, tr = main_predictor(it.phat, it.b)
    loss = additive_loss(it.p, pol, it.b)
    return _worst(np.array([loss]), np.array([tr.k_star + it.b + TOL]), "loss")


def consistency_limit(b: int) -> float:
    s = sqrt_floor(b)
    return s + b / s


@invariant("consistency_bound", "predictors", "dist")
def _consistency_bound(d, b):
    """With an exact prediction the main algorithm loses at most isqrt(b) + b/isqrt(b)."""
    pol, _ = main_predictor(d, b)
    return _worst(np.array([additive_loss(d, pol, b)]), np.array([consistency_limit(b) + TOL]), "loss")


@invariant("lambda_tradeoff", "predictors", "pair")
def _lambda_tradeoff(it):
    """cost <= (1 + 1/lam) OPT and cost <= (1 + lam) c(A_K*) for each tested lam."""
    opt = optimal_policy(it.p, it.b).cost
    out = []
    for lam in LAMBDAS:
        pol, tr = lambda_robust_predictor(it.phat, it.b, lam)
        cost = policy_cost(it.p, pol, it.b)
        base = policy_cost(it.p, Policy(tr.k_star), it.b)
        out.append((cost, (1 + 1 / lam) * opt + TOL, f"competitive lam={lam}"))
        out.append((cost, (1 + lam) * base + TOL, f"vs K* lam={lam}"))
        if lam == 1.0:
            out.append((cost, 2 * opt + TOL, "ratio<=2"))
    return [v for v in out if v[0] > v[1]]


@invariant("point_truth_exact", "predictors", "dist")
def _point_truth_exact(d, b):
    """A point prediction at the truth's median day loses nothing against that day."""
    T = median_day(d)
    delta = point_mass(T, d.N)
    pol, _ = point_truth_predictor(delta, b)
    return _worst(np.array([abs(additive_loss(delta, pol, b))]), np.array([TOL]), f"T={T},loss")


@invariant("point_truth_linear_loss", "predictors", "pair")
def _point_truth_linear_loss(it):
    """Against a one-day truth the point-truth rule loses at most C_pt * emd."""
    if len(it.p.atoms()) != 1:
        return []
    pol, _ = point_truth_predictor(it.phat, it.b)
    loss = additive_loss(it.p, pol, it.b)
    limit = calibration.bound("point_truth") * emd(it.phat, it.p) + TOL
    return _worst(np.array([loss]), np.array([limit]), "loss")


# harness


@invariant("loss_envelope", "harness-cli", "pair")
def _loss_envelope(it):
    """Main-algorithm loss over min(isqrt(b) max(emd,1), b ln b) stays under C*."""
    pol, _ = main_predictor(it.phat, it.b)
    loss = additive_loss(it.p, pol, it.b)
    scale = calibration.envelope_scale(emd(it.phat, it.p), it.b)
    return _worst(np.array([loss / scale]), np.array([calibration.bound("envelope") + TOL]), "ratio")


# adversary


@invariant("generator_claims", "adversary", "family")
def _generator_claims(fam):
    """Every claimed optimum is the scanned optimum, with a strict margin unless documented."""
    return [
        (0.0 if c.ok else 1.0, c.margin, f"truth {c.index}: claimed {c.claimed}, found {c.found}")
        for c in adversary.self_check(fam)
        if not c.strict
    ]


@invariant("construction_emd", "adversary", "family")
def _construction_emd(fam):
    """Two-truth constructions sit at their stated distance."""
    if "emd" not in fam.params or len(fam.truths) != 2:
        return []
    got = emd(*fam.truths)
    return _worst(np.array([abs(got - fam.params["emd"])]), np.array([TOL]), "gap")


def cost_steps(fam) -> tuple[np.ndarray, np.ndarray]:
    """Per-step cost changes of the prediction and the values they should take.

    The last step, into the day that collects the truncated tail, is left out:
    it is an artifact of the finite horizon, not of the construction.
    """
    q = fam.prediction.tails
    costs = all_policy_costs(fam.prediction, fam.b)
    N, K = fam.prediction.N, fam.params["K"]
    t = np.arange(N - 1)
    steps = costs[1:N] - costs[: N - 1]
    want = np.where(t < K, -q[: N - 1], 0.5 * q[: N - 1])
    return steps, want


@invariant("cost_step_pattern", "adversary", "family")
def _cost_step_pattern(fam):
    """Costs fall by Q_t before the optimum and rise by Q_t / 2 after it."""
    if fam.name != "thm7":
        return []
    steps, want = cost_steps(fam)
    return _worst(np.abs(steps - want), np.full(steps.size, TOL), "t")


@invariant("two_point_minimax_band", "adversary", "family")
def _two_point_minimax_band(fam):
    """Best worst-case loss over the two truths, divided by sqrt(b), lies in the recorded band."""
    if fam.name != "thm5":
        return []
    lo, hi = calibration.bound("two_point_band")
    ratio = adversary.minimax_loss(fam.truths, fam.b)[0] / math.sqrt(fam.b)
    return [v for v in [(lo, ratio, "lower"), (ratio, hi, "upper")] if v[0] > v[1]]


@invariant("consistency_forces_late_buy", "adversary", "family")
def _consistency_forces_late_buy(fam):
    """Any threshold within 2 isqrt(b) of the prediction's optimum waits c * b ln b days."""
    if fam.name != "thm7":
        return []
    B = adversary.consistency_threshold(fam.prediction, fam.b, 2 * sqrt_floor(fam.b))
    ratio = B / (fam.b * math.log(fam.b))
    return _worst(np.array([calibration.bound("late_buy_constant")]), np.array([ratio]), "B/(b ln b)")


@invariant("hindsight_gap", "adversary", "family")
def _hindsight_gap(fam):
    """The two-mode example costs b at best while hindsight pays 3b/4."""
    if fam.name != "hindsight":
        return []
    d = fam.truths[0]
    got = np.array([optimal_policy(d, fam.b).cost, hindsight_cost(d, fam.b)])
    want = np.array([fam.b, 0.75 * fam.b])
    return _worst(np.abs(got - want), np.full(2, TOL), "opt/hindsight")


def _distributions(corpus: list[CorpusItem]):
    seen = set()
    for it in corpus:
        for role, d in (("phat", it.phat), ("truth", it.p)):
            key = (id(d), it.b)
            if key in seen:
                continue
            seen.add(key)
            yield f"{it.id}:{role}", d, it.b


def verify_suite(
    corpus: list[CorpusItem],
    families: Iterable = (),
    names: Optional[Iterable[str]] = None,
) -> SuiteResult:
    """Run every registered invariant (or just ``names``) over the corpus and families."""
    corpus = list(corpus)
    if not corpus:
        raise ValueError("verify_suite needs a nonempty corpus")
    families = list(families)
    selected = [REGISTRY[n] for n in names] if names is not None else list(REGISTRY.values())
    dists = list(_distributions(corpus))
    res = SuiteResult()
    for inv in selected:
        if inv.scope == "dist":
            cases = [(label, (d, b)) for label, d, b in dists]
        elif inv.scope == "pair":
            cases = [(it.id, (it,)) for it in corpus]
        else:
            cases = [(f"{f.name}-b{f.b}", (f,)) for f in families]
        res.checked[inv.name] = len(cases)
        for label, args in cases:
            for lhs, rhs, detail in inv.check(*args):
                res.violations.append(Violation(inv.name, label, float(lhs), float(rhs), detail))
    return res
