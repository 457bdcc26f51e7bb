"""Wasserstein-1 distance between distributions on the integer line."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from skirental.dist import DistributionError, FiniteDistribution, check, expectation

ORACLE_MAX_ATOMS = 64


@dataclass(frozen=True)
class TransportPlan:
    """Mass moved between days, as ``(x, y, mass)`` entries with ``mass > 0``."""

    entries: tuple[tuple[int, int, float], ...] = field(default_factory=tuple)

    def marginals(self, N: int) -> tuple[np.ndarray, np.ndarray]:
        src = np.zeros(N)
        dst = np.zeros(N)
        for x, y, m in self.entries:
            src[x - 1] += m
            dst[y - 1] += m
        return src, dst

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "mass"])
        for x, y, m in self.entries:
            w.writerow([x, y, f"{m:.12g}"])
        return buf.getvalue()


def aligned(p: FiniteDistribution, q: FiniteDistribution) -> tuple[FiniteDistribution, FiniteDistribution]:
    N = max(p.N, q.N)
    return p.padded(N), q.padded(N)


def emd(p: FiniteDistribution, q: FiniteDistribution) -> float:
    """Earth mover's distance as the L1 distance between tail profiles."""
    check(p)
    check(q)
    p, q = aligned(p, q)
    return float(np.abs(p.tails - q.tails).sum())


def optimal_plan(p: FiniteDistribution, q: FiniteDistribution) -> TransportPlan:
    """Monotone (quantile) coupling of ``p`` onto ``q``.

    Both supports are swept in increasing day order and mass is matched
    greedily, which is optimal for the absolute-difference cost in one
    dimension.
    """
    check(p)
    check(q)
    src = [[t, m] for t, m in p.atoms()]
    dst = [[t, m] for t, m in q.atoms()]
    entries = []
    i = j = 0
    while i < len(src) and j < len(dst):
        m = min(src[i][1], dst[j][1])
        if m > 0:
            entries.append((src[i][0], dst[j][0], m))
        src[i][1] -= m
        dst[j][1] -= m
        if src[i][1] <= 0:
            i += 1
        if dst[j][1] <= 0:
            j += 1
    # leftovers are rounding dust; attach them to the last matched pair
    dust = sum(m for _, m in src[i:]) if i < len(src) else 0.0
    if dust > 0 and entries:
        x, y, m = entries[-1]
        entries[-1] = (x, y, m + dust)
    return TransportPlan(tuple(entries))


def plan_cost(plan: TransportPlan) -> float:
    return float(sum(m * abs(x - y) for x, y, m in plan.entries))


def emd_oracle(p: FiniteDistribution, q: FiniteDistribution) -> float:
    """Optimal transportation cost from a generic LP over all couplings.

    Does not use the ordering of the line: the cost matrix is the only place
    distances enter.  Restricted to small supports.
    """
    check(p)
    check(q)
    xs = p.atoms()
    ys = q.atoms()
    if len(xs) + len(ys) > ORACLE_MAX_ATOMS:
        raise DistributionError(
            f"oracle limited to {ORACLE_MAX_ATOMS} atoms, got {len(xs) + len(ys)}"
        )
    n, m = len(xs), len(ys)
    cost = np.array([[abs(x - y) for y, _ in ys] for x, _ in xs], dtype=float).ravel()
    a_eq = np.zeros((n + m, n * m))
    for i in range(n):
        a_eq[i, i * m : (i + 1) * m] = 1.0
    for j in range(m):
        a_eq[n + j, j::m] = 1.0
    b_eq = np.array([w for _, w in xs] + [w for _, w in ys])
    # mass totals differ by rounding only; rescale the target side to match
    b_eq[n:] *= b_eq[:n].sum() / b_eq[n:].sum()
    res = linprog(cost, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs-ds")
    if not res.success:
        raise RuntimeError(f"transport LP failed: {res.message}")
    return float(res.fun)


def centroid_gap(p: FiniteDistribution, q: FiniteDistribution) -> float:
    return abs(expectation(p) - expectation(q))
