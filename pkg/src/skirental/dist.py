"""Finite distributions over ski days 1..N.

Masses are stored densely; ``mass[t - 1]`` is the probability of exactly
``t`` ski days.  Tails are indexed ``K = 0..N`` with ``tails[K]`` the mass
strictly above ``K``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

MASS_TOL = 1e-9
HIT_SLACK = 1e-12


class DistributionError(ValueError):
    """Raised for malformed distributions or out-of-range days."""


@dataclass(frozen=True, eq=False)
class FiniteDistribution:
    """Probability mass function over the integer days ``1..N``."""

    mass: np.ndarray

    def __post_init__(self):
        arr = np.array(self.mass, dtype=np.float64).reshape(-1)
        arr.setflags(write=False)
        object.__setattr__(self, "mass", arr)

    @property
    def N(self) -> int:
        return int(self.mass.shape[0])

    @property
    def days(self) -> np.ndarray:
        return np.arange(1, self.N + 1, dtype=np.float64)

    @cached_property
    def tails(self) -> np.ndarray:
        # suffix sums keep small tails accurate
        q = np.zeros(self.N + 1)
        q[: self.N] = np.cumsum(self.mass[::-1])[::-1]
        q.setflags(write=False)
        return q

    def atoms(self) -> list[tuple[int, float]]:
        idx = np.nonzero(self.mass)[0]
        return [(int(i) + 1, float(self.mass[i])) for i in idx]

    def padded(self, N: int) -> "FiniteDistribution":
        if N < self.N:
            raise DistributionError(f"cannot shrink support bound {self.N} to {N}")
        if N == self.N:
            return self
        out = np.zeros(N)
        out[: self.N] = self.mass
        return FiniteDistribution(out)

    def to_json(self) -> dict:
        return {"N": self.N, "atoms": [[t, m] for t, m in self.atoms()]}

    @classmethod
    def from_atoms(cls, atoms: Iterable[tuple[int, float]], N: Optional[int] = None) -> "FiniteDistribution":
        """Densify ``(day, mass)`` pairs; ``N`` defaults to the largest day."""
        atoms = [(int(t), float(m)) for t, m in atoms]
        if not atoms and N is None:
            raise DistributionError("no atoms and no support bound")
        top = max(t for t, _ in atoms) if atoms else 0
        N = top if N is None else int(N)
        if N < 1:
            raise DistributionError(f"support bound must be >= 1, got {N}")
        out = np.zeros(N)
        for t, m in atoms:
            if not 1 <= t <= N:
                raise DistributionError(f"day {t} outside 1..{N}")
            out[t - 1] += m
        d = cls(out)
        check(d)
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "FiniteDistribution":
        try:
            N = int(obj["N"])
            atoms = obj["atoms"]
        except (KeyError, TypeError) as exc:
            raise DistributionError(f"distribution JSON needs 'N' and 'atoms': {exc}") from None
        days = [int(a[0]) for a in atoms]
        if any(b <= a for a, b in zip(days, days[1:])):
            raise DistributionError("atom days must be strictly increasing")
        return cls.from_atoms(((a[0], a[1]) for a in atoms), N=N)


def load_distribution(path) -> FiniteDistribution:
    with open(path) as fh:
        return FiniteDistribution.from_json(json.load(fh))


def save_distribution(d: FiniteDistribution, path) -> None:
    Path(path).write_text(json.dumps(d.to_json(), indent=1) + "\n")


def validate(d: FiniteDistribution) -> Optional[str]:
    """Return ``None`` if ``d`` is a valid distribution, else the first violation."""
    if d.N < 1:
        return f"support bound {d.N} < 1"
    if not np.all(np.isfinite(d.mass)):
        t = int(np.argmin(np.isfinite(d.mass))) + 1
        return f"non-finite mass at {t}"
    neg = np.nonzero(d.mass < 0)[0]
    if neg.size:
        t = int(neg[0])
        return f"negative mass at {t + 1}: {d.mass[t]}"
    total = float(d.mass.sum())
    if abs(total - 1.0) > MASS_TOL:
        return f"total mass {total:g}"
    return None


def check(d: FiniteDistribution) -> FiniteDistribution:
    problem = validate(d)
    if problem is not None:
        raise DistributionError(problem)
    return d


def point_mass(T: int, N: int) -> FiniteDistribution:
    if not 1 <= T <= N:
        raise DistributionError(f"point mass day {T} outside 1..{N}")
    out = np.zeros(N)
    out[T - 1] = 1.0
    return FiniteDistribution(out)


def tail_mass(d: FiniteDistribution, K: int) -> float:
    if K < 0:
        raise DistributionError(f"tail index must be >= 0, got {K}")
    if K >= d.N:
        return 0.0
    return float(d.tails[K])


def hit_time(d: FiniteDistribution, gamma: float) -> int:
    """Smallest ``K >= 0`` whose tail mass is at most ``gamma``."""
    hits = np.nonzero(d.tails <= gamma + HIT_SLACK)[0]
    # tails[N] == 0 so there is always a hit for gamma >= 0
    return int(hits[0]) if hits.size else d.N


def expectation(d: FiniteDistribution) -> float:
    return float(np.dot(d.days, d.mass))


def shift_perturb(d: FiniteDistribution, src: int, dst: int, eps: float) -> FiniteDistribution:
    """Move ``eps`` probability from day ``src`` to day ``dst``."""
    if not 1 <= src <= d.N:
        raise DistributionError(f"source day {src} outside 1..{d.N}")
    if not 1 <= dst <= d.N:
        raise DistributionError(f"target day {dst} outside support bound {d.N}")
    if eps < 0:
        raise DistributionError(f"negative shift {eps}")
    if d.mass[src - 1] < eps - MASS_TOL:
        raise DistributionError(f"insufficient mass at {src}: {d.mass[src - 1]} < {eps}")
    out = d.mass.copy()
    moved = min(eps, out[src - 1])
    out[src - 1] -= moved
    out[dst - 1] += moved
    return FiniteDistribution(out)


def median_day(d: FiniteDistribution) -> int:
    cdf = np.cumsum(d.mass)
    return int(np.searchsorted(cdf, 0.5 - MASS_TOL)) + 1
