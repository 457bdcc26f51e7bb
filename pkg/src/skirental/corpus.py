"""Seeded instance corpora: generator families plus random (prediction, truth) pairs."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from skirental import adversary
from skirental.dist import FiniteDistribution, point_mass

BUILTIN_B = (16, 64, 256)
DEFAULT_SEED = 20240611
RANDOM_COUNT = 200


@dataclass(frozen=True)
class CorpusItem:
    id: str
    phat: FiniteDistribution
    p: FiniteDistribution
    b: int

    def to_json(self) -> dict:
        return {"id": self.id, "b": self.b, "phat": self.phat.to_json(), "truth": self.p.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "CorpusItem":
        return cls(
            id=str(obj["id"]),
            phat=FiniteDistribution.from_json(obj["phat"]),
            p=FiniteDistribution.from_json(obj["truth"]),
            b=int(obj["b"]),
        )


def random_distribution(rng: np.random.Generator, N: int, kind: str) -> FiniteDistribution:
    if kind == "sparse":
        k = int(rng.integers(1, min(12, N) + 1))
        days = rng.choice(N, size=k, replace=False)
        mass = np.zeros(N)
        mass[days] = rng.dirichlet(np.ones(k))
    elif kind == "dense":
        mass = rng.dirichlet(np.full(N, rng.uniform(0.05, 1.0)))
    elif kind == "geometric":
        rate = rng.uniform(0.5 / N, 8.0 / N)
        start = int(rng.integers(1, max(2, N // 4)))
        t = np.arange(1, N + 1)
        mass = np.where(t >= start, np.exp(-rate * (t - start)), 0.0)
    elif kind == "bimodal":
        mass = np.zeros(N)
        for _ in range(2):
            c = int(rng.integers(0, N))
            w = int(rng.integers(1, max(2, N // 10)))
            lo, hi = max(0, c - w), min(N, c + w + 1)
            mass[lo:hi] += rng.uniform(0.2, 1.0)
    else:
        raise ValueError(f"unknown random kind {kind!r}")
    return FiniteDistribution(mass / mass.sum())


def perturb_randomly(rng: np.random.Generator, d: FiniteDistribution, moves: int) -> FiniteDistribution:
    mass = d.mass.copy()
    for _ in range(moves):
        src = int(rng.choice(d.N, p=mass / mass.sum()))
        dst = int(np.clip(src + rng.integers(-d.N // 4, d.N // 4 + 1), 0, d.N - 1))
        eps = mass[src] * rng.uniform(0.1, 1.0)
        mass[src] -= eps
        mass[dst] += eps
    return FiniteDistribution(mass)


KINDS = ("sparse", "dense", "geometric", "bimodal")
TRUTH_MODES = ("same", "perturbed", "independent", "point")


def random_items(count: int = RANDOM_COUNT, seed: int = DEFAULT_SEED, bs=BUILTIN_B) -> list[CorpusItem]:
    """``count`` random triples; each triple gets its own child stream of ``seed``."""
    items = []
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        b = int(bs[i % len(bs)])
        N = int(rng.integers(max(2, b // 2), 3 * b + 1))
        kind = KINDS[(i // len(bs)) % len(KINDS)]
        phat = random_distribution(rng, N, kind)
        mode = TRUTH_MODES[(i // (len(bs) * len(KINDS))) % len(TRUTH_MODES)]
        if mode == "same":
            p = phat
        elif mode == "perturbed":
            p = perturb_randomly(rng, phat, int(rng.integers(1, 6)))
        elif mode == "independent":
            p = random_distribution(rng, N, KINDS[int(rng.integers(len(KINDS)))])
        else:
            p = point_mass(int(rng.integers(1, N + 1)), N)
        items.append(CorpusItem(f"rand-{i:03d}-{kind}-{mode}", phat, p, b))
    return items


def builtin_families(bs=BUILTIN_B) -> list[adversary.InstanceFamily]:
    fams = []
    for b in bs:
        fams.append(adversary.gen_thm7_prediction(b))
        fams.append(adversary.gen_thm3_family(b, 0.5))
        fams.append(adversary.gen_thm4_pair(b))
        fams.append(adversary.gen_thm5_pair(b))
        fams.append(adversary.gen_hindsight_example(b))
        fams.append(adversary.gen_blind_following_example(b))
    return fams


def family_items(fam: adversary.InstanceFamily) -> list[CorpusItem]:
    """Triples drawn from a family: prediction against each truth, and truths against each other."""
    tag = f"{fam.name}-b{fam.b}"
    items = []
    if fam.prediction is not None:
        for j, t in enumerate(fam.truths):
            items.append(CorpusItem(f"{tag}-pred-vs-{j}", fam.prediction, t, fam.b))
    elif len(fam.truths) <= 4:
        for i, a in enumerate(fam.truths):
            for j, c in enumerate(fam.truths):
                items.append(CorpusItem(f"{tag}-{i}-vs-{j}", a, c, fam.b))
    return items


def bimodal_items(bs=BUILTIN_B) -> list[CorpusItem]:
    items = []
    for b in bs:
        d = adversary.gen_bimodal_intro(b)
        items.append(CorpusItem(f"bimodal-b{b}-self", d, d, b))
        items.append(CorpusItem(f"bimodal-b{b}-vs-point-b", d, point_mass(b, d.N), b))
    return items


def builtin_corpus(seed: int = DEFAULT_SEED, count: int = RANDOM_COUNT) -> list[CorpusItem]:
    items = []
    for fam in builtin_families():
        items.extend(family_items(fam))
    items.extend(bimodal_items())
    items.extend(random_items(count, seed))
    return items


def load_corpus_dir(path) -> list[CorpusItem]:
    """Read every ``*.json`` triple file (``id``, ``b``, ``phat``, ``truth``) in ``path``."""
    files = sorted(Path(path).glob("*.json"))
    return [CorpusItem.from_json(json.loads(f.read_text())) for f in files]


def save_corpus_dir(items, path) -> None:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    for it in items:
        (out / f"{it.id}.json").write_text(json.dumps(it.to_json()) + "\n")
