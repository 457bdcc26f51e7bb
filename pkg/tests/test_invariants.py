import numpy as np
import pytest

from skirental.corpus import CorpusItem, load_corpus_dir, save_corpus_dir
from skirental.dist import FiniteDistribution, point_mass
from skirental.invariants import REGISTRY, verify_suite

# every property listed per module, by registered name
EXPECTED = {
    "core-dist": {"tail_difference", "hit_time_at_own_tail", "layer_cake", "shift_roundtrip"},
    "transport": {
        "emd_symmetry",
        "emd_identity",
        "emd_triangle",
        "emd_oracle_agreement",
        "plan_validity",
        "tail_transfer",
        "centroid_bound",
    },
    "policy": {
        "tail_form_equivalence",
        "optimality_certificate",
        "window_mass_bound",
        "prefix_mass_bound",
        "geometric_tail_growth",
        "hitting_time_jumps",
        "delay_cost_bound",
        "hindsight_dominates",
    },
    "predictors": {
        "trace_consistency",
        "main_always_buys",
        "buy_time_cap",
        "robust_loss_bound",
        "consistency_bound",
        "lambda_tradeoff",
        "point_truth_exact",
        "point_truth_linear_loss",
    },
    "adversary": {
        "generator_claims",
        "construction_emd",
        "cost_step_pattern",
        "two_point_minimax_band",
        "consistency_forces_late_buy",
        "hindsight_gap",
    },
    "harness-cli": {"loss_envelope"},
}


def test_registry_is_complete():
    by_module = {}
    for inv in REGISTRY.values():
        by_module.setdefault(inv.module, set()).add(inv.name)
    assert by_module == EXPECTED
    for inv in REGISTRY.values():
        assert inv.scope in ("dist", "pair", "family")
        assert inv.doc, inv.name


def test_empty_corpus_is_rejected():
    with pytest.raises(ValueError):
        verify_suite([])


def corrupted(d: FiniteDistribution) -> FiniteDistribution:
    bad = FiniteDistribution(d.mass)
    q = bad.tails.copy()
    q[len(q) // 2] += 0.05
    bad.__dict__["tails"] = q
    return bad


def test_corrupted_tail_profile_is_caught():
    d = corrupted(FiniteDistribution.from_atoms([(2, 0.25), (7, 0.25), (12, 0.5)], N=14))
    res = verify_suite([CorpusItem("broken-tails", d, d, 16)], names=["tail_form_equivalence"])
    assert not res.ok
    (v,) = res.violations
    assert v.invariant == "tail_form_equivalence" and v.instance.startswith("broken-tails")
    assert v.lhs > v.rhs
    assert "broken-tails" in res.summary()


def test_clean_copy_passes_the_same_check():
    d = FiniteDistribution.from_atoms([(2, 0.25), (7, 0.25), (12, 0.5)], N=14)
    assert verify_suite([CorpusItem("clean", d, d, 16)], names=["tail_form_equivalence"]).ok


def test_counts_cover_every_case():
    d = point_mass(3, 9)
    items = [CorpusItem("a", d, point_mass(5, 9), 16), CorpusItem("b", d, d, 16)]
    res = verify_suite(items)
    assert res.checked["emd_symmetry"] == 2
    assert res.checked["layer_cake"] == 2  # shared prediction counted once
    assert res.checked["generator_claims"] == 0
    assert res.ok


def test_corpus_directory_round_trip(tmp_path, corpus):
    items = corpus[:5]
    save_corpus_dir(items, tmp_path)
    back = load_corpus_dir(tmp_path)
    assert sorted(it.id for it in back) == sorted(it.id for it in items)
    for it in back:
        orig = next(o for o in items if o.id == it.id)
        assert np.array_equal(it.phat.mass, orig.phat.mass) and it.b == orig.b


def test_builtin_corpus_passes_everything(corpus, families):
    res = verify_suite(corpus, families)
    assert res.ok, res.summary()
