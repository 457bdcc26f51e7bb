import json
import subprocess
import sys

import pytest

from skirental.cli import main
from skirental.dist import FiniteDistribution, point_mass, save_distribution


@pytest.fixture
def files(tmp_path):
    two = FiniteDistribution.from_atoms([(8, 0.5), (32, 0.5)], N=40)
    save_distribution(two, tmp_path / "two.json")
    save_distribution(point_mass(10, 40), tmp_path / "point.json")
    (tmp_path / "spec.json").write_text(
        json.dumps({"base_truth": "two.json", "b": 16, "emd_targets": [0, 1, 4, 16], "seed": 5})
    )
    return tmp_path


def test_opt(files, capsys):
    assert main(["opt", str(files / "two.json"), "--b", "16"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["policy"] == "0" and out["cost"] == 16


def test_emd_and_plan(files, capsys):
    assert main(["emd", str(files / "two.json"), str(files / "point.json")]) == 0
    assert capsys.readouterr().out.strip() == "12"
    assert main(["emd", str(files / "two.json"), str(files / "point.json"), "--plan"]) == 0
    assert capsys.readouterr().out == "x,y,mass\n8,10,0.5\n32,10,0.5\n"


def test_run(files, capsys):
    argv = ["run", "--pred", "main", "--phat", str(files / "point.json"), "--truth", str(files / "two.json"), "--b", "16"]
    assert main(argv) == 0
    header, row = capsys.readouterr().out.strip().split("\n")
    assert header.startswith("instance_id,b,predictor,emd")
    assert row.split(",")[4] == "14"


def test_usage_errors(files, capsys):
    assert main(["run", "--pred", "nope", "--phat", str(files / "point.json"), "--truth", str(files / "two.json"), "--b", "16"]) == 2
    assert main(["opt", str(files / "missing.json"), "--b", "16"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["opt", str(files / "two.json")])
    assert exc.value.code == 2
    assert main(["adversary", "--family", "thm5", "--b", "15"]) == 2
    assert main(["verify", "--only", "no_such_check"]) == 2


def test_sweep_to_file(files):
    out = files / "a.csv"
    assert main(["sweep", "--spec", str(files / "spec.json"), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 5 and lines[1].startswith("sweep-0000,16,main,0,")


def test_adversary_writes_family(files, capsys):
    out = files / "fam"
    assert main(["adversary", "--family", "thm4", "--b", "16", "--out", str(out)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["ok"] and len(report["checks"]) == 2
    assert sorted(p.name for p in out.iterdir()) == ["self_check.json", "truth_000.json", "truth_001.json"]
    assert main(["adversary", "--family", "bimodal", "--b", "16"]) == 0


def test_verify_subset_and_corpus_dir(files, capsys):
    assert main(["verify", "--only", "layer_cake", "emd_symmetry"]) == 0
    corpus = files / "corpus"
    assert main(["corpus", "--out", str(corpus)]) == 0
    capsys.readouterr()
    assert main(["verify", "--corpus", str(corpus), "--only", "tail_form_equivalence"]) == 0
    assert "PASS tail_form_equivalence" in capsys.readouterr().out


def test_verify_failure_exits_one(monkeypatch, capsys):
    from skirental import calibration

    monkeypatch.setitem(calibration.RECORDED, "envelope", 1e-6)
    assert main(["verify", "--only", "loss_envelope"]) == 1
    assert "FAIL loss_envelope" in capsys.readouterr().out


def test_module_entry_point(files):
    cmd = [sys.executable, "-m", "skirental.cli", "emd", str(files / "two.json"), str(files / "point.json")]
    done = subprocess.run(cmd, capture_output=True, text=True, check=True)
    assert done.stdout.strip() == "12"
