"""Command-line entry point.

Exit codes: 0 success, 1 an invariant or self-check failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from skirental import adversary, calibration
from skirental.corpus import builtin_corpus, builtin_families, load_corpus_dir, save_corpus_dir
from skirental.dist import DistributionError, load_distribution, save_distribution
from skirental.harness import emit_reports, load_sweep_spec, run_instance, sweep_emd
from skirental.invariants import REGISTRY, verify_suite
from skirental.policy import all_policy_costs, optimal_policy
from skirental.transport import emd, optimal_plan

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _dump(obj) -> None:
    print(json.dumps(obj, indent=1))


def cmd_opt(args) -> int:
    d = load_distribution(args.dist)
    best = optimal_policy(d, args.b)
    out = {"policy": best.policy.render(), "cost": best.cost, "N": d.N, "b": args.b}
    if args.all_costs:
        out["costs"] = [float(c) for c in all_policy_costs(d, args.b)]
    _dump(out)
    return EXIT_OK


def cmd_emd(args) -> int:
    p, q = load_distribution(args.a), load_distribution(args.b)
    if args.plan:
        sys.stdout.write(optimal_plan(p, q).to_csv())
    else:
        print(f"{emd(p, q):.12g}")
    return EXIT_OK


def cmd_run(args) -> int:
    rep = run_instance(
        load_distribution(args.phat), load_distribution(args.truth), args.b, args.pred, args.id
    )
    sys.stdout.write(emit_reports([rep], args.format))
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = load_sweep_spec(args.spec)
    text = emit_reports(sweep_emd(spec, jobs=args.jobs), args.format, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return EXIT_OK


def _family(args) -> adversary.InstanceFamily:
    if args.family == "thm3":
        return adversary.gen_thm3_family(args.b, args.eps)
    if args.family == "thm4":
        return adversary.gen_thm4_pair(args.b, args.delta)
    return adversary.FAMILIES[args.family](args.b)


def cmd_adversary(args) -> int:
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    if args.family == "bimodal":
        d = adversary.gen_bimodal_intro(args.b)
        if out:
            save_distribution(d, out / "bimodal.json")
        _dump({"family": "bimodal", "b": args.b, "distribution": d.to_json()})
        return EXIT_OK
    fam = _family(args)
    checks = adversary.self_check(fam)
    report = {
        "family": fam.name,
        "b": fam.b,
        "params": fam.params,
        "checks": [c.to_json() for c in checks],
        "ok": all(c.strict for c in checks),
    }
    if out:
        if fam.prediction is not None:
            save_distribution(fam.prediction, out / "prediction.json")
        for i, t in enumerate(fam.truths):
            save_distribution(t, out / f"truth_{i:03d}.json")
        (out / "self_check.json").write_text(json.dumps(report, indent=1) + "\n")
    _dump(report)
    return EXIT_OK if report["ok"] else EXIT_FAIL


def cmd_verify(args) -> int:
    if args.corpus:
        corpus, families = load_corpus_dir(args.corpus), []
        if not corpus:
            raise UsageError(f"no *.json instances in {args.corpus}")
    else:
        corpus, families = builtin_corpus(), builtin_families()
    names = args.only or None
    if names:
        unknown = [n for n in names if n not in REGISTRY]
        if unknown:
            raise UsageError(f"unknown invariants: {', '.join(unknown)}")
    res = verify_suite(corpus, families, names)
    print(res.summary())
    print(f"{len(res.violations)} violations over {len(corpus)} instances and {len(families)} families")
    return EXIT_OK if res.ok else EXIT_FAIL


def cmd_corpus(args) -> int:
    items = builtin_corpus()
    save_corpus_dir(items, args.out)
    print(f"wrote {len(items)} instances to {args.out}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    fresh = calibration.calibrate()
    ok = True
    rows = {}
    for name, value in fresh.items():
        recorded = calibration.RECORDED[name]
        if name in ("envelope", "point_truth"):
            good = value <= calibration.bound(name)
        elif name == "two_point_band":
            good = recorded[0] <= value[0] and value[1] <= recorded[1]
        else:
            good = value >= recorded
        ok &= good
        rows[name] = {"recorded": recorded, "fresh": value, "ok": good}
    rows["late_buy_ratios"] = calibration.late_buy_ratios()
    rows["two_point_ratios"] = calibration.two_point_ratios()
    _dump(rows)
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="skirental", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("opt", help="optimal policy for a distribution file")
    p.add_argument("dist")
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--all-costs", action="store_true", help="also list the cost of every threshold")
    p.set_defaults(func=cmd_opt)

    p = sub.add_parser("emd", help="earth mover's distance between two distribution files")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--plan", action="store_true", help="print the monotone transport plan as CSV")
    p.set_defaults(func=cmd_emd)

    p = sub.add_parser("run", help="score one predictor on a (prediction, truth) pair")
    p.add_argument("--pred", required=True, help="base | main | point-truth | classical | lambda:<x>")
    p.add_argument("--phat", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--id", default="instance")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run an EMD sweep described by a JSON spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("adversary", help="emit a lower-bound family with its self-check")
    p.add_argument("--family", required=True, choices=sorted([*adversary.FAMILIES, "bimodal"]))
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--delta", type=float, default=1e-3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_adversary)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--corpus", help="directory of *.json instances (default: built-in corpus)")
    p.add_argument("--only", nargs="+", metavar="NAME")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("corpus", help="write the built-in corpus as instance files")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("calibrate", help="recompute the recorded constants and compare")
    p.set_defaults(func=cmd_calibrate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DistributionError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
