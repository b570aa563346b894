"""Command line interface: repair, check and eval subcommands.

Exit codes: 0 success, 1 failure (I/O, bad data, rule errors), 2 usage,
3 unsatisfiable rule set, 4 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .costs import ConstantCost, PreferenceCost, ReliabilityCost, load_preference_dir
from .errors import CapExceededError, TabRepairError, UnsatisfiableRulesError
from .metrics import score, violation_report
from .pipeline import SelectionPolicy, repair_relation
from .relation import load_csv, save_csv
from .rules import parse_rule_file

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_UNSATISFIABLE = 3
EXIT_CAP = 4


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", required=True, help="input CSV file")
    parser.add_argument("--rules", required=True, help="rule-DSL file")
    parser.add_argument(
        "--null-token", default="", help="cell text treated as a missing value"
    )
    parser.add_argument(
        "--no-rules",
        action="store_true",
        help="ignore the rules, enforce only key agreement",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tabrepair",
        description="Minimal-cost repair of tabular data under edit rules "
        "and key constraints",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    repair = sub.add_parser("repair", help="repair a CSV file")
    _add_common(repair)
    repair.add_argument("--output", required=True, help="repaired CSV file")
    repair.add_argument("--report", help="write the JSON run report here")
    repair.add_argument(
        "--cost",
        choices=["constant", "reliability", "preference"],
        default="constant",
    )
    repair.add_argument("--alpha", type=int, default=1, help="base change cost")
    repair.add_argument(
        "--omega", type=int, default=4, help="reliability amplification exponent"
    )
    repair.add_argument(
        "--pref-dir", help="directory of per-attribute preference cost tables"
    )
    repair.add_argument(
        "--select", choices=["random", "frequency"], default="random"
    )
    repair.add_argument("--seed", type=int, default=0)
    repair.add_argument(
        "--threads",
        type=int,
        default=os.cpu_count() or 1,
        help="worker processes for repairing key groups",
    )
    repair.add_argument(
        "--oracle-verify",
        action="store_true",
        help="cross-check each small group against exhaustive enumeration",
    )

    check = sub.add_parser("check", help="count rule and key violations")
    _add_common(check)

    evaluate = sub.add_parser("eval", help="score repairs against a gold standard")
    _add_common(evaluate)
    evaluate.add_argument("--repaired", required=True, help="repaired CSV file")
    evaluate.add_argument(
        "--gold", required=True, help="gold CSV: one correct row per key"
    )
    return parser


def _load(args):
    relation = load_csv(args.input, args.null_token)
    ruleset = parse_rule_file(args.rules)
    if args.no_rules:
        ruleset = ruleset.without_rules()
    return relation, ruleset.bind(relation.attributes)


def run_repair(args) -> int:
    relation, ruleset = _load(args)
    if args.cost == "constant":
        model = ConstantCost(alpha=args.alpha)
    elif args.cost == "reliability":
        model = ReliabilityCost(alpha=args.alpha, omega=args.omega)
    else:
        if not args.pref_dir:
            print("error: --cost preference requires --pref-dir", file=sys.stderr)
            return EXIT_USAGE
        model = load_preference_dir(args.pref_dir, alpha=args.alpha)
    config = {
        "input": args.input,
        "rules": args.rules,
        "cost": args.cost,
        "alpha": args.alpha,
        "omega": args.omega,
        "select": args.select,
        "seed": args.seed,
        "null_token": args.null_token,
        "no_rules": args.no_rules,
    }
    repaired, report = repair_relation(
        relation,
        ruleset,
        model,
        SelectionPolicy(strategy=args.select, seed=args.seed),
        threads=args.threads,
        oracle_verify=args.oracle_verify,
        config=config,
    )
    save_csv(repaired, args.output, args.null_token)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as handle:
            json.dump(report, handle, indent=2, sort_keys=True)
            handle.write("\n")
    changed = sum(
        1
        for before, after in zip(
            sorted(relation.rows), sorted(repaired.rows)
        )
        if before != after
    )
    print(
        f"repaired {len(report['per_class'])} key groups, "
        f"{changed} rows changed, "
        f"violations {report['violations_before']['total_rule_violations']}"
        f"+{report['violations_before']['fd_violations']}fd -> "
        f"{report['violations_after']['total_rule_violations']}"
        f"+{report['violations_after']['fd_violations']}fd"
    )
    return EXIT_OK


def run_check(args) -> int:
    relation, ruleset = _load(args)
    result = violation_report(relation, ruleset)
    for text, count in result.rule_counts:
        print(f"{count:8d}  {text}")
    print(f"{result.total_rule_violations:8d}  total rule violations")
    print(f"{result.fd_violations:8d}  key groups with conflicting determined values")
    return EXIT_OK


def run_eval(args) -> int:
    relation, ruleset = _load(args)
    repaired = load_csv(args.repaired, args.null_token)
    gold = load_csv(args.gold, args.null_token)
    metrics = score(relation, repaired, gold, ruleset)
    print(f"precision        {metrics.precision:.4f}")
    print(f"recall           {metrics.recall:.4f}")
    print(f"f1               {metrics.f1:.4f}")
    print(f"macro-precision  {metrics.macro_precision:.4f}")
    print(f"macro-recall     {metrics.macro_recall:.4f}")
    print(f"macro-f1         {metrics.macro_f1:.4f}")
    print(
        f"repairs {metrics.repairs_performed}, "
        f"correct {metrics.correct_repairs}, gold errors {metrics.gold_errors}"
    )
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {"repair": run_repair, "check": run_check, "eval": run_eval}
    try:
        return handlers[args.command](args)
    except UnsatisfiableRulesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSATISFIABLE
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (TabRepairError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
