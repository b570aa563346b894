"""Repair quality scores against a gold standard, and violation counts."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .errors import KeyMisalignmentError
from .relation import Relation, Value
from .rules import RuleSet, describe_rule


@dataclass(frozen=True)
class AttributeScore:
    errors: int = 0
    repairs: int = 0
    correct: int = 0

    @property
    def precision(self) -> float:
        return self.correct / self.repairs if self.repairs else 0.0

    @property
    def recall(self) -> float:
        return self.correct / self.errors if self.errors else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f1: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    per_attribute: Mapping[str, AttributeScore]
    gold_errors: int
    repairs_performed: int
    correct_repairs: int

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "gold_errors": self.gold_errors,
            "repairs_performed": self.repairs_performed,
            "correct_repairs": self.correct_repairs,
            "per_attribute": {
                attr: {
                    "errors": s.errors,
                    "repairs": s.repairs,
                    "correct": s.correct,
                    "precision": s.precision,
                    "recall": s.recall,
                    "f1": s.f1,
                }
                for attr, s in self.per_attribute.items()
            },
        }


def _key_of(relation: Relation, row_index: int, key_positions) -> tuple:
    return tuple(relation.rows[row_index][i] for i in key_positions)


def score(
    dirty: Relation,
    repaired: Relation,
    gold: Relation,
    ruleset: RuleSet,
) -> Metrics:
    """Cell-level precision/recall/F1 of the performed repairs.

    The gold relation carries at most one row per key: the correct
    values for that entity. Every dirty row whose key is covered is
    scored cell by cell; gold cells that are null are left out (the
    truth there is unknown). A repair is any scored cell whose repaired
    value differs from the dirty one, including filled-in nulls; it
    counts as correct when it lands on the gold value. Macro variants
    average the per-attribute scores over all non-key attributes.
    """
    if dirty.attributes != repaired.attributes:
        raise KeyMisalignmentError("dirty and repaired column sets differ")
    if len(dirty) != len(repaired):
        raise KeyMisalignmentError("dirty and repaired row counts differ")
    key_positions = [dirty.index_of(a) for a in ruleset.key_attrs]
    gold_key_positions = [gold.index_of(a) for a in ruleset.key_attrs]
    non_key = [a for a in dirty.attributes if a not in set(ruleset.key_attrs)]

    gold_rows: dict[tuple, dict[str, Value]] = {}
    for i in range(len(gold)):
        key = _key_of(gold, i, gold_key_positions)
        mapping = gold.row_mapping(i)
        if key in gold_rows and gold_rows[key] != mapping:
            raise KeyMisalignmentError(f"conflicting gold rows for key {key!r}")
        gold_rows[key] = mapping

    dirty_keys = {
        _key_of(dirty, i, key_positions) for i in range(len(dirty))
    }
    stray = set(gold_rows) - dirty_keys
    if stray:
        raise KeyMisalignmentError(
            f"gold keys missing from the data: {sorted(stray)[:5]!r}"
        )

    scores = {a: {"errors": 0, "repairs": 0, "correct": 0} for a in non_key}
    for i in range(len(dirty)):
        key = _key_of(dirty, i, key_positions)
        truth = gold_rows.get(key)
        if truth is None:
            continue
        if _key_of(repaired, i, key_positions) != key:
            raise KeyMisalignmentError("repaired rows are not aligned with dirty rows")
        dirty_row = dirty.row_mapping(i)
        repaired_row = repaired.row_mapping(i)
        for attr in non_key:
            if truth[attr] is None:
                continue
            cell = scores[attr]
            if dirty_row[attr] != truth[attr]:
                cell["errors"] += 1
            if repaired_row[attr] != dirty_row[attr]:
                cell["repairs"] += 1
                if repaired_row[attr] == truth[attr]:
                    cell["correct"] += 1

    per_attribute = {
        attr: AttributeScore(c["errors"], c["repairs"], c["correct"])
        for attr, c in scores.items()
    }
    totals = AttributeScore(
        sum(s.errors for s in per_attribute.values()),
        sum(s.repairs for s in per_attribute.values()),
        sum(s.correct for s in per_attribute.values()),
    )
    count = len(per_attribute) or 1
    return Metrics(
        precision=totals.precision,
        recall=totals.recall,
        f1=totals.f1,
        macro_precision=sum(s.precision for s in per_attribute.values()) / count,
        macro_recall=sum(s.recall for s in per_attribute.values()) / count,
        macro_f1=sum(s.f1 for s in per_attribute.values()) / count,
        per_attribute=per_attribute,
        gold_errors=totals.errors,
        repairs_performed=totals.repairs,
        correct_repairs=totals.correct,
    )


@dataclass(frozen=True)
class ViolationReport:
    rule_counts: tuple[tuple[str, int], ...]
    fd_violations: int

    @property
    def total_rule_violations(self) -> int:
        return sum(count for _, count in self.rule_counts)

    @property
    def clean(self) -> bool:
        return self.total_rule_violations == 0 and self.fd_violations == 0

    def as_dict(self) -> dict:
        return {
            "rules": [
                {"rule": text, "rows": count} for text, count in self.rule_counts
            ],
            "total_rule_violations": self.total_rule_violations,
            "fd_violations": self.fd_violations,
        }


def violation_report(relation: Relation, ruleset: RuleSet) -> ViolationReport:
    """Rows violating each rule, plus key groups disagreeing on
    determined attributes.

    A row with a null on an attribute a rule involves cannot violate
    that rule. A key group counts as a dependency violation when it
    holds two or more distinct fully non-null combinations of
    determined values.
    """
    counts = []
    for rule in ruleset.rules:
        positions = [relation.index_of(a) for a in sorted(rule.involved)]
        involved = sorted(rule.involved)
        failed = 0
        for row in relation.rows:
            assignment = {a: row[i] for a, i in zip(involved, positions)}
            if rule.fails(assignment):
                failed += 1
        counts.append((describe_rule(rule), failed))

    fd_violations = 0
    if ruleset.determined_attrs:
        key_positions = [relation.index_of(a) for a in ruleset.key_attrs]
        det_positions = [relation.index_of(a) for a in ruleset.determined_attrs]
        combos: dict[tuple, set[tuple]] = {}
        for row in relation.rows:
            key = tuple(row[i] for i in key_positions)
            combo = tuple(row[i] for i in det_positions)
            if any(v is None for v in combo):
                continue
            combos.setdefault(key, set()).add(combo)
        fd_violations = sum(1 for seen in combos.values() if len(seen) > 1)
    return ViolationReport(tuple(counts), fd_violations)
