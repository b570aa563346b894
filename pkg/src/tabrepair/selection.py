"""Picking one repair out of the cheapest alternatives.

Cost settles everything it can settle within a key group. When several
repairs tie, the choice falls to a strategy: a seeded uniform pick, or
sampling proportionally to how often each repaired row pattern occurs
among rows that violate nothing.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .engine import Repair, RepairSet
from .errors import TabRepairError
from .relation import Relation, Value
from .rules import RuleSet
from .sufficient import SufficientSet


@dataclass(frozen=True)
class FrequencyModel:
    """Occurrence counts of full non-key row patterns in clean rows.

    A row is clean when it fails no rule of the closed rule set and has
    no missing values.
    """

    counts: Mapping[tuple[Value, ...], int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def build_frequency_model(
    relation: Relation, sufficient: SufficientSet, ruleset: RuleSet
) -> FrequencyModel:
    non_key = ruleset.non_key_attrs
    positions = [relation.index_of(a) for a in non_key]
    counter: Counter[tuple[Value, ...]] = Counter()
    for row in relation.rows:
        pattern = tuple(row[i] for i in positions)
        if any(v is None for v in pattern):
            continue
        assignment = dict(zip(non_key, pattern))
        if sufficient.satisfied_by(assignment):
            counter[pattern] += 1
    return FrequencyModel(dict(counter))


def select_random(repair_set: RepairSet, seed: int) -> Repair:
    """Uniform choice over the canonically ordered repairs."""
    if not repair_set.repairs:
        raise TabRepairError("cannot select from an empty repair set")
    rng = random.Random(seed)
    return repair_set.repairs[rng.randrange(len(repair_set.repairs))]


def _row_patterns(repair: Repair, ruleset: RuleSet) -> list[tuple[Value, ...]]:
    """Full non-key patterns each row would hold after this repair."""
    determined, free = ruleset.determined_attrs, ruleset.free_attrs
    non_key = ruleset.non_key_attrs
    shared = dict(zip(determined if repair.per_row is not None else non_key,
                      repair.shared))
    if repair.per_row is None:
        return [tuple(shared[a] for a in non_key)]
    patterns = []
    for row_values in repair.per_row:
        merged = dict(shared)
        merged.update(zip(free, row_values))
        patterns.append(tuple(merged[a] for a in non_key))
    return patterns


def frequency_weights(
    repair_set: RepairSet, model: FrequencyModel, ruleset: RuleSet
) -> tuple[int, ...]:
    """Per-repair weight: summed clean-data counts of its row patterns."""
    weights = []
    for repair in repair_set.repairs:
        weights.append(
            sum(model.counts.get(p, 0) for p in _row_patterns(repair, ruleset))
        )
    return tuple(weights)


def select_frequent(
    repair_set: RepairSet,
    model: FrequencyModel,
    seed: int,
    ruleset: RuleSet,
) -> Repair:
    """Sample a repair proportionally to its clean-data frequency.

    Falls back to the uniform choice when no alternative was ever seen
    in the clean data.
    """
    if not repair_set.repairs:
        raise TabRepairError("cannot select from an empty repair set")
    weights = frequency_weights(repair_set, model, ruleset)
    if not any(weights):
        return select_random(repair_set, seed)
    rng = random.Random(seed)
    return rng.choices(repair_set.repairs, weights=weights, k=1)[0]
