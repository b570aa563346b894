"""Cost models for cell changes and their class-level aggregates.

Every model assigns a non-negative integer cost to changing one cell,
with zero exactly on the diagonal (keeping a value is free, any actual
change costs something). Changing a missing value costs the same
regardless of the value written. The reliability variant additionally
scales each row's changes by a factor that is small for rows already
showing damage (nulls or rule violations), making suspect rows cheap to
overrule.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .errors import CostModelError
from .relation import Relation, Value
from .rules import EditRule, RuleSet


class CostModel:
    """Base interface: per-attribute change costs."""

    uniform_changes = False  # every change costs alpha, regardless of values

    def change_cost(self, attr: str, old: Value, new: str) -> int:
        raise NotImplementedError

    def validate(self) -> None:
        pass


@dataclass(frozen=True)
class ConstantCost(CostModel):
    """Flat cost ``alpha`` for any change, zero for keeping a value."""

    alpha: int = 1
    uniform_changes = True

    def __post_init__(self):
        if not isinstance(self.alpha, int) or self.alpha <= 0:
            raise CostModelError("alpha must be a positive integer")

    def change_cost(self, attr: str, old: Value, new: str) -> int:
        return 0 if old == new else self.alpha


@dataclass(frozen=True)
class ReliabilityCost(CostModel):
    """Constant per-cell cost, later scaled per row by a damage factor."""

    alpha: int = 1
    omega: int = 4
    uniform_changes = True

    def __post_init__(self):
        if not isinstance(self.alpha, int) or self.alpha <= 0:
            raise CostModelError("alpha must be a positive integer")
        if not isinstance(self.omega, int) or self.omega < 0:
            raise CostModelError("omega must be a non-negative integer")

    def change_cost(self, attr: str, old: Value, new: str) -> int:
        return 0 if old == new else self.alpha


@dataclass(frozen=True)
class PreferenceCost(CostModel):
    """Asymmetric per-attribute change costs from user tables.

    ``tables`` maps attribute -> from-value -> to-value -> cost. Pairs
    absent from a table, attributes without a table, and changes from a
    missing value all cost ``alpha``.
    """

    tables: Mapping[str, Mapping[str, Mapping[str, int]]] = field(default_factory=dict)
    alpha: int = 1

    def __post_init__(self):
        if not isinstance(self.alpha, int) or self.alpha <= 0:
            raise CostModelError("alpha must be a positive integer")
        self.validate()

    def validate(self) -> None:
        for attr, table in self.tables.items():
            for old, row in table.items():
                for new, cost in row.items():
                    if not isinstance(cost, int):
                        raise CostModelError(
                            f"non-integer cost for {attr!r}: {old!r}->{new!r}"
                        )
                    if old == new and cost != 0:
                        raise CostModelError(
                            f"nonzero diagonal for {attr!r} at {old!r}"
                        )
                    if old != new and cost <= 0:
                        raise CostModelError(
                            f"non-positive change cost for {attr!r}: {old!r}->{new!r}"
                        )

    def change_cost(self, attr: str, old: Value, new: str) -> int:
        if old == new:
            return 0
        if old is None:
            return self.alpha
        table = self.tables.get(attr)
        if table is None:
            return self.alpha
        return table.get(old, {}).get(new, self.alpha)


def row_multiplier(
    row: Mapping[str, Value],
    non_key_attrs: Sequence[str],
    rules: Iterable[EditRule],
    omega: int,
) -> int:
    """Per-row damage factor: (attribute count - damaged count) ** omega.

    An attribute counts as damaged when it is null or when it enters a
    rule the row fails. Clamped below at one so changes never become
    free.
    """
    damaged = {a for a in non_key_attrs if row[a] is None}
    for rule in rules:
        if rule.fails(row):
            damaged |= rule.involved
    base = len(non_key_attrs) - len(damaged)
    return max(1, base**omega)


@dataclass(frozen=True)
class BoundCostModel:
    """A cost model attached to concrete rows.

    Multipliers are computed once from the original (dirty) rows and
    stay fixed throughout the repair search.
    """

    base: CostModel
    multipliers: tuple[int, ...]

    def cell_cost(self, row_index: int, attr: str, old: Value, new: str) -> int:
        return self.base.change_cost(attr, old, new) * self.multipliers[row_index]

    def row_cost(
        self,
        row_index: int,
        original: Mapping[str, Value],
        candidate: Mapping[str, Value],
        attrs: Sequence[str],
    ) -> int:
        mult = self.multipliers[row_index]
        return mult * sum(
            self.base.change_cost(a, original[a], candidate[a]) for a in attrs
        )


def bind_cost_model(
    model: CostModel,
    rows: Sequence[Mapping[str, Value]],
    ruleset: RuleSet,
) -> BoundCostModel:
    if isinstance(model, ReliabilityCost):
        non_key = ruleset.non_key_attrs
        mults = tuple(
            row_multiplier(row, non_key, ruleset.rules, model.omega) for row in rows
        )
    else:
        mults = (1,) * len(rows)
    return BoundCostModel(model, mults)


def delta(
    row: Mapping[str, Value],
    candidate: Mapping[str, Value],
    model: CostModel,
    attrs: Sequence[str],
    multiplier: int = 1,
) -> int:
    """Total cost of turning ``row`` into ``candidate`` over ``attrs``."""
    return multiplier * sum(
        model.change_cost(a, row[a], candidate[a]) for a in attrs
    )


def class_value_costs(
    attr: str,
    values: Sequence[Value],
    multipliers: Sequence[int],
    domain: Sequence[str],
    model: CostModel,
) -> dict[str, int]:
    """Cost of writing each domain value into every row of a key group.

    ``values`` are the group's current cells for ``attr`` (nulls
    allowed), aligned with ``multipliers``.
    """
    if model.uniform_changes:
        # All changes cost alpha: c(v) = alpha * (weight total - weight on v).
        alpha = model.alpha  # type: ignore[attr-defined]
        total = 0
        weight: dict[str, int] = {}
        for value, mult in zip(values, multipliers):
            total += mult
            if value is not None:
                weight[value] = weight.get(value, 0) + mult
        return {v: alpha * (total - weight.get(v, 0)) for v in domain}
    return {
        v: sum(
            mult * model.change_cost(attr, old, v)
            for old, mult in zip(values, multipliers)
        )
        for v in domain
    }


def induced_value_costs(
    value_costs: Mapping[str, int], anchor_value: str
) -> dict[str, int]:
    """Extra class cost of values strictly costlier than the anchor's.

    Values tied with or cheaper than the anchor value are excluded, so
    the result is positive on its whole domain.
    """
    base = value_costs[anchor_value]
    return {v: c - base for v, c in value_costs.items() if c > base}


# ---------------------------------------------------------------------------
# Preference table files: one CSV per attribute, first column = from-value,
# header row = to-values, integer cells, zero diagonal.

def load_preference_table(path) -> dict[str, dict[str, int]]:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise CostModelError(f"empty preference table: {path}") from None
        to_values = header[1:]
        table: dict[str, dict[str, int]] = {}
        for record in reader:
            if len(record) != len(header):
                raise CostModelError(f"ragged preference table: {path}")
            from_value = record[0]
            try:
                table[from_value] = {
                    to: int(cell) for to, cell in zip(to_values, record[1:])
                }
            except ValueError:
                raise CostModelError(
                    f"non-integer entry in preference table: {path}"
                ) from None
    return table


def load_preference_dir(directory, alpha: int = 1) -> PreferenceCost:
    """Load ``<attr>.csv`` tables from a directory into a cost model."""
    tables = {}
    for name in sorted(os.listdir(directory)):
        if not name.endswith(".csv"):
            continue
        attr = name[: -len(".csv")]
        tables[attr] = load_preference_table(os.path.join(directory, name))
    return PreferenceCost(tables=tables, alpha=alpha)
