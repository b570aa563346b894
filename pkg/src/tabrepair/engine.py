"""Search for all cheapest repairs of key groups and single rows.

The search never explores blindly. For a group sharing a key it first
ranks, per attribute, how expensive each candidate value is across the
whole group, and visits combined assignments cheapest-first. If the
cheapest batch already contains valid assignments those are the
answers. Otherwise each cheapest assignment is patched: the rules it
fails must all be touched, so only minimal attribute covers of the
failing rules are tried, walking each cover's value lattice
cheapest-first. Changing more attributes than a cover can only pay off
when the cover's own values come in strictly below the best pure-cover
fix and still violate something, so exactly those assignments are
extended recursively. Values that escape no rule never appear in a
cheapest repair and are skipped. Both prunings can be switched off; the
result must not change, only the effort.

Costs are integers throughout, so equality of costs is exact and the
full set of minima is well defined.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .costs import (
    CostModel,
    bind_cost_model,
    class_value_costs,
    induced_value_costs,
)
from .covers import minimal_covers
from .errors import TabRepairError, UnsatisfiableRulesError
from .lcf import RankedDomain, first_batch, lowest_cost_first
from .relation import Relation, Value
from .rules import RuleSet, Schema, build_schema, normalize_rules
from .sufficient import DEFAULT_RULE_CAP, ClosureCache, SufficientSet


def _cell_key(value: Value) -> tuple[int, str]:
    return (0, "") if value is None else (1, value)


@dataclass(frozen=True)
class Repair:
    """One repair choice for a key group (or a single row).

    ``shared`` holds the values every row of the group receives, in the
    order of the determined attributes (or of the full attribute list
    for single-row repairs). ``per_row`` holds each row's values for the
    free attributes when those exist.
    """

    shared: tuple[Value, ...]
    per_row: Optional[tuple[tuple[Value, ...], ...]] = None

    def sort_key(self):
        rows = self.per_row or ()
        return (
            tuple(_cell_key(v) for v in self.shared),
            tuple(tuple(_cell_key(v) for v in row) for row in rows),
        )


@dataclass(frozen=True)
class RepairSet:
    """The minimum repair cost together with every repair attaining it."""

    cost: int
    repairs: tuple[Repair, ...]

    def __post_init__(self):
        if not self.repairs:
            raise ValueError("a repair set cannot be empty")


def _make_repair_set(cost: int, repairs: Iterable[Repair]) -> RepairSet:
    unique = sorted(set(repairs), key=Repair.sort_key)
    return RepairSet(cost, tuple(unique))


class _Collector:
    """Keeps the cheapest assignments seen so far."""

    __slots__ = ("order", "best", "items")

    def __init__(self, order: Sequence[str]):
        self.order = tuple(order)
        self.best: Optional[int] = None
        self.items: set[tuple[Value, ...]] = set()

    def offer(self, cost: int, assignment: Mapping[str, Value]) -> None:
        if self.best is not None and cost > self.best:
            return
        values = tuple(assignment[a] for a in self.order)
        if self.best is None or cost < self.best:
            self.best = cost
            self.items = {values}
        else:
            self.items.add(values)


def _escapes(sufficient: SufficientSet, attr: str, value: str) -> bool:
    """Whether writing ``value`` can release some rule at ``attr``."""
    for rule in sufficient.rules:
        component = rule.component(attr)
        if component is not None and value not in component:
            return True
    return False


def _candidate_entries(
    value_costs: Mapping[str, int],
    exclude: Value,
    sufficient: SufficientSet,
    attr: str,
    necessity: bool,
) -> tuple[tuple[str, int], ...]:
    items = [
        (v, c)
        for v, c in value_costs.items()
        if v != exclude and (not necessity or _escapes(sufficient, attr, v))
    ]
    items.sort(key=lambda vc: (vc[1], vc[0]))
    return tuple(items)


def _search(
    base: dict[str, Value],
    sufficient: SufficientSet,
    candidates: Mapping[str, tuple[tuple[str, int], ...]],
    collector: _Collector,
    cost_so_far: int,
    fixed: frozenset[str],
    prune_bound: bool,
) -> None:
    failing = sufficient.failing(base)
    if not failing:
        collector.offer(cost_so_far, base)
        return
    allowed = frozenset(
        a for a, entries in candidates.items() if entries and a not in fixed
    )
    for cover in minimal_covers(failing, allowed):
        ordered = sorted(cover)
        domains = [RankedDomain(a, candidates[a]) for a in ordered]
        cover_best: Optional[int] = None
        still_failing: list[tuple[int, dict[str, Value]]] = []
        for values, extra in lowest_cost_first(domains):
            if prune_bound:
                if cover_best is not None and extra > cover_best:
                    break
                if (
                    collector.best is not None
                    and cost_so_far + extra > collector.best
                ):
                    break
            trial = dict(base)
            trial.update(zip(ordered, values))
            if sufficient.satisfied_by(trial):
                if cover_best is None:
                    cover_best = extra
                collector.offer(cost_so_far + extra, trial)
            else:
                still_failing.append((extra, trial))
        for extra, trial in still_failing:
            if prune_bound and cover_best is not None and extra >= cover_best:
                # Spending at least as much on the cover as a pure cover
                # fix, and still failing, can never lead to a cheaper
                # repair than that fix.
                continue
            _search(
                trial,
                sufficient,
                candidates,
                collector,
                cost_so_far + extra,
                fixed | cover,
                prune_bound,
            )


def repair_tuple(
    row: Mapping[str, Value],
    sufficient: SufficientSet,
    costs: Mapping[str, Mapping[str, int]],
    attrs: Optional[Sequence[str]] = None,
    *,
    prune_bound: bool = True,
    prune_necessity: bool = True,
) -> RepairSet:
    """All cheapest single-row repairs.

    ``costs`` maps each changeable attribute to the cost of writing
    each candidate value (zero at the row's current value). Attributes
    outside ``costs`` keep their current values; the rules in
    ``sufficient`` must not involve attributes the row holds nulls on
    (reduce the rule set first, see :class:`ClosureCache`). ``attrs``
    fixes the column order of the returned assignments and defaults to
    the order of ``costs``.
    """
    if sufficient.contradiction:
        raise UnsatisfiableRulesError("the rule set cannot be satisfied")
    order = tuple(attrs) if attrs is not None else tuple(costs)
    base = {a: row[a] for a in order}
    for rule in sufficient.rules:
        for attr in rule.involved:
            if attr not in base:
                base[attr] = row[attr]
    candidates = {
        a: _candidate_entries(costs[a], row[a], sufficient, a, prune_necessity)
        for a in costs
    }
    collector = _Collector(order)
    _search(base, sufficient, candidates, collector, 0, frozenset(), prune_bound)
    if collector.best is None:
        raise TabRepairError(
            "row cannot be repaired within the changeable attributes"
        )
    return _make_repair_set(
        collector.best, (Repair(shared=values) for values in collector.items)
    )


def _default_schema(
    rows: Sequence[Mapping[str, Value]], ruleset: RuleSet
) -> Schema:
    relation = Relation.from_mappings(
        ruleset.key_attrs + ruleset.non_key_attrs, rows
    )
    return build_schema(relation, ruleset)


def _prepare_group(
    rows: Sequence[Mapping[str, Value]],
    ruleset: RuleSet,
    model: CostModel,
    schema: Optional[Schema],
    multipliers: Optional[Sequence[int]],
):
    if not rows:
        raise ValueError("cannot repair an empty key group")
    if schema is None:
        schema = _default_schema(rows, ruleset)
    if multipliers is None:
        multipliers = bind_cost_model(model, rows, ruleset).multipliers
    return schema, tuple(multipliers)


def _group_value_costs(
    attrs: Sequence[str],
    rows: Sequence[Mapping[str, Value]],
    multipliers: Sequence[int],
    schema: Schema,
    model: CostModel,
) -> dict[str, dict[str, int]]:
    return {
        a: class_value_costs(
            a, [row[a] for row in rows], multipliers, schema[a].values, model
        )
        for a in attrs
    }


def repair_class_full_key(
    rows: Sequence[Mapping[str, Value]],
    ruleset: RuleSet,
    model: CostModel,
    schema: Optional[Schema] = None,
    sufficient: Optional[SufficientSet] = None,
    multipliers: Optional[Sequence[int]] = None,
    *,
    prune_bound: bool = True,
    prune_necessity: bool = True,
    rule_cap: int = DEFAULT_RULE_CAP,
) -> RepairSet:
    """All cheapest common assignments for a group sharing a key.

    Every attribute is determined by the key (no free attributes), so a
    repair is a single assignment written into each row of the group.
    The reported cost sums the change costs over all rows.
    """
    if ruleset.free_attrs:
        raise ValueError("group has free attributes; use repair_class_partial_key")
    rows = list(rows)
    schema, multipliers = _prepare_group(rows, ruleset, model, schema, multipliers)
    attrs = ruleset.non_key_attrs
    if sufficient is None:
        cache = ClosureCache({a: schema[a] for a in attrs}, rule_cap)
        sufficient = cache.closure(normalize_rules(ruleset.rules, schema))
    if sufficient.contradiction:
        raise UnsatisfiableRulesError("the rule set cannot be satisfied")
    value_costs = _group_value_costs(attrs, rows, multipliers, schema, model)
    domains = [RankedDomain.from_costs(a, value_costs[a]) for a in attrs]
    batch, beta_min = first_batch(domains)
    anchors = [dict(zip(attrs, values)) for values in batch]
    valid_anchors = [a for a in anchors if sufficient.satisfied_by(a)]
    if valid_anchors:
        return _make_repair_set(
            beta_min,
            (Repair(shared=tuple(a[x] for x in attrs)) for a in valid_anchors),
        )
    collector = _Collector(attrs)
    for anchor in anchors:
        candidates = {}
        for attr in attrs:
            induced = induced_value_costs(value_costs[attr], anchor[attr])
            candidates[attr] = _candidate_entries(
                induced, anchor[attr], sufficient, attr, prune_necessity
            )
        _search(
            anchor, sufficient, candidates, collector, beta_min, frozenset(),
            prune_bound,
        )
    if collector.best is None:
        raise TabRepairError("internal error: satisfiable group yielded no repair")
    return _make_repair_set(
        collector.best, (Repair(shared=values) for values in collector.items)
    )


def _repair_row_completion(
    row: Mapping[str, Value],
    row_index: int,
    residual: SufficientSet,
    cache: ClosureCache,
    free_attrs: Sequence[str],
    schema: Schema,
    model: CostModel,
    multipliers: Sequence[int],
    prune_bound: bool,
    prune_necessity: bool,
) -> RepairSet:
    null_attrs = frozenset(a for a in free_attrs if row[a] is None)
    reduced = cache.without_attributes(residual, null_attrs)
    mult = multipliers[row_index]
    costs = {
        a: {
            v: mult * model.change_cost(a, row[a], v) for v in schema[a].values
        }
        for a in free_attrs
        if a not in null_attrs
    }
    return repair_tuple(
        row,
        reduced,
        costs,
        attrs=free_attrs,
        prune_bound=prune_bound,
        prune_necessity=prune_necessity,
    )


def repair_class_partial_key(
    rows: Sequence[Mapping[str, Value]],
    ruleset: RuleSet,
    model: CostModel,
    schema: Optional[Schema] = None,
    sufficient: Optional[SufficientSet] = None,
    multipliers: Optional[Sequence[int]] = None,
    *,
    prune_bound: bool = True,
    prune_necessity: bool = True,
    rule_cap: int = DEFAULT_RULE_CAP,
) -> RepairSet:
    """All cheapest repairs when the key determines only some attributes.

    Candidate assignments for the determined attributes are visited
    cheapest-first; each one is priced as its own group cost plus, per
    row, the cheapest way to fix the remaining rule violations by
    touching free attributes only. The walk stops once the group cost
    alone exceeds the best total found, which guarantees completeness.
    """
    if not ruleset.free_attrs:
        return repair_class_full_key(
            rows, ruleset, model, schema, sufficient, multipliers,
            prune_bound=prune_bound, prune_necessity=prune_necessity,
            rule_cap=rule_cap,
        )
    rows = list(rows)
    schema, multipliers = _prepare_group(rows, ruleset, model, schema, multipliers)
    determined, free = ruleset.determined_attrs, ruleset.free_attrs
    cache = ClosureCache(
        {a: schema[a] for a in ruleset.non_key_attrs}, rule_cap
    )
    if sufficient is None:
        sufficient = cache.closure(normalize_rules(ruleset.rules, schema))
    if sufficient.contradiction:
        raise UnsatisfiableRulesError("the rule set cannot be satisfied")
    value_costs = _group_value_costs(determined, rows, multipliers, schema, model)
    domains = [RankedDomain.from_costs(a, value_costs[a]) for a in determined]

    best: Optional[int] = None
    entries: list[tuple[tuple[Value, ...], list[tuple[Repair, ...]]]] = []
    for shared_values, shared_cost in lowest_cost_first(domains):
        if prune_bound and best is not None and shared_cost > best:
            break
        assignment = dict(zip(determined, shared_values))
        residual = cache.with_substitution(sufficient, assignment)
        if residual.contradiction:
            continue
        total = shared_cost
        row_choices: list[tuple[Repair, ...]] = []
        feasible = True
        for index, row in enumerate(rows):
            completion = _repair_row_completion(
                row, index, residual, cache, free, schema, model, multipliers,
                prune_bound, prune_necessity,
            )
            total += completion.cost
            row_choices.append(completion.repairs)
            if prune_bound and best is not None and total > best:
                feasible = False
                break
        if not feasible:
            continue
        if best is None or total < best:
            best = total
            entries = [(shared_values, row_choices)]
        elif total == best:
            entries.append((shared_values, row_choices))
    if best is None:
        raise TabRepairError("internal error: satisfiable group yielded no repair")
    repairs = []
    for shared_values, row_choices in entries:
        for combo in itertools.product(*row_choices):
            repairs.append(
                Repair(
                    shared=shared_values,
                    per_row=tuple(choice.shared for choice in combo),
                )
            )
    return _make_repair_set(best, repairs)
