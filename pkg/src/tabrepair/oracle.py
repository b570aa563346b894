"""Exhaustive reference repairer for small instances.

Enumerates every candidate assignment outright, checks it against the
raw user rules, and keeps the cheapest valid ones. No closure, no
covers, no ranking, no pruning: the only code shared with the engine is
the cost model. Slow on purpose; used as ground truth in tests and
behind the engine's optional verification switch.
"""

from __future__ import annotations

import itertools
from typing import Mapping, Optional, Sequence

from .costs import CostModel, bind_cost_model
from .engine import Repair, RepairSet, _default_schema, _make_repair_set
from .errors import CapExceededError, UnsatisfiableRulesError
from .relation import Value
from .rules import RuleSet, Schema

DEFAULT_ORACLE_CAP = 10**6


def _row_candidates(
    row: Mapping[str, Value], attrs: Sequence[str], schema: Schema
) -> list[tuple[Value, ...]]:
    """Per-attribute candidates: the domain, plus keeping a null."""
    out = []
    for a in attrs:
        values: tuple[Value, ...] = schema[a].values
        if row[a] is None:
            values = values + (None,)
        out.append(values)
    return out


def brute_force_repairs(
    rows: Sequence[Mapping[str, Value]],
    ruleset: RuleSet,
    model: CostModel,
    schema: Optional[Schema] = None,
    multipliers: Optional[Sequence[int]] = None,
    cap: int = DEFAULT_ORACLE_CAP,
) -> RepairSet:
    """Cheapest repairs of one key group by full enumeration.

    Raises :class:`CapExceededError` when the candidate space exceeds
    ``cap`` and :class:`UnsatisfiableRulesError` when no candidate
    satisfies the rules.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("cannot repair an empty key group")
    if schema is None:
        schema = _default_schema(rows, ruleset)
    if multipliers is None:
        multipliers = bind_cost_model(model, rows, ruleset).multipliers
    determined, free = ruleset.determined_attrs, ruleset.free_attrs

    size = 1
    for a in determined:
        size *= len(schema[a].values)
    per_row = max(
        (
            _product_size(_row_candidates(row, free, schema))
            for row in rows
        ),
        default=1,
    )
    if size * per_row > cap:
        raise CapExceededError(
            f"candidate space {size * per_row} exceeds oracle cap {cap}"
        )

    rules = ruleset.rules
    best: Optional[int] = None
    found: list[Repair] = []
    shared_domains = [schema[a].values for a in determined]
    for shared in itertools.product(*shared_domains):
        assignment = dict(zip(determined, shared))
        shared_cost = sum(
            mult * model.change_cost(a, row[a], assignment[a])
            for row, mult in zip(rows, multipliers)
            for a in determined
        )
        if not free:
            if any(rule.fails(assignment) for rule in rules):
                continue
            total = shared_cost
            if best is None or total < best:
                best, found = total, [Repair(shared=shared)]
            elif total == best:
                found.append(Repair(shared=shared))
            continue

        total = shared_cost
        row_options: list[list[tuple[Value, ...]]] = []
        feasible = True
        for row, mult in zip(rows, multipliers):
            cheapest: Optional[int] = None
            options: list[tuple[Value, ...]] = []
            for combo in itertools.product(*_row_candidates(row, free, schema)):
                candidate = dict(assignment)
                candidate.update(zip(free, combo))
                if any(rule.fails(candidate) for rule in rules):
                    continue
                cost = mult * sum(
                    model.change_cost(a, row[a], candidate[a])
                    for a in free
                    if candidate[a] is not None or row[a] is not None
                )
                if cheapest is None or cost < cheapest:
                    cheapest, options = cost, [combo]
                elif cost == cheapest:
                    options.append(combo)
            if cheapest is None:
                feasible = False
                break
            total += cheapest
            row_options.append(options)
        if not feasible:
            continue
        if best is not None and total > best:
            continue
        bundles = [
            Repair(shared=shared, per_row=per_row_combo)
            for per_row_combo in itertools.product(*row_options)
        ]
        if best is None or total < best:
            best, found = total, bundles
        else:
            found.extend(bundles)
    if best is None:
        raise UnsatisfiableRulesError("no candidate satisfies the rules")
    return _make_repair_set(best, found)


def _product_size(candidates: Sequence[Sequence[Value]]) -> int:
    size = 1
    for values in candidates:
        size *= len(values)
    return size
