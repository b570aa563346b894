"""Whole-relation repair: grouping, decomposition, selection, report.

Rows are grouped by their key values and every group is repaired on its
own; groups never interact. Within a group the rules split into
independent components (no shared attributes), each component is solved
separately, and the component repairs multiply out to the group's full
repair set. One repair per group is then chosen by the selection policy
and written into every row of the group.

Group results are pure functions of (group rows, rules, cost model,
seed), so groups can be repaired in parallel worker processes without
affecting the output.
"""

from __future__ import annotations

import hashlib
import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Mapping, Optional, Sequence

from .costs import CostModel, bind_cost_model
from .engine import (
    Repair,
    RepairSet,
    _make_repair_set,
    repair_class_full_key,
    repair_class_partial_key,
)
from .errors import DataError, TabRepairError, UnsatisfiableRulesError
from .metrics import violation_report
from .oracle import DEFAULT_ORACLE_CAP, brute_force_repairs
from .relation import Relation, Row, Value
from .rules import RuleSet, Schema, build_schema, normalize_rules
from .selection import (
    FrequencyModel,
    build_frequency_model,
    frequency_weights,
    select_frequent,
    select_random,
)
from .sufficient import (
    DEFAULT_RULE_CAP,
    ClosureCache,
    SufficientSet,
    partition_independent,
)

RANDOM = "random"
FREQUENCY = "frequency"


@dataclass(frozen=True)
class SelectionPolicy:
    strategy: str = RANDOM
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in (RANDOM, FREQUENCY):
            raise ValueError(f"unknown selection strategy {self.strategy!r}")


def derive_group_seed(seed: int, key: tuple) -> int:
    """Stable per-group seed; independent of scheduling and hashing."""
    digest = hashlib.sha256(repr((seed, key)).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class _Component:
    det_attrs: tuple[str, ...]
    free_attrs: tuple[str, ...]
    rules: tuple
    sufficient: Optional[SufficientSet]
    ruleset: Optional[RuleSet]
    kind: str  # "det_pick" | "free_passthrough" | "full" | "partial"


@dataclass(frozen=True)
class _RunPlan:
    """Everything a worker needs to repair any group."""

    ruleset: RuleSet
    schema: Schema
    model: CostModel
    components: tuple[_Component, ...]
    policy: SelectionPolicy
    frequency_model: Optional[FrequencyModel]
    prune_bound: bool = True
    prune_necessity: bool = True
    rule_cap: int = DEFAULT_RULE_CAP


@dataclass(frozen=True)
class GroupResult:
    key: tuple
    cost: int
    alternatives: int
    chosen: Repair
    uniform_fallback: bool
    repair_set: Optional[RepairSet] = None


def _build_components(
    ruleset: RuleSet, normalized_rules, schema: Schema, rule_cap: int
) -> tuple[_Component, ...]:
    cache = ClosureCache(
        {a: schema[a] for a in ruleset.non_key_attrs}, rule_cap
    )
    determined = set(ruleset.determined_attrs)
    components = []
    for attrs, rules in partition_independent(
        normalized_rules, ruleset.non_key_attrs
    ):
        det_c = tuple(a for a in ruleset.determined_attrs if a in attrs)
        free_c = tuple(a for a in ruleset.free_attrs if a in attrs)
        if not rules:
            (attr,) = attrs
            kind = "det_pick" if attr in determined else "free_passthrough"
            components.append(_Component(det_c, free_c, (), None, None, kind))
            continue
        sub_ruleset = RuleSet(ruleset.key_attrs, det_c, free_c, rules)
        sufficient = cache.closure(rules)
        if sufficient.contradiction:
            raise UnsatisfiableRulesError(
                "the rule set cannot be satisfied by any row"
            )
        kind = "full" if not free_c else "partial"
        components.append(
            _Component(det_c, free_c, rules, sufficient, sub_ruleset, kind)
        )
    return tuple(components)


def _solve_component(
    component: _Component,
    rows: Sequence[Mapping[str, Value]],
    multipliers: Sequence[int],
    plan: _RunPlan,
) -> RepairSet:
    if component.kind == "free_passthrough":
        (attr,) = component.free_attrs
        per_row = tuple((row[attr],) for row in rows)
        return RepairSet(0, (Repair(shared=(), per_row=per_row),))
    if component.kind == "det_pick":
        (attr,) = component.det_attrs
        from .costs import class_value_costs

        costs = class_value_costs(
            attr,
            [row[attr] for row in rows],
            multipliers,
            plan.schema[attr].values,
            plan.model,
        )
        cheapest = min(costs.values())
        return _make_repair_set(
            cheapest,
            (Repair(shared=(v,)) for v, c in costs.items() if c == cheapest),
        )
    repairer = (
        repair_class_full_key if component.kind == "full" else repair_class_partial_key
    )
    return repairer(
        rows,
        component.ruleset,
        plan.model,
        schema=plan.schema,
        sufficient=component.sufficient,
        multipliers=multipliers,
        prune_bound=plan.prune_bound,
        prune_necessity=plan.prune_necessity,
        rule_cap=plan.rule_cap,
    )


def _join_components(
    results: Sequence[tuple[_Component, RepairSet]],
    ruleset: RuleSet,
    row_count: int,
) -> RepairSet:
    det_pos = {a: i for i, a in enumerate(ruleset.determined_attrs)}
    free_pos = {a: i for i, a in enumerate(ruleset.free_attrs)}
    has_free = bool(ruleset.free_attrs)
    total = sum(rs.cost for _, rs in results)
    joined = []
    for combo in itertools.product(*[rs.repairs for _, rs in results]):
        shared: list[Value] = [None] * len(ruleset.determined_attrs)
        rows_values: list[list[Value]] = [
            [None] * len(ruleset.free_attrs) for _ in range(row_count)
        ]
        for (component, _), repair in zip(results, combo):
            for attr, value in zip(component.det_attrs, repair.shared):
                shared[det_pos[attr]] = value
            if repair.per_row is not None:
                for row_index, values in enumerate(repair.per_row):
                    for attr, value in zip(component.free_attrs, values):
                        rows_values[row_index][free_pos[attr]] = value
        joined.append(
            Repair(
                shared=tuple(shared),
                per_row=tuple(tuple(r) for r in rows_values) if has_free else None,
            )
        )
    return _make_repair_set(total, joined)


def solve_group(
    key: tuple,
    rows: Sequence[Mapping[str, Value]],
    multipliers: Sequence[int],
    plan: _RunPlan,
    keep_repair_set: bool = False,
) -> GroupResult:
    results = [
        (component, _solve_component(component, rows, multipliers, plan))
        for component in plan.components
    ]
    joint = _join_components(results, plan.ruleset, len(rows))
    group_seed = derive_group_seed(plan.policy.seed, key)
    fallback = False
    if plan.policy.strategy == FREQUENCY and plan.frequency_model is not None:
        weights = frequency_weights(joint, plan.frequency_model, plan.ruleset)
        fallback = not any(weights)
        chosen = select_frequent(
            joint, plan.frequency_model, group_seed, plan.ruleset
        )
    else:
        chosen = select_random(joint, group_seed)
    return GroupResult(
        key=key,
        cost=joint.cost,
        alternatives=len(joint.repairs),
        chosen=chosen,
        uniform_fallback=fallback,
        repair_set=joint if keep_repair_set else None,
    )


_WORKER_PLAN: Optional[_RunPlan] = None


def _init_worker(plan: _RunPlan) -> None:
    global _WORKER_PLAN
    _WORKER_PLAN = plan


def _worker_chunk(chunk) -> list[GroupResult]:
    assert _WORKER_PLAN is not None
    return [
        solve_group(key, rows, multipliers, _WORKER_PLAN)
        for key, rows, multipliers in chunk
    ]


def _apply_repair(
    relation: Relation,
    ruleset: RuleSet,
    key_rows: Mapping[tuple, list[int]],
    results: Mapping[tuple, GroupResult],
    preserve_order: bool,
) -> Relation:
    det_index = {a: i for i, a in enumerate(ruleset.determined_attrs)}
    free_index = {a: i for i, a in enumerate(ruleset.free_attrs)}
    key_set = set(ruleset.key_attrs)
    indexed: list[tuple[int, Row]] = []
    for key in sorted(key_rows):
        chosen = results[key].chosen
        for position, row_index in enumerate(key_rows[key]):
            old = relation.rows[row_index]
            new_row = []
            for column, attr in enumerate(relation.attributes):
                if attr in key_set:
                    new_row.append(old[column])
                elif attr in det_index:
                    new_row.append(chosen.shared[det_index[attr]])
                else:
                    assert chosen.per_row is not None
                    new_row.append(chosen.per_row[position][free_index[attr]])
            indexed.append((row_index, tuple(new_row)))
    if preserve_order:
        indexed.sort(key=lambda item: item[0])
    return relation.with_rows(row for _, row in indexed)


def _serialize_repair(repair: Repair, ruleset: RuleSet) -> dict:
    shared = dict(zip(ruleset.determined_attrs, repair.shared))
    if repair.per_row is None:
        return {"values": shared}
    return {
        "determined": shared,
        "rows": [dict(zip(ruleset.free_attrs, values)) for values in repair.per_row],
    }


def repair_relation(
    relation: Relation,
    ruleset: RuleSet,
    model: CostModel,
    policy: SelectionPolicy = SelectionPolicy(),
    *,
    threads: int = 1,
    prune_bound: bool = True,
    prune_necessity: bool = True,
    rule_cap: int = DEFAULT_RULE_CAP,
    oracle_verify: bool = False,
    oracle_cap: int = DEFAULT_ORACLE_CAP,
    config: Optional[dict] = None,
    frequency_model: Optional[FrequencyModel] = None,
    preserve_order: bool = False,
) -> tuple[Relation, dict]:
    """Repair every key group of a relation and describe what was done.

    Returns the repaired relation (rows sorted by key, original order
    within a group; pass ``preserve_order`` to keep the input row order
    instead) and a report: configuration echo, rule closure statistics,
    one entry per group (cost, number of tied alternatives, the chosen
    repair), violation counts before and after, selection bookkeeping
    and timing.

    Frequency-based selection counts clean row patterns in ``relation``
    itself unless a prebuilt ``frequency_model`` is supplied.

    With ``oracle_verify`` every group small enough for exhaustive
    enumeration is re-solved by the brute-force reference and any
    disagreement raises; groups beyond ``oracle_cap`` are skipped.
    """
    started = time.perf_counter()
    ruleset = ruleset.bind(relation.attributes)
    key_positions = [relation.index_of(a) for a in ruleset.key_attrs]
    for i, row in enumerate(relation.rows):
        if any(row[p] is None for p in key_positions):
            raise DataError(f"row {i} has a null key value")

    schema = build_schema(relation, ruleset)
    normalized = normalize_rules(ruleset.rules, schema)
    closure_cache = ClosureCache(
        {a: schema[a] for a in ruleset.non_key_attrs}, rule_cap
    )
    sufficient = closure_cache.closure(normalized)
    if sufficient.contradiction:
        raise UnsatisfiableRulesError("the rule set cannot be satisfied by any row")

    violations_before = violation_report(relation, ruleset)
    if policy.strategy == FREQUENCY and frequency_model is None:
        frequency_model = build_frequency_model(relation, sufficient, ruleset)

    components = _build_components(ruleset, normalized, schema, rule_cap)
    plan = _RunPlan(
        ruleset=ruleset,
        schema=schema,
        model=model,
        components=components,
        policy=policy,
        frequency_model=frequency_model,
        prune_bound=prune_bound,
        prune_necessity=prune_necessity,
        rule_cap=rule_cap,
    )

    bound = bind_cost_model(
        model, [relation.row_mapping(i) for i in range(len(relation))], ruleset
    )
    key_rows: dict[tuple, list[int]] = {}
    for i, row in enumerate(relation.rows):
        key = tuple(row[p] for p in key_positions)
        key_rows.setdefault(key, []).append(i)

    tasks = [
        (
            key,
            [relation.row_mapping(i) for i in indices],
            [bound.multipliers[i] for i in indices],
        )
        for key, indices in key_rows.items()
    ]

    results: dict[tuple, GroupResult] = {}
    if threads > 1 and len(tasks) > 1 and not oracle_verify:
        chunk_size = max(1, len(tasks) // (threads * 4))
        chunks = [
            tasks[i : i + chunk_size] for i in range(0, len(tasks), chunk_size)
        ]
        with ProcessPoolExecutor(
            max_workers=threads, initializer=_init_worker, initargs=(plan,)
        ) as pool:
            for batch in pool.map(_worker_chunk, chunks):
                for result in batch:
                    results[result.key] = result
    else:
        for key, rows, multipliers in tasks:
            result = solve_group(
                key, rows, multipliers, plan, keep_repair_set=oracle_verify
            )
            if oracle_verify:
                _verify_group(result, rows, ruleset, model, schema,
                              multipliers, oracle_cap)
            results[result.key] = result

    repaired = _apply_repair(relation, ruleset, key_rows, results, preserve_order)
    violations_after = violation_report(repaired, ruleset)

    per_group = []
    for key in sorted(key_rows):
        result = results[key]
        per_group.append(
            {
                "key": dict(zip(ruleset.key_attrs, key)),
                "cost": result.cost,
                "alternatives": result.alternatives,
                "chosen": _serialize_repair(result.chosen, ruleset),
                "uniform_fallback": result.uniform_fallback,
            }
        )

    report = {
        "config": config or {},
        "sufficient_set_stats": {
            "input_rules": len(normalized),
            "closed_rules": len(sufficient.rules),
            "implied_added": sufficient.generated,
            "independent_components": sum(
                1 for c in components if c.kind in ("full", "partial")
            ),
        },
        "per_class": per_group,
        "violations_before": violations_before.as_dict(),
        "violations_after": violations_after.as_dict(),
        "selection": {
            "strategy": policy.strategy,
            "seed": policy.seed,
            "uniform_fallbacks": sum(
                1 for r in results.values() if r.uniform_fallback
            ),
        },
        "timing": {
            "wall_time_seconds": round(time.perf_counter() - started, 6),
            "generated_at": datetime.now(timezone.utc).isoformat(),
        },
    }
    return repaired, report


def _verify_group(
    result: GroupResult,
    rows: Sequence[Mapping[str, Value]],
    ruleset: RuleSet,
    model: CostModel,
    schema: Schema,
    multipliers: Sequence[int],
    oracle_cap: int,
) -> None:
    from .errors import CapExceededError

    try:
        expected = brute_force_repairs(
            rows, ruleset, model, schema=schema, multipliers=multipliers,
            cap=oracle_cap,
        )
    except CapExceededError:
        return
    assert result.repair_set is not None
    if (expected.cost, expected.repairs) != (
        result.repair_set.cost,
        result.repair_set.repairs,
    ):
        raise TabRepairError(
            f"oracle disagreement for key {result.key!r}: "
            f"expected cost {expected.cost}, engine found {result.repair_set.cost}"
        )
