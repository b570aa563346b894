"""Closure of a rule set under implied-rule generation.

Whenever the components of several rules jointly exhaust an attribute's
domain, the intersection of their remaining components is forbidden no
matter what that attribute holds, yielding an implied rule without it.
Closing the rule set under this step gives it the property that any way
of fixing a fully-valued row must touch every failing rule, which is
what lets the repair search work with attribute covers.

Rules dominated by another rule (componentwise subset, hence failing
only a subset of rows) carry no extra information and are pruned. A
derived rule with no components left forbids every row; its presence
marks the rule set as unsatisfiable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .errors import CapExceededError
from .relation import Value
from .rules import EditRule, Schema

DEFAULT_RULE_CAP = 10_000


def _rule_sort_key(rule: EditRule):
    return (
        len(rule.components),
        tuple((attr, tuple(sorted(values))) for attr, values in rule.components),
    )


def _dominated(rule: EditRule, by: EditRule) -> bool:
    """True when every row failing ``rule`` also fails ``by``."""
    for attr, values in by.components:
        mine = rule.component(attr)
        if mine is None or not mine <= values:
            return False
    return True


@dataclass(frozen=True)
class SufficientSet:
    """A dominance-pruned, generation-closed rule set.

    ``source_rules`` keeps the rules the closure started from so that
    callers can re-derive closures for reduced sub-problems.
    """

    rules: tuple[EditRule, ...]
    contradiction: bool
    source_rules: tuple[EditRule, ...]
    generated: int = 0

    def failing(self, assignment: Mapping[str, Value]) -> tuple[EditRule, ...]:
        return tuple(rule for rule in self.rules if rule.fails(assignment))

    def satisfied_by(self, assignment: Mapping[str, Value]) -> bool:
        return not any(rule.fails(assignment) for rule in self.rules)


def is_satisfiable(sufficient: SufficientSet) -> bool:
    return not sufficient.contradiction


class _RulePool:
    """Mutable rule set with incremental dominance pruning."""

    def __init__(self):
        self.rules: list[EditRule] = []
        self.accepted = 0

    def add(self, rule: EditRule) -> bool:
        for existing in self.rules:
            if _dominated(rule, existing):
                return False
        self.rules = [r for r in self.rules if not _dominated(r, rule)]
        self.rules.append(rule)
        self.accepted += 1
        return True


def _implied_rule(
    members: Sequence[EditRule], generator: str
) -> Optional[EditRule]:
    """Intersect the members' components away from the generating attribute."""
    attrs: set[str] = set()
    for rule in members:
        attrs |= rule.involved
    attrs.discard(generator)
    components = {}
    for attr in attrs:
        parts = [rule.component(attr) for rule in members]
        if any(part is None for part in parts):
            # Some member allows the whole domain here; the intersection
            # is driven by the strict components only.
            parts = [p for p in parts if p is not None]
        intersection = frozenset.intersection(*parts)
        if not intersection:
            return None
        components[attr] = intersection
    if not components:
        return EditRule.contradiction()
    return EditRule.of(components)


def build_sufficient_set(
    rules: Iterable[EditRule],
    schema: Schema,
    cap: int = DEFAULT_RULE_CAP,
) -> SufficientSet:
    """Close ``rules`` under implied-rule generation.

    Attributes are processed in schema order and candidate rule subsets
    by increasing size, so the output is deterministic. Raises
    :class:`CapExceededError` once more than ``cap`` rules have been
    accepted (or the subset enumeration budget is exhausted) rather
    than returning a silently truncated set.
    """
    source = tuple(sorted(set(rules), key=_rule_sort_key))
    pool = _RulePool()
    for rule in source:
        pool.add(rule)
    seeded = pool.accepted
    work_budget = max(cap * 50, 200_000)
    work = 0
    changed = True
    while changed and not _has_contradiction(pool.rules):
        changed = False
        for attr in schema:
            domain = schema[attr].value_set
            candidates = sorted(
                (r for r in pool.rules if attr in r.involved), key=_rule_sort_key
            )
            generating: list[frozenset[int]] = []
            for size in range(2, len(candidates) + 1):
                for combo in itertools.combinations(range(len(candidates)), size):
                    work += 1
                    if work > work_budget:
                        raise CapExceededError(
                            "implied-rule generation exceeded its work budget"
                        )
                    combo_set = frozenset(combo)
                    if any(prev <= combo_set for prev in generating):
                        # A smaller subset already exhausted the domain;
                        # larger ones only yield dominated rules.
                        continue
                    members = [candidates[i] for i in combo]
                    union = frozenset().union(
                        *(m.component(attr) for m in members)
                    )
                    if union != domain:
                        continue
                    generating.append(combo_set)
                    implied = _implied_rule(members, attr)
                    if implied is None:
                        continue
                    if pool.add(implied):
                        changed = True
                        if pool.accepted - seeded > cap:
                            raise CapExceededError(
                                f"generated more than {cap} rules"
                            )
                    if implied.is_contradiction:
                        break
                if _has_contradiction(pool.rules):
                    break
            if _has_contradiction(pool.rules):
                break
    final = tuple(sorted(pool.rules, key=_rule_sort_key))
    return SufficientSet(
        rules=final,
        contradiction=_has_contradiction(final),
        source_rules=source,
        generated=pool.accepted - seeded,
    )


def _has_contradiction(rules: Iterable[EditRule]) -> bool:
    return any(rule.is_contradiction for rule in rules)


class ClosureCache:
    """Memoizes closures of reduced rule sets.

    Repairing rows with missing values, or completing rows under a fixed
    partial assignment, works on a sub-problem whose rule set shrinks.
    The closure of each distinct residual rule set is computed once.
    """

    def __init__(self, schema: Schema, cap: int = DEFAULT_RULE_CAP):
        self._schema = schema
        self._cap = cap
        self._cache: dict[frozenset[EditRule], SufficientSet] = {}

    def closure(self, rules: Iterable[EditRule]) -> SufficientSet:
        key = frozenset(rules)
        found = self._cache.get(key)
        if found is None:
            found = build_sufficient_set(key, self._schema, self._cap)
            self._cache[key] = found
        return found

    def without_attributes(
        self, sufficient: SufficientSet, attrs: frozenset[str]
    ) -> SufficientSet:
        """Closure of the source rules not involving ``attrs``.

        Used for rows holding nulls: a rule involving a null attribute
        can never fail such a row (and implied rules derived through
        that attribute are not valid for it), so the sub-problem is
        governed by the closure of the remaining source rules.
        """
        if not attrs:
            return sufficient
        kept = [r for r in sufficient.source_rules if not r.involved & attrs]
        if len(kept) == len(sufficient.source_rules):
            return sufficient
        return self.closure(kept)

    def with_substitution(
        self, sufficient: SufficientSet, assignment: Mapping[str, str]
    ) -> SufficientSet:
        """Closure of the source rules with some attributes pinned.

        A rule escaped by a pinned value is dropped; otherwise the
        pinned attributes are projected out. A rule reduced to nothing
        forbids every completion and makes the residual unsatisfiable.
        """
        residual: list[EditRule] = []
        for rule in sufficient.source_rules:
            components: dict[str, frozenset[str]] = {}
            escaped = False
            for attr, values in rule.components:
                if attr in assignment:
                    if assignment[attr] not in values:
                        escaped = True
                        break
                else:
                    components[attr] = values
            if escaped:
                continue
            if not components:
                residual.append(EditRule.contradiction())
            else:
                residual.append(EditRule.of(components))
        if _has_contradiction(residual):
            return SufficientSet(
                rules=(EditRule.contradiction(),),
                contradiction=True,
                source_rules=tuple(sorted(set(residual), key=_rule_sort_key)),
            )
        return self.closure(residual)


def partition_independent(
    rules: Iterable[EditRule], attributes: Sequence[str]
) -> list[tuple[frozenset[str], tuple[EditRule, ...]]]:
    """Group rules into components sharing no involved attributes.

    Every attribute in ``attributes`` lands in exactly one component;
    attributes no rule touches form singleton components with no rules.
    Components are returned in order of their first attribute.
    """
    parent: dict[str, str] = {a: a for a in attributes}

    def find(a: str) -> str:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: str, b: str) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    rule_list = [r for r in rules if not r.is_contradiction]
    for rule in rule_list:
        involved = sorted(rule.involved)
        for other in involved[1:]:
            union(involved[0], other)

    groups: dict[str, list[str]] = {}
    for attr in attributes:
        groups.setdefault(find(attr), []).append(attr)
    components = []
    position = {a: i for i, a in enumerate(attributes)}
    for root, attrs in groups.items():
        members = tuple(
            r for r in rule_list if r.involved and find(next(iter(r.involved))) == root
        )
        components.append((frozenset(attrs), members))
    components.sort(key=lambda item: min(position[a] for a in item[0]))
    return components
