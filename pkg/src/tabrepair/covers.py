"""Failing-rule detection and minimal attribute-cover enumeration."""

from __future__ import annotations

from typing import Iterable, Mapping, Optional, Sequence

from .relation import Value
from .rules import EditRule
from .sufficient import SufficientSet


def failing_rules(
    assignment: Mapping[str, Value], sufficient: SufficientSet
) -> tuple[EditRule, ...]:
    """The rules of the closed set that the assignment fails."""
    return sufficient.failing(assignment)


def minimal_covers(
    failing: Sequence[EditRule],
    allowed: Optional[frozenset[str]] = None,
) -> tuple[frozenset[str], ...]:
    """All attribute sets that hit every failing rule, none redundant.

    A cover intersects the involved attributes of each failing rule;
    minimal means no proper subset still does. ``allowed`` restricts the
    attributes a cover may use; an empty result means some failing rule
    cannot be hit at all. Covers come out sorted by size then name.
    """
    targets: list[frozenset[str]] = []
    for rule in failing:
        attrs = rule.involved
        if allowed is not None:
            attrs &= allowed
        if not attrs:
            return ()
        targets.append(attrs)
    if not targets:
        return (frozenset(),)

    found: set[frozenset[str]] = set()

    def search(chosen: frozenset[str], remaining: list[frozenset[str]]) -> None:
        if not remaining:
            found.add(chosen)
            return
        # Branch on the tightest uncovered rule; fewer children, same result.
        target = min(remaining, key=lambda s: (len(s), tuple(sorted(s))))
        for attr in sorted(target):
            search(
                chosen | {attr},
                [s for s in remaining if attr not in s],
            )

    search(frozenset(), targets)

    minimal = [
        cover
        for cover in found
        if not any(other < cover for other in found)
    ]
    minimal.sort(key=lambda c: (len(c), tuple(sorted(c))))
    return tuple(minimal)


def covers_all(cover: Iterable[str], failing: Sequence[EditRule]) -> bool:
    attrs = set(cover)
    return all(rule.involved & attrs for rule in failing)
