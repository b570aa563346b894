"""Lowest-cost-first enumeration of value combinations.

Given one cost-ranked domain per attribute, streams every combination
in non-decreasing total cost. A frontier of index vectors is kept in a
heap; popping a vector emits it and pushes each single-step successor
(one attribute advanced to its next-ranked value). Successors never
cost less than their parent, so the stream never goes back down. A
visited set guarantees each combination is emitted exactly once even
though vectors are reachable from several parents.

The stream is lazy: callers may abandon it as soon as the cost exceeds
whatever bound they are tracking.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence


@dataclass(frozen=True)
class RankedDomain:
    """Values of one attribute sorted by ascending cost.

    Ties are broken by the value itself so ranking is deterministic.
    """

    attribute: str
    entries: tuple[tuple[str, int], ...]

    def __post_init__(self):
        if not self.entries:
            raise ValueError(f"empty domain for {self.attribute!r}")
        costs = [cost for _, cost in self.entries]
        if costs != sorted(costs):
            raise ValueError(f"entries for {self.attribute!r} not cost-sorted")

    @classmethod
    def from_costs(cls, attribute: str, value_costs: Mapping[str, int]) -> "RankedDomain":
        ordered = tuple(sorted(value_costs.items(), key=lambda kv: (kv[1], kv[0])))
        return cls(attribute, ordered)


def lowest_cost_first(
    domains: Sequence[RankedDomain],
) -> Iterator[tuple[tuple[str, ...], int]]:
    """Yield (values, total cost) over the product of all domains.

    Costs never decrease along the stream; combinations of equal cost
    come out in lexicographic rank order. An empty domain list yields
    the single empty combination at cost zero.
    """
    if not domains:
        yield (), 0
        return
    entries = [d.entries for d in domains]
    start = (0,) * len(domains)
    start_cost = sum(column[0][1] for column in entries)
    heap: list[tuple[int, tuple[int, ...]]] = [(start_cost, start)]
    seen = {start}
    while heap:
        cost, indices = heapq.heappop(heap)
        yield tuple(entries[i][j][0] for i, j in enumerate(indices)), cost
        for i, j in enumerate(indices):
            if j + 1 >= len(entries[i]):
                continue
            child = indices[:i] + (j + 1,) + indices[i + 1 :]
            if child in seen:
                continue
            seen.add(child)
            child_cost = cost - entries[i][j][1] + entries[i][j + 1][1]
            heapq.heappush(heap, (child_cost, child))


def first_batch(
    domains: Sequence[RankedDomain],
) -> tuple[tuple[tuple[str, ...], ...], int]:
    """All cheapest combinations and their shared cost.

    This is the leading run of the stream: every combination whose cost
    equals the very first one.
    """
    stream = lowest_cost_first(domains)
    first, best = next(stream)
    batch = [first]
    for values, cost in stream:
        if cost != best:
            break
        batch.append(values)
    return tuple(batch), best
