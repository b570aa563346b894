"""Schema, edit rules and the rule-DSL.

An edit rule lists a forbidden combination of attribute values: it maps
some attributes to non-empty value sets, and a row fails the rule when
every one of those attributes holds a value inside its set. Attributes
absent from the rule implicitly allow their whole domain. A missing
value belongs to no value set, so a row with a null on a listed
attribute never fails that rule.

A :class:`RuleSet` bundles the rules with the role of each column: key
attributes (assumed error-free, never touched), determined attributes
(forced to agree within a key group) and free attributes (may vary per
row). Key attributes may not appear in any rule.

The DSL file format::

    # comment
    key: study, country
    determined: controlled, open
    rule: controlled = 'no' & placebo = 'yes'
    rule: status in {'draft', 'void'}

Values are single-quoted; a quote inside a value is doubled (``''``).
The ``determined:`` line may be omitted, in which case no agreement is
enforced and every row is treated on its own.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .errors import (
    ContradictionError,
    RuleParseError,
    TautologyError,
    UnknownAttributeError,
)
from .relation import Relation, Value

FRESH_BASE = "__fresh__"


@dataclass(frozen=True)
class AttributeSchema:
    """Finite candidate-value domain for one attribute.

    ``values`` holds every value a repair may assign, in canonical
    order. ``fresh`` names the single synthetic member of ``values``
    standing in for all unobserved values, or ``None`` when the domain
    is closed. A null is never part of the domain.
    """

    name: str
    values: tuple[str, ...]
    fresh: Optional[str] = None
    nullable: bool = True

    def __post_init__(self):
        if not self.values:
            raise ValueError(f"empty domain for attribute {self.name!r}")
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"duplicate domain values for attribute {self.name!r}")
        if self.fresh is not None and self.fresh not in self.values:
            raise ValueError(f"fresh value not in domain for {self.name!r}")

    @property
    def value_set(self) -> frozenset[str]:
        return frozenset(self.values)


Schema = dict[str, AttributeSchema]


@dataclass(frozen=True)
class EditRule:
    """A forbidden combination of attribute values.

    ``components`` is stored as a sorted tuple of (attribute, value set)
    pairs so rules are hashable and canonically ordered. An empty
    component is rejected: such a rule could never fail. A rule with no
    components at all forbids everything; it cannot be written by users
    but appears in derived rule sets to signal unsatisfiability.
    """

    components: tuple[tuple[str, frozenset[str]], ...]

    def __post_init__(self):
        names = [a for a, _ in self.components]
        if names != sorted(names) or len(set(names)) != len(names):
            raise ValueError("components must be sorted by attribute and unique")
        for attr, values in self.components:
            if not values:
                raise TautologyError(f"empty value set for attribute {attr!r}")

    @classmethod
    def of(cls, components: Mapping[str, Iterable[str]]) -> "EditRule":
        return cls(
            tuple(
                (attr, frozenset(values))
                for attr, values in sorted(components.items())
            )
        )

    @classmethod
    def contradiction(cls) -> "EditRule":
        return cls(())

    @property
    def involved(self) -> frozenset[str]:
        return frozenset(a for a, _ in self.components)

    @property
    def is_contradiction(self) -> bool:
        return not self.components

    def component(self, attr: str) -> Optional[frozenset[str]]:
        for name, values in self.components:
            if name == attr:
                return values
        return None

    def fails(self, assignment: Mapping[str, Value]) -> bool:
        """True when the assignment lies inside the forbidden combination.

        A null on an involved attribute makes the rule unfailable.
        """
        for attr, values in self.components:
            if assignment[attr] not in values:
                return False
        return True

    def normalized(self, schema: Schema) -> Optional["EditRule"]:
        """Drop full-domain components and clip to the domains.

        Returns ``None`` when some clipped component is empty (the rule
        can never fail within these domains). Raises
        :class:`ContradictionError` when no strict component remains.
        """
        kept = []
        for attr, values in self.components:
            domain = schema[attr].value_set
            clipped = values & domain
            if not clipped:
                return None
            if clipped != domain:
                kept.append((attr, clipped))
        if not kept:
            raise ContradictionError(f"rule {describe_rule(self)} forbids everything")
        return EditRule(tuple(sorted(kept)))


def involves(rule: EditRule) -> frozenset[str]:
    """Attributes whose component is a strict subset of the domain."""
    return rule.involved


def fails(assignment: Mapping[str, Value], rule: EditRule) -> bool:
    return rule.fails(assignment)


def describe_rule(rule: EditRule) -> str:
    if rule.is_contradiction:
        return "<contradiction>"
    parts = []
    for attr, values in rule.components:
        ordered = sorted(values)
        if len(ordered) == 1:
            parts.append(f"{attr} = {_quote(ordered[0])}")
        else:
            inner = ", ".join(_quote(v) for v in ordered)
            parts.append(f"{attr} in {{{inner}}}")
    return " & ".join(parts)


@dataclass(frozen=True)
class RuleSet:
    """Edit rules plus the key/determined/free role of each attribute."""

    key_attrs: tuple[str, ...]
    determined_attrs: tuple[str, ...]
    free_attrs: tuple[str, ...]
    rules: tuple[EditRule, ...] = field(default=())

    def __post_init__(self):
        groups = (self.key_attrs, self.determined_attrs, self.free_attrs)
        seen: set[str] = set()
        for group in groups:
            for attr in group:
                if attr in seen:
                    raise RuleParseError(f"attribute {attr!r} assigned twice")
                seen.add(attr)
        key = set(self.key_attrs)
        for rule in self.rules:
            overlap = rule.involved & key
            if overlap:
                raise RuleParseError(
                    f"rule mentions key attribute(s): {', '.join(sorted(overlap))}"
                )
            unknown = rule.involved - seen
            if unknown:
                raise UnknownAttributeError(
                    f"rule mentions undeclared attribute(s): {', '.join(sorted(unknown))}"
                )

    @property
    def non_key_attrs(self) -> tuple[str, ...]:
        return self.determined_attrs + self.free_attrs

    def bind(self, columns: Sequence[str]) -> "RuleSet":
        """Resolve the free attributes against actual data columns.

        Columns that are neither key nor determined become free, in
        column order. Every declared attribute must exist in the data.
        """
        colset = set(columns)
        for attr in self.key_attrs + self.determined_attrs:
            if attr not in colset:
                raise UnknownAttributeError(f"attribute {attr!r} not in data columns")
        for rule in self.rules:
            missing = rule.involved - colset
            if missing:
                raise UnknownAttributeError(
                    f"rule attribute(s) not in data columns: {', '.join(sorted(missing))}"
                )
        fixed = set(self.key_attrs) | set(self.determined_attrs)
        free = tuple(c for c in columns if c not in fixed)
        determined = tuple(c for c in columns if c in set(self.determined_attrs))
        keys = tuple(c for c in columns if c in set(self.key_attrs))
        return RuleSet(keys, determined, free, self.rules)

    def without_rules(self) -> "RuleSet":
        return RuleSet(self.key_attrs, self.determined_attrs, self.free_attrs, ())

    def rule_constants(self, attr: str) -> frozenset[str]:
        constants: set[str] = set()
        for rule in self.rules:
            component = rule.component(attr)
            if component:
                constants |= component
        return frozenset(constants)


# ---------------------------------------------------------------------------
# DSL parsing

_ATOM_EQ = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_.-]*)\s*=\s*")
_ATOM_IN = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_.-]*)\s+in\s*\{")
_QUOTED = re.compile(r"'((?:[^']|'')*)'")


def _quote(value: str) -> str:
    return "'" + value.replace("'", "''") + "'"


def _unquote(raw: str) -> str:
    return raw.replace("''", "'")


def _read_quoted(text: str, line: int, offset: int) -> tuple[str, int]:
    match = _QUOTED.match(text, offset)
    if not match:
        raise RuleParseError("expected quoted value", line, offset + 1)
    return _unquote(match.group(1)), match.end()


def _parse_value_list(text: str, line: int, offset: int) -> tuple[frozenset[str], int]:
    values: set[str] = set()
    pos = offset
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos < len(text) and text[pos] == "}":
            return frozenset(values), pos + 1
        value, pos = _read_quoted(text, line, pos)
        values.add(value)
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos < len(text) and text[pos] == ",":
            pos += 1
        elif pos < len(text) and text[pos] == "}":
            return frozenset(values), pos + 1
        else:
            raise RuleParseError("expected ',' or '}' in value set", line, pos + 1)


def _parse_atom(text: str, line: int) -> tuple[str, frozenset[str], str]:
    match = _ATOM_IN.match(text)
    if match:
        values, end = _parse_value_list(text, line, match.end())
        return match.group(1), values, text[end:]
    match = _ATOM_EQ.match(text)
    if match:
        value, end = _read_quoted(text, line, match.end())
        return match.group(1), frozenset({value}), text[end:]
    raise RuleParseError(f"cannot parse atom near {text.strip()[:30]!r}", line)


def _parse_rule_line(body: str, line: int) -> EditRule:
    components: dict[str, frozenset[str]] = {}
    rest = body
    if not rest.strip():
        raise RuleParseError("empty rule", line)
    while True:
        attr, values, rest = _parse_atom(rest, line)
        if attr in components:
            # Repeated attribute narrows the forbidden set.
            values = components[attr] & values
        if not values:
            raise TautologyError(
                f"rule can never fail: empty value set for {attr!r}", line
            )
        components[attr] = values
        rest = rest.lstrip()
        if not rest:
            break
        if not rest.startswith("&"):
            raise RuleParseError(f"expected '&' before {rest[:20]!r}", line)
        rest = rest[1:]
    return EditRule.of(components)


def _parse_name_list(body: str, line: int) -> tuple[str, ...]:
    names = tuple(part.strip() for part in body.split(","))
    if any(not name for name in names):
        raise RuleParseError("empty attribute name in list", line)
    return names


def parse_rules(text: str) -> RuleSet:
    """Parse rule-DSL source into a :class:`RuleSet`.

    Attributes mentioned in rules but not declared as key or determined
    are provisionally free; :meth:`RuleSet.bind` widens the free set to
    the remaining data columns.
    """
    key: Optional[tuple[str, ...]] = None
    determined: Optional[tuple[str, ...]] = None
    rules: list[EditRule] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise RuleParseError(f"expected 'key:', 'determined:' or 'rule:'", lineno)
        head, _, body = line.partition(":")
        head = head.strip()
        if head == "key":
            if key is not None:
                raise RuleParseError("duplicate 'key:' line", lineno)
            key = _parse_name_list(body, lineno)
        elif head == "determined":
            if determined is not None:
                raise RuleParseError("duplicate 'determined:' line", lineno)
            determined = _parse_name_list(body, lineno)
        elif head == "rule":
            rules.append(_parse_rule_line(body, lineno))
        else:
            raise RuleParseError(f"unknown directive {head!r}", lineno)
    if key is None:
        raise RuleParseError("missing 'key:' line")
    determined = determined or ()
    declared = set(key) | set(determined)
    mentioned: list[str] = []
    for rule in rules:
        for attr in sorted(rule.involved):
            if attr not in declared and attr not in mentioned:
                mentioned.append(attr)
    return RuleSet(key, determined, tuple(mentioned), tuple(rules))


def parse_rule_file(path) -> RuleSet:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_rules(handle.read())


def format_rules(ruleset: RuleSet) -> str:
    """Render a rule set back into DSL text (parse round-trips)."""
    lines = ["key: " + ", ".join(ruleset.key_attrs)]
    if ruleset.determined_attrs:
        lines.append("determined: " + ", ".join(ruleset.determined_attrs))
    for rule in ruleset.rules:
        lines.append("rule: " + describe_rule(rule))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Schema construction

def _fresh_value(taken: set[str]) -> str:
    candidate = FRESH_BASE
    suffix = 0
    while candidate in taken:
        suffix += 1
        candidate = f"{FRESH_BASE[:-2]}_{suffix}__"
    return candidate


def build_schema(relation: Relation, ruleset: RuleSet) -> Schema:
    """Candidate-value domains per non-key attribute.

    The domain of an attribute is every value observed in the data,
    every constant a rule mentions for it, plus one fresh value that
    stands in for the rest of the (unbounded) value space. Key
    attributes keep their observed values and get no fresh member; they
    are never repaired.
    """
    schema: Schema = {}
    key = set(ruleset.key_attrs)
    for attr in relation.attributes:
        observed = {v for v in relation.column(attr) if v is not None}
        if attr in key:
            values = tuple(sorted(observed)) or ("",)
            schema[attr] = AttributeSchema(attr, values, fresh=None, nullable=False)
            continue
        taken = observed | set(ruleset.rule_constants(attr))
        fresh = _fresh_value(taken)
        values = tuple(sorted(taken)) + (fresh,)
        schema[attr] = AttributeSchema(attr, values, fresh=fresh, nullable=True)
    return schema


def closed_schema(domains: Mapping[str, Sequence[str]], nullable: bool = True) -> Schema:
    """Explicit finite domains with no fresh value (mainly for tests)."""
    return {
        attr: AttributeSchema(attr, tuple(values), fresh=None, nullable=nullable)
        for attr, values in domains.items()
    }


def normalize_rules(rules: Iterable[EditRule], schema: Schema) -> tuple[EditRule, ...]:
    """Normalize rules against domains, dropping unfailable ones.

    Raises :class:`ContradictionError` when a user rule spans every
    domain (it would forbid all rows).
    """
    kept = []
    for rule in rules:
        normalized = rule.normalized(schema)
        if normalized is not None and normalized not in kept:
            kept.append(normalized)
    return tuple(kept)
