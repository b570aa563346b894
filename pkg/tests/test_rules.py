import pytest
from hypothesis import given, strategies as st

from tabrepair import (
    ContradictionError,
    EditRule,
    RuleParseError,
    RuleSet,
    TautologyError,
    UnknownAttributeError,
    build_schema,
    closed_schema,
    fails,
    format_rules,
    involves,
    normalize_rules,
    parse_rules,
)
from tabrepair.relation import Relation


class TestParsing:
    def test_table_style_rule(self):
        ruleset = parse_rules(
            "key: id\nrule: double_blind = 'yes' & open = 'yes'\n"
        )
        (rule,) = ruleset.rules
        assert rule.component("double_blind") == frozenset({"yes"})
        assert rule.component("open") == frozenset({"yes"})

    def test_value_set_atom(self):
        ruleset = parse_rules("key: id\nrule: status in {'draft', 'void'}\n")
        (rule,) = ruleset.rules
        assert rule.component("status") == frozenset({"draft", "void"})

    def test_empty_value_set_is_a_tautology_error(self):
        with pytest.raises(TautologyError):
            parse_rules("key: id\nrule: x in {}\n")

    def test_disjoint_atoms_on_one_attribute_are_a_tautology_error(self):
        with pytest.raises(TautologyError):
            parse_rules("key: id\nrule: x = 'a' & x = 'b'\n")

    def test_component_spanning_domain_is_a_contradiction_error(self):
        ruleset = parse_rules("key: id\nrule: x in {'0', '1'}\n")
        schema = closed_schema({"x": ["0", "1"]})
        with pytest.raises(ContradictionError):
            normalize_rules(ruleset.rules, schema)

    def test_key_attribute_in_rule_is_rejected(self):
        with pytest.raises(RuleParseError):
            parse_rules("key: id\nrule: id = '1'\n")

    def test_missing_key_line(self):
        with pytest.raises(RuleParseError):
            parse_rules("determined: a\n")

    def test_duplicate_key_line(self):
        with pytest.raises(RuleParseError):
            parse_rules("key: a\nkey: b\n")

    def test_syntax_error_carries_line_number(self):
        with pytest.raises(RuleParseError) as err:
            parse_rules("key: id\nrule: x == 'a'\n")
        assert err.value.line == 2

    def test_comments_and_blank_lines_ignored(self):
        ruleset = parse_rules(
            "# header\nkey: id\n\ndetermined: a  # trailing\nrule: a = 'x'\n"
        )
        assert ruleset.determined_attrs == ("a",)

    def test_quote_doubling(self):
        ruleset = parse_rules("key: id\nrule: a = 'it''s'\n")
        (rule,) = ruleset.rules
        assert rule.component("a") == frozenset({"it's"})

    def test_unknown_attribute_at_bind(self):
        ruleset = parse_rules("key: id\nrule: ghost = 'x'\n")
        with pytest.raises(UnknownAttributeError):
            ruleset.bind(("id", "a"))

    def test_bind_widens_free_attributes_in_column_order(self):
        ruleset = parse_rules("key: id\ndetermined: b\nrule: b = 'x'\n")
        bound = ruleset.bind(("id", "a", "b", "c"))
        assert bound.free_attrs == ("a", "c")

    def test_omitting_determined_means_no_agreement(self):
        ruleset = parse_rules("key: id\nrule: a = 'x'\n").bind(("id", "a", "b"))
        assert ruleset.free_attrs == ("a", "b")
        assert ruleset.determined_attrs == ()

    def test_round_trip(self):
        text = (
            "key: id, site\n"
            "determined: a, b\n"
            "rule: a = 'x' & b in {'p', 'q'}\n"
            "rule: b = 'r'\n"
        )
        ruleset = parse_rules(text)
        again = parse_rules(format_rules(ruleset))
        assert again == ruleset


class TestFails:
    def test_inside_forbidden_combination(self):
        rule = EditRule.of({"double_blind": {"yes"}, "open": {"yes"}})
        assert fails({"double_blind": "yes", "open": "yes"}, rule)

    def test_null_on_involved_attribute_never_fails(self):
        rule = EditRule.of({"double_blind": {"yes"}, "open": {"yes"}})
        assert not fails({"double_blind": None, "open": "yes"}, rule)

    def test_value_outside_component_escapes(self):
        rule = EditRule.of({"double_blind": {"yes"}, "open": {"yes"}})
        assert not fails({"double_blind": "yes", "open": "no"}, rule)

    @given(
        value=st.sampled_from(["0", "1", "2"]),
        other=st.sampled_from(["0", "1", "2"]),
        small=st.sets(st.sampled_from(["0", "1"]), min_size=1),
    )
    def test_enlarging_a_component_never_unfails(self, value, other, small):
        large = small | {"2"}
        narrow = EditRule.of({"a": small, "b": {"0"}})
        wide = EditRule.of({"a": large, "b": {"0"}})
        row = {"a": value, "b": other}
        if fails(row, narrow):
            assert fails(row, wide)


class TestInvolves:
    def test_two_attributes(self):
        rule = EditRule.of({"double_blind": {"yes"}, "open": {"yes"}})
        assert involves(rule) == {"double_blind", "open"}

    def test_contradiction_involves_nothing(self):
        assert involves(EditRule.contradiction()) == frozenset()

    def test_single_component(self):
        assert involves(EditRule.of({"a": {"x"}})) == {"a"}

    def test_involved_attributes_exclude_keys_by_construction(self):
        ruleset = parse_rules("key: id\nrule: a = 'x' & b = 'y'\n")
        for rule in ruleset.rules:
            assert not (involves(rule) & set(ruleset.key_attrs))


class TestSchema:
    def test_active_domain_includes_rule_constants_and_fresh(self):
        relation = Relation(("id", "a"), (("1", "seen"),))
        ruleset = parse_rules("key: id\nrule: a = 'constant_only'\n").bind(
            ("id", "a")
        )
        schema = build_schema(relation, ruleset)
        values = set(schema["a"].values)
        assert {"seen", "constant_only"} <= values
        assert schema["a"].fresh in values
        assert len(values) == 3

    def test_fresh_value_collision_is_avoided(self):
        relation = Relation(("id", "a"), (("1", "__fresh__"),))
        ruleset = parse_rules("key: id\n").bind(("id", "a"))
        schema = build_schema(relation, ruleset)
        assert schema["a"].fresh != "__fresh__"
        assert schema["a"].fresh in schema["a"].values

    def test_null_never_in_domain(self):
        relation = Relation(("id", "a"), (("1", None), ("2", "x")))
        ruleset = parse_rules("key: id\n").bind(("id", "a"))
        schema = build_schema(relation, ruleset)
        assert None not in schema["a"].values

    def test_rules_partition_schema(self):
        ruleset = parse_rules("key: id\ndetermined: a\n").bind(("id", "a", "b"))
        groups = (
            set(ruleset.key_attrs) | set(ruleset.determined_attrs) | set(ruleset.free_attrs)
        )
        assert groups == {"id", "a", "b"}
        assert len(ruleset.key_attrs + ruleset.determined_attrs + ruleset.free_attrs) == 3
