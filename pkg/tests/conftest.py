import pytest

from tabrepair import (
    ConstantCost,
    EditRule,
    Relation,
    RuleSet,
    closed_schema,
    parse_rules,
)


@pytest.fixture
def binary_schema():
    return closed_schema({"a": ["0", "1"], "b": ["0", "1"]})


@pytest.fixture
def forbid_11_rule():
    return EditRule.of({"a": {"1"}, "b": {"1"}})


@pytest.fixture
def f1_ruleset(forbid_11_rule):
    """Three-row group over two binary determined attributes, one rule."""
    return RuleSet(("k",), ("a", "b"), (), (forbid_11_rule,))


@pytest.fixture
def f1_rows():
    return [
        {"k": "g", "a": "1", "b": "1"},
        {"k": "g", "a": "1", "b": "0"},
        {"k": "g", "a": "0", "b": "1"},
    ]


@pytest.fixture
def f2_rules():
    """Rules whose closure adds the implied rule on b."""
    return (
        EditRule.of({"a": {"1"}}),
        EditRule.of({"a": {"0"}, "b": {"1"}}),
    )


TRIAL_RULES_DSL = """\
key: trial
determined: double_blind, single_blind, open, controlled
rule: double_blind = 'yes' & open = 'yes'
rule: single_blind = 'yes' & open = 'yes'
rule: double_blind = 'no' & single_blind = 'no' & open = 'no'
rule: double_blind = 'yes' & single_blind = 'yes'
rule: controlled = 'no' & placebo = 'yes'
rule: active_comparator = 'yes' & controlled = 'no'
"""


@pytest.fixture
def trial_ruleset():
    """Six clinical-trial style rules: a masking group and a control group."""
    columns = (
        "trial",
        "double_blind",
        "single_blind",
        "open",
        "controlled",
        "placebo",
        "active_comparator",
    )
    return parse_rules(TRIAL_RULES_DSL).bind(columns)


@pytest.fixture
def trial_schema():
    domains = {
        attr: ["no", "yes"]
        for attr in (
            "double_blind",
            "single_blind",
            "open",
            "controlled",
            "placebo",
            "active_comparator",
        )
    }
    return closed_schema(domains)


def make_trial_row(db, sb, op, ctrl, plc, ac, trial="t1"):
    return {
        "trial": trial,
        "double_blind": db,
        "single_blind": sb,
        "open": op,
        "controlled": ctrl,
        "placebo": plc,
        "active_comparator": ac,
    }


@pytest.fixture
def control_conflict_row():
    """Masking is fine; placebo and comparator contradict 'not controlled'."""
    return make_trial_row("yes", "no", "no", "no", "yes", "yes")


@pytest.fixture
def partial_control_fixture():
    """Four sources, control determined by the key, the rest per source.

    Forcing control to its majority value makes five other cells wrong;
    the minority value fixes everything at total cost three.
    """
    ruleset = RuleSet(
        ("study",),
        ("control",),
        ("placebo", "active_compare"),
        (
            EditRule.of({"control": {"No"}, "placebo": {"Yes"}}),
            EditRule.of({"active_compare": {"Yes"}, "control": {"No"}}),
        ),
    )
    rows = [
        {"study": "s", "control": "No", "placebo": "Yes", "active_compare": "Yes"},
        {"study": "s", "control": "No", "placebo": "Yes", "active_compare": "Yes"},
        {"study": "s", "control": "No", "placebo": "Yes", "active_compare": "No"},
        {"study": "s", "control": "Yes", "placebo": "No", "active_compare": "No"},
    ]
    schema = closed_schema(
        {"control": ["No", "Yes"], "placebo": ["No", "Yes"], "active_compare": ["No", "Yes"]}
    )
    return rows, ruleset, schema
