"""Minimal-cost repair of tabular data under edit rules and key constraints."""

from .costs import (
    BoundCostModel,
    ConstantCost,
    CostModel,
    PreferenceCost,
    ReliabilityCost,
    bind_cost_model,
    class_value_costs,
    delta,
    induced_value_costs,
    load_preference_dir,
    row_multiplier,
)
from .covers import failing_rules, minimal_covers
from .engine import (
    Repair,
    RepairSet,
    repair_class_full_key,
    repair_class_partial_key,
    repair_tuple,
)
from .errors import (
    CapExceededError,
    ContradictionError,
    CostModelError,
    DataError,
    KeyMisalignmentError,
    RuleParseError,
    TabRepairError,
    TautologyError,
    UnknownAttributeError,
    UnsatisfiableRulesError,
)
from .estimator import EditRuleRepairer
from .lcf import RankedDomain, first_batch, lowest_cost_first
from .metrics import Metrics, ViolationReport, score, violation_report
from .oracle import brute_force_repairs
from .pipeline import SelectionPolicy, repair_relation
from .relation import Relation, load_csv, read_csv, save_csv, write_csv
from .rules import (
    AttributeSchema,
    EditRule,
    RuleSet,
    build_schema,
    closed_schema,
    fails,
    format_rules,
    involves,
    normalize_rules,
    parse_rule_file,
    parse_rules,
)
from .selection import (
    FrequencyModel,
    build_frequency_model,
    frequency_weights,
    select_frequent,
    select_random,
)
from .sufficient import (
    ClosureCache,
    SufficientSet,
    build_sufficient_set,
    is_satisfiable,
    partition_independent,
)

__version__ = "0.1.0"

__all__ = [
    "AttributeSchema",
    "BoundCostModel",
    "CapExceededError",
    "ClosureCache",
    "ConstantCost",
    "ContradictionError",
    "CostModel",
    "CostModelError",
    "DataError",
    "EditRule",
    "EditRuleRepairer",
    "FrequencyModel",
    "KeyMisalignmentError",
    "Metrics",
    "PreferenceCost",
    "RankedDomain",
    "Relation",
    "ReliabilityCost",
    "Repair",
    "RepairSet",
    "RuleParseError",
    "RuleSet",
    "SelectionPolicy",
    "SufficientSet",
    "TabRepairError",
    "TautologyError",
    "UnknownAttributeError",
    "UnsatisfiableRulesError",
    "ViolationReport",
    "bind_cost_model",
    "brute_force_repairs",
    "build_frequency_model",
    "build_schema",
    "build_sufficient_set",
    "class_value_costs",
    "closed_schema",
    "delta",
    "fails",
    "failing_rules",
    "first_batch",
    "format_rules",
    "frequency_weights",
    "induced_value_costs",
    "involves",
    "is_satisfiable",
    "load_csv",
    "load_preference_dir",
    "lowest_cost_first",
    "minimal_covers",
    "normalize_rules",
    "parse_rule_file",
    "parse_rules",
    "read_csv",
    "repair_class_full_key",
    "repair_class_partial_key",
    "repair_relation",
    "repair_tuple",
    "row_multiplier",
    "save_csv",
    "score",
    "select_frequent",
    "select_random",
    "violation_report",
    "write_csv",
]
