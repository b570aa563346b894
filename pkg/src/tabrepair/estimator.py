"""Estimator-style front end over the repair pipeline.

Wraps the engine in the familiar fit/transform shape so a repair step
drops into DataFrame workflows and pipelines. ``fit`` parses and checks
the rules against the columns and, for frequency-based selection,
counts clean row patterns in the training data. ``transform`` repairs a
frame and returns it with the original index and column order; the run
report is kept on ``report_``.
"""

from __future__ import annotations

import os
from typing import Optional, Union

import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .costs import ConstantCost, CostModel, PreferenceCost, ReliabilityCost
from .pipeline import SelectionPolicy, repair_relation
from .relation import Relation, Value
from .rules import RuleSet, parse_rule_file, parse_rules
from .selection import build_frequency_model
from .sufficient import ClosureCache
from .rules import build_schema, normalize_rules


def _frame_to_relation(X: pd.DataFrame) -> Relation:
    attributes = tuple(str(c) for c in X.columns)
    rows = []
    for record in X.itertuples(index=False, name=None):
        rows.append(
            tuple(None if pd.isna(v) else str(v) for v in record)
        )
    return Relation(attributes, tuple(rows))


def _relation_to_frame(relation: Relation) -> pd.DataFrame:
    return pd.DataFrame(
        [list(row) for row in relation.rows],
        columns=list(relation.attributes),
        dtype=object,
    )


class EditRuleRepairer(BaseEstimator, TransformerMixin):
    """Repair a DataFrame to satisfy edit rules and key agreement.

    Parameters
    ----------
    rules : str | RuleSet
        Rule-DSL text, a path to a rule file, or an already-built
        :class:`RuleSet`.
    cost : {"constant", "reliability", "preference"}
        Cost model family for cell changes.
    alpha : int
        Base cost of one change (and of filling a null).
    omega : int
        Damage-amplification exponent for the reliability model.
    preference_tables : dict | None
        attribute -> from-value -> to-value -> cost, for ``cost="preference"``.
    selection : {"random", "frequency"}
        How to break ties between cheapest repairs.
    seed : int
        Drives all tie-breaking; runs are reproducible.
    use_rules : bool
        When False only key agreement is enforced.
    threads : int
        Worker processes for repairing groups.
    """

    def __init__(
        self,
        rules: Union[str, RuleSet] = "",
        cost: str = "constant",
        alpha: int = 1,
        omega: int = 4,
        preference_tables: Optional[dict] = None,
        selection: str = "random",
        seed: int = 0,
        use_rules: bool = True,
        threads: int = 1,
    ):
        self.rules = rules
        self.cost = cost
        self.alpha = alpha
        self.omega = omega
        self.preference_tables = preference_tables
        self.selection = selection
        self.seed = seed
        self.use_rules = use_rules
        self.threads = threads

    def _parse_ruleset(self) -> RuleSet:
        if isinstance(self.rules, RuleSet):
            ruleset = self.rules
        elif isinstance(self.rules, str) and os.path.exists(self.rules):
            ruleset = parse_rule_file(self.rules)
        elif isinstance(self.rules, str) and self.rules.strip():
            ruleset = parse_rules(self.rules)
        else:
            raise ValueError("rules must be DSL text, a rule-file path or a RuleSet")
        return ruleset if self.use_rules else ruleset.without_rules()

    def _cost_model(self) -> CostModel:
        if self.cost == "constant":
            return ConstantCost(alpha=self.alpha)
        if self.cost == "reliability":
            return ReliabilityCost(alpha=self.alpha, omega=self.omega)
        if self.cost == "preference":
            return PreferenceCost(
                tables=self.preference_tables or {}, alpha=self.alpha
            )
        raise ValueError(f"unknown cost model {self.cost!r}")

    def fit(self, X: pd.DataFrame, y=None):
        relation = _frame_to_relation(X)
        ruleset = self._parse_ruleset().bind(relation.attributes)
        self.ruleset_ = ruleset
        self.cost_model_ = self._cost_model()
        self.frequency_model_ = None
        if self.selection == "frequency":
            schema = build_schema(relation, ruleset)
            cache = ClosureCache({a: schema[a] for a in ruleset.non_key_attrs})
            sufficient = cache.closure(normalize_rules(ruleset.rules, schema))
            self.frequency_model_ = build_frequency_model(
                relation, sufficient, ruleset
            )
        return self

    def transform(self, X: pd.DataFrame) -> pd.DataFrame:
        if not hasattr(self, "ruleset_"):
            raise NotFittedError("call fit before transform")
        relation = _frame_to_relation(X)
        repaired, report = repair_relation(
            relation,
            self.ruleset_,
            self.cost_model_,
            SelectionPolicy(strategy=self.selection, seed=self.seed),
            threads=self.threads,
            frequency_model=self.frequency_model_,
            preserve_order=True,
        )
        self.report_ = report
        frame = _relation_to_frame(repaired)
        frame.index = X.index
        return frame
