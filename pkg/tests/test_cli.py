import hashlib
import json

import pytest

import tabrepair.cli as cli
from tabrepair import UnsatisfiableRulesError, CapExceededError, load_csv, violation_report
from tabrepair.rules import parse_rule_file


DATA = """study,country,double_blind,open,controlled,placebo
s1,DE,yes,yes,no,yes
s1,FR,yes,no,yes,yes
s1,BE,yes,no,yes,
s2,DE,no,yes,no,no
"""

RULES = """key: study
determined: double_blind, open, controlled
rule: double_blind = 'yes' & open = 'yes'
rule: controlled = 'no' & placebo = 'yes'
"""


@pytest.fixture
def workspace(tmp_path):
    data = tmp_path / "d.csv"
    rules = tmp_path / "r.rules"
    data.write_text(DATA, encoding="utf-8")
    rules.write_text(RULES, encoding="utf-8")
    return tmp_path, data, rules


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


class TestRepairCommand:
    def test_repair_produces_violation_free_output(self, workspace, capsys):
        tmp, data, rules = workspace
        out, rep = tmp / "out.csv", tmp / "rep.json"
        code = cli.main(
            [
                "repair", "--input", str(data), "--rules", str(rules),
                "--output", str(out), "--report", str(rep),
                "--seed", "7", "--threads", "1",
            ]
        )
        assert code == 0
        repaired = load_csv(out)
        ruleset = parse_rule_file(rules).bind(repaired.attributes)
        assert violation_report(repaired, ruleset).clean
        report = json.loads(rep.read_text())
        assert report["violations_after"]["total_rule_violations"] == 0
        assert report["violations_after"]["fd_violations"] == 0
        assert {"config", "sufficient_set_stats", "per_class", "violations_before",
                "violations_after", "selection", "timing"} <= set(report)

    def test_input_is_never_mutated(self, workspace):
        tmp, data, rules = workspace
        before = digest(data)
        cli.main(
            ["repair", "--input", str(data), "--rules", str(rules),
             "--output", str(tmp / "o.csv"), "--threads", "1"]
        )
        assert digest(data) == before

    def test_deterministic_output_modulo_timing(self, workspace):
        tmp, data, rules = workspace
        outputs, reports = [], []
        for run in range(2):
            out, rep = tmp / f"o{run}.csv", tmp / f"r{run}.json"
            cli.main(
                ["repair", "--input", str(data), "--rules", str(rules),
                 "--output", str(out), "--report", str(rep),
                 "--seed", "3", "--threads", "1"]
            )
            outputs.append(out.read_bytes())
            body = json.loads(rep.read_text())
            body.pop("timing")
            reports.append(json.dumps(body, sort_keys=True))
        assert outputs[0] == outputs[1]
        assert reports[0] == reports[1]

    def test_output_rows_are_key_sorted(self, tmp_path):
        data = tmp_path / "d.csv"
        rules = tmp_path / "r.rules"
        data.write_text("k,a\nz,1\nb,1\nz,2\na,1\n", encoding="utf-8")
        rules.write_text("key: k\n", encoding="utf-8")
        out = tmp_path / "o.csv"
        cli.main(["repair", "--input", str(data), "--rules", str(rules),
                  "--output", str(out), "--threads", "1"])
        keys = [row[0] for row in load_csv(out).rows]
        assert keys == sorted(keys)

    def test_no_rules_flag_keeps_rule_violations(self, workspace):
        tmp, data, rules = workspace
        out = tmp / "out.csv"
        code = cli.main(
            ["repair", "--input", str(data), "--rules", str(rules),
             "--output", str(out), "--no-rules", "--threads", "1"]
        )
        assert code == 0
        repaired = load_csv(out)
        ruleset = parse_rule_file(rules).bind(repaired.attributes)
        report = violation_report(repaired, ruleset)
        assert report.fd_violations == 0  # key agreement still enforced

    def test_frequency_selection_runs(self, workspace):
        tmp, data, rules = workspace
        out = tmp / "out.csv"
        code = cli.main(
            ["repair", "--input", str(data), "--rules", str(rules),
             "--output", str(out), "--select", "frequency", "--threads", "1"]
        )
        assert code == 0

    def test_oracle_verify_passes_on_small_data(self, workspace):
        tmp, data, rules = workspace
        out = tmp / "out.csv"
        code = cli.main(
            ["repair", "--input", str(data), "--rules", str(rules),
             "--output", str(out), "--oracle-verify", "--threads", "1"]
        )
        assert code == 0


class TestExitCodes:
    def test_unsatisfiable_maps_to_dedicated_code(self, workspace, monkeypatch):
        tmp, data, rules = workspace

        def boom(*args, **kwargs):
            raise UnsatisfiableRulesError("nope")

        monkeypatch.setattr(cli, "repair_relation", boom)
        code = cli.main(
            ["repair", "--input", str(data), "--rules", str(rules),
             "--output", str(tmp / "o.csv"), "--threads", "1"]
        )
        assert code == cli.EXIT_UNSATISFIABLE

    def test_cap_exceeded_maps_to_dedicated_code(self, workspace, monkeypatch):
        tmp, data, rules = workspace

        def boom(*args, **kwargs):
            raise CapExceededError("too big")

        monkeypatch.setattr(cli, "repair_relation", boom)
        code = cli.main(
            ["repair", "--input", str(data), "--rules", str(rules),
             "--output", str(tmp / "o.csv"), "--threads", "1"]
        )
        assert code == cli.EXIT_CAP

    def test_missing_input_file(self, tmp_path):
        rules = tmp_path / "r.rules"
        rules.write_text("key: k\n", encoding="utf-8")
        code = cli.main(
            ["repair", "--input", str(tmp_path / "absent.csv"),
             "--rules", str(rules), "--output", str(tmp_path / "o.csv")]
        )
        assert code == cli.EXIT_ERROR

    def test_rule_syntax_error(self, tmp_path):
        data = tmp_path / "d.csv"
        data.write_text("k,a\nx,1\n", encoding="utf-8")
        rules = tmp_path / "r.rules"
        rules.write_text("key: k\nrule: a == '1'\n", encoding="utf-8")
        code = cli.main(
            ["check", "--input", str(data), "--rules", str(rules)]
        )
        assert code == cli.EXIT_ERROR


class TestCheckCommand:
    def test_reports_counts(self, workspace, capsys):
        tmp, data, rules = workspace
        code = cli.main(["check", "--input", str(data), "--rules", str(rules)])
        assert code == 0
        out = capsys.readouterr().out
        assert "total rule violations" in out
        assert "conflicting determined values" in out


class TestEvalCommand:
    def test_prints_known_metrics(self, tmp_path, capsys):
        rules = tmp_path / "r.rules"
        rules.write_text("key: k\n", encoding="utf-8")
        header = "k,v\n"
        dirty = header + "".join(f"k{i},bad{i}\n" for i in range(10)) + "k10,ok\nk11,ok\n"
        gold = header + "".join(f"k{i},true{i}\n" for i in range(10)) + "k10,ok\nk11,ok\n"
        repaired_rows = (
            [f"k{i},true{i}" for i in range(6)]
            + ["k6,wrong6", "k7,wrong7", "k8,bad8", "k9,bad9", "k10,ok", "k11,ok"]
        )
        repaired = header + "\n".join(repaired_rows) + "\n"
        (tmp_path / "d.csv").write_text(dirty, encoding="utf-8")
        (tmp_path / "g.csv").write_text(gold, encoding="utf-8")
        (tmp_path / "o.csv").write_text(repaired, encoding="utf-8")
        code = cli.main(
            ["eval", "--input", str(tmp_path / "d.csv"), "--rules", str(rules),
             "--repaired", str(tmp_path / "o.csv"), "--gold", str(tmp_path / "g.csv")]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "precision        0.7500" in out
        assert "recall           0.6000" in out
        assert "f1               0.6667" in out

    def test_disjoint_keys_fail(self, tmp_path):
        rules = tmp_path / "r.rules"
        rules.write_text("key: k\n", encoding="utf-8")
        (tmp_path / "d.csv").write_text("k,v\nx,1\n", encoding="utf-8")
        (tmp_path / "g.csv").write_text("k,v\ny,1\n", encoding="utf-8")
        code = cli.main(
            ["eval", "--input", str(tmp_path / "d.csv"), "--rules", str(rules),
             "--repaired", str(tmp_path / "d.csv"), "--gold", str(tmp_path / "g.csv")]
        )
        assert code == cli.EXIT_ERROR
