#!/usr/bin/env python3
"""
Unit tests for the capacity experiments and report writers
"""

import json
import os
import tempfile
import unittest

from experiments import (CSV_HEADER, CapacityReport, Match, ReportRow, capacity_bits,
                         closed_form_ltu_single_synapse, run_figure2, run_figure3,
                         verify_figure1, write_report_csv, write_report_json)
from search import SearchSpec, enumerate_functions
from truthtable import ContractViolation, TruthTable

SLOW = bool(os.environ.get("NLTU_SLOW_TESTS"))


class TestHelpers(unittest.TestCase):
    """Test closed forms and capacity in bits"""

    def test_closed_form(self):
        """Test the one-synapse LTU closed form"""
        self.assertEqual([closed_form_ltu_single_synapse(n) for n in range(1, 7)],
                         [2, 5, 13, 33, 81, 193])

    def test_capacity_bits(self):
        """Test log2 rounding and the empty-set guard"""
        self.assertEqual(capacity_bits(1), 0.0)
        self.assertEqual(capacity_bits(81), 6.34)
        self.assertEqual(capacity_bits(361), 8.5)
        with self.assertRaises(ContractViolation):
            capacity_bits(0)


class TestFigure1(unittest.TestCase):
    """Test the three-input example checks"""

    def test_all_checks_pass(self):
        """Test every named check passes and a witness is reported"""
        report = verify_figure1()
        self.assertTrue(report["passed"], report["checks"])
        self.assertEqual(report["mask"], "0xe0")
        names = {c["name"] for c in report["checks"]}
        self.assertIn("ltu_single_synapse_fails", names)
        self.assertEqual(report["nltu_witness"]["model"], "nltu")
        self.assertEqual(len(report["provenance"]["spec_hashes"]), 3)


class TestFigure3(unittest.TestCase):
    """Test the one-synapse capacity comparison"""

    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.report = run_figure3(range(1, 6), oracle_max_arity=4, oracle_cache=cls.tmp.name)

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def test_reference_counts(self):
        """Test 81 LTU functions, and 361 nLTU functions against the published 332"""
        ltu, nltu = self.report.row(5, "ltu"), self.report.row(5, "nltu")
        self.assertEqual((ltu.function_count, ltu.match), (81, Match.TRUE))
        self.assertEqual((nltu.function_count, nltu.paper_value, nltu.match), (361, 332, Match.FALSE))
        self.assertIsNone(ltu.oracle_count)

    def test_small_arities(self):
        """Test rows without reference values and with oracle counts"""
        row = self.report.row(4, "ltu")
        self.assertEqual(row.match, Match.NA)
        self.assertEqual(row.function_count, 33)
        self.assertEqual(row.oracle_count, 149)
        self.assertEqual(self.report.row(2, "nltu").function_count, 5)

    def test_checks_and_extras(self):
        """Test closed form agreement, containment and derived extras"""
        self.assertEqual(self.report.checks, {"closed_form_agrees": True, "ltu_within_nltu": True})
        extras = self.report.extras["5"]
        self.assertEqual(extras["nltu_only"], 361 - 81)
        self.assertEqual(extras["ratio"], round(361 / 81, 3))
        # every monotone function of three inputs is a threshold function
        self.assertEqual(self.report.extras["3"]["nltu_beyond_threshold"], 0)
        self.assertNotIn("nltu_beyond_threshold", extras)

    def test_csv_format(self):
        """Test header, row order, LF endings and two-decimal bits"""
        with tempfile.TemporaryDirectory() as tmp:
            path = write_report_csv(self.report, os.path.join(tmp, "figure3.csv"))
            with open(path, "rb") as f:
                raw = f.read()
        self.assertNotIn(b"\r", raw)
        lines = raw.decode("utf-8").splitlines()
        self.assertEqual(lines[0], ",".join(CSV_HEADER))
        self.assertEqual(len(lines), 11)
        self.assertEqual(lines[-2], "5,ltu,1,81,,6.34,81,true")
        self.assertEqual(lines[-1], "5,nltu,1,361,,8.50,332,false")

    def test_json_report(self):
        """Test the JSON companion carries rows, checks and provenance"""
        with tempfile.TemporaryDirectory() as tmp:
            path = write_report_json(self.report, os.path.join(tmp, "figure3.json"))
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
        self.assertEqual(data["kind"], "figure3")
        self.assertEqual(len(data["rows"]), 10)
        self.assertEqual(data["rows"][0]["match"], "na")
        self.assertIn("spec_hashes", data["provenance"])


class TestFigure2(unittest.TestCase):
    """Test the minimal-budget experiment"""

    def test_three_inputs(self):
        """Test both models reach full capacity at two synapses per input"""
        with tempfile.TemporaryDirectory() as tmp:
            report = run_figure2([3], oracle_cache=tmp)
        ltu, nltu = report.row(3, "ltu"), report.row(3, "nltu")
        self.assertEqual((ltu.synapse_budget, ltu.paper_value, ltu.match), (2, 3, Match.FALSE))
        self.assertEqual((nltu.synapse_budget, nltu.match), (2, Match.TRUE))
        self.assertEqual(ltu.oracle_count, 19)
        self.assertEqual(ltu.function_count, 19)
        self.assertTrue(report.checks["nltu_budget_not_above_ltu"])

    def test_not_reached(self):
        """Test a low budget cap yields not_reached rows instead of failing"""
        with tempfile.TemporaryDirectory() as tmp:
            report = run_figure2([3], budget_cap=1, oracle_cache=tmp)
        self.assertEqual(report.row(3, "ltu").match, Match.NOT_REACHED)
        self.assertEqual(report.row(3, "ltu").function_count, 13)

    def test_six_inputs_opt_in(self):
        """Test six inputs are refused without allow_n6"""
        with self.assertRaises(ContractViolation):
            run_figure2([6])

    @unittest.skipUnless(SLOW, "set NLTU_SLOW_TESTS=1")
    def test_three_and_four_inputs(self):
        """Test derived budgets against the published ones at three and four inputs"""
        report = run_figure2(range(3, 5), workers=os.cpu_count() or 1)
        derived = {(3, "ltu"): 2, (3, "nltu"): 2, (4, "ltu"): 3, (4, "nltu"): 3}
        for (n, model), k in derived.items():
            self.assertEqual(report.row(n, model).synapse_budget, k, (n, model))
        self.assertEqual(report.row(4, "nltu").paper_value, 2)
        self.assertEqual(report.row(4, "nltu").match, Match.FALSE)
        self.assertTrue(report.checks["nltu_budget_not_above_ltu"])

    @unittest.skipUnless(SLOW, "set NLTU_SLOW_TESTS=1")
    def test_five_input_nltu_needs_three(self):
        """Test two synapses per input miss x0 or x1x2x3 at five inputs"""
        functions = enumerate_functions(SearchSpec(5, "nltu", 2, workers=os.cpu_count() or 1)).functions
        tt = TruthTable.from_function(5, lambda x: x[0] or (x[1] and x[2] and x[3]))
        self.assertNotIn(tt, functions)


class TestSixInputs(unittest.TestCase):
    """Test the one-synapse counts at six inputs"""

    @unittest.skipUnless(SLOW, "set NLTU_SLOW_TESTS=1")
    def test_closed_form_at_six(self):
        """Test the enumerated LTU count matches the closed form 193"""
        report = run_figure3([6], workers=os.cpu_count() or 1, oracle_max_arity=0)
        self.assertTrue(report.checks["closed_form_agrees"])
        self.assertTrue(report.checks["ltu_within_nltu"])
        row = report.row(6, "ltu")
        self.assertEqual((row.function_count, row.paper_value, row.match), (193, 128, Match.FALSE))


class TestReportRow(unittest.TestCase):
    """Test CSV field rendering"""

    def test_empty_optional_fields(self):
        """Test missing oracle and reference values render as empty fields"""
        row = ReportRow(2, "ltu", 1, 5, None, capacity_bits(5))
        self.assertEqual(row.csv_fields(), ["2", "ltu", "1", "5", "", "2.32", "", "na"])
        report = CapacityReport(kind="figure3", rows=[row])
        self.assertIs(report.row(2, "ltu"), row)
        with self.assertRaises(KeyError):
            report.row(3, "ltu")


if __name__ == '__main__':
    unittest.main()
