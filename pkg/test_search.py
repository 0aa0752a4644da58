#!/usr/bin/env python3
"""
Unit tests for the exhaustive parameter search
"""

import itertools
import json
import os
import tempfile
import unittest

from models import LTUParams, NLTUParams, ltu_truth_table, truth_table
from oracle import oracle_capacity
from search import (CapacityNotReached, ModelKind, SearchLimitExceeded, SearchSpec,
                    canonical_weight_matrices, canonicalize_nltu, dump_witnesses,
                    enumerate_functions, enumerate_naive, estimate_states,
                    minimal_budget_for_capacity)
from truthtable import ContractViolation, FunctionSet, is_monotone, TruthTable


SLOW = bool(os.environ.get("NLTU_SLOW_TESTS"))


def count(n, model, k, d_max=None, workers=1):
    return len(enumerate_functions(SearchSpec(n, model, k, d_max, workers=workers)).functions)


class TestSearchSpec(unittest.TestCase):
    """Test SearchSpec normalization"""

    def test_defaults(self):
        """Test model strings and subunit defaults"""
        spec = SearchSpec(4, "nltu", 2)
        self.assertIs(spec.model_kind, ModelKind.NLTU)
        self.assertEqual(spec.max_subunits, 4)
        self.assertEqual(SearchSpec(4, "ltu", 2, 3).max_subunits, 1)

    def test_rejects_bad_ranges(self):
        """Test invalid arity, budget and model are rejected"""
        for args in ((7, "ltu", 1), (0, "ltu", 1), (3, "ltu", 0), (3, "mlp", 1)):
            with self.assertRaises(ContractViolation):
                SearchSpec(*args)

    def test_hash_ignores_workers(self):
        """Test spec_hash depends on the searched range only"""
        self.assertEqual(SearchSpec(3, "nltu", 2, workers=1).spec_hash(),
                         SearchSpec(3, "nltu", 2, workers=4, witnesses=True).spec_hash())
        self.assertNotEqual(SearchSpec(3, "nltu", 2).spec_hash(),
                            SearchSpec(3, "nltu", 2, 2).spec_hash())


class TestEnumeration(unittest.TestCase):
    """Test function counts and set relations"""

    def test_small_ltu_counts(self):
        """Test one-synapse LTU counts 2, 5, 13 and 81"""
        self.assertEqual(count(1, "ltu", 1), 2)
        self.assertEqual(count(2, "ltu", 1), 5)
        self.assertEqual(count(3, "ltu", 1), 13)
        self.assertEqual(count(5, "ltu", 1), 81)

    def test_nltu_single_synapse_five_inputs(self):
        """Test one-synapse nLTU counts of 5 inputs for each subunit limit"""
        self.assertEqual(count(5, "nltu", 1), 361)
        self.assertEqual(count(5, "nltu", 1, d_max=3), 361)
        self.assertEqual(count(5, "nltu", 1, d_max=2), 331)
        self.assertEqual(count(5, "nltu", 1, d_max=1), 81)

    def test_nltu_single_synapse_counts(self):
        """Test one-synapse nLTU counts 16 and 68 for 3 and 4 inputs"""
        self.assertEqual(count(3, "nltu", 1), 16)
        self.assertEqual(count(4, "nltu", 1), 68)

    def test_nltu_two_synapses_four_inputs(self):
        """Test x_i or all three others is out of reach of two synapses per input"""
        functions = enumerate_functions(SearchSpec(4, "nltu", 2)).functions
        self.assertEqual(len(functions), 163)
        for i in range(4):
            others = [j for j in range(4) if j != i]
            tt = TruthTable.from_function(4, lambda x: x[i] or all(x[j] for j in others))
            self.assertNotIn(tt, functions, tt)
            weights = tuple(3 if j == i else 1 for j in range(4))
            self.assertEqual(ltu_truth_table(LTUParams(weights, 3)), tt)
        self.assertEqual(enumerate_functions(SearchSpec(4, "nltu", 2, 6)).functions, functions)

    def test_nltu_two_inputs(self):
        """Test two inputs give every monotone function except TRUE"""
        self.assertEqual(count(2, "nltu", 1), 5)
        self.assertEqual(count(2, "nltu", 2), 5)

    def test_results_are_monotone_and_exclude_true(self):
        """Test every function found is monotone and never constant TRUE"""
        for model in ModelKind:
            functions = enumerate_functions(SearchSpec(3, model, 2)).functions
            self.assertIn(0, functions)
            self.assertNotIn(0xFF, functions)
            for tt in functions.truth_tables():
                self.assertTrue(is_monotone(tt), tt)

    def test_budget_monotone(self):
        """Test raising the budget never loses a function"""
        for model in ModelKind:
            previous = FunctionSet(3)
            for k in (1, 2, 3):
                current = enumerate_functions(SearchSpec(3, model, k)).functions
                self.assertTrue(previous.issubset(current), (model, k))
                previous = current

    def test_ltu_within_nltu(self):
        """Test every LTU function is an nLTU function at the same budget"""
        for n, k in ((2, 2), (3, 1), (3, 2), (4, 1)):
            ltu = enumerate_functions(SearchSpec(n, "ltu", k)).functions
            nltu = enumerate_functions(SearchSpec(n, "nltu", k)).functions
            self.assertTrue(ltu.issubset(nltu), (n, k))

    def test_example_needs_two_ltu_synapses(self):
        """Test AC or BC is out of reach of a one-synapse LTU"""
        self.assertNotIn(0xE0, enumerate_functions(SearchSpec(3, "ltu", 1)).functions)
        self.assertIn(0xE0, enumerate_functions(SearchSpec(3, "ltu", 2)).functions)
        self.assertIn(0xE0, enumerate_functions(SearchSpec(3, "nltu", 1)).functions)


class TestPruning(unittest.TestCase):
    """Test the canonical nLTU search against the naive one"""

    def test_naive_agreement(self):
        """Test pruned and naive searches find the same functions and states"""
        for n, k, d in itertools.product((1, 2), (1, 2), (1, 2)):
            spec = SearchSpec(n, "nltu", k, d)
            pruned = enumerate_functions(spec)
            naive = enumerate_naive(spec)
            self.assertEqual(pruned.functions, naive.functions, (n, k, d))
            self.assertEqual(pruned.states_visited + pruned.states_pruned,
                             naive.states_visited, (n, k, d))

    def test_naive_ltu(self):
        """Test batched and scalar LTU searches agree"""
        for n, k in ((2, 2), (3, 2)):
            spec = SearchSpec(n, "ltu", k)
            self.assertEqual(enumerate_functions(spec).functions, enumerate_naive(spec).functions)

    def test_three_inputs_naive(self):
        """Test agreement with three subunits at three inputs"""
        spec = SearchSpec(3, "nltu", 1, 3)
        pruned = enumerate_functions(spec)
        naive = enumerate_naive(spec)
        self.assertEqual(pruned.functions, naive.functions)
        self.assertEqual(pruned.states_visited + pruned.states_pruned, naive.states_visited)
        self.assertGreater(pruned.states_pruned, 0)

    def test_extra_subunits_add_nothing(self):
        """Test d_max beyond n finds no new functions at small budgets"""
        for n, k in ((2, 1), (2, 2), (3, 1), (3, 2)):
            self.assertEqual(enumerate_functions(SearchSpec(n, "nltu", k, n)).functions,
                             enumerate_functions(SearchSpec(n, "nltu", k, n + 2)).functions,
                             (n, k))

    def test_canonical_matrices_are_sorted(self):
        """Test generated matrices have sorted rows and column sums within budget"""
        matrices = list(canonical_weight_matrices(3, 2, 3))
        self.assertEqual(len(matrices), len(set(matrices)))
        for m in matrices:
            self.assertEqual(list(m), sorted(m))
            self.assertTrue(all(sum(col) <= 2 for col in zip(*m)))

    def test_canonicalize_idempotent(self):
        """Test canonical form is a fixed point and keeps the function"""
        p = NLTUParams(((0, 1, 1), (1, 0, 0), (0, 1, 1)), (2, 1, 1), 2)
        c = canonicalize_nltu(p)
        self.assertEqual(canonicalize_nltu(c), c)
        self.assertEqual(c.subunit_weights, ((0, 1, 1), (0, 1, 1), (1, 0, 0)))
        self.assertEqual(c.saturations, (1, 2, 1))
        self.assertEqual(truth_table(c), truth_table(p))


class TestParallelism(unittest.TestCase):
    """Test worker count independence"""

    def test_worker_counts_agree(self):
        """Test 1, 2 and 3 workers give identical sets, counts and witnesses"""
        results = [enumerate_functions(SearchSpec(3, "nltu", 2, workers=w, witnesses=True))
                   for w in (1, 2, 3)]
        for other in results[1:]:
            self.assertEqual(other.functions, results[0].functions)
            self.assertEqual(other.states_visited, results[0].states_visited)
            self.assertEqual(other.witnesses, results[0].witnesses)

    def test_nltu_four_inputs(self):
        """Test 1, 2 and 3 workers agree on four-input nLTU searches"""
        for k in (1, 2):
            results = [enumerate_functions(SearchSpec(4, "nltu", k, workers=w, witnesses=True))
                       for w in (1, 2, 3)]
            for other in results[1:]:
                self.assertEqual(other.functions, results[0].functions, k)
                self.assertEqual(other.states_pruned, results[0].states_pruned, k)
                self.assertEqual(other.witnesses, results[0].witnesses, k)

    def test_ltu_workers(self):
        """Test LTU chunks reduce identically in parallel"""
        self.assertEqual(count(4, "ltu", 2, workers=1), count(4, "ltu", 2, workers=2))


class TestLimits(unittest.TestCase):
    """Test state caps and budget searches"""

    def test_state_cap(self):
        """Test exceeding the state cap raises with a partial result"""
        spec = SearchSpec(3, "nltu", 2, state_cap=10)
        with self.assertRaises(SearchLimitExceeded) as ctx:
            enumerate_functions(spec)
        self.assertGreater(ctx.exception.partial.states_visited, 10)

    def test_minimal_budgets(self):
        """Test minimal budgets for one and three inputs"""
        target1 = oracle_capacity(1, use_cache=False)
        self.assertEqual(minimal_budget_for_capacity("ltu", 1, target1)[0], 1)
        target3 = oracle_capacity(3, use_cache=False)
        self.assertEqual(len(target3), 19)
        self.assertEqual(minimal_budget_for_capacity("ltu", 3, target3)[0], 2)
        self.assertEqual(minimal_budget_for_capacity("nltu", 3, target3)[0], 2)

    def test_minimal_ltu_budget_four_inputs(self):
        """Test four inputs need three LTU synapses per input"""
        target = oracle_capacity(4, use_cache=False)
        k, result = minimal_budget_for_capacity("ltu", 4, target)
        self.assertEqual(k, 3)
        self.assertEqual(result.functions, target)

    @unittest.skipUnless(SLOW, "set NLTU_SLOW_TESTS=1")
    def test_minimal_budgets_slow(self):
        """Test derived budgets: nLTU 3 at four inputs, LTU 5 at five inputs"""
        workers = os.cpu_count() or 1
        target4 = oracle_capacity(4, use_cache=False)
        self.assertEqual(minimal_budget_for_capacity("nltu", 4, target4, workers=workers)[0], 3)
        target5 = oracle_capacity(5, use_cache=False)
        k, result = minimal_budget_for_capacity("ltu", 5, target5, workers=workers)
        self.assertEqual(k, 5)
        self.assertEqual(len(result.functions), 3286)

    def test_naive_state_cap(self):
        """Test both naive branches stop at the state cap"""
        for model in ModelKind:
            with self.assertRaises(SearchLimitExceeded) as ctx:
                enumerate_naive(SearchSpec(3, model, 2, state_cap=5))
            self.assertGreater(ctx.exception.partial.states_visited, 5)

    def test_capacity_not_reached(self):
        """Test a budget cap below the minimum reports the best coverage"""
        target = oracle_capacity(3, use_cache=False)
        with self.assertRaises(CapacityNotReached) as ctx:
            minimal_budget_for_capacity("ltu", 3, target, budget_cap=1)
        self.assertEqual(ctx.exception.best_budget, 1)
        self.assertEqual(ctx.exception.best_count, 13)
        self.assertLess(ctx.exception.covered, 19)

    def test_arity_mismatch(self):
        """Test a target of the wrong arity is rejected"""
        with self.assertRaises(ContractViolation):
            minimal_budget_for_capacity("ltu", 3, FunctionSet(2))

    def test_estimate_grows(self):
        """Test the cost estimate grows with the budget"""
        self.assertLess(estimate_states(SearchSpec(4, "nltu", 1)),
                        estimate_states(SearchSpec(4, "nltu", 2)))


class TestWitnesses(unittest.TestCase):
    """Test witness parameter sets"""

    def test_witnesses_reproduce_functions(self):
        """Test each witness computes its mask within the budget"""
        for model in ModelKind:
            result = enumerate_functions(SearchSpec(3, model, 2, witnesses=True))
            self.assertEqual(set(result.witnesses), set(result.functions))
            for mask, params in result.witnesses.items():
                self.assertEqual(truth_table(params), TruthTable(3, mask))
                if model is ModelKind.NLTU:
                    self.assertTrue(all(c <= 2 for c in params.synapses_per_input()))
                else:
                    self.assertTrue(all(w <= 2 for w in params.weights))

    def test_dump_witnesses(self):
        """Test the JSON-lines dump has one record per function"""
        result = enumerate_functions(SearchSpec(3, "nltu", 1, witnesses=True))
        with tempfile.TemporaryDirectory() as tmp:
            path = dump_witnesses(result, os.path.join(tmp, "w.jsonl"))
            with open(path, encoding="utf-8") as f:
                records = [json.loads(line) for line in f]
        self.assertEqual(len(records), len(result.functions))
        self.assertEqual([int(r["mask"], 16) for r in records], result.functions.sorted_masks())

    def test_dump_requires_witnesses(self):
        """Test dumping a witness-free result is refused"""
        result = enumerate_functions(SearchSpec(2, "ltu", 1))
        with self.assertRaises(ContractViolation):
            dump_witnesses(result, "unused.jsonl")


if __name__ == '__main__':
    unittest.main()
