"""
Tests for core types and rule features
"""

import pytest
import sys
import os

import numpy as np
from pydantic import ValidationError

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.errors import InvalidRuleError, UnknownExampleError, UsageError
from core.features import coverage, feature_row, normalize_rule_text
from core.types import Example, Judgment, JudgmentMatrix, Rule, RuleOrigin, RuleSet, SplitBundle


def _rule(rule_id: str, text: str) -> Rule:
    return Rule(rule_id=rule_id, text=text, born_iteration=1)


class TestCoverage:
    """Fraction of non-abstaining judgments"""

    def test_half_covered(self):
        """Test half covered"""
        assert coverage([1, 0, -1, 0]) == 0.5

    def test_all_abstain(self):
        """Test all abstain"""
        assert coverage([0, 0, 0]) == 0.0

    def test_no_abstentions(self):
        """Test no abstentions"""
        assert coverage([1, 1, 1, 1, -1]) == 1.0

    def test_empty_column_is_usage_error(self):
        """Test empty column is usage error"""
        with pytest.raises(UsageError):
            coverage([])

    def test_permutation_invariant(self):
        """Test permutation invariant"""
        rng = np.random.default_rng(0)
        column = rng.integers(-1, 2, size=57)
        assert coverage(column) == coverage(rng.permutation(column))
        assert 0.0 <= coverage(column) <= 1.0


class TestFeatureRow:
    """Row extraction from a judgment matrix"""

    def test_single_example(self):
        """Test single example"""
        matrix = JudgmentMatrix(('e1',), ('r1', 'r2'), np.array([[1, 0]]))
        assert feature_row(matrix, 'e1').tolist() == [1, 0]

    def test_empty_rule_set(self):
        """Test empty rule set"""
        matrix = JudgmentMatrix.from_columns(['e1', 'e2'], {})
        assert feature_row(matrix, 'e2').shape == (0,)

    def test_row_indexing(self):
        """Test row indexing"""
        values = np.array([[1, 1], [-1, 1], [0, -1]])
        matrix = JudgmentMatrix(('a', 'b', 'c'), ('r1', 'r2'), values)
        assert feature_row(matrix, 'b').tolist() == [-1, 1]

    def test_unknown_example(self):
        """Test unknown example"""
        matrix = JudgmentMatrix(('e1',), ('r1',), np.array([[0]]))
        with pytest.raises(UnknownExampleError):
            feature_row(matrix, 'missing')

    def test_rows_rebuild_matrix(self):
        """Test rows rebuild matrix"""
        rng = np.random.default_rng(3)
        values = rng.integers(-1, 2, size=(6, 4))
        ids = tuple(f"e{i}" for i in range(6))
        matrix = JudgmentMatrix(ids, ('a', 'b', 'c', 'd'), values)
        rebuilt = np.vstack([feature_row(matrix, eid) for eid in ids])
        assert np.array_equal(rebuilt, values)


class TestNormalizeRuleText:
    """Canonical rule text"""

    def test_strips_enumeration(self):
        """Test strips enumeration"""
        assert normalize_rule_text("  3. Tweets with questions win ") == "Tweets with questions win"

    def test_collapses_whitespace(self):
        """Test collapses whitespace"""
        assert normalize_rule_text("A  B") == "A B"

    def test_blank_is_invalid(self):
        """Test blank is invalid"""
        with pytest.raises(InvalidRuleError):
            normalize_rule_text("  ")

    def test_bare_number_is_invalid(self):
        """Test bare number is invalid"""
        with pytest.raises(InvalidRuleError):
            normalize_rule_text("4.")

    def test_decimal_is_kept(self):
        """Test decimal is kept"""
        text = "3.5 stars or more is positive"
        assert normalize_rule_text(text) == text


class TestJudgmentMatrix:
    """Matrix invariants"""

    def test_values_are_read_only_int8(self):
        """Test values are read only int8"""
        matrix = JudgmentMatrix(('e1',), ('r1',), np.array([[1]]))
        assert matrix.values.dtype == np.int8
        with pytest.raises(ValueError):
            matrix.values[0, 0] = 0

    def test_shape_mismatch(self):
        """Test shape mismatch"""
        with pytest.raises(UsageError):
            JudgmentMatrix(('e1', 'e2'), ('r1',), np.array([[1]]))

    def test_values_outside_ternary(self):
        """Test values outside ternary"""
        with pytest.raises(UsageError):
            JudgmentMatrix(('e1',), ('r1',), np.array([[2]]))

    def test_judgment_enum_values(self):
        """Test judgment enum values"""
        assert [int(j) for j in Judgment] == [-1, 0, 1]


class TestRuleSet:
    """Capacity and duplicate invariants"""

    def test_capacity_enforced(self):
        """Test capacity enforced"""
        rules = tuple(_rule(f"r{i}", f"rule {i}") for i in range(3))
        with pytest.raises(ValidationError):
            RuleSet(rules=rules, capacity=2)

    def test_duplicate_text_after_normalization(self):
        """Test duplicate text after normalization"""
        with pytest.raises(ValidationError):
            RuleSet(rules=(_rule('r1', "1. Short tweets win"), _rule('r2', "Short  tweets win")),
                    capacity=5)

    def test_lookup_and_order(self):
        """Test lookup and order"""
        rule_set = RuleSet(
            rules=(_rule('r2', 'b'), Rule(rule_id='r1', text='a', born_iteration=2,
                                          origin=RuleOrigin.REFINEMENT)),
            capacity=3,
        )
        assert rule_set.rule_ids == ['r2', 'r1']
        assert rule_set.get('r1').origin is RuleOrigin.REFINEMENT
        with pytest.raises(KeyError):
            rule_set.get('r9')


class TestExampleAndSplits:
    """Example validation and split disjointness"""

    def test_label_must_be_binary(self):
        """Test label must be binary"""
        with pytest.raises(ValidationError):
            Example(id='x', fields={'text': 'hi'}, label=2)

    def test_fields_must_not_be_empty(self):
        """Test fields must not be empty"""
        with pytest.raises(ValidationError):
            Example(id='x', fields={}, label=1)

    def test_overlapping_splits_rejected(self):
        """Test overlapping splits rejected"""
        a = Example(id='a', fields={'text': 'a'}, label=1)
        b = Example(id='b', fields={'text': 'b'}, label=0)
        with pytest.raises(ValidationError):
            SplitBundle(train=(a,), validation=(b,), test=(a,), seed=0)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
