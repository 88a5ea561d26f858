"""
Dataset Quality Monitor
Checks labeled text examples and splits before they enter the pipeline
"""

import pandas as pd
from typing import Dict, Optional, Sequence
import logging

from core.types import Example, SplitBundle
from dataset.loader import DatasetManifest

logger = logging.getLogger(__name__)


class DatasetQualityMonitor:
    """
    Monitors dataset quality and flags problems that would skew rule learning
    """

    def validate_examples(
        self,
        examples: Sequence[Example],
        manifest: Optional[DatasetManifest] = None
    ) -> Dict[str, bool]:
        """
        Validate labeled examples

        Args:
            examples: Examples as loaded from JSONL
            manifest: Task manifest; when given, its field names must be present

        Returns:
            Dictionary with validation results
        """
        checks = {}

        if not examples:
            logger.warning("Dataset is empty")
            return {'empty': True}

        df = pd.DataFrame({
            'id': [e.id for e in examples],
            'label': [e.label for e in examples],
            'fields': [e.fields for e in examples],
        })

        checks['unique_ids'] = not df['id'].duplicated().any()
        if not checks['unique_ids']:
            logger.warning(f"Found {df['id'].duplicated().sum()} duplicate ids")

        checks['binary_labels'] = bool(df['label'].isin([0, 1]).all())

        # Both classes are needed for stratified selection and macro-F1
        checks['both_classes'] = df['label'].nunique() == 2
        if not checks['both_classes']:
            logger.warning(f"Only one class present: {df['label'].unique().tolist()}")

        if manifest is not None:
            missing = df['fields'].apply(
                lambda f: [name for name in manifest.field_names if name not in f]
            )
            checks['required_fields'] = not missing.apply(bool).any()
            if not checks['required_fields']:
                bad = df.loc[missing.apply(bool), 'id'].tolist()
                logger.warning(f"{len(bad)} examples miss manifest fields, e.g. {bad[:3]}")

        blank = df['fields'].apply(lambda f: any(not str(v).strip() for v in f.values()))
        checks['no_blank_fields'] = not blank.any()
        if not checks['no_blank_fields']:
            logger.warning(f"Found {int(blank.sum())} examples with blank field text")

        return checks

    def validate_splits(self, bundle: SplitBundle) -> Dict[str, bool]:
        """
        Validate a split bundle

        Returns:
            Dictionary with validation results
        """
        train = {e.id for e in bundle.train}
        validation = {e.id for e in bundle.validation}
        test = {e.id for e in bundle.test}

        checks = {
            'non_empty_splits': all(len(s) > 0 for s in (train, validation, test)),
            'disjoint_splits': not (train & validation or train & test or validation & test),
            'validation_has_both_classes': len({e.label for e in bundle.validation}) == 2,
        }
        if not checks['validation_has_both_classes']:
            logger.warning("Validation split holds a single class; selection will fail")
        logger.info(
            f"📊 Positive share: train {self.label_balance(bundle.train):.2f}, "
            f"validation {self.label_balance(bundle.validation):.2f}, "
            f"test {self.label_balance(bundle.test):.2f}"
        )
        return checks

    def label_balance(self, examples: Sequence[Example]) -> float:
        """Fraction of positive labels"""
        if not examples:
            return 0.0
        return sum(e.label for e in examples) / len(examples)

    def generate_quality_report(self, checks: Dict[str, bool]) -> str:
        """
        Generate a human-readable quality report

        Args:
            checks: Dictionary of validation checks

        Returns:
            Formatted report string
        """
        passed = sum(1 for v in checks.values() if v)
        total = len(checks)
        percentage = (passed / total * 100) if total > 0 else 0

        lines = ["", "Dataset Quality Report:", "=" * 50]
        lines.append(f"Passed: {passed}/{total} ({percentage:.1f}%)")
        lines.append("-" * 50)
        for check, result in checks.items():
            lines.append(f"{check}: {'✅ PASS' if result else '❌ FAIL'}")
        lines.append("=" * 50)
        return "\n".join(lines) + "\n"
