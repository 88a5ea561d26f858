"""
Tests for Error Tracker
"""

import json
import pytest
import sys
import os

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.errors import ResponseParseError
from utils.error_tracker import ErrorTracker, get_error_tracker


class TestErrorTracker:
    """Test error tracking functionality"""

    def setup_method(self):
        """Setup for each test"""
        self.tracker = ErrorTracker(alert_threshold=5)

    def test_record_error(self):
        """Test recording an error"""
        error = ResponseParseError("no label token")
        self.tracker.record_error(
            error_type='judgment_parse_error',
            error=error,
            context={'rule_id': 'r0001', 'example_id': 'e1'},
            severity='WARNING'
        )

        assert self.tracker.count('judgment_parse_error') == 1
        assert len(self.tracker.error_details) == 1
        record = self.tracker.error_details[0]
        assert record['error_class'] == 'ResponseParseError'
        assert record['context']['rule_id'] == 'r0001'

    def test_error_counting(self):
        """Test error counter increments"""
        for i in range(5):
            self.tracker.record_error('backend_error', ValueError(f"Error {i}"))

        assert self.tracker.count('backend_error') == 5
        assert self.tracker.count('generation_error') == 0

    def test_alert_fires_once_at_threshold(self):
        """Reaching the threshold alerts once, further errors do not re-alert"""
        for i in range(8):
            self.tracker.record_error('backend_error', ValueError(f"Error {i}"))

        assert self.tracker.alerts_sent['backend_error'] == 1

    def test_get_error_summary(self):
        """Test error summary generation"""
        self.tracker.record_error('solver_error', ValueError("diverged"))

        summary = self.tracker.get_error_summary()

        assert summary['total_errors'] == 1
        assert 'solver_error' in summary['error_types']
        assert len(summary['recent_errors']) == 1

    def test_export_errors(self, tmp_path):
        """Exported file holds the summary and the per-type history"""
        self.tracker.record_error('strategy_parse_error', ValueError("maybe"), {'strategy': 'E2'})
        path = tmp_path / 'nested' / 'errors.json'

        self.tracker.export_errors(path)

        payload = json.loads(path.read_text())
        assert payload['total_errors'] == 1
        assert payload['error_history']['strategy_parse_error'][0]['context'] == {'strategy': 'E2'}

    def test_global_tracker_is_shared(self):
        """Test global error tracker instance"""
        assert get_error_tracker() is get_error_tracker()


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
