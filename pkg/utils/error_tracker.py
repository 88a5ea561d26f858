"""
Error Tracking and Counter System
Counts pipeline failures by type and keeps their context for run artifacts
"""

import json
import logging
import threading
from collections import defaultdict, deque
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional, Union

logger = logging.getLogger(__name__)


class ErrorTracker:
    """
    Centralized error tracking with counters and per-type history

    Error types used by the pipeline: `backend_error`, `judgment_parse_error`,
    `generation_error`, `strategy_parse_error`, `solver_error`.
    """

    def __init__(self, alert_threshold: int = 10, history_size: int = 1000):
        """
        Initialize error tracker

        Args:
            alert_threshold: Count of one error type at which a critical log is emitted once
            history_size: Records kept per error type
        """
        self.alert_threshold = alert_threshold

        self.error_counts: Dict[str, int] = defaultdict(int)
        self.error_history: Dict[str, deque] = defaultdict(lambda: deque(maxlen=history_size))
        self.error_details: deque = deque(maxlen=history_size)
        self.alerts_sent: Dict[str, int] = defaultdict(int)

        self.lock = threading.Lock()

    def record_error(
        self,
        error_type: str,
        error: BaseException,
        context: Optional[Dict[str, Any]] = None,
        severity: str = "ERROR"
    ):
        """
        Record an error with full context

        Args:
            error_type: Category of error (e.g., 'backend_error', 'judgment_parse_error')
            error: The exception object
            context: Additional context (rule id, example id, strategy, ...)
            severity: ERROR, WARNING, CRITICAL
        """
        with self.lock:
            self.error_counts[error_type] += 1

            error_record = {
                'timestamp': datetime.now(timezone.utc).isoformat(),
                'error_type': error_type,
                'error_class': error.__class__.__name__,
                'error_message': str(error),
                'severity': severity,
                'context': context or {},
                'count': self.error_counts[error_type]
            }

            self.error_history[error_type].append(error_record)
            self.error_details.append(error_record)

            log_msg = f"{error_type}: {error.__class__.__name__} - {error}"
            if context:
                log_msg += f" | Context: {json.dumps(context, default=str)}"

            if severity == "CRITICAL":
                logger.critical(log_msg)
            elif severity == "WARNING":
                logger.warning(log_msg)
            else:
                logger.error(log_msg)

            if self.error_counts[error_type] == self.alert_threshold:
                self.alerts_sent[error_type] += 1
                logger.critical(
                    f"⚠️ {error_type} reached {self.alert_threshold} occurrences; "
                    f"latest: {error_record['error_message']}"
                )

    def count(self, error_type: str) -> int:
        """Number of recorded errors of one type"""
        with self.lock:
            return self.error_counts.get(error_type, 0)

    def get_error_summary(self) -> Dict[str, Any]:
        """Get error summary"""
        with self.lock:
            top_errors = sorted(self.error_counts.items(), key=lambda x: x[1], reverse=True)[:5]
            return {
                'total_errors': sum(self.error_counts.values()),
                'error_types': dict(self.error_counts),
                'recent_errors': list(self.error_details)[-10:],
                'top_errors': [{'type': t, 'count': c} for t, c in top_errors],
            }

    def export_errors(self, filepath: Union[str, Path]):
        """Export errors to JSON file"""
        summary = self.get_error_summary()
        with self.lock:
            summary['error_history'] = {k: list(v) for k, v in self.error_history.items()}

        path = Path(filepath)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(summary, f, indent=2, default=str)

        logger.info(f"Errors exported to {path}")


# Global error tracker instance
_global_tracker: Optional[ErrorTracker] = None


def get_error_tracker() -> ErrorTracker:
    """Get global error tracker instance"""
    global _global_tracker
    if _global_tracker is None:
        _global_tracker = ErrorTracker()
    return _global_tracker
