"""
Judgment Cache
Append-only JSONL store of ternary judgments so no (rule, example) pair is judged twice
"""

import hashlib
import json
import logging
import threading
from collections import defaultdict
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from core.features import normalize_rule_text
from core.types import Example, Judgment

logger = logging.getLogger(__name__)


def stats_path_for(path: Union[str, Path]) -> Path:
    """Sidecar holding the hit/miss counters of the last session"""
    path = Path(path)
    return path.with_name(path.name + '.stats.json')


def judgment_key(template_version: str, model: str, rule_text: str, example: Example) -> str:
    """
    Digest identifying one judgment

    Covers the template version, the model name, the normalized rule text and the
    example id plus field contents.
    """
    payload = json.dumps(
        [
            template_version,
            model,
            normalize_rule_text(rule_text),
            example.id,
            sorted(example.fields.items()),
        ],
        ensure_ascii=False,
        separators=(',', ':'),
    )
    return hashlib.sha256(payload.encode('utf-8')).hexdigest()


class JudgmentCache:
    """
    Persistent judgment cache backed by one JSON record per line

    Every put is appended and flushed immediately, so an interrupted run keeps all
    judgments made before the interruption. Corrupt lines are skipped on load and
    listed in `corrupt_lines`.
    """

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)

        self._entries: Dict[str, int] = {}
        self.corrupt_lines: List[Dict[str, Any]] = []
        self.hits = 0
        self.misses = 0
        self.sets = 0

        self._lock = threading.Lock()
        self._load()
        self._handle = open(self.path, 'a', encoding='utf-8')
        logger.info(f"Judgment cache opened: {self.path} ({len(self._entries)} entries)")

    def _load(self):
        if not self.path.exists():
            return
        with open(self.path, 'r', encoding='utf-8') as f:
            for line_number, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                record = _parse_record(line)
                if 'error' in record:
                    record['line'] = line_number
                    self.corrupt_lines.append(record)
                    logger.warning(
                        f"Skipping corrupt cache line {line_number} "
                        f"(key={record.get('key')}): {record['error']}"
                    )
                    continue
                self._entries[record['key']] = record['judgment']

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def get(self, key: str) -> Optional[Judgment]:
        """Stored judgment for `key`, counting a hit or a miss"""
        with self._lock:
            value = self._entries.get(key)
            if value is None:
                self.misses += 1
                return None
            self.hits += 1
            return Judgment(value)

    def put(
        self,
        key: str,
        judgment: Judgment,
        rule_text: str = "",
        example_id: str = "",
        model: str = "",
    ):
        """Store and persist one judgment"""
        record = {
            'key': key,
            'judgment': int(judgment),
            'rule_text': rule_text,
            'example_id': example_id,
            'model': model,
        }
        line = json.dumps(record, ensure_ascii=False) + '\n'
        with self._lock:
            self._handle.write(line)
            self._handle.flush()
            self._entries[key] = int(judgment)
            self.sets += 1

    def get_stats(self) -> Dict[str, Any]:
        """Session counters"""
        with self._lock:
            lookups = self.hits + self.misses
            return {
                'entries': len(self._entries),
                'hits': self.hits,
                'misses': self.misses,
                'sets': self.sets,
                'hit_rate': (self.hits / lookups) if lookups else 0.0,
            }

    def close(self):
        """Close the store and write the session counters next to it"""
        with self._lock:
            if self._handle.closed:
                return
            self._handle.close()
        stats = self.get_stats()
        with open(stats_path_for(self.path), 'w', encoding='utf-8') as f:
            json.dump(stats, f, indent=2, sort_keys=True)
        logger.info(
            f"Judgment cache closed: {stats['entries']} entries, "
            f"{stats['hits']} hits, {stats['misses']} misses"
        )

    def __enter__(self) -> 'JudgmentCache':
        return self

    def __exit__(self, exc_type, exc, tb):
        self.close()


def _parse_record(line: str) -> Dict[str, Any]:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as e:
        return {'error': f"invalid JSON: {e.msg}", 'key': None}
    if not isinstance(record, dict):
        return {'error': "record is not an object", 'key': None}
    key = record.get('key')
    if not isinstance(key, str) or not key:
        return {'error': "missing key", 'key': None}
    if record.get('judgment') not in (-1, 0, 1):
        return {'error': f"judgment {record.get('judgment')!r} not in {{-1, 0, 1}}", 'key': key}
    return record


def summarize_cache(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Read-only summary of a cache file

    Returns:
        entries, corrupt (list of {line, key, error}), per-rule coverage over cached
        examples, and the last session's counters when the sidecar exists
    """
    path = Path(path)
    entries: Dict[str, Dict[str, Any]] = {}
    corrupt: List[Dict[str, Any]] = []

    if path.exists():
        with open(path, 'r', encoding='utf-8') as f:
            for line_number, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                record = _parse_record(line)
                if 'error' in record:
                    corrupt.append(
                        {'line': line_number, 'key': record.get('key'), 'error': record['error']}
                    )
                    continue
                entries[record['key']] = record

    judged = defaultdict(int)
    covered = defaultdict(int)
    for record in entries.values():
        rule = record.get('rule_text') or '<unknown rule>'
        judged[rule] += 1
        covered[rule] += int(record['judgment'] != 0)

    last_run = None
    sidecar = stats_path_for(path)
    if sidecar.exists():
        try:
            with open(sidecar, 'r', encoding='utf-8') as f:
                last_run = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            logger.warning(f"Cannot read cache stats {sidecar}: {e}")

    return {
        'entries': len(entries),
        'corrupt': corrupt,
        'rule_coverage': {
            rule: {'judged': judged[rule], 'coverage': covered[rule] / judged[rule]}
            for rule in sorted(judged)
        },
        'last_run': last_run,
    }
