"""
Dataset Module
JSONL ingestion, seeded splits and sampling
"""

from dataset.loader import DatasetManifest, load_jsonl, write_jsonl
from dataset.splits import (
    DEFAULT_SPLIT_SIZES,
    load_split_manifest,
    make_splits,
    sample_initial,
    save_split_manifest,
)

__all__ = [
    'DatasetManifest',
    'load_jsonl',
    'write_jsonl',
    'DEFAULT_SPLIT_SIZES',
    'load_split_manifest',
    'make_splits',
    'sample_initial',
    'save_split_manifest',
]
