"""
Shared fixtures: manifests, template sets, planted-keyword tasks and synthetic backends
"""

import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from backends.synthetic import (
    SyntheticBackend,
    SyntheticJudgeSpec,
    build_planted_examples,
    keyword_rule_text,
    planted_generation_script,
)
from core.types import Example
from dataset.loader import DatasetManifest
from dataset.splits import make_splits
from genesis.templates import load_template_set

REPO_ROOT = Path(__file__).resolve().parent.parent
GENERIC_TEMPLATES = REPO_ROOT / 'templates' / 'generic.yaml'
RETWEET_TEMPLATES = REPO_ROOT / 'templates' / 'retweets.yaml'

PLANTED = ("alpha", "bravo", "charlie")
DISTRACTORS = ("delta", "echo", "foxtrot", "golf", "hotel", "india", "juliet", "kilo", "lima")


def make_example(example_id: str, text: str, label: int) -> Example:
    return Example(id=example_id, fields={'text': text}, label=label)


def planted_spec(noise: float = 0.0, seed: int = 0) -> SyntheticJudgeSpec:
    return SyntheticJudgeSpec(
        planted_rules=[keyword_rule_text(k) for k in PLANTED],
        noise=noise,
        seed=seed,
        generation_script=planted_generation_script(PLANTED, DISTRACTORS),
    )


@pytest.fixture
def manifest():
    return DatasetManifest(name='generic')


@pytest.fixture
def retweet_manifest():
    return DatasetManifest(
        name='retweets',
        positive_token='first',
        negative_token='second',
        field_names=['first_tweet', 'second_tweet'],
    )


@pytest.fixture
def templates():
    return load_template_set(GENERIC_TEMPLATES)


@pytest.fixture
def retweet_templates():
    return load_template_set(RETWEET_TEMPLATES)


@pytest.fixture
def planted_examples():
    return build_planted_examples(700, PLANTED, DISTRACTORS, keyword_prob=0.3, seed=7)


@pytest.fixture
def planted_splits(planted_examples):
    return make_splits(planted_examples, (200, 200, 300), seed=11)


@pytest.fixture
def synthetic_backend(manifest):
    return SyntheticBackend(planted_spec(), manifest)
