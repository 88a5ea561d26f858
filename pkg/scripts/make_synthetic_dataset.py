"""
Synthetic Dataset Builder
Writes a planted-keyword dataset, its synthetic judge spec and a runnable config
"""

import argparse
import logging
import os
import sys

import yaml

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from backends.synthetic import (
    build_planted_examples,
    keyword_rule_text,
    planted_bayes_accuracy,
    planted_generation_script,
)
from dataset.loader import write_jsonl
from pythonjsonlogger import jsonlogger

# Setup logging
log_handler = logging.StreamHandler()
log_handler.setFormatter(jsonlogger.JsonFormatter())

logger = logging.getLogger()
logger.addHandler(log_handler)
logger.setLevel(logging.INFO)

PLANTED = ("alpha", "bravo", "charlie")
DISTRACTORS = ("delta", "echo", "foxtrot", "golf", "hotel", "india", "juliet", "kilo", "lima")


def main():
    parser = argparse.ArgumentParser(description='Build a synthetic planted-keyword task')
    parser.add_argument('--out-dir', default='data/synthetic', help='Output directory')
    parser.add_argument('--n', type=int, default=700, help='Number of examples (default: 700)')
    parser.add_argument('--keyword-prob', type=float, default=0.3, help='Keyword probability')
    parser.add_argument('--noise', type=float, default=0.0, help='Judge flip probability')
    parser.add_argument('--seed', type=int, default=0, help='Data seed')
    args = parser.parse_args()

    os.makedirs(args.out_dir, exist_ok=True)
    data_path = os.path.join(args.out_dir, 'data.jsonl')
    spec_path = os.path.join(args.out_dir, 'synthetic_judge.yaml')
    config_path = os.path.join(args.out_dir, 'config.yaml')

    examples = build_planted_examples(
        args.n, PLANTED, DISTRACTORS, keyword_prob=args.keyword_prob, seed=args.seed
    )
    write_jsonl(data_path, examples)

    spec = {
        'planted_rules': [keyword_rule_text(k) for k in PLANTED],
        'noise': args.noise,
        'seed': args.seed,
        'generation_script': planted_generation_script(PLANTED, DISTRACTORS),
    }
    with open(spec_path, 'w', encoding='utf-8') as f:
        yaml.safe_dump(spec, f, sort_keys=False)

    config = {
        'run_id': 'synthetic',
        'dataset': {
            'path': data_path,
            'templates': 'templates/generic.yaml',
            'manifest': {'name': 'synthetic', 'field_names': ['text']},
        },
        'backend': {'provider': 'synthetic', 'synthetic_spec': spec_path},
        'seeds': [1, 2, 3],
        'output_dir': os.path.join(args.out_dir, 'runs'),
        'cache_path': os.path.join(args.out_dir, 'cache', 'judgments.jsonl'),
    }
    with open(config_path, 'w', encoding='utf-8') as f:
        yaml.safe_dump(config, f, sort_keys=False)

    positives = sum(e.label for e in examples)
    bayes = planted_bayes_accuracy(len(PLANTED), args.keyword_prob, args.noise)
    print(f"✅ {len(examples)} examples ({positives} positive) written to {data_path}")
    print(f"   Judge spec: {spec_path} (noise={args.noise}, Bayes accuracy {bayes:.4f})")
    print(f"   Config: {config_path}")
    print(f"   Run it with: rlie run --config {config_path}")


if __name__ == "__main__":
    main()
