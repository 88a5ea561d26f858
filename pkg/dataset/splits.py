"""
Seeded Splits and Sampling
Deterministic train/validation/test partitioning and example sampling

All randomness goes through numpy's PCG64 generator (`np.random.default_rng(seed)`),
so every function here is a pure function of its inputs and seed.
"""

import json
import logging
import math
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from core.errors import SplitError, UsageError
from core.types import Example, SplitBundle

logger = logging.getLogger(__name__)

DEFAULT_SPLIT_SIZES: Tuple[int, int, int] = (200, 200, 300)


def _shrink_sizes(n: int, sizes: Sequence[int]) -> Tuple[int, int, int]:
    """Scale requested sizes down to a pool of n examples, using every example"""
    total = sum(sizes)
    raw = [s * n / total for s in sizes]
    shrunk = [math.floor(r) for r in raw]

    remainder = n - sum(shrunk)
    by_fraction = sorted(range(3), key=lambda i: raw[i] - shrunk[i], reverse=True)
    for i in by_fraction[:remainder]:
        shrunk[i] += 1

    # every split keeps at least one example
    for i in range(3):
        while shrunk[i] == 0:
            donor = max(range(3), key=lambda j: shrunk[j])
            shrunk[donor] -= 1
            shrunk[i] += 1

    return shrunk[0], shrunk[1], shrunk[2]


def make_splits(
    examples: Sequence[Example],
    sizes: Sequence[int] = DEFAULT_SPLIT_SIZES,
    seed: int = 42,
) -> SplitBundle:
    """
    Shuffle under `seed`, then slice train / validation / test sequentially

    When the pool is smaller than the requested total, sizes shrink in proportion
    and all examples are used.

    Raises:
        SplitError: If fewer than 3 examples are available
    """
    if len(sizes) != 3 or any(s < 1 for s in sizes):
        raise UsageError(f"split sizes must be three positive integers, got {sizes}")
    n = len(examples)
    if n < 3:
        raise SplitError(f"need at least 3 examples to split, got {n}")

    if n < sum(sizes):
        n_train, n_val, n_test = _shrink_sizes(n, sizes)
        logger.warning(
            f"Pool of {n} examples is smaller than requested {tuple(sizes)}; "
            f"using ({n_train}, {n_val}, {n_test})"
        )
    else:
        n_train, n_val, n_test = sizes

    order = np.random.default_rng(seed).permutation(n)
    shuffled = [examples[i] for i in order]

    bundle = SplitBundle(
        train=tuple(shuffled[:n_train]),
        validation=tuple(shuffled[n_train:n_train + n_val]),
        test=tuple(shuffled[n_train + n_val:n_train + n_val + n_test]),
        seed=seed,
    )
    logger.info(f"Splits for seed {seed}: {bundle.sizes()}")
    return bundle


def sample_initial(train: Sequence[Example], k: int, seed: int) -> List[Example]:
    """
    Draw k distinct training examples uniformly without replacement

    Returns all of `train` (in shuffled order) when k exceeds its size.
    """
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    if not train:
        raise UsageError("cannot sample from an empty training split")

    rng = np.random.default_rng(seed)
    picked = rng.choice(len(train), size=min(k, len(train)), replace=False)
    return [train[i] for i in picked]


def save_split_manifest(
    bundle: SplitBundle,
    path: Union[str, Path],
    requested_sizes: Sequence[int] = DEFAULT_SPLIT_SIZES,
):
    """Persist the ids of each split as JSON"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    manifest = {
        'seed': bundle.seed,
        'sizes': list(requested_sizes),
        'train': [e.id for e in bundle.train],
        'validation': [e.id for e in bundle.validation],
        'test': [e.id for e in bundle.test],
    }
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(manifest, f, indent=2)
    logger.info(f"Split manifest written to {path}")


def load_split_manifest(path: Union[str, Path], examples: Sequence[Example]) -> SplitBundle:
    """Rebuild a SplitBundle from a manifest written by `save_split_manifest`"""
    with open(path, 'r', encoding='utf-8') as f:
        manifest = json.load(f)

    by_id: Dict[str, Example] = {e.id: e for e in examples}
    missing = [
        eid for key in ('train', 'validation', 'test') for eid in manifest[key]
        if eid not in by_id
    ]
    if missing:
        raise SplitError(f"split manifest references {len(missing)} unknown ids, e.g. {missing[0]}")

    return SplitBundle(
        train=tuple(by_id[eid] for eid in manifest['train']),
        validation=tuple(by_id[eid] for eid in manifest['validation']),
        test=tuple(by_id[eid] for eid in manifest['test']),
        seed=int(manifest['seed']),
    )
