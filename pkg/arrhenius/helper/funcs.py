from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable

import numpy as np

from .converter import to_jsonable


def indent_str(prefix: str = " ", *, level: int = 0, tabwidth: int = 3) -> str:
    return prefix * level * tabwidth


def canonical_json(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, separators=(",", ":"))


def stable_hash(obj) -> int:
    """64-bit BLAKE2b digest of the canonical JSON form of obj."""
    digest = hashlib.blake2b(canonical_json(obj).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def derive_seed(master_seed: int, point_key, trial_index: int) -> int:
    """
    Keyed 64-bit seed for one trial.

    Mixes (master_seed, hash of the grid point, trial_index) through numpy's SeedSequence, so distinct
    points and trial indices give independent streams and the mapping never depends on scheduling.
    """
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(stable_hash(point_key), int(trial_index)))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def as_generator(rng=None) -> tuple[np.random.Generator, int | None]:
    """Accept a Generator, an integer seed or None; return the generator and the seed if one was given."""
    if isinstance(rng, np.random.Generator):
        return rng, None
    if rng is None:
        return np.random.default_rng(), None
    return np.random.default_rng(int(rng)), int(rng)


def segment_logsumexp(values: np.ndarray, indptr: np.ndarray) -> np.ndarray:
    """
    log-sum-exp of each CSR segment values[indptr[k]:indptr[k+1]], max-shifted.

    Every segment must be nonempty.
    """
    starts = indptr[:-1]
    peak = np.maximum.reduceat(values, starts)
    shifted = np.exp(values - np.repeat(peak, np.diff(indptr)))
    return peak + np.log(np.add.reduceat(shifted, starts))


def parallel_map(func: Callable, items: Iterable, workers: int = 1, chunksize: int = 4) -> list:
    """Ordered map, fanned out over worker processes when workers > 1."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items, chunksize=chunksize))
