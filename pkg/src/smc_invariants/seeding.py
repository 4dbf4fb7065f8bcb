"""Deterministic derivation of independent random streams.

Every stochastic stage of a run owns a private stream derived from the
master seed plus a purpose tag (and, for per-input work, the input index).
Streams are therefore independent of execution order, which is what makes
serial and parallel runs byte-identical.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _tag_to_int(tag: str | int) -> int:
    if isinstance(tag, str):
        digest = hashlib.sha256(tag.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "little")
    return int(tag)


def substream(master_seed: int, *tags: str | int) -> np.random.Generator:
    """Return a Generator keyed by (master_seed, *tags).

    Tags may be strings (hashed stably) or integers (used as-is), so
    ``substream(seed, "motors", 17)`` always names the same stream.
    """
    entropy = [int(master_seed)] + [_tag_to_int(t) for t in tags]
    return np.random.default_rng(np.random.SeedSequence(entropy))
