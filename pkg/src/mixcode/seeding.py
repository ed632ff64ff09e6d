"""Seed splitting: every component gets its own stream derived from (seed, tag).

``derive_seed(seed, tag)`` is the first 8 bytes (little endian) of
SHA-256 over ``"<seed>/<tag>"``. Adding a new tag never shifts the streams
of existing ones.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(seed: int, tag: str) -> int:
    digest = hashlib.sha256(f"{int(seed)}/{tag}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def rng_for(seed: int, tag: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, tag))
