"""Deterministic seed derivation for independent runs.

All randomness in a CLI invocation flows from one base seed; every
consumer derives its own stream as ``base + blake2s(role) + index``
(mod 2**63), so adding or reordering consumers never shifts the streams of
the others.
"""

from __future__ import annotations

import hashlib


def derive_seed(base_seed: int, role: str, index: int = 0) -> int:
    digest = hashlib.blake2s(role.encode("utf-8"), digest_size=8).digest()
    return (int(base_seed) + int.from_bytes(digest, "big") + int(index)) % (1 << 63)
