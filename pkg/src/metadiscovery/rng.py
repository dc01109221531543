"""Seed derivation for reproducible, order-independent random streams."""
from __future__ import annotations

import hashlib
import random


def derive_seed(master: int, *labels: object) -> int:
    """Hash a master seed and a label path into a 64-bit child seed.

    Children depend only on (master, labels), never on how many draws other
    streams consumed, so battles and teams can be generated in any order.
    """
    key = ":".join([str(int(master))] + [str(label) for label in labels])
    digest = hashlib.blake2b(key.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def stream(master: int, *labels: object) -> random.Random:
    return random.Random(derive_seed(master, *labels))
