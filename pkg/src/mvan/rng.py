"""Labeled, splittable random streams on top of a counter-based generator.

Every stochastic consumer (parameter init, dropout, shuffling, the synthetic
generator) pulls its own labeled substream from one root seed, so any single
component can be re-run in isolation and still see the exact same randomness.
Streams are derived by hashing ``(seed, label)`` into a Philox key, which makes
them independent of the order in which they are requested.
"""

from __future__ import annotations

import hashlib

import numpy as np


class RngTree:
    """Root of a family of independent, reproducible random streams."""

    def __init__(self, seed: int):
        self.seed = int(seed)

    def stream(self, label: str) -> np.random.Generator:
        """Return a fresh generator for ``label``, always starting at the same state.

        Calling twice with the same label gives two generators that emit
        identical sequences.
        """
        digest = hashlib.sha256(f"{self.seed}:{label}".encode("utf-8")).digest()
        key = int.from_bytes(digest[:16], "little")
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, label: str) -> "RngTree":
        """Derive a subtree; its streams are independent of the parent's."""
        digest = hashlib.sha256(f"{self.seed}:{label}".encode("utf-8")).digest()
        return RngTree(int.from_bytes(digest[16:24], "little"))
