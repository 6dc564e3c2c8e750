"""Deterministic 64-bit PRNG with named, independent substreams.

The generator is counter-based SplitMix64: draw ``k`` (0-indexed from the
stream start) is ``mix64(base + (k + 1) * GAMMA)`` with all arithmetic mod
2**64.  Because a draw depends only on ``(base, k)``, bulk generation
vectorizes over the counter while staying bit-identical to the scalar
definition, and an independent reimplementation needs nothing beyond the
constants below.

Derived transforms are pinned exactly:

* ``uniform``: ``(u >> 11) * 2**-53`` in ``[0, 1)``.
* ``normal``: Box-Muller on consecutive draw pairs ``(a, b)``:
  ``u1 = ((a >> 11) + 1) * 2**-53`` in ``(0, 1]``,
  ``u2 = (b >> 11) * 2**-53``, ``r = sqrt(-2 ln u1)``, yielding
  ``r cos(2 pi u2)`` then ``r sin(2 pi u2)``.  ``n`` values consume
  ``2 * ceil(n / 2)`` draws.
* ``bounded(m)``: one draw modulo ``m``.
* ``shuffle``: Fisher-Yates, ``for i in n-1..1: j = bounded(i + 1); swap``.

``split(name)`` derives an independent stream with base
``mix64(base ^ fnv1a64(name))`` without consuming parent state; reusing a
name reproduces the same child stream.
"""

from __future__ import annotations

import math

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def fnv1a64(data: bytes, seed_bytes: bytes = b"") -> int:
    """FNV-1a 64-bit hash; ``seed_bytes`` are folded in before ``data``."""
    h = FNV_OFFSET
    for b in seed_bytes:
        h = ((h ^ b) * FNV_PRIME) & _MASK
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & _MASK
    return h


def mix64(z: int) -> int:
    """SplitMix64 finalizer."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(0xBF58476D1CE4E5B9)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


class Rng:
    """Seedable deterministic stream; see the module docstring for the spec."""

    def __init__(self, seed: int, _base: int | None = None):
        self.base = (seed if _base is None else _base) & _MASK
        self.counter = 0

    def split(self, name: str) -> "Rng":
        """Independent child stream keyed by ``name``; parent state untouched."""
        return Rng(0, _base=mix64(self.base ^ fnv1a64(name.encode("utf-8"))))

    def _raw(self, n: int) -> np.ndarray:
        ks = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        self.counter += n
        return _mix64_array(np.uint64(self.base) + ks * np.uint64(GAMMA))

    def next_u64(self) -> int:
        return int(self._raw(1)[0])

    def uniform(self, n: int) -> np.ndarray:
        """``n`` doubles in ``[0, 1)``."""
        return (self._raw(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def normal(self, n: int) -> np.ndarray:
        """``n`` standard normal doubles via Box-Muller (pairwise)."""
        if n == 0:
            return np.zeros(0)
        pairs = (n + 1) // 2
        raw = self._raw(2 * pairs)
        u1 = ((raw[0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53
        u2 = (raw[1::2] >> np.uint64(11)).astype(np.float64) * 2.0**-53
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * math.pi * u2
        out = np.empty(2 * pairs)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:n]

    def bounded(self, m: int) -> int:
        """One integer in ``[0, m)`` (modulo reduction)."""
        if m <= 0:
            raise ValueError("bounded() requires m >= 1")
        return self.next_u64() % m

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.bounded(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> list[int]:
        out = list(range(n))
        self.shuffle(out)
        return out
