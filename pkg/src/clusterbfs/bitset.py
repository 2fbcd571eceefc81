"""Word-packed subsets of a cluster's sources."""

from __future__ import annotations

import numpy as np

WORD_BITS = 64


def words_for(k: int) -> int:
    return max(1, -(-k // WORD_BITS))


def capacity_mask(k: int) -> np.ndarray:
    """Words with exactly the low ``k`` bits set."""
    words = np.zeros(words_for(k), dtype=np.uint64)
    full, rem = divmod(k, WORD_BITS)
    words[:full] = np.uint64(0xFFFFFFFFFFFFFFFF)
    if rem:
        words[full] = np.uint64((1 << rem) - 1)
    return words


class BitSubset:
    """Subset of ``{0, ..., k-1}`` stored in ``ceil(k/64)`` uint64 words.

    Bit ``i`` of the packed vector stands for the cluster's ``i``-th source.
    """

    __slots__ = ("k", "words")

    def __init__(self, k: int, words=None):
        if k < 1:
            raise ValueError("capacity must be >= 1")
        self.k = k
        if words is None:
            self.words = np.zeros(words_for(k), dtype=np.uint64)
        else:
            self.words = np.array(words, dtype=np.uint64).reshape(-1)
            if self.words.size != words_for(k):
                raise ValueError(f"expected {words_for(k)} words for k={k}, got {self.words.size}")
            if np.any(self.words & ~capacity_mask(k)):
                raise ValueError("bits set at positions >= k")

    @classmethod
    def from_members(cls, k: int, members) -> BitSubset:
        out = cls(k)
        for j in members:
            if not 0 <= j < k:
                raise ValueError(f"member {j} outside [0, {k})")
            out.words[j // WORD_BITS] |= np.uint64(1 << (j % WORD_BITS))
        return out

    @classmethod
    def from_bitstring(cls, bits: str) -> BitSubset:
        """Parse a string like ``"1010"`` with source 0 leftmost."""
        return cls.from_members(len(bits), [i for i, ch in enumerate(bits) if ch == "1"])

    def _check(self, other: BitSubset) -> None:
        if self.k != other.k:
            raise ValueError(f"capacity mismatch: {self.k} vs {other.k}")

    def union(self, other: BitSubset) -> BitSubset:
        self._check(other)
        return BitSubset._wrap(self.k, self.words | other.words)

    def difference(self, other: BitSubset) -> BitSubset:
        self._check(other)
        return BitSubset._wrap(self.k, self.words & ~other.words)

    def intersects(self, other: BitSubset) -> bool:
        self._check(other)
        return bool(np.any(self.words & other.words))

    __or__ = union
    __sub__ = difference

    @classmethod
    def _wrap(cls, k: int, words: np.ndarray) -> BitSubset:
        out = cls.__new__(cls)
        out.k = k
        out.words = words
        return out

    def members(self) -> list[int]:
        return [j for j in range(self.k) if (int(self.words[j // WORD_BITS]) >> (j % WORD_BITS)) & 1]

    def __contains__(self, j: int) -> bool:
        return 0 <= j < self.k and bool((int(self.words[j // WORD_BITS]) >> (j % WORD_BITS)) & 1)

    def __len__(self) -> int:
        return sum(bin(int(w)).count("1") for w in self.words)

    def __bool__(self) -> bool:
        return bool(np.any(self.words))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitSubset):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.words, other.words)

    def __hash__(self) -> int:
        return hash((self.k, self.words.tobytes()))

    def to_bitstring(self) -> str:
        return "".join("1" if j in self else "0" for j in range(self.k))

    def __repr__(self) -> str:
        return f"BitSubset({self.to_bitstring()!r})"


def bitset_union(a: BitSubset, b: BitSubset) -> BitSubset:
    return a.union(b)


def bitset_difference(a: BitSubset, b: BitSubset) -> BitSubset:
    return a.difference(b)


def bitset_intersect_nonempty(a: BitSubset, b: BitSubset) -> bool:
    return a.intersects(b)
