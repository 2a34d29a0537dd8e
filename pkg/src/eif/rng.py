"""Deterministic, splittable randomness.

Every stochastic choice in the package (sub-sampling, split normals,
intercepts, rotation angles, synthetic data) flows through :class:`RngStream`
so that a single 64-bit seed reproduces a whole run bit-for-bit.

A stream is a keyed Philox counter-based generator: the 128-bit Philox key
is ``(seed, stream_index)``, so the pair fully names the sequence and two
streams built from the same pair are identical. Child streams are derived by
hashing ``(parent.stream_index, index)`` with a SplitMix64-style finalizer;
derivation is a pure function of those two values, so siblings may be created
in any order, or from different threads, without affecting one another.

The Gaussian and uniform transforms are the ones numpy's ``Generator``
applies on top of the Philox bit stream; :data:`RNG_FAMILY` records the
generator family and numpy version so serialized models state exactly which
bit-level convention they were built under.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

#: Generator family identifier embedded in serialized models.
RNG_FAMILY = f"numpy-philox4x64/{np.__version__}"


def _mix64(a: int, b: int) -> int:
    """Hash two 64-bit words into one.

    For fixed ``a`` this is injective in ``b`` (odd multiplier followed by
    the bijective SplitMix64 finalizer), so the children of one parent never
    collide with each other.
    """
    x = (a * 0x9E3779B97F4A7C15 + b * 0xBF58476D1CE4E5B9 + 0xD1B54A32D192ED03) & _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x


def _check_u64(value: int, name: str) -> int:
    if not isinstance(value, (int, np.integer)):
        raise ValueError(f"{name} must be an integer, got {type(value).__name__}")
    value = int(value)
    if not 0 <= value <= _MASK64:
        raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value}")
    return value


class RngStream:
    """One deterministic random stream.

    A stream is single-owner state: do not share one across concurrent
    tasks. Fan out by deriving one child per task first; derivation never
    touches the parent's draw state.
    """

    __slots__ = ("seed", "stream_index", "_gen")

    def __init__(self, seed: int, stream_index: int = 0):
        self.seed = _check_u64(seed, "seed")
        self.stream_index = _check_u64(stream_index, "stream_index")
        key = np.array([self.seed, self.stream_index], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    @property
    def origin(self) -> tuple[int, int]:
        return (self.seed, self.stream_index)

    def derive(self, index: int) -> "RngStream":
        """Child stream, a pure function of (own origin, index)."""
        index = _check_u64(index, "index")
        return RngStream(self.seed, _mix64(self.stream_index, index))

    # Raw draw primitives. Validation lives in the module-level functions;
    # these advance state and nothing else.

    def standard_normal(self, size=None):
        return self._gen.standard_normal(size)

    def uniform(self, lo, hi, size=None):
        return self._gen.uniform(lo, hi, size)

    def integers(self, lo: int, hi: int) -> int:
        """One integer uniform on [lo, hi)."""
        return int(self._gen.integers(lo, hi))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_index={self.stream_index})"


def make_rng(seed: int) -> RngStream:
    """Root stream (stream_index 0) for a 64-bit unsigned seed."""
    return RngStream(seed, 0)


def derive_stream(parent: RngStream, index: int) -> RngStream:
    """Child stream of ``parent``; independent of how many siblings exist."""
    return parent.derive(index)


def fold_seed(seed: int, index: int) -> int:
    """Derive an independent child seed, e.g. one per probe level.

    Same mixing rule as :func:`derive_stream`, for call sites that take a
    plain seed rather than a stream.
    """
    return _mix64(_check_u64(seed, "seed"), _check_u64(index, "index"))


def draw_standard_normal(rng: RngStream) -> float:
    """One draw from N(0, 1); advances the stream."""
    return float(rng.standard_normal())


def draw_uniform(rng: RngStream, lo: float, hi: float) -> float:
    """One draw uniform on [lo, hi]; returns lo exactly when lo == hi."""
    if not lo <= hi:
        raise ValueError(f"invalid range: lo={lo} > hi={hi}")
    return float(rng.uniform(lo, hi))


def choose_indices(rng: RngStream, n: int, k: int) -> np.ndarray:
    """k distinct indices uniform over range(n), by partial Fisher-Yates.

    O(k) swaps over an index table: exact uniformity without materializing
    a full permutation.
    """
    if k < 0 or k > n:
        raise ValueError(f"cannot choose {k} indices from {n}")
    idx = np.arange(n)
    for i in range(k):
        j = rng.integers(i, n)
        idx[i], idx[j] = idx[j], idx[i]
    return idx[:k].copy()


def subsample(rng: RngStream, data: np.ndarray, psi: int) -> np.ndarray:
    """psi rows drawn uniformly without replacement; input left unmodified."""
    data = np.asarray(data)
    n = data.shape[0]
    if psi < 1:
        raise ValueError(f"psi must be at least 1, got {psi}")
    if psi > n:
        raise ValueError(f"insufficient data: psi={psi} exceeds dataset size {n}")
    return data[choose_indices(rng, n, psi)].copy()
