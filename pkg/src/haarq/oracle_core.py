"""Haar Problem oracles: construction, promise detection and query accounting.

Index conventions: an oracle on ``n`` bits serves indices ``0 <= i < 2**n``.
Bit position ``p`` (1-based, least significant first) of ``i`` is
``(i >> (p - 1)) & 1``.  Blocks are numbered from ``l = 1``; the block bit
``b_l`` is stored at ``b[l - 1]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidParameter, PromiseViolation

MASK64 = (1 << 64) - 1
LAZY_MAX_N = 64
EAGER_MAX_N = 30

_GOLDEN = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int, all arithmetic mod 2**64."""
    z = (z + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _MUL1) & MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & MASK64
    return z ^ (z >> 31)


def mix64_array(z: np.ndarray) -> np.ndarray:
    """Vectorised :func:`mix64` over a ``uint64`` array."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = z + np.uint64(_GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MUL1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MUL2)
    return z ^ (z >> np.uint64(31))


def _as_bits(values, name="bits") -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise InvalidParameter(f"{name} must be one-dimensional")
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise InvalidParameter(f"{name} entries must be 0 or 1")
    return arr.astype(np.uint8)


def _log2_exact(length: int) -> int:
    if length < 1 or length & (length - 1):
        raise InvalidParameter(f"length {length} is not a power of two")
    return length.bit_length() - 1


@dataclass(frozen=True, eq=False)
class HaarInstance:
    """Promise parameters of a Haar Problem oracle: ``(n, h_star, b)``."""

    n: int
    h_star: int
    b: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, HaarInstance):
            return NotImplemented
        return (self.n, self.h_star) == (other.n, other.h_star) and np.array_equal(self.b, other.b)

    def __hash__(self):
        return hash((self.n, self.h_star, self.b.tobytes()))

    @property
    def num_blocks(self) -> int:
        return 1 << (self.n - self.h_star)

    def to_dict(self) -> dict:
        return {"n": self.n, "h": self.h_star, "b": [int(v) for v in self.b]}

    @classmethod
    def from_dict(cls, d: dict) -> "HaarInstance":
        try:
            return make_instance(int(d["n"]), int(d["h"]), d["b"])
        except KeyError as exc:
            raise InvalidParameter(f"instance JSON missing key {exc}") from None


@dataclass(frozen=True)
class ParityInstance:
    """Bernstein-Vazirani instance: ``x_i = popcount(i & k) mod 2``."""

    n: int
    k: int

    def __post_init__(self):
        if self.n < 1 or self.n > EAGER_MAX_N:
            raise InvalidParameter(f"n={self.n} out of range")
        if not 0 <= self.k < (1 << self.n):
            raise InvalidParameter(f"k={self.k} is not an {self.n}-bit string")

    def to_dict(self) -> dict:
        return {"n": self.n, "k": self.k}

    @classmethod
    def from_dict(cls, d: dict) -> "ParityInstance":
        return cls(int(d["n"]), int(d["k"]))


class Oracle:
    """Bit oracle on ``[0, 2**n)`` with a query counter.

    Eager oracles hold the full bit vector.  Lazy oracles compute each bit
    from ``(h_star, seed)`` on demand and keep no cache, so they work up to
    ``n = 64``.

    Not thread-safe: the counter belongs to a single handle.
    """

    def __init__(self, n: int, bits=None, *, h_star: int | None = None, seed: int | None = None):
        if n < 1:
            raise InvalidParameter("n must be positive")
        self.n = n
        self.queries = 0
        if bits is not None:
            bits = _as_bits(bits)
            if bits.size != 1 << n:
                raise InvalidParameter(f"expected {1 << n} bits, got {bits.size}")
            self._bits = bits
            self.h_star = None
            self.seed = None
        else:
            if h_star is None or seed is None:
                raise InvalidParameter("lazy oracle needs h_star and seed")
            if not 1 <= h_star <= n <= LAZY_MAX_N:
                raise InvalidParameter(f"need 1 <= h_star <= n <= {LAZY_MAX_N}")
            if not 0 <= seed <= MASK64:
                raise InvalidParameter("seed must be a 64-bit unsigned integer")
            self._bits = None
            self.h_star = h_star
            self.seed = seed

    @property
    def is_lazy(self) -> bool:
        return self._bits is None

    @property
    def size(self) -> int:
        return 1 << self.n

    def _lazy_bit(self, i: int) -> int:
        h = self.h_star
        block = (i >> h) + 1
        b = mix64(self.seed ^ mix64(block)) & 1
        return b ^ ((i >> (h - 1)) & 1)

    def query(self, i: int) -> int:
        i = int(i)
        if not 0 <= i < (1 << self.n):
            raise InvalidParameter(f"index {i} outside [0, 2**{self.n})")
        self.queries += 1
        if self._bits is None:
            return self._lazy_bit(i)
        return int(self._bits[i])

    def peek_all(self) -> np.ndarray:
        """Every bit as a ``uint8`` array, without touching the counter.

        Used by the simulator (which charges a single phase query itself) and
        by verification code.
        """
        if self._bits is not None:
            return self._bits.copy()
        if self.n > EAGER_MAX_N:
            raise InvalidParameter(f"cannot materialise 2**{self.n} bits")
        h = self.h_star
        i = np.arange(1 << self.n, dtype=np.uint64)
        block = (i >> np.uint64(h)) + np.uint64(1)
        b = mix64_array(np.uint64(self.seed) ^ mix64_array(block)) & np.uint64(1)
        return (b ^ ((i >> np.uint64(h - 1)) & np.uint64(1))).astype(np.uint8)

    def phase_query(self) -> np.ndarray:
        """One application of the phase oracle: returns ``(-1)**x_i`` and counts one query."""
        self.queries += 1
        return 1.0 - 2.0 * self.peek_all()

    def to_dict(self) -> dict:
        if self._bits is None:
            return {"n": self.n, "h": self.h_star, "seed": self.seed}
        return {"n": self.n, "bits": "".join(str(int(v)) for v in self._bits)}

    @classmethod
    def from_dict(cls, d: dict) -> "Oracle":
        if "bits" in d:
            bits = str(d["bits"])
            if set(bits) - {"0", "1"}:
                raise InvalidParameter("bits string must contain only 0 and 1")
            return cls(int(d["n"]), [int(ch) for ch in bits])
        if "seed" in d:
            return lazy_oracle(int(d["n"]), int(d["h"]), int(d["seed"]))
        if "k" in d:
            return parity_oracle(ParityInstance.from_dict(d))
        if "b" in d:
            return expand(HaarInstance.from_dict(d))
        raise InvalidParameter("unrecognised oracle JSON")

    def __repr__(self):
        kind = f"lazy h*={self.h_star} seed={self.seed}" if self.is_lazy else "eager"
        return f"Oracle(n={self.n}, {kind}, queries={self.queries})"


def make_instance(n: int, h_star: int, b: Sequence[int]) -> HaarInstance:
    if n < 1:
        raise InvalidParameter("n must be positive")
    if not 1 <= h_star <= n:
        raise InvalidParameter(f"h_star={h_star} outside 1..{n}")
    b = _as_bits(b, "b")
    if b.size != 1 << (n - h_star):
        raise InvalidParameter(f"b must have length 2**(n-h_star) = {1 << (n - h_star)}, got {b.size}")
    b.setflags(write=False)
    return HaarInstance(n, h_star, b)


def instance_bits(instance: HaarInstance) -> np.ndarray:
    h = instance.h_star
    half = 1 << (h - 1)
    pattern = np.concatenate([np.zeros(half, np.uint8), np.ones(half, np.uint8)])
    return np.repeat(instance.b, 1 << h) ^ np.tile(pattern, instance.num_blocks)


def expand(instance: HaarInstance) -> Oracle:
    """Eager oracle whose bits satisfy the Haar promise for ``instance``."""
    if instance.n > EAGER_MAX_N:
        raise InvalidParameter(f"n={instance.n} too large to expand eagerly; use lazy_oracle")
    return Oracle(instance.n, instance_bits(instance))


def _fits(bits: np.ndarray, n: int, h: int):
    blocks = bits.reshape(1 << (n - h), 2, 1 << (h - 1))
    first, second = blocks[:, 0, :], blocks[:, 1, :]
    if not (np.all(first == first[:, :1]) and np.all(second == second[:, :1])):
        return None
    if np.any(first[:, 0] == second[:, 0]):
        return None
    return first[:, 0].copy()


def detect_h_star(bits, check_unique: bool = False):
    """Return the unique ``(h_star, b)`` for which ``bits`` satisfies the promise.

    Scans ``h = 1..n`` in ascending order.  With ``check_unique`` the scan
    continues past the first match and raises if a second ``h`` fits.
    """
    bits = _as_bits(bits)
    n = _log2_exact(bits.size)
    if n < 1:
        raise InvalidParameter("need at least two bits")
    found = None
    for h in range(1, n + 1):
        b = _fits(bits, n, h)
        if b is None:
            continue
        if found is None:
            found = (h, b)
            if not check_unique:
                break
        else:
            raise PromiseViolation(f"both h={found[0]} and h={h} fit the promise")
    if found is None:
        raise PromiseViolation("no h in 1..n satisfies the Haar promise")
    return found


def lazy_oracle(n: int, h_star: int, seed: int) -> Oracle:
    if n > LAZY_MAX_N:
        raise InvalidParameter(f"lazy oracles support n <= {LAZY_MAX_N}")
    return Oracle(n, h_star=h_star, seed=seed)


def lazy_instance(n: int, h_star: int, seed: int) -> HaarInstance:
    """The eager instance induced by a lazy oracle (small ``n`` only)."""
    blocks = np.arange(1, (1 << (n - h_star)) + 1, dtype=np.uint64)
    b = mix64_array(np.uint64(seed) ^ mix64_array(blocks)) & np.uint64(1)
    return make_instance(n, h_star, b.astype(np.uint8))


def random_instance(n: int, seed) -> HaarInstance:
    if n < 1:
        raise InvalidParameter("n must be positive")
    rng = np.random.default_rng(seed)
    h = int(rng.integers(1, n + 1))
    b = rng.integers(0, 2, size=1 << (n - h), dtype=np.uint8)
    return make_instance(n, h, b)


def parity_bits(instance: ParityInstance) -> np.ndarray:
    i = np.arange(1 << instance.n, dtype=np.uint64)
    return (np.bitwise_count(i & np.uint64(instance.k)) & 1).astype(np.uint8)


def parity_oracle(instance: ParityInstance) -> Oracle:
    return Oracle(instance.n, parity_bits(instance))


def lowest_set_bit(k: int) -> int:
    """1-based position of the least significant set bit of ``k`` (``k > 0``)."""
    if k <= 0:
        raise InvalidParameter("k must be positive")
    return (k & -k).bit_length()
