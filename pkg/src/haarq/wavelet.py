"""Orthonormal fast Haar and Walsh-Hadamard transforms on length ``2**n`` vectors.

Haar coefficient layout (coarse to fine): position 0 holds the scaling
coefficient, and the wavelet with scale ``h`` and offset ``l`` sits at
``2**(n-h) + (l-1)``.  The normalised wavelet is ``2**(-h/2)`` times the
step function that is ``+1`` on the first half of its support
``[2**h (l-1), 2**h l)`` and ``-1`` on the second half.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter

SQRT_HALF = np.sqrt(0.5)


@dataclass(frozen=True)
class HaarIndex:
    """Label of a Haar basis vector; ``h == 0`` denotes the scaling vector."""

    h: int = 0
    l: int = 0

    @property
    def is_zero(self) -> bool:
        return self.h == 0

    def __str__(self):
        return "phi0" if self.is_zero else f"psi({self.h},{self.l})"


ZERO = HaarIndex()


def _order(length: int) -> int:
    if length < 1 or length & (length - 1):
        raise InvalidParameter(f"length {length} is not a power of two")
    return length.bit_length() - 1


def _as_vector(v) -> np.ndarray:
    v = np.array(v, dtype=float)
    if v.ndim != 1:
        raise InvalidParameter("expected a one-dimensional vector")
    return v


def layout(n: int, index: HaarIndex) -> int:
    if index.is_zero:
        return 0
    h, l = index.h, index.l
    if not 1 <= h <= n or not 1 <= l <= (1 << (n - h)):
        raise InvalidParameter(f"({h},{l}) is not a Haar index for n={n}")
    return (1 << (n - h)) + (l - 1)


def unlayout(n: int, position: int) -> HaarIndex:
    if not 0 <= position < (1 << n):
        raise InvalidParameter(f"position {position} outside [0, 2**{n})")
    if position == 0:
        return ZERO
    level = position.bit_length() - 1  # position in [2**level, 2**(level+1))
    return HaarIndex(n - level, position - (1 << level) + 1)


def level_of_positions(n: int) -> np.ndarray:
    """Scale ``h`` of every layout position (0 for the scaling coefficient)."""
    pos = np.arange(1 << n)
    level = np.zeros(1 << n, dtype=np.int64)
    level[1:] = n - (np.floor(np.log2(pos[1:])).astype(np.int64))
    return level


def haar_forward(v) -> np.ndarray:
    """Fast orthonormal Haar analysis, O(2**n)."""
    out = _as_vector(v)
    n = _order(out.size)
    size = out.size
    for _ in range(n):
        even, odd = out[0:size:2].copy(), out[1:size:2].copy()
        half = size // 2
        out[:half] = (even + odd) * SQRT_HALF
        out[half:size] = (even - odd) * SQRT_HALF
        size = half
    return out


def haar_inverse(c) -> np.ndarray:
    """Inverse of :func:`haar_forward`."""
    out = _as_vector(c)
    n = _order(out.size)
    size = 1
    for _ in range(n):
        s, d = out[:size].copy(), out[size:2 * size].copy()
        out[0:2 * size:2] = (s + d) * SQRT_HALF
        out[1:2 * size:2] = (s - d) * SQRT_HALF
        size *= 2
    return out


def walsh_hadamard(v) -> np.ndarray:
    """Orthonormal fast Walsh-Hadamard transform in natural order (self-inverse)."""
    out = _as_vector(v)
    n = _order(out.size)
    step = 1
    for _ in range(n):
        blocks = out.reshape(-1, 2, step)
        a, b = blocks[:, 0, :].copy(), blocks[:, 1, :].copy()
        blocks[:, 0, :] = (a + b) * SQRT_HALF
        blocks[:, 1, :] = (a - b) * SQRT_HALF
        step *= 2
    return out


def haar_basis_vector(n: int, index: HaarIndex) -> np.ndarray:
    """Normalised basis vector built directly from the step function."""
    size = 1 << n
    if index.is_zero:
        return np.full(size, 2.0 ** (-n / 2))
    layout(n, index)
    h, l = index.h, index.l
    t = np.arange(size) / 2.0 ** h - (l - 1)
    psi = np.where((t >= 0) & (t < 0.5), 1.0, np.where((t >= 0.5) & (t < 1), -1.0, 0.0))
    return psi * 2.0 ** (-h / 2)


def haar_matrix(n: int) -> np.ndarray:
    """Rows are the normalised Haar basis vectors in layout order (O(4**n))."""
    return np.stack([haar_basis_vector(n, unlayout(n, p)) for p in range(1 << n)])


def hadamard_matrix(n: int) -> np.ndarray:
    i = np.arange(1 << n, dtype=np.uint64)
    signs = np.bitwise_count(i[:, None] & i[None, :]) & 1
    return (1.0 - 2.0 * signs) * 2.0 ** (-n / 2)
