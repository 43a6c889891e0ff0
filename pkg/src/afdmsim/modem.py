"""QAM mapping and the AFDM modulator/demodulator front end."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .daft import AfdmParams, daft, idaft


def _gray_to_index(g: np.ndarray, bits: int) -> np.ndarray:
    """Decode binary-reflected Gray codes to plain integers."""
    idx = g.copy()
    shift = 1
    while shift < bits:
        idx ^= idx >> shift
        shift *= 2
    return idx


@dataclass(frozen=True)
class Constellation:
    """Gray-coded square QAM with unit average symbol energy.

    Labeling convention: the first half of each symbol's bits Gray-codes the
    imaginary axis, the second half the real axis, with code 0 on the most
    positive level.  For 4-QAM this gives 00 -> (+1+1j)/sqrt(2),
    01 -> (-1+1j)/sqrt(2), 11 -> (-1-1j)/sqrt(2), 10 -> (+1-1j)/sqrt(2).
    """

    order: int
    points: np.ndarray = field(repr=False)
    bits_per_symbol: int

    @classmethod
    def qam(cls, order: int) -> "Constellation":
        b = int(np.log2(order))
        if 2 ** b != order or b % 2 != 0:
            raise ValueError(f"square QAM order must be a power of 4, got {order}")
        half = b // 2
        levels = 2 ** half
        # axis level for Gray code g: most positive level at g=0
        codes = np.arange(levels)
        axis = (levels - 1) - 2 * _gray_to_index(codes, half)
        idx = np.arange(order)
        im = axis[idx >> half]
        re = axis[idx & (levels - 1)]
        scale = np.sqrt(2.0 * (levels * levels - 1) / 3.0)
        pts = (re + 1j * im) / scale
        return cls(order=order, points=pts, bits_per_symbol=b)

    def index_bits(self) -> np.ndarray:
        """(Q, bits_per_symbol) table of the bit label for each point index."""
        idx = np.arange(self.order)
        shifts = np.arange(self.bits_per_symbol - 1, -1, -1)
        return (idx[:, None] >> shifts[None, :]) & 1


def map_bits(bits: np.ndarray, constellation: Constellation) -> np.ndarray:
    """Map a bit sequence to constellation symbols."""
    bits = np.asarray(bits, dtype=np.int64)
    b = constellation.bits_per_symbol
    if bits.size % b != 0:
        raise ValueError(f"bit count {bits.size} not divisible by {b} bits/symbol")
    groups = bits.reshape(-1, b)
    shifts = np.arange(b - 1, -1, -1)
    idx = (groups << shifts[None, :]).sum(axis=1)
    return constellation.points[idx]


def slice_to_index(symbols: np.ndarray, constellation: Constellation) -> np.ndarray:
    """Nearest-point decision indices; ties go to the lowest point index."""
    symbols = np.asarray(symbols, dtype=np.complex128)
    d2 = np.abs(symbols[:, None] - constellation.points[None, :]) ** 2
    return np.argmin(d2, axis=1)


def hard_demap(symbols: np.ndarray, constellation: Constellation) -> np.ndarray:
    """Slice noisy symbols to the nearest constellation point and emit its bits."""
    idx = slice_to_index(symbols, constellation)
    return constellation.index_bits()[idx].reshape(-1)


@dataclass(frozen=True)
class TxFrame:
    """One transmitted AFDM frame: DAFT-domain symbols, time samples, prefix.

    cpp[i] holds the prefix sample at time index i - L (i = 0..L-1).
    """

    daft_domain: np.ndarray
    time_domain: np.ndarray
    cpp: np.ndarray


def afdm_modulate(x: np.ndarray, params: AfdmParams) -> TxFrame:
    """IDAFT plus chirp-periodic prefix of length params.cpp_len."""
    s = idaft(x, params)
    n, big_l = params.n, params.cpp_len
    # prefix sample at time n0 = -L..-1 is s[N+n0] * exp(-j*2*pi*c1*(N^2 + 2*N*n0))
    n0 = np.arange(-big_l, 0)
    cpp = s[n + n0] * np.exp(-2j * np.pi * params.c1 * (n * n + 2 * n * n0))
    return TxFrame(daft_domain=np.asarray(x, dtype=np.complex128), time_domain=s, cpp=cpp)


def afdm_demodulate(r: np.ndarray, params: AfdmParams) -> np.ndarray:
    """DAFT of the prefix-stripped received frame."""
    return daft(r, params)
