"""Discrete affine Fourier transform (DAFT) algebra.

The square-case DAFT is the chirp-DFT-chirp product A = Lambda_c2 F Lambda_c1
with F the unitary DFT matrix.  Both a factored FFT pipeline and a dense
matrix materialization are provided; the dense path doubles as the oracle
for everything downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AfdmParams:
    """Frame size and chirp rates governing every transform.

    n        : symbols per frame (N)
    c1, c2   : first/second chirp rate
    cpp_len  : chirp-periodic prefix length L in samples
    """

    n: int
    c1: float
    c2: float = 0.0
    cpp_len: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"frame size must be >= 2, got {self.n}")
        if not 0 <= self.cpp_len < self.n:
            raise ValueError(f"cpp_len must satisfy 0 <= L < N, got {self.cpp_len}")

    @classmethod
    def for_channel(cls, n: int, alpha_max: int, cpp_len: int = 0) -> "AfdmParams":
        """Chirp rates tuned to the channel's Doppler spread: c1=(2*alpha_max+1)/n, c2=0."""
        return cls(n=n, c1=(2 * alpha_max + 1) / n, c2=0.0, cpp_len=cpp_len)


def _check_len(x: np.ndarray, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != (n,):
        raise ValueError(f"frame length {x.shape} does not match N={n}")
    return x


def chirp_diagonal(c: float, n: int) -> np.ndarray:
    """Diagonal of Lambda_c: entry k is exp(-j*2*pi*c*k^2)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    k = np.arange(n, dtype=np.float64)
    return np.exp(-2j * np.pi * c * k * k)


def daft_matrix(params: AfdmParams) -> np.ndarray:
    """Dense unitary transform matrix A = Lambda_c2 F Lambda_c1."""
    n = params.n
    m = np.arange(n)
    f = np.exp(-2j * np.pi * np.outer(m, m) / n) / np.sqrt(n)
    return chirp_diagonal(params.c2, n)[:, None] * f * chirp_diagonal(params.c1, n)[None, :]


def daft(frame: np.ndarray, params: AfdmParams) -> np.ndarray:
    """Forward DAFT via the factored diagonal-FFT-diagonal pipeline."""
    x = _check_len(frame, params.n)
    y = np.fft.fft(chirp_diagonal(params.c1, params.n) * x) / np.sqrt(params.n)
    return chirp_diagonal(params.c2, params.n) * y


def idaft(frame: np.ndarray, params: AfdmParams) -> np.ndarray:
    """Inverse DAFT, A^H = Lambda_c1^H F^H Lambda_c2^H."""
    x = _check_len(frame, params.n)
    y = np.fft.ifft(np.conj(chirp_diagonal(params.c2, params.n)) * x) * np.sqrt(params.n)
    return np.conj(chirp_diagonal(params.c1, params.n)) * y


def chirp_periodic_extend(frame: np.ndarray, k: int, n: int, c1: float) -> complex:
    """Sample s[n + k*N] of the chirp-periodic extension of a length-N frame.

    The extension law is s[n + kN] = exp(j*2*pi*c1*(k^2 N^2 + 2 k N n)) * s[n];
    k=0 returns s[n] unchanged.
    """
    s = np.asarray(frame, dtype=np.complex128)
    big_n = s.shape[0]
    if not 0 <= n < big_n:
        raise ValueError(f"base index must be in [0, N), got {n}")
    phase = np.exp(2j * np.pi * c1 * (k * k * big_n * big_n + 2 * k * big_n * n))
    return complex(phase * s[n])
