"""LTV multipath channels and their DAFT-domain effective form.

Three equivalent receive paths are maintained deliberately: the sample-level
time-domain convolution (ground truth), the dense matrix model, and the
sparse closed form used by the detector.  Tests hold them to 1e-10 agreement.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .daft import AfdmParams, daft_matrix
from .modem import TxFrame, afdm_demodulate


@dataclass(frozen=True)
class ChannelPath:
    """One propagation path: complex gain, integer delay, integer Doppler index."""

    gain: complex
    delay: int
    doppler: int


@dataclass(frozen=True)
class ChannelRealization:
    paths: tuple[ChannelPath, ...]
    l_max: int
    alpha_max: int

    def __post_init__(self):
        if len(self.paths) < 1:
            raise ValueError("channel needs at least one path")
        seen = set()
        for p in self.paths:
            if not 0 <= p.delay <= self.l_max:
                raise ValueError(f"delay {p.delay} outside [0, l_max={self.l_max}]")
            if abs(p.doppler) > self.alpha_max:
                raise ValueError(f"doppler {p.doppler} outside +/-{self.alpha_max}")
            key = (p.delay, p.doppler)
            if key in seen:
                raise ValueError(f"duplicate (delay, doppler) pair {key}")
            seen.add(key)

    @property
    def n_paths(self) -> int:
        return len(self.paths)


@dataclass(frozen=True)
class NoiseModel:
    """Complex circular AWGN with total variance n0 (n0/2 per real dimension)."""

    n0: float

    def __post_init__(self):
        if self.n0 < 0:
            raise ValueError("noise variance must be nonnegative")

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.n0 == 0.0:
            return np.zeros(n, dtype=np.complex128)
        scale = np.sqrt(self.n0 / 2.0)
        return rng.normal(0.0, scale, n) + 1j * rng.normal(0.0, scale, n)


def draw_channel(p: int, l_max: int, alpha_max: int, rng: np.random.Generator) -> ChannelRealization:
    """Random P-path realization: gains CN(0, 1/P), first path at delay 0,
    remaining delays uniform on {0..l_max}, Dopplers uniform on [-alpha_max, alpha_max],
    redrawn until all (delay, doppler) pairs are distinct."""
    if p < 1:
        raise ValueError("need at least one path")
    if p > (l_max + 1) * (2 * alpha_max + 1):
        raise ValueError(
            f"cannot place {p} distinct (delay, doppler) pairs with "
            f"l_max={l_max}, alpha_max={alpha_max}"
        )
    while True:
        delays = np.concatenate(([0], rng.integers(0, l_max + 1, p - 1)))
        dopplers = rng.integers(-alpha_max, alpha_max + 1, p)
        pairs = set(zip(delays.tolist(), dopplers.tolist()))
        if len(pairs) == p:
            break
    scale = np.sqrt(1.0 / (2.0 * p))
    gains = rng.normal(0.0, scale, p) + 1j * rng.normal(0.0, scale, p)
    paths = tuple(
        ChannelPath(gain=complex(gains[i]), delay=int(delays[i]), doppler=int(dopplers[i]))
        for i in range(p)
    )
    return ChannelRealization(paths=paths, l_max=l_max, alpha_max=alpha_max)


def apply_channel_timedomain(
    tx: TxFrame,
    ch: ChannelRealization,
    noise: NoiseModel,
    rng: np.random.Generator,
) -> np.ndarray:
    """Ground-truth receive path: per-sample delay/Doppler sum reading the CPP
    for negative time indices, plus AWGN."""
    s = tx.time_domain
    n = s.shape[0]
    big_l = tx.cpp.shape[0]
    if big_l < ch.l_max:
        raise ValueError(f"CPP length {big_l} shorter than channel l_max {ch.l_max}")
    s_ext = np.concatenate((tx.cpp, s))
    t = np.arange(n)
    r = np.zeros(n, dtype=np.complex128)
    for path in ch.paths:
        shifted = s_ext[big_l - path.delay : big_l - path.delay + n]
        r += path.gain * np.exp(-2j * np.pi * path.doppler * t / n) * shifted
    return r + noise.sample(n, rng)


def _cpp_phase_diag(l: int, params: AfdmParams) -> np.ndarray:
    """Diagonal of the prefix phase-correction matrix for delay l."""
    n = params.n
    t = np.arange(n)
    diag = np.ones(n, dtype=np.complex128)
    head = t < l
    diag[head] = np.exp(-2j * np.pi * params.c1 * (n * n - 2 * n * (l - t[head])))
    return diag


def build_channel_matrix(ch: ChannelRealization, params: AfdmParams) -> np.ndarray:
    """Dense time-domain channel matrix: sum over paths of
    gain * Gamma_cpp * Doppler diagonal * cyclic shift."""
    n = params.n
    t = np.arange(n)
    h = np.zeros((n, n), dtype=np.complex128)
    for path in ch.paths:
        if path.delay >= n:
            raise ValueError(f"delay {path.delay} must be < N={n}")
        row_val = (
            path.gain
            * _cpp_phase_diag(path.delay, params)
            * np.exp(-2j * np.pi * path.doppler * t / n)
        )
        h[t, (t - path.delay) % n] += row_val
    return h


def build_effective_dense(ch: ChannelRealization, params: AfdmParams) -> np.ndarray:
    """DAFT-domain effective channel A H A^H by dense multiplication (oracle)."""
    a = daft_matrix(params)
    return a @ build_channel_matrix(ch, params) @ a.conj().T


@dataclass(frozen=True)
class SparseEffectiveChannel:
    """Closed-form sparse H_eff: per-tap circular offsets and row coefficients.

    coefs[t, p] is the entry at (row p, column (p + locs[t]) mod n).  Paths
    sharing an offset are merged by coefficient addition, so each row has
    exactly len(locs) structural nonzeros.
    """

    n: int
    locs: np.ndarray
    coefs: np.ndarray

    @property
    def n_taps(self) -> int:
        return len(self.locs)

    def row_index(self, d: int) -> np.ndarray:
        """Column indices of nonzeros in row d."""
        return (d + self.locs) % self.n

    def col_index(self, c: int) -> np.ndarray:
        """Row indices of nonzeros in column c."""
        return (c - self.locs) % self.n

    def materialize(self) -> np.ndarray:
        h = np.zeros((self.n, self.n), dtype=np.complex128)
        p = np.arange(self.n)
        for t, loc in enumerate(self.locs):
            h[p, (p + loc) % self.n] += self.coefs[t]
        return h

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = np.zeros(self.n, dtype=np.complex128)
        for t, loc in enumerate(self.locs):
            y += self.coefs[t] * np.roll(x, -int(loc))
        return y


def build_effective_sparse(ch: ChannelRealization, params: AfdmParams) -> SparseEffectiveChannel:
    """Closed-form H_eff: path i contributes a single circular diagonal at
    offset loc_i = (alpha_i + 2*N*c1*l_i) mod N."""
    n = params.n
    p = np.arange(n)
    by_loc: dict[int, np.ndarray] = {}
    for path in ch.paths:
        loc_f = path.doppler + 2.0 * n * params.c1 * path.delay
        loc_r = round(loc_f)
        if abs(loc_f - loc_r) > 1e-9:
            raise ValueError(
                f"non-integer tap offset {loc_f}: 2*N*c1*l must be an integer "
                "(fractional offsets are unsupported)"
            )
        loc = loc_r % n
        q = (p + loc) % n
        coef = path.gain * np.exp(
            2j * np.pi / n * (n * params.c1 * path.delay**2 - q * path.delay + n * params.c2 * (q * q - p * p))
        )
        if loc in by_loc:
            by_loc[loc] = by_loc[loc] + coef
        else:
            by_loc[loc] = coef
    locs = np.array(sorted(by_loc), dtype=np.int64)
    coefs = np.stack([by_loc[int(loc)] for loc in locs])
    return SparseEffectiveChannel(n=n, locs=locs, coefs=coefs)


def received_daft_frame(
    tx: TxFrame,
    ch: ChannelRealization,
    noise: NoiseModel,
    rng: np.random.Generator,
    params: AfdmParams,
) -> tuple[np.ndarray, ChannelRealization]:
    """Full receive chain: time-domain channel + AWGN, CPP strip, DAFT.

    Returns the DAFT-domain observation together with the ground-truth
    realization for the detector."""
    r = apply_channel_timedomain(tx, ch, noise, rng)
    return afdm_demodulate(r, params), ch


def channel_to_text(ch: ChannelRealization) -> str:
    """Plain-text record for regression fixtures, one path per line."""
    out = io.StringIO()
    out.write(f"# l_max={ch.l_max} alpha_max={ch.alpha_max}\n")
    for p in ch.paths:
        out.write(f"{p.gain.real:.17g} {p.gain.imag:.17g} {p.delay} {p.doppler}\n")
    return out.getvalue()


def channel_from_text(text: str) -> ChannelRealization:
    l_max = alpha_max = None
    paths = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            fields = dict(kv.split("=") for kv in line[1:].split())
            l_max, alpha_max = int(fields["l_max"]), int(fields["alpha_max"])
            continue
        re_, im, delay, doppler = line.split()
        paths.append(ChannelPath(complex(float(re_), float(im)), int(delay), int(doppler)))
    if l_max is None or alpha_max is None:
        raise ValueError("missing l_max/alpha_max header line")
    return ChannelRealization(paths=tuple(paths), l_max=l_max, alpha_max=alpha_max)
