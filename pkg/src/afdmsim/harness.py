"""Seeded Monte Carlo BER harness.

One sweep point = (detector, SNR).  Frames are independent work items whose
RNG streams derive from (point seed, frame index), so results are
bit-identical for any worker count or chunking.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import NoiseModel, build_effective_sparse, draw_channel, received_daft_frame
from .daft import AfdmParams
from .detect import MpConfig, map_oracle, mmse_detect, mp_detect, mrc_detect
from .modem import Constellation, afdm_modulate, hard_demap, map_bits

CSV_HEADER = (
    "detector,snr_db,n,p,l_max,alpha_max,delta,frames,bit_errors,ber,avg_iterations,wall_seconds"
)

KNOWN_DETECTORS = ("mp", "mmse", "mrc", "map")


class ConfigError(ValueError):
    """Invalid experiment configuration or config-file syntax."""


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 64
    p: int = 4
    l_max: int = 3
    alpha_max: int = 3
    q: int = 4
    snr_db_list: tuple[float, ...] = (10.0, 12.0, 14.0, 16.0, 18.0, 20.0)
    detectors: tuple[str, ...] = ("mp",)
    mp: MpConfig = field(default_factory=MpConfig)
    frames: int = 10_000
    seed: int = 1
    out: str = "sweep.csv"
    c1: float | None = None  # defaults to (2*alpha_max + 1)/n
    c2: float = 0.0
    cpp_len: int | None = None  # defaults to l_max

    def validate(self) -> "ExperimentConfig":
        if self.frames < 1:
            raise ConfigError("frames must be >= 1")
        if self.n < 2:
            raise ConfigError("n must be >= 2")
        if not 0 <= self.l_max < self.n:
            raise ConfigError(f"l_max must satisfy 0 <= l_max < n, got {self.l_max}")
        if self.alpha_max < 0:
            raise ConfigError("alpha_max must be >= 0")
        cpp = self.l_max if self.cpp_len is None else self.cpp_len
        if cpp < self.l_max:
            raise ConfigError(f"cpp_len {cpp} shorter than l_max {self.l_max}")
        if cpp >= self.n:
            raise ConfigError(f"cpp_len {cpp} must be < n")
        if self.p > (self.l_max + 1) * (2 * self.alpha_max + 1):
            raise ConfigError("too many paths for distinct (delay, doppler) pairs")
        for det in self.detectors:
            if det not in KNOWN_DETECTORS:
                raise ConfigError(f"unknown detector {det!r}")
        if self.q < 4 or (self.q & (self.q - 1)):
            raise ConfigError("q must be a power-of-4 QAM order")
        return self

    def afdm_params(self) -> AfdmParams:
        c1 = (2 * self.alpha_max + 1) / self.n if self.c1 is None else self.c1
        cpp = self.l_max if self.cpp_len is None else self.cpp_len
        return AfdmParams(n=self.n, c1=c1, c2=self.c2, cpp_len=cpp)


@dataclass(frozen=True)
class BerRecord:
    detector: str
    snr_db: float
    n: int
    p: int
    l_max: int
    alpha_max: int
    delta: float
    frames: int
    bit_errors: int
    ber: float
    avg_iterations: float
    wall_seconds: float

    def csv_row(self, timing: bool = False) -> str:
        wall = self.wall_seconds if timing else 0.0
        return (
            f"{self.detector},{self.snr_db:g},{self.n},{self.p},{self.l_max},"
            f"{self.alpha_max},{self.delta:g},{self.frames},{self.bit_errors},"
            f"{self.ber:.10e},{self.avg_iterations:.6f},{wall:.3f}"
        )


def point_seed(master_seed: int, detector: str, snr_index: int) -> int:
    """Stable per-point seed: master XOR a digest of (detector, snr index)."""
    digest = hashlib.blake2s(f"{detector}|{snr_index}".encode(), digest_size=8).digest()
    return (master_seed ^ int.from_bytes(digest, "big")) & (2**64 - 1)


def _simulate_frames(
    cfg: ExperimentConfig,
    detector: str,
    snr_db: float,
    seed: int,
    frame_lo: int,
    frame_hi: int,
) -> tuple[int, int]:
    """Simulate frames [frame_lo, frame_hi); returns (bit_errors, iteration_sum)."""
    params = cfg.afdm_params()
    const = Constellation.qam(cfg.q)
    n0 = 10.0 ** (-snr_db / 10.0)
    noise = NoiseModel(n0=n0)
    nbits = cfg.n * const.bits_per_symbol
    bit_errors = 0
    iter_sum = 0
    for f in range(frame_lo, frame_hi):
        rng = np.random.default_rng([seed, f])
        bits = rng.integers(0, 2, nbits)
        x = map_bits(bits, const)
        tx = afdm_modulate(x, params)
        ch = draw_channel(cfg.p, cfg.l_max, cfg.alpha_max, rng)
        y, _ = received_daft_frame(tx, ch, noise, rng, params)
        sparse = build_effective_sparse(ch, params)
        if detector == "mp":
            res = mp_detect(y, sparse, noise, const, cfg.mp)
            symbols = res.symbols
            iter_sum += res.iterations_used
        elif detector == "mmse":
            symbols = mmse_detect(y, sparse.materialize(), noise, const)
        elif detector == "mrc":
            symbols = mrc_detect(y, sparse, noise, const)
        elif detector == "map":
            symbols = map_oracle(y, sparse.materialize(), const, noise)
        else:
            raise ValueError(f"unknown detector {detector!r}")
        bit_errors += int(np.sum(hard_demap(symbols, const) != bits))
    return bit_errors, iter_sum


def run_point(
    cfg: ExperimentConfig,
    detector: str,
    snr_db: float,
    seed: int,
    workers: int = 1,
) -> BerRecord:
    """Monte Carlo over cfg.frames independent frames at one (detector, SNR)."""
    cfg.validate()
    t0 = time.perf_counter()
    if workers <= 1 or cfg.frames < 2 * workers:
        bit_errors, iter_sum = _simulate_frames(cfg, detector, snr_db, seed, 0, cfg.frames)
    else:
        bounds = np.linspace(0, cfg.frames, workers * 4 + 1, dtype=int)
        bit_errors = iter_sum = 0
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_simulate_frames, cfg, detector, snr_db, seed, int(lo), int(hi))
                for lo, hi in zip(bounds[:-1], bounds[1:])
                if hi > lo
            ]
            for fut in futures:
                be, its = fut.result()
                bit_errors += be
                iter_sum += its
    wall = time.perf_counter() - t0
    const_bits = int(np.log2(cfg.q))
    total_bits = cfg.frames * cfg.n * const_bits
    return BerRecord(
        detector=detector,
        snr_db=snr_db,
        n=cfg.n,
        p=cfg.p,
        l_max=cfg.l_max,
        alpha_max=cfg.alpha_max,
        delta=cfg.mp.damping,
        frames=cfg.frames,
        bit_errors=bit_errors,
        ber=bit_errors / total_bits,
        avg_iterations=(iter_sum / cfg.frames) if detector == "mp" else 0.0,
        wall_seconds=wall,
    )


def run_sweep(
    cfg: ExperimentConfig,
    workers: int = 1,
    out_path: str | None = None,
    timing: bool = False,
    verbose: bool = False,
) -> list[BerRecord]:
    """Detectors x SNR cross product; streams one CSV row per point.

    By default the wall_seconds column is written as 0.000 so that the CSV is
    byte-identical across runs and worker counts; pass timing=True for real
    wall-clock values.
    """
    cfg.validate()
    path = cfg.out if out_path is None else out_path
    records: list[BerRecord] = []
    fh = open(path, "w") if path else None
    try:
        if fh:
            fh.write(CSV_HEADER + "\n")
            fh.flush()
        for detector in cfg.detectors:
            for snr_idx, snr_db in enumerate(cfg.snr_db_list):
                seed = point_seed(cfg.seed, detector, snr_idx)
                rec = run_point(cfg, detector, snr_db, seed, workers=workers)
                records.append(rec)
                if fh:
                    fh.write(rec.csv_row(timing=timing) + "\n")
                    fh.flush()
                if verbose:
                    print(
                        f"[{detector}] snr={snr_db:g} dB  ber={rec.ber:.3e}  "
                        f"avg_iters={rec.avg_iterations:.2f}  ({rec.wall_seconds:.1f}s)"
                    )
    finally:
        if fh:
            fh.close()
    return records


_CONFIG_KEYS = {
    "n": int,
    "p": int,
    "l_max": int,
    "alpha_max": int,
    "q": int,
    "frames": int,
    "seed": int,
    "out": str,
    "c1": float,
    "c2": float,
    "cpp_len": int,
    "delta": float,
    "max_iters": int,
    "gamma": float,
    "epsilon": float,
    "snr_db_list": "float_list",
    "detectors": "str_list",
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse key=value lines ('#' comments) into a validated config."""
    values: dict = {}
    mp_values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        kind = _CONFIG_KEYS[key]
        try:
            if kind == "float_list":
                parsed = tuple(float(v) for v in val.split(",") if v.strip())
            elif kind == "str_list":
                parsed = tuple(v.strip() for v in val.split(",") if v.strip())
            else:
                parsed = kind(val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
        if key in ("delta", "max_iters", "gamma", "epsilon"):
            mp_values["damping" if key == "delta" else key] = parsed
        else:
            values[key] = parsed
    cfg = ExperimentConfig(**values)
    if mp_values:
        try:
            cfg = replace(cfg, mp=replace(cfg.mp, **mp_values))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    try:
        return cfg.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
