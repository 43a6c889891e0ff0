"""Transform algebra tests: dense oracle, unitarity, chirp periodicity."""

import cmath

import numpy as np
import pytest

from afdmsim import AfdmParams, chirp_diagonal, chirp_periodic_extend, daft, daft_matrix, idaft


def transform_oracle(x, params):
    """Independent summation oracle: S[m] = (1/sqrt(N)) e^{-j2pi c2 m^2}
    sum_n e^{-j2pi(mn/N + c1 n^2)} x[n], evaluated term by term."""
    n = params.n
    out = np.zeros(n, dtype=np.complex128)
    for m in range(n):
        acc = 0.0 + 0.0j
        for t in range(n):
            acc += cmath.exp(-2j * cmath.pi * (params.c2 * m * m + m * t / n + params.c1 * t * t)) * x[t]
        out[m] = acc / np.sqrt(n)
    return out


def dft_oracle(x):
    """Radix-agnostic unitary DFT by direct summation."""
    n = len(x)
    out = np.zeros(n, dtype=np.complex128)
    for m in range(n):
        out[m] = sum(x[t] * cmath.exp(-2j * cmath.pi * m * t / n) for t in range(n)) / np.sqrt(n)
    return out


class TestChirpDiagonal:
    def test_zero_rate_is_identity(self):
        assert np.allclose(chirp_diagonal(0.0, 4), np.ones(4))

    def test_half_rate_n2(self):
        d = chirp_diagonal(0.5, 2)
        assert np.allclose(d, [1.0, -1.0])

    def test_entry_against_direct_phase(self):
        # entry 3 of c=7/64, n=64: exp(-j*2*pi*(7/64)*9)
        d = chirp_diagonal(7 / 64, 64)
        expect = cmath.exp(-2j * cmath.pi * (7 / 64) * 9)
        assert abs(d[3] - expect) < 1e-15

    def test_unit_modulus(self):
        d = chirp_diagonal(0.3127, 50)
        assert np.allclose(np.abs(d), 1.0, atol=1e-14)


class TestDaft:
    def test_zero_chirps_reduce_to_dft(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=12) + 1j * rng.normal(size=12)
        params = AfdmParams(n=12, c1=0.0, c2=0.0)
        assert np.abs(daft(x, params) - dft_oracle(x)).max() < 1e-12

    def test_matches_dense_matrix_product(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=16) + 1j * rng.normal(size=16)
        params = AfdmParams(n=16, c1=7 / 16, c2=0.0)
        assert np.abs(daft(x, params) - daft_matrix(params) @ x).max() < 1e-12

    def test_matches_summation_oracle(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=16) + 1j * rng.normal(size=16)
        params = AfdmParams(n=16, c1=7 / 16, c2=0.21)
        assert np.abs(daft(x, params) - transform_oracle(x, params)).max() < 1e-12

    def test_energy_preserved(self):
        rng = np.random.default_rng(3)
        for n in (4, 17, 64):
            params = AfdmParams(n=n, c1=rng.uniform(-1, 1), c2=rng.uniform(-1, 1))
            x = rng.normal(size=n) + 1j * rng.normal(size=n)
            y = daft(x, params)
            assert abs(np.linalg.norm(y) ** 2 - np.linalg.norm(x) ** 2) < 1e-10 * np.linalg.norm(x) ** 2

    def test_length_mismatch_raises(self):
        params = AfdmParams(n=8, c1=0.1)
        with pytest.raises(ValueError, match="length"):
            daft(np.zeros(7), params)


class TestIdaft:
    def test_round_trip(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            n = int(rng.integers(4, 257))
            params = AfdmParams(n=n, c1=rng.uniform(-1, 1), c2=rng.uniform(-1, 1))
            x = rng.normal(size=n) + 1j * rng.normal(size=n)
            assert np.abs(idaft(daft(x, params), params) - x).max() < 1e-12

    def test_zero_chirps_inverse_dft(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=9) + 1j * rng.normal(size=9)
        params = AfdmParams(n=9, c1=0.0, c2=0.0)
        assert np.abs(idaft(dft_oracle(x), params) - x).max() < 1e-12

    def test_impulse_gives_constant(self):
        params = AfdmParams(n=8, c1=0.0, c2=0.0)
        imp = np.zeros(8, dtype=complex)
        imp[0] = 1.0
        assert np.allclose(idaft(imp, params), np.full(8, 1 / np.sqrt(8)))


class TestUnitarity:
    def test_dense_matrix_unitary(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            n = int(rng.integers(4, 257))
            params = AfdmParams(n=n, c1=rng.uniform(-1, 1), c2=rng.uniform(-1, 1))
            a = daft_matrix(params)
            assert np.abs(a @ a.conj().T - np.eye(n)).max() < 1e-12


class TestChirpPeriodicExtend:
    def test_k_zero_identity(self):
        rng = np.random.default_rng(7)
        s = rng.normal(size=8) + 1j * rng.normal(size=8)
        for t in range(8):
            assert chirp_periodic_extend(s, 0, t, 0.37) == s[t]

    def test_zero_chirp_plain_periodic(self):
        rng = np.random.default_rng(8)
        s = rng.normal(size=4) + 1j * rng.normal(size=4)
        for k in (-2, -1, 1, 3):
            for t in range(4):
                assert abs(chirp_periodic_extend(s, k, t, 0.0) - s[t]) < 1e-14

    def test_integer_2nc1_reduces_to_cyclic(self):
        # N=8, c1=7/8: 2Nc1 = 14 integer, so the k=-1 phase factor is exactly 1
        n, c1 = 8, 7 / 8
        rng = np.random.default_rng(9)
        s = rng.normal(size=n) + 1j * rng.normal(size=n)
        for t in range(n):
            phase = cmath.exp(2j * cmath.pi * c1 * (n * n - 2 * n * t))
            assert abs(phase - 1.0) < 1e-12
            assert abs(chirp_periodic_extend(s, -1, t, c1) - s[t]) < 1e-12

    def test_law_consistent_with_transform(self):
        # extending the IDAFT output beyond [0, N) must match evaluating the
        # synthesis sum at the extended index directly
        n, c1, c2 = 8, 3 / 8, 0.11
        params = AfdmParams(n=n, c1=c1, c2=c2)
        rng = np.random.default_rng(10)
        x = rng.normal(size=n) + 1j * rng.normal(size=n)
        s = idaft(x, params)
        for k in (-1, 1):
            for t in range(n):
                ext = t + k * n
                direct = sum(
                    cmath.exp(2j * cmath.pi * (c1 * ext * ext + ext * m / n + c2 * m * m)) * x[m]
                    for m in range(n)
                ) / np.sqrt(n)
                assert abs(chirp_periodic_extend(s, k, t, c1) - direct) < 1e-12

    def test_output_domain_periodicity_identity(self):
        # the mirror law S[m + kN] = exp(-j2pi c2 (k^2 N^2 + 2 k N m)) S[m]
        # holds for the analytic transform sum (documented identity, not API)
        n, c1, c2 = 8, 0.17, 0.29
        params = AfdmParams(n=n, c1=c1, c2=c2)
        rng = np.random.default_rng(11)
        x = rng.normal(size=n) + 1j * rng.normal(size=n)
        big_s = daft(x, params)

        def analysis_sum(m):
            return sum(
                cmath.exp(-2j * cmath.pi * (c2 * m * m + m * t / n + c1 * t * t)) * x[t]
                for t in range(n)
            ) / np.sqrt(n)

        for k in (-1, 1):
            for m in range(n):
                ext = m + k * n
                phase = cmath.exp(-2j * cmath.pi * c2 * (k * k * n * n + 2 * k * n * m))
                assert abs(analysis_sum(ext) - phase * big_s[m]) < 1e-12


class TestParams:
    def test_channel_rule(self):
        p = AfdmParams.for_channel(64, alpha_max=3)
        assert p.c1 == pytest.approx(7 / 64)
        assert p.c2 == 0.0

    def test_invalid_sizes(self):
        with pytest.raises(ValueError):
            AfdmParams(n=1, c1=0.0)
        with pytest.raises(ValueError):
            AfdmParams(n=8, c1=0.0, cpp_len=8)
        with pytest.raises(ValueError):
            AfdmParams(n=8, c1=0.0, cpp_len=-1)
