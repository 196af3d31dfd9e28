"""Tests for the exact Walsh-Hadamard layer and Bogolyubov extraction."""

from fractions import Fraction

import numpy as np
import pytest

from closurelab.budgets import (
    BudgetExceeded,
    IntegerOverflowGuard,
    VerificationFailure,
)
from closurelab.gf2 import Subspace, dot, orthogonal_complement, random_subspace, rref
from closurelab.spectral import (
    GroupMultiset,
    GroupSet,
    bogolyubov,
    indicator_spectrum,
    large_spectrum,
    mu_hat,
    random_groupset,
    spectral_closedness,
    wht,
)

from .oracles import bfs_sum_layers, naive_closedness, naive_convolution_pairs, naive_wht


def test_wht_point_mass():
    spec = wht([1, 0, 0, 0, 0, 0, 0, 0])
    assert np.array_equal(spec.coeffs, np.ones(8, dtype=np.int64))
    assert spec.value(3) == Fraction(1, 8)


def test_wht_subspace_indicator_is_scaled_dual_indicator():
    rng = np.random.default_rng(0)
    for _ in range(30):
        n = int(rng.integers(1, 9))
        w = random_subspace(n, int(rng.integers(0, n + 1)), rng)
        f = np.zeros(1 << n, dtype=np.int64)
        for x in w.enumerate():
            f[x] = 1
        spec = wht(f.tolist())
        dual = orthogonal_complement(w)
        for r in range(1 << n):
            expect = (1 << w.dim) if dual.contains(r) else 0
            assert int(spec.coeffs[r]) == expect


def test_wht_matches_naive_character_sum():
    rng = np.random.default_rng(1)
    for n in range(0, 8):
        f = [int(v) for v in rng.integers(-5, 6, size=1 << n)]
        assert wht(f).coeffs.tolist() == naive_wht(f)


def test_wht_involution():
    rng = np.random.default_rng(2)
    for n in range(0, 10):
        f = rng.integers(-7, 8, size=1 << n).astype(np.int64)
        back = wht(wht(f.tolist()).coeffs.tolist())
        assert np.array_equal(back.coeffs, (1 << n) * f)


def test_wht_overflow_guard():
    big = [2**31] * 4
    with pytest.raises(IntegerOverflowGuard):
        wht(big)


def test_wht_parseval_assertion_detects_fault(monkeypatch):
    import closurelab.spectral as spectral

    real = spectral._butterfly

    def corrupted(a):
        out = real(a)
        out[0] += 1
        return out

    monkeypatch.setattr(spectral, "_butterfly", corrupted)
    with pytest.raises(VerificationFailure):
        spectral.wht([1, 0, 1, 1])


def test_mu_hat_examples():
    b = GroupMultiset.from_elements(4, [0])
    spec = mu_hat(b)
    assert all(spec.value(r) == 1 for r in range(16))

    n = 6
    basis = GroupMultiset.from_elements(n, [1 << i for i in range(n)])
    spec = mu_hat(basis)
    for r in range(1 << n):
        assert spec.value(r) == Fraction(n - 2 * r.bit_count(), n)


def test_mu_hat_subspace_is_dual_indicator():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(1, 9))
        w = random_subspace(n, int(rng.integers(0, n + 1)), rng)
        b = GroupMultiset.from_elements(n, w.enumerate())
        spec = mu_hat(b)
        dual = orthogonal_complement(w)
        for r in range(1 << n):
            assert spec.value(r) == (1 if dual.contains(r) else 0)


def test_mu_hat_rejects_empty():
    with pytest.raises(ValueError):
        mu_hat(GroupMultiset(3, {}))


def test_spectral_closedness_full_group():
    g = GroupSet.from_elements(3, range(8))
    b = GroupMultiset.from_elements(3, [1, 2, 5])
    assert spectral_closedness(g, b) == 1


def test_spectral_closedness_coset_of_w():
    rng = np.random.default_rng(4)
    for _ in range(10):
        n = 8
        w = random_subspace(n, int(rng.integers(1, n)), rng)
        shift = int(rng.integers(0, 1 << n))
        a = GroupSet.from_elements(n, [shift ^ v for v in w.enumerate()])
        members = [v for v in w.enumerate()]
        picks = rng.choice(len(members), size=3).tolist()
        b = GroupMultiset.from_pairs(n, [(members[i], 1 + i) for i in set(picks)])
        assert spectral_closedness(a, b) == 1


def test_spectral_equals_combinatorial_counting_oracle():
    rng = np.random.default_rng(5)
    for _ in range(60):
        n = int(rng.integers(2, 11))
        size = int(rng.integers(1, (1 << n) + 1))
        a = random_groupset(n, size, rng)
        max_support = min(8, 1 << n)
        support = rng.choice(1 << n, size=int(rng.integers(1, max_support + 1)), replace=False)
        b = GroupMultiset.from_pairs(
            n, [(int(e), int(rng.integers(1, 4))) for e in support]
        )
        got = spectral_closedness(a, b)
        pairs, denom = naive_closedness(set(a.elements.tolist()), dict(b.counts))
        assert got == Fraction(pairs, denom)
        assert -1 <= got <= 1


def test_convolution_law_pair_counts():
    # spectrum of the pair-counting function = product of spectra
    rng = np.random.default_rng(6)
    for _ in range(20):
        n = int(rng.integers(2, 11))
        a = random_groupset(n, int(rng.integers(1, 1 << n)), rng)
        support = rng.choice(1 << n, size=4, replace=False)
        b = GroupMultiset.from_pairs(
            n, [(int(e), int(rng.integers(1, 4))) for e in support]
        )
        counts = naive_convolution_pairs(set(a.elements.tolist()), dict(b.counts), n)
        left = wht(counts).coeffs
        right = indicator_spectrum(a).coeffs * wht(b.counts_array()).coeffs
        assert np.array_equal(left, right)


def test_large_spectrum_full_group_and_subspace():
    g = GroupSet.from_elements(4, range(16))
    assert large_spectrum(g, Fraction(1)) == [0]

    w = rref([0b0011, 0b0101], 4)
    a = GroupSet.from_elements(4, w.enumerate())
    spec = large_spectrum(a, a.density)
    dual = orthogonal_complement(w)
    assert sorted(spec) == sorted(dual.enumerate())


def test_large_spectrum_parseval_size_bound():
    rng = np.random.default_rng(7)
    n = 10
    for _ in range(10):
        size = int(rng.integers(1 << (n - 2), 1 << n))
        a = random_groupset(n, size, rng)
        alpha = a.density
        threshold = Fraction(3, 8)
        got = large_spectrum(a, threshold)
        assert len(got) <= alpha / threshold**2


def test_bogolyubov_subspace_fixed_point():
    rng = np.random.default_rng(8)
    for _ in range(10):
        n = int(rng.integers(2, 10))
        w = random_subspace(n, int(rng.integers(1, n + 1)), rng)
        s = GroupSet.from_elements(n, w.enumerate())
        assert bogolyubov(s) == w


def test_bogolyubov_full_group():
    g = GroupSet.from_elements(5, range(32))
    assert bogolyubov(g) == Subspace.full(5)


def test_bogolyubov_random_dense_sets():
    rng = np.random.default_rng(9)
    n = 10
    for _ in range(10):
        s = random_groupset(n, 1 << (n - 1), rng)
        v = bogolyubov(s)
        assert v.codim <= 8  # 2 / alpha^2 with alpha = 1/2
        # independent oracle: exhaustive 4-sum reachability
        layers = bfs_sum_layers([int(e) for e in s.elements], n, 4)
        for x in v.enumerate():
            assert layers[4][x]


def test_random_groupset_density():
    rng = np.random.default_rng(10)
    a = random_groupset(8, 64, rng)
    assert a.size == 64
    assert a.density == Fraction(1, 4)
