"""Exact and sampled measurement of (B,eta)-closedness.

The exact path counts pairs {(a,b) in A x B : a+b in A} with multiset
multiplicities; the Fourier path in :mod:`closurelab.spectral` must agree
with it rationally, and the test suite holds both to that.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .budgets import (
    BudgetExceeded,
    DimensionMismatch,
    VerificationFailure,
    check_enumeration,
    check_group_exponent,
)
from .confidence import chernoff_radius, hoeffding_radius
from .gf2 import Subspace, rref
from .spectral import GroupMultiset, GroupSet, wht


@dataclass(frozen=True)
class ClosednessReport:
    mode: str  # "exact" | "sampled"
    eta: Fraction | None = None
    pair_count: int | None = None
    estimate: float | None = None
    radius: float | None = None
    confidence: float | None = None
    samples: int | None = None
    seed: int | None = None

    def to_json(self) -> dict:
        if self.mode == "exact":
            return {
                "mode": "exact",
                "eta_num": self.eta.numerator,
                "eta_den": self.eta.denominator,
                "pair_count": self.pair_count,
            }
        return {
            "mode": "sampled",
            "estimate": self.estimate,
            "radius": self.radius,
            "confidence": self.confidence,
            "samples": self.samples,
            "seed": self.seed,
        }


def closedness_exact(
    a: GroupSet, b: GroupMultiset, budget: int = 2**28
) -> ClosednessReport:
    """Exact eta with multiplicities: |{(a,b): a+b in A}| / (|A| |B|)."""
    if a.size < 1:
        raise ValueError("A must be nonempty")
    if a.n != b.n:
        raise DimensionMismatch("A and B live in different groups")
    if a.size * b.support_size > budget:
        raise BudgetExceeded("pair count exceeds compute budget")
    check_group_exponent(a.n)
    bitmap = a.bitmap()
    elems = a.elements
    pair_count = 0
    for elem, mult in b.counts.items():
        hits = int(np.count_nonzero(bitmap[elems ^ elem]))
        pair_count += mult * hits
    eta = Fraction(pair_count, a.size * b.total)
    return ClosednessReport(mode="exact", eta=eta, pair_count=pair_count)


def multiset_sampler(b: GroupMultiset) -> Callable:
    """Exact multiset sampler via cumulative-multiplicity inversion."""
    vals = np.fromiter(b.counts.keys(), dtype=np.int64)
    cums = np.cumsum(np.fromiter(b.counts.values(), dtype=np.int64))
    total = int(cums[-1])

    def sample(rng, count: int) -> np.ndarray:
        u = rng.integers(0, total, size=count)
        return vals[np.searchsorted(cums, u, side="right")]

    return sample


def groupset_oracle(a: GroupSet):
    """(membership, sampler) pair for a dense GroupSet."""
    bitmap = a.bitmap()
    elems = a.elements

    def member(xs: np.ndarray) -> np.ndarray:
        return bitmap[xs]

    def sample(rng, count: int) -> np.ndarray:
        idx = rng.integers(0, elems.size, size=count)
        return elems[idx]

    return member, sample


def closedness_sampled(
    a_member: Callable[[np.ndarray], np.ndarray],
    a_sampler: Callable,
    b: GroupMultiset | Callable,
    samples: int,
    seed: int,
    confidence: float = 0.99,
    radius_method: str = "hoeffding",
    chunk_size: int = 4096,
) -> ClosednessReport:
    """Seeded Monte Carlo estimate of (B,eta)-closedness.

    Samples are drawn in fixed chunks, each chunk from its own
    SeedSequence((seed, chunk_index)) stream, so the result depends only
    on (seed, samples) and not on any scheduling.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    b_sample = b if callable(b) else multiset_sampler(b)
    hits = 0
    for chunk_index, start in enumerate(range(0, samples, chunk_size)):
        count = min(chunk_size, samples - start)
        rng = np.random.default_rng(np.random.SeedSequence((seed, chunk_index)))
        a_batch = np.asarray(a_sampler(rng, count))
        b_batch = np.asarray(b_sample(rng, count))
        hits += int(np.count_nonzero(a_member(a_batch ^ b_batch)))
    estimate = hits / samples
    if radius_method == "hoeffding":
        radius = hoeffding_radius(samples, confidence)
    elif radius_method == "chernoff":
        radius = chernoff_radius(samples, confidence, estimate * (1.0 - estimate))
    else:
        raise ValueError(f"unknown radius method {radius_method!r}")
    return ClosednessReport(
        mode="sampled",
        estimate=estimate,
        radius=radius,
        confidence=confidence,
        samples=samples,
        seed=seed,
    )


def _exact_square_product_sum(c: np.ndarray, m: np.ndarray) -> int:
    cmax = int(np.max(np.abs(c), initial=0))
    mmax = int(np.max(np.abs(m), initial=0))
    if c.size * (cmax * cmax) * max(mmax * mmax, 1) < 2**62:
        cm = (c * c) * (m * m)
        return int(np.sum(cm))
    return sum(int(cv) ** 2 * int(mv) ** 2 for cv, mv in zip(c.tolist(), m.tolist()))


def mixed_energy(a: GroupSet, b: GroupMultiset) -> Fraction:
    """||1_A * mu_B||_2^2, exactly, via the product of the spectra.

    Always at most the density alpha of A; that ceiling is re-checked on
    every call because it is a theorem, not an input condition.
    """
    if a.size < 1 or b.total < 1:
        raise ValueError("A and B must be nonempty")
    if a.n != b.n:
        raise DimensionMismatch("A and B live in different groups")
    c = wht(a.indicator(), a.n).coeffs
    m = wht(b.counts_array(), b.n).coeffs
    num = _exact_square_product_sum(c, m)
    value = Fraction(num, (1 << (2 * a.n)) * b.total**2)
    alpha = a.density
    if value > alpha:
        raise VerificationFailure(f"mixed energy {value} exceeds density {alpha}")
    return value


def translation_deficit(a: GroupSet, b: int) -> Fraction:
    """1 - eta for the single-translation closedness of A under b."""
    bitmap = a.bitmap()
    stay = int(np.count_nonzero(bitmap[a.elements ^ b]))
    return 1 - Fraction(stay, a.size)


def triangle_compose(
    a: GroupSet, b1: int, b2: int
) -> tuple[Fraction, Fraction, Fraction]:
    """Deficits for b1, b2 and b1+b2; enforces the triangle inequality.

    deficit(b1+b2) <= deficit(b1) + deficit(b2) holds for every set; a
    violation indicates a counting bug and raises.
    """
    d1 = translation_deficit(a, b1)
    d2 = translation_deficit(a, b2)
    d12 = translation_deficit(a, b1 ^ b2)
    if d12 > d1 + d2:
        raise VerificationFailure(
            f"triangle inequality violated: {d12} > {d1} + {d2}"
        )
    return d1, d2, d12


def basic_set(kind: str, x: int, y: int, shape: tuple[int, int]) -> GroupSet:
    """Matrices {M : Mx = y} (row kind) or {M : M^T x = y} (column kind).

    Matrices are flattened row-major into F2^(m*n).  x = 0 is allowed but
    degenerate (empty set when y != 0, the full group when y = 0) and
    triggers a warning.
    """
    m, n = shape
    nbits = m * n
    check_group_exponent(nbits)
    if kind not in ("row", "column"):
        raise ValueError(f"unknown basic set kind {kind!r}")
    xlen, ylen = (n, m) if kind == "row" else (m, n)
    if x >> xlen or y >> ylen:
        raise DimensionMismatch("x or y out of range for the shape")
    if x == 0:
        warnings.warn("basic set with x = 0 is degenerate", stacklevel=2)
        if y != 0:
            return GroupSet.from_elements(nbits, [])
        return GroupSet.from_bitmap(nbits, np.ones(1 << nbits, dtype=bool))

    if kind == "row":
        constraints = [x << (i * n) for i in range(m)]
        t = (x & -x).bit_length() - 1
        particular = 0
        for i in range(m):
            if (y >> i) & 1:
                particular |= 1 << (i * n + t)
    else:
        constraints = []
        for j in range(n):
            v = 0
            xi = x
            while xi:
                i = (xi & -xi).bit_length() - 1
                v |= 1 << (i * n + j)
                xi &= xi - 1
            constraints.append(v)
        t = (x & -x).bit_length() - 1
        particular = 0
        for j in range(n):
            if (y >> j) & 1:
                particular |= 1 << (t * n + j)

    homog = rref(constraints, nbits).complement()
    check_enumeration(1 << homog.dim)
    elems = [particular ^ h for h in homog.enumerate()]
    return GroupSet.from_elements(nbits, elems)


def subspace_groupset(space: Subspace) -> GroupSet:
    return GroupSet.from_elements(space.ambient_dim, space.enumerate())
