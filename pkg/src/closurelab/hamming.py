"""Layered Hamming sets, slice spectra, B'-compatibility, and the worked
closedness scenarios.

Everything quantitative here is either an exact big-integer computation
(Krawtchouk sums, layer sizes, closedness of weight-defined sets) or a
seeded Monte Carlo estimate with a stated confidence radius.  The
headline constants of the layered counterexample are asymptotic; the
desk-scale harness exposes the cutoff constant c in n/2 - c*n^(3/4) as a
parameter and measures trends.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .budgets import BudgetExceeded, check_group_exponent
from .closure import closedness_exact
from .confidence import ChernoffBound, ChernoffParams, chernoff_bound, hoeffding_radius
from .gf2 import rref
from .spectral import GroupMultiset, GroupSet, mu_hat

__all__ = [
    "ChernoffBound",
    "ChernoffParams",
    "CompatibilityReport",
    "ConcentrationResult",
    "LayerSet",
    "ScenarioRow",
    "SliceSet",
    "chernoff_bound",
    "compatibility_fraction",
    "compatibility_fraction_exact",
    "counterexample_scenarios",
    "fourier_concentration",
    "layer_groupset",
    "random_translate_fixture",
    "slice_mu_hat",
    "standard_basis_multiset",
]


def weight_table(n: int) -> np.ndarray:
    check_group_exponent(n)
    return np.bitwise_count(np.arange(1 << n, dtype=np.int64)).astype(np.int64)


def layer_groupset(n: int, lo: int, hi: int) -> GroupSet:
    w = weight_table(n)
    return GroupSet.from_bitmap(n, (w >= lo) & (w <= hi))


def standard_basis_multiset(n: int, support: int | None = None) -> GroupMultiset:
    """Basis vectors as a multiset, optionally restricted to a support mask."""
    picks = [1 << i for i in range(n) if support is None or (support >> i) & 1]
    return GroupMultiset.from_elements(n, picks)


@dataclass(frozen=True)
class LayerSet:
    """{v : lo <= |v| <= hi}, exact size at any n, dense only when small."""

    n: int
    lo: int
    hi: int

    def __post_init__(self):
        if not 0 <= self.lo <= self.hi <= self.n:
            raise ValueError(f"bad layer bounds [{self.lo}, {self.hi}] for n={self.n}")

    @classmethod
    def below_cutoff(cls, n: int, c: float) -> "LayerSet":
        """{v : |v| <= n/2 - c * n^(3/4)}."""
        hi = math.floor(n / 2 - c * n**0.75)
        if hi < 0:
            raise ValueError(f"cutoff constant {c} empties the set at n={n}")
        return cls(n, 0, hi)

    @property
    def size(self) -> int:
        return sum(math.comb(self.n, w) for w in range(self.lo, self.hi + 1))

    def contains(self, v: int) -> bool:
        return self.lo <= v.bit_count() <= self.hi

    def weight_masses(self) -> dict[int, int]:
        return {w: math.comb(self.n, w) for w in range(self.lo, self.hi + 1)}

    def to_groupset(self) -> GroupSet:
        return layer_groupset(self.n, self.lo, self.hi)


@dataclass(frozen=True)
class SliceSet:
    """{v : |v| = w}, the Hamming sphere of one weight."""

    n: int
    w: int

    def __post_init__(self):
        if not 0 <= self.w <= self.n:
            raise ValueError(f"bad slice weight {self.w} for n={self.n}")

    @property
    def size(self) -> int:
        return math.comb(self.n, self.w)

    def contains(self, v: int) -> bool:
        return v.bit_count() == self.w

    def to_groupset(self) -> GroupSet:
        w = weight_table(self.n)
        return GroupSet.from_bitmap(self.n, w == self.w)


def slice_mu_hat(n: int, w: int, u_weight: int) -> Fraction:
    """mu_hat of the full weight-w slice at any u of the given weight.

    Krawtchouk character sum over binomials:
    K_w(u; n) = sum_j (-1)^j C(u, j) C(n-u, w-j), normalized by C(n, w).
    """
    if not (0 <= w <= n and 0 <= u_weight <= n):
        raise ValueError("weights out of range")
    k = sum(
        (-1) ** j * math.comb(u_weight, j) * math.comb(n - u_weight, w - j)
        for j in range(0, min(u_weight, w) + 1)
    )
    return Fraction(k, math.comb(n, w))


@dataclass(frozen=True)
class ConcentrationResult:
    mode: str  # "exact" | "slice"
    count: int
    members: list[int]  # vectors (exact mode) or contributing weights (slice)


def fourier_concentration(
    bprime: GroupMultiset | SliceSet, threshold: Fraction
) -> ConcentrationResult:
    """Exact #{u : mu_hat_{B'}(u) >= threshold}.

    A GroupMultiset goes through the dense transform; a full slice is
    swept weight by weight through the Krawtchouk closed form, which
    works at any n since the coefficient depends only on |u|.
    """
    threshold = Fraction(threshold)
    if isinstance(bprime, SliceSet):
        weights = [
            uw
            for uw in range(bprime.n + 1)
            if slice_mu_hat(bprime.n, bprime.w, uw) >= threshold
        ]
        count = sum(math.comb(bprime.n, uw) for uw in weights)
        return ConcentrationResult("slice", count, weights)
    spec = mu_hat(bprime)
    members = [
        r
        for r in range(1 << bprime.n)
        if Fraction(int(spec.numerators[r]), spec.denominator) >= threshold
    ]
    return ConcentrationResult("exact", len(members), members)


# ---------------------------------------------------------------------------
# B'-compatibility
# ---------------------------------------------------------------------------


def _slice_compatible_weights(layer: LayerSet, sl: SliceSet) -> set[int]:
    """Weights m with #{w in slice: u.w >= |w|/2} >= slice.size/3 at |u|=m.

    The inner count is exact: overlap j of a weight-w slice vector with a
    fixed weight-m point follows C(m,j) C(n-m, w-j), and |u+w| <= |u| is
    the integer condition 2j >= w.
    """
    n, w = sl.n, sl.w
    need = -(-w // 2)  # ceil(w/2)
    out = set()
    for m in range(layer.lo, layer.hi + 1):
        good = sum(
            math.comb(m, j) * math.comb(n - m, w - j) for j in range(need, w + 1)
        )
        if 3 * good >= sl.size:
            out.add(m)
    return out


def compatibility_fraction_exact(layer: LayerSet, sl: SliceSet) -> Fraction:
    """Exact mass fraction of the layer set that is B'-compatible, for a
    full-slice B'."""
    good_weights = _slice_compatible_weights(layer, sl)
    mass = sum(math.comb(layer.n, m) for m in good_weights)
    return Fraction(mass, layer.size)


@dataclass(frozen=True)
class CompatibilityReport:
    n: int
    estimate: float
    radius: float
    confidence: float
    samples: int
    seed: int

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "estimate": self.estimate,
            "radius": self.radius,
            "confidence": self.confidence,
            "samples": self.samples,
            "seed": self.seed,
        }


def compatibility_fraction(
    layer: LayerSet,
    bprime: SliceSet | Sequence[int],
    u_samples: int,
    seed: int,
    confidence: float = 0.99,
    chunk_size: int = 4096,
) -> CompatibilityReport:
    """Monte Carlo fraction of u in the layer set that are B'-compatible.

    u is compatible when at least a third of B' does not increase its
    weight; the inner test uses the integer reformulation u.w >= |w|/2.
    For a full slice the inner count is evaluated in closed form, so each
    sample only needs its weight; an explicit B' is scanned directly.
    """
    n = layer.n
    masses = layer.weight_masses()
    weights = sorted(masses)
    cums = np.cumsum([masses[m] for m in weights])
    total = int(cums[-1])
    if total >= 2**63:
        raise BudgetExceeded("layer set too large for 64-bit uniform sampling")
    cums_arr = cums.astype(np.int64)
    weights_arr = np.array(weights, dtype=np.int64)

    full_slice = isinstance(bprime, SliceSet)
    if full_slice:
        good = _slice_compatible_weights(layer, bprime)
        good_mask = np.zeros(n + 1, dtype=bool)
        for m in good:
            good_mask[m] = True
    else:
        b_list = [int(w) for w in bprime]
        b_sizes = [w.bit_count() for w in b_list]
        b_total = len(b_list)

    hits = 0
    for chunk_index, start in enumerate(range(0, u_samples, chunk_size)):
        count = min(chunk_size, u_samples - start)
        rng = np.random.default_rng(np.random.SeedSequence((seed, chunk_index)))
        draws = rng.integers(0, total, size=count)
        m_batch = weights_arr[np.searchsorted(cums_arr, draws, side="right")]
        if full_slice:
            hits += int(np.count_nonzero(good_mask[m_batch]))
        else:
            for m in m_batch.tolist():
                u = _random_point_of_weight(n, int(m), rng)
                stay = sum(
                    1
                    for wv, ws in zip(b_list, b_sizes)
                    if 2 * (u & wv).bit_count() >= ws
                )
                hits += 3 * stay >= b_total
    estimate = hits / u_samples
    radius = hoeffding_radius(u_samples, confidence)
    return CompatibilityReport(n, estimate, radius, confidence, u_samples, seed)


def _random_point_of_weight(n: int, m: int, rng) -> int:
    idx = rng.permutation(n)[:m]
    v = 0
    for i in idx.tolist():
        v |= 1 << int(i)
    return v


def is_compatible(u: int, bprime: Iterable[int]) -> bool:
    """Direct definition: at least a third of B' does not increase |u|."""
    b_list = [int(w) for w in bprime]
    stay = sum(
        1 for w in b_list if (u ^ w).bit_count() <= u.bit_count()
    )
    return 3 * stay >= len(b_list)


# ---------------------------------------------------------------------------
# samplers for weight-defined sets beyond enumeration range (n <= 64)
# ---------------------------------------------------------------------------


def _pack_rank_bits(ranks: np.ndarray, cutoffs: np.ndarray, n: int) -> np.ndarray:
    bits = ranks < cutoffs[:, None]
    powers = (np.uint64(1) << np.arange(n, dtype=np.uint64))[None, :]
    return np.sum(bits.astype(np.uint64) * powers, axis=1, dtype=np.uint64)


def fixed_weight_sampler(n: int, w: int):
    """Uniform random vectors of exactly weight w, packed as uint64."""
    if n > 64:
        raise BudgetExceeded("samplers support n <= 64")

    def sample(rng, count: int) -> np.ndarray:
        ranks = rng.random((count, n)).argsort(axis=1).argsort(axis=1)
        return _pack_rank_bits(ranks, np.full(count, w), n)

    return sample


def layer_sampler(layer: LayerSet):
    """Uniform sampler over a layer set: weight by mass, then positions."""
    if layer.n > 64:
        raise BudgetExceeded("samplers support n <= 64")
    masses = layer.weight_masses()
    weights = sorted(masses)
    total = sum(masses[m] for m in weights)
    if total >= 2**63:
        raise BudgetExceeded("layer set too large for 64-bit uniform sampling")
    cums = np.cumsum([masses[m] for m in weights]).astype(np.int64)
    weights_arr = np.array(weights, dtype=np.int64)
    n = layer.n

    def sample(rng, count: int) -> np.ndarray:
        draws = rng.integers(0, total, size=count)
        m_batch = weights_arr[np.searchsorted(cums, draws, side="right")]
        ranks = rng.random((count, n)).argsort(axis=1).argsort(axis=1)
        return _pack_rank_bits(ranks, m_batch, n)

    return sample


def layer_member(layer: LayerSet):
    def member(xs: np.ndarray) -> np.ndarray:
        w = np.bitwise_count(xs).astype(np.int64)
        return (w >= layer.lo) & (w <= layer.hi)

    return member


def layered_pair_eta_exact(layer: LayerSet, sl: SliceSet) -> Fraction:
    """Exact closedness of a layer set under a full-slice generator set.

    eta = sum_m mass(m)/|A| * P(|u + w| in [lo, hi]  given |u| = m); the
    inner probability is a hypergeometric overlap sum since
    |u + w| = m + |w| - 2j at overlap j.
    """
    n, w = sl.n, sl.w
    slice_size = sl.size
    num = 0
    for m, mass in layer.weight_masses().items():
        stay = sum(
            math.comb(m, j) * math.comb(n - m, w - j)
            for j in range(w + 1)
            if layer.lo <= m + w - 2 * j <= layer.hi
        )
        num += mass * stay
    return Fraction(num, layer.size * slice_size)


def layered_pair_eta_sampled(
    layer: LayerSet, sl: SliceSet, samples: int, seed: int, confidence: float = 0.99
):
    """Seeded estimate of the same quantity through the generic estimator."""
    from .closure import closedness_sampled

    return closedness_sampled(
        layer_member(layer),
        layer_sampler(layer),
        fixed_weight_sampler(sl.n, sl.w),
        samples,
        seed,
        confidence=confidence,
    )


# ---------------------------------------------------------------------------
# worked scenarios
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioRow:
    name: str
    params: dict
    measured: str
    claim: str
    passed: bool | None  # None = reported, not asserted

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "params": self.params,
            "measured": self.measured,
            "claim": self.claim,
            "passed": self.passed,
        }


def _frac(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def two_layer_scenario(n: int) -> ScenarioRow:
    """Middle two layers vs the standard basis: eta = (n+1)/2n exactly."""
    if n % 2 == 0:
        raise ValueError("two-layer scenario needs odd n")
    half = (n - 1) // 2
    a = layer_groupset(n, half, half + 1)
    eta = closedness_exact(a, standard_basis_multiset(n)).eta
    expected = Fraction(n + 1, 2 * n)
    return ScenarioRow(
        "two-middle-layers",
        {"n": n},
        _frac(eta),
        f"eta == (n+1)/2n = {_frac(expected)}",
        eta == expected,
    )


def prefix_two_layer_scenario(n: int, m: int) -> ScenarioRow:
    """Weights m, m+1 supported on the first 2m coordinates; about 1/4-closed."""
    support = (1 << (2 * m)) - 1
    w = weight_table(n)
    arange = np.arange(1 << n, dtype=np.int64)
    bitmap = ((w == m) | (w == m + 1)) & ((arange & ~support) == 0)
    a = GroupSet.from_bitmap(n, bitmap)
    eta = closedness_exact(a, standard_basis_multiset(n)).eta
    return ScenarioRow(
        "prefix-two-layers",
        {"n": n, "m": m},
        _frac(eta),
        "eta >= 1/4",
        eta >= Fraction(1, 4),
    )


def third_weight_scenario(n: int) -> ScenarioRow:
    """{|x| <= n/3} vs the basis: at least 1/3-closed (more like 2/3)."""
    a = layer_groupset(n, 0, n // 3)
    eta = closedness_exact(a, standard_basis_multiset(n)).eta
    return ScenarioRow(
        "at-most-n-third",
        {"n": n},
        _frac(eta),
        "eta >= 1/3",
        eta >= Fraction(1, 3),
    )


def random_translate_fixture(n: int, parts: int, seed: int):
    """Disjoint coordinate-span translates with no cross-closures.

    Partitions the coordinates into equal parts, spans each part, and
    rejects translate choices until every pairwise difference has at
    least two coordinates outside the union of the two parts involved;
    that makes x+e_k stay inside the original part's coset or leave the
    union entirely, giving exactly 1/parts closedness.
    """
    if n % parts:
        raise ValueError("parts must divide n")
    rng = np.random.default_rng(seed)
    perm = [int(i) for i in rng.permutation(n)]
    step = n // parts
    masks = []
    for p in range(parts):
        mask = 0
        for i in perm[p * step : (p + 1) * step]:
            mask |= 1 << i
        masks.append(mask)

    spans = [rref([1 << i for i in range(n) if (mask >> i) & 1], n) for mask in masks]
    while True:
        translates = [int(rng.integers(0, 1 << n)) for _ in range(parts)]
        ok = True
        for i in range(parts):
            for j in range(i + 1, parts):
                outside = ~(masks[i] | masks[j]) & ((1 << n) - 1)
                if ((translates[i] ^ translates[j]) & outside).bit_count() < 2:
                    ok = False
        if ok:
            break

    elems: set[int] = set()
    for span, t in zip(spans, translates):
        for v in span.enumerate():
            elems.add(v ^ t)
    a = GroupSet.from_elements(n, elems)
    if a.size != parts << step:  # pragma: no cover - enforced by rejection
        raise AssertionError("coset overlap despite rejection sampling")
    return a, masks, translates


def random_translate_scenario(n: int, parts: int, seed: int) -> ScenarioRow:
    a, _, _ = random_translate_fixture(n, parts, seed)
    eta = closedness_exact(a, standard_basis_multiset(n)).eta
    expected = Fraction(1, parts)
    return ScenarioRow(
        "random-translates",
        {"n": n, "parts": parts, "seed": seed},
        _frac(eta),
        f"eta == 1/{parts} exactly",
        eta == expected,
    )


def _convolution_floor(a_bitmap: np.ndarray, basis: list[int], l: int) -> np.ndarray:
    counts = a_bitmap.astype(np.int64)
    idx = np.arange(a_bitmap.size, dtype=np.int64)
    for _ in range(l):
        nxt = np.zeros_like(counts)
        for b in basis:
            nxt += counts[idx ^ b]
        counts = nxt
    return counts


def bounded_support_middle_scenario(
    n: int, m: int, eps: Fraction = Fraction(1, 4)
) -> list[ScenarioRow]:
    """The almost-closed set for the middle-layers example.

    C = {x : support in first m coords, (m-1)/2 - 1/eps <= |x| <= (m+1)/2 + 1/eps};
    B' = the basis vectors of the support.  C should be (B',1-eps)-closed,
    and every x in C reaches the two middle layers by l = 1/eps basis
    steps with probability at least (m/2n)^l.
    """
    if m % 2 == 0:
        raise ValueError("m must be odd")
    l = int(1 / eps)
    lo = max(0, (m - 1) // 2 - l)
    hi = min(m, (m + 1) // 2 + l)
    support = (1 << m) - 1
    w = weight_table(n)
    arange = np.arange(1 << n, dtype=np.int64)
    c_bitmap = (w >= lo) & (w <= hi) & ((arange & ~support) == 0)
    c = GroupSet.from_bitmap(n, c_bitmap)
    bprime = standard_basis_multiset(n, support)
    eta = closedness_exact(c, bprime).eta
    rows = [
        ScenarioRow(
            "bounded-support-window",
            {"n": n, "m": m, "eps": str(eps)},
            _frac(eta),
            f"eta >= 1 - eps = {_frac(1 - eps)}",
            eta >= 1 - eps,
        )
    ]

    mid = (m - 1) // 2
    a_bitmap = ((w == mid) | (w == mid + 1)) & ((arange & ~support) == 0)
    basis = [1 << i for i in range(n)]
    counts = _convolution_floor(a_bitmap, basis, l)
    floor = min(
        Fraction(int(counts[x]), n**l) for x in c.elements.tolist()
    )
    target = Fraction(m, 2 * n) ** l
    rows.append(
        ScenarioRow(
            "bounded-support-window-reach",
            {"n": n, "m": m, "l": l},
            _frac(floor),
            f"min_x P(x + b_1..b_l in A) >= (m/2n)^l = {_frac(target)}",
            floor >= target,
        )
    )
    return rows


def third_window_scenario(
    n: int, eps: Fraction = Fraction(1, 4)
) -> list[ScenarioRow]:
    """The almost-closed set for the at-most-n/3 example.

    C = {x : support in first 2n/3 coords, |x| <= n/3 + 1/eps};
    B' = those basis vectors.  C should be (B',1-eps)-closed and reach
    A = {|x| <= n/3} in l steps with probability at least (1/3)^l.
    """
    if n % 3:
        raise ValueError("n must be divisible by 3")
    l = int(1 / eps)
    m = 2 * n // 3
    support = (1 << m) - 1
    hi = min(m, n // 3 + l)
    w = weight_table(n)
    arange = np.arange(1 << n, dtype=np.int64)
    c_bitmap = (w <= hi) & ((arange & ~support) == 0)
    c = GroupSet.from_bitmap(n, c_bitmap)
    bprime = standard_basis_multiset(n, support)
    eta = closedness_exact(c, bprime).eta
    rows = [
        ScenarioRow(
            "third-window",
            {"n": n, "eps": str(eps)},
            _frac(eta),
            f"eta >= 1 - eps = {_frac(1 - eps)}",
            eta >= 1 - eps,
        )
    ]
    a_bitmap = w <= n // 3
    basis = [1 << i for i in range(n)]
    counts = _convolution_floor(a_bitmap, basis, l)
    floor = min(Fraction(int(counts[x]), n**l) for x in c.elements.tolist())
    target = Fraction(1, 3) ** l
    rows.append(
        ScenarioRow(
            "third-window-reach",
            {"n": n, "l": l},
            _frac(floor),
            f"min_x P(x + b_1..b_l in A) >= (1/3)^l = {_frac(target)}",
            floor >= target,
        )
    )
    return rows


def counterexample_scenarios(
    two_layer_ns: Sequence[int] = (5, 7, 9, 11),
    third_n: int = 15,
    translate_n: int = 12,
    translate_seed: int = 7,
    window_n: int = 17,
    window_m: int = 13,
    eps: Fraction = Fraction(1, 4),
) -> list[ScenarioRow]:
    """Measure every closedness claim of the worked examples, as a table."""
    rows: list[ScenarioRow] = []
    for n in two_layer_ns:
        rows.append(two_layer_scenario(n))
    rows.append(prefix_two_layer_scenario(16, 4))
    rows.append(third_weight_scenario(third_n))
    rows.append(random_translate_scenario(translate_n, 3, translate_seed))
    rows.extend(bounded_support_middle_scenario(window_n, window_m, eps))
    rows.extend(third_window_scenario(third_n, eps))
    return rows
