"""Bit-packed linear algebra over GF(2).

Vectors are plain Python ints: bit k of the int is coordinate k of the
vector, so equality is bitwise and arbitrary lengths come for free.  The
ambient length travels alongside as an explicit argument or as the
``ambient_dim`` of a :class:`Subspace`.

Serialization: a vector of length n becomes ceil(n/4) lowercase hex digits
with the most significant coordinate last (i.e. standard hex of the int,
zero-padded, then reversed).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator

from .budgets import (
    DEFAULT_ENUMERATION_BUDGET,
    DimensionMismatch,
    check_enumeration,
)


def weight(v: int) -> int:
    """Number of coordinates equal to 1."""
    return v.bit_count()


def dot(a: int, b: int) -> int:
    """GF(2) dot product: parity of the AND of the packed words."""
    return (a & b).bit_count() & 1


def to_hex(v: int, length: int) -> str:
    """Lowercase hex, most significant coordinate last."""
    if v < 0 or v >> length:
        raise ValueError(f"vector {v:#x} does not fit in {length} coordinates")
    digits = (length + 3) // 4
    return format(v, "x").zfill(digits)[::-1]


def from_hex(s: str, length: int) -> int:
    v = int(s[::-1] or "0", 16)
    if v >> length:
        raise ValueError(f"hex {s!r} does not fit in {length} coordinates")
    return v


def _pivot(v: int) -> int:
    """Index of the lowest set bit (leading coordinate)."""
    return (v & -v).bit_length() - 1


@dataclass(frozen=True)
class Subspace:
    """A subspace of F2^n held as a reduced row-echelon basis.

    Rows are sorted by pivot index and each pivot column is zero in every
    other row, so two equal subspaces have identical representations.
    Use :func:`rref` (or the classmethods) to construct one.
    """

    ambient_dim: int
    rows: tuple[int, ...]
    pivots: tuple[int, ...]

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n, (), ())

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, tuple(1 << i for i in range(n)), tuple(range(n)))

    @property
    def dim(self) -> int:
        return len(self.rows)

    @property
    def codim(self) -> int:
        return self.ambient_dim - len(self.rows)

    def reduce(self, v: int) -> int:
        """Remainder of v after elimination against the basis."""
        for row, p in zip(self.rows, self.pivots):
            if (v >> p) & 1:
                v ^= row
        return v

    def contains(self, v: int) -> bool:
        return self.reduce(v) == 0

    def is_subspace_of(self, other: "Subspace") -> bool:
        if self.ambient_dim != other.ambient_dim:
            raise DimensionMismatch("ambient dimensions differ")
        return all(other.contains(r) for r in self.rows)

    def complement(self) -> "Subspace":
        """Orthogonal complement {x : x.v = 0 for all v in self}."""
        n = self.ambient_dim
        pivot_set = set(self.pivots)
        kernel = []
        for j in range(n):
            if j in pivot_set:
                continue
            v = 1 << j
            for row, p in zip(self.rows, self.pivots):
                if (row >> j) & 1:
                    v |= 1 << p
            kernel.append(v)
        return rref(kernel, n)

    def sum(self, other: "Subspace") -> "Subspace":
        if self.ambient_dim != other.ambient_dim:
            raise DimensionMismatch("ambient dimensions differ")
        return rref(self.rows + other.rows, self.ambient_dim)

    def intersect(self, other: "Subspace") -> "Subspace":
        """Exact intersection, via (V^perp + W^perp)^perp."""
        if self.ambient_dim != other.ambient_dim:
            raise DimensionMismatch("ambient dimensions differ")
        return self.complement().sum(other.complement()).complement()

    def enumerate(self, budget: int = DEFAULT_ENUMERATION_BUDGET) -> Iterator[int]:
        """All elements in Gray-code order over basis coefficients."""
        count = 1 << self.dim
        check_enumeration(count, budget)
        x = 0
        yield x
        for i in range(1, count):
            x ^= self.rows[(i & -i).bit_length() - 1]
            yield x

    def drop_last_rows(self, keep: int) -> "Subspace":
        """Subspace spanned by the first ``keep`` RREF rows."""
        return Subspace(self.ambient_dim, self.rows[:keep], self.pivots[:keep])

    def to_rows_hex(self) -> list[str]:
        return [to_hex(r, self.ambient_dim) for r in self.rows]


@dataclass(frozen=True)
class Coset:
    """rep + space, with rep reduced to zeros on the pivot coordinates."""

    rep: int
    space: Subspace

    def __post_init__(self):
        object.__setattr__(self, "rep", self.space.reduce(self.rep))

    def contains(self, v: int) -> bool:
        return self.space.contains(v ^ self.rep)

    def enumerate(self, budget: int = DEFAULT_ENUMERATION_BUDGET) -> Iterator[int]:
        for x in self.space.enumerate(budget):
            yield x ^ self.rep


def rref(vectors: Iterable[int], ambient_dim: int) -> Subspace:
    """Canonical subspace spanned by the given vectors."""
    rows: list[int] = []
    pivots: list[int] = []
    for v in vectors:
        if v >> ambient_dim:
            raise DimensionMismatch(
                f"vector {v:#x} does not fit in {ambient_dim} coordinates"
            )
        for row, p in zip(rows, pivots):
            if (v >> p) & 1:
                v ^= row
        if v == 0:
            continue
        p = _pivot(v)
        rows = [r ^ v if (r >> p) & 1 else r for r in rows]
        idx = 0
        while idx < len(pivots) and pivots[idx] < p:
            idx += 1
        rows.insert(idx, v)
        pivots.insert(idx, p)
    return Subspace(ambient_dim, tuple(rows), tuple(pivots))


def rank(vectors: Iterable[int], ambient_dim: int) -> int:
    return rref(vectors, ambient_dim).dim


def orthogonal_complement(space: Subspace) -> Subspace:
    return space.complement()


def intersect(a: Subspace, b: Subspace) -> Subspace:
    return a.intersect(b)


def count_small_support(
    space: Subspace, k: int, budget: int = DEFAULT_ENUMERATION_BUDGET
) -> int:
    """Exact #{v in space : weight(v) <= k}.

    Never exceeds sum_{i<=k} C(dim, i); the test suite asserts that bound.
    """
    if not 0 <= k <= space.ambient_dim:
        raise ValueError(f"k={k} out of range for ambient {space.ambient_dim}")
    check_enumeration(1 << space.dim, budget)
    return sum(1 for v in space.enumerate(budget) if v.bit_count() <= k)


class MinWeightViolation(ValueError):
    """A subspace contains a nonzero vector below the promised weight."""

    def __init__(self, witness: int):
        self.witness = witness
        super().__init__(f"nonzero vector of weight {witness.bit_count()} found")


def private_coordinate_basis(
    space: Subspace, min_weight: int, budget: int = DEFAULT_ENUMERATION_BUDGET
) -> list[tuple[int, frozenset[int]]]:
    """Basis v_1..v_d with large private coordinate sets.

    Returns pairs (v_i, I_i) where I_i = {k : v_i(k)=1 and v_j(k)=0 for all
    j != i} and |I_i| >= min_weight / 2^(d-1).  Requires every nonzero
    vector of the space to have weight >= min_weight (checked by
    enumeration; raises :class:`MinWeightViolation` with a witness).

    Built by inductive replacement: each incoming basis vector is flipped
    against existing ones until it vacates at least half of every private
    set, then existing vectors are flipped against it so that it keeps a
    private chunk of its own support.
    """
    check_enumeration(1 << space.dim, budget)
    for v in space.enumerate(budget):
        if v != 0 and v.bit_count() < min_weight:
            raise MinWeightViolation(v)

    basis: list[int] = []
    privates: list[int] = []  # coordinate masks, one per basis vector
    for v in space.rows:
        for vi, mask in zip(basis, privates):
            if (v & mask).bit_count() * 2 > mask.bit_count():
                v ^= vi
        privates = [mask & ~v for mask in privates]
        k = v  # shrinking private candidate inside supp(v)
        for i, vi in enumerate(basis):
            if (vi & k).bit_count() * 2 > k.bit_count():
                basis[i] = vi ^ v
            k &= ~basis[i]
        basis.append(v)
        privates.append(k)

    d = len(basis)
    out = []
    for vi, mask in zip(basis, privates):
        idx = frozenset(j for j in range(space.ambient_dim) if (mask >> j) & 1)
        if len(idx) << (d - 1) < min_weight:
            raise AssertionError(
                f"private set of size {len(idx)} below min_weight/2^(d-1)"
            )
        out.append((vi, idx))
    return out


def all_subspaces(n: int, max_dim: int | None = None) -> Iterator[Subspace]:
    """All subspaces of F2^n in RREF form, by pivot set then free entries."""
    top = n if max_dim is None else min(max_dim, n)
    for k in range(top + 1):
        for pivots in combinations(range(n), k):
            pivot_set = set(pivots)
            free_positions = [
                (i, c)
                for i, p in enumerate(pivots)
                for c in range(p + 1, n)
                if c not in pivot_set
            ]
            for bits in range(1 << len(free_positions)):
                rows = [1 << p for p in pivots]
                for t, (i, c) in enumerate(free_positions):
                    if (bits >> t) & 1:
                        rows[i] |= 1 << c
                yield Subspace(n, tuple(rows), tuple(pivots))


def random_vector(n: int, rng) -> int:
    """Uniform vector of length n, assembled from 32-bit draws."""
    v = 0
    for off in range(0, n, 32):
        v |= int(rng.integers(0, 1 << min(32, n - off))) << off
    return v


def random_subspace(n: int, dim: int, rng) -> Subspace:
    """Random subspace of exactly the requested dimension."""
    if dim > n:
        raise ValueError("dim exceeds ambient")
    while True:
        space = rref([random_vector(n, rng) for _ in range(dim + 2)], n)
        if space.dim >= dim:
            return space.drop_last_rows(dim)
