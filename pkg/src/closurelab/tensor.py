"""GF(2) tensor spaces F2^{n_1} (x) ... (x) F2^{n_d}.

A tensor is a bit-packed vector over the row-major flattening
flat(i_1,...,i_d) = sum_j i_j * prod_{j'>j} n_{j'} (last axis fastest),
the single convention shared by every module.  Axis subsets I use 0-based
indices; F2^I means the tensor product of the axes in I in increasing
order, flattened the same way.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterator, Mapping

import numpy as np

from .budgets import (
    BudgetExceeded,
    DimensionMismatch,
    check_enumeration,
)
from .gf2 import Subspace, all_subspaces, rref, to_hex


@dataclass(frozen=True)
class TensorShape:
    dims: tuple[int, ...]

    def __post_init__(self):
        if not self.dims or any(n < 1 for n in self.dims):
            raise ValueError(f"invalid dims {self.dims}")
        from .budgets import max_group_exponent

        if math.prod(self.dims) > max_group_exponent():
            raise BudgetExceeded(
                f"shape {self.dims} has {math.prod(self.dims)} cells, over the "
                f"group-exponent budget {max_group_exponent()}"
            )

    @property
    def d(self) -> int:
        return len(self.dims)

    @property
    def total(self) -> int:
        return math.prod(self.dims)

    def strides(self) -> tuple[int, ...]:
        out = []
        acc = 1
        for n in reversed(self.dims):
            out.append(acc)
            acc *= n
        return tuple(reversed(out))

    def flat(self, index: tuple[int, ...]) -> int:
        return sum(i * s for i, s in zip(index, self.strides()))

    def unflat(self, pos: int) -> tuple[int, ...]:
        out = []
        for s in self.strides():
            out.append(pos // s)
            pos %= s
        return tuple(out)

    def axes_dims(self, axes: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(self.dims[a] for a in axes)

    def all_axes(self) -> tuple[int, ...]:
        return tuple(range(self.d))


@dataclass(frozen=True)
class Tensor:
    shape: TensorShape
    data: int

    def __post_init__(self):
        if self.data >> self.shape.total:
            raise DimensionMismatch("data wider than shape.total")

    def entry(self, index: tuple[int, ...]) -> int:
        return (self.data >> self.shape.flat(index)) & 1

    def to_array(self) -> np.ndarray:
        total = self.shape.total
        raw = self.data.to_bytes((total + 7) // 8, "little")
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
        return bits[:total].reshape(self.shape.dims)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Tensor":
        arr = np.asarray(arr, dtype=np.uint8) & 1
        flat = arr.reshape(-1)
        packed = np.packbits(flat, bitorder="little").tobytes()
        return cls(TensorShape(tuple(arr.shape)), int.from_bytes(packed, "little"))

    def __xor__(self, other: "Tensor") -> "Tensor":
        if self.shape != other.shape:
            raise DimensionMismatch("tensor shapes differ")
        return Tensor(self.shape, self.data ^ other.data)

    def to_json(self) -> dict:
        return {
            "shape": list(self.shape.dims),
            "data": to_hex(self.data, self.shape.total),
        }


def rank1(shape: TensorShape, factors: tuple[int, ...]) -> Tensor:
    """Tensor with entry(i_1..i_d) = prod_j u_j(i_j)."""
    if len(factors) != shape.d:
        raise DimensionMismatch("factor count differs from axis count")
    for u, n in zip(factors, shape.dims):
        if u >> n:
            raise DimensionMismatch(f"factor {u:#x} exceeds axis length {n}")
    data = rank1_flat(shape.dims, factors)
    return Tensor(shape, data)


def rank1_flat(dims: tuple[int, ...], factors: tuple[int, ...]) -> int:
    """Packed int of the rank-1 tensor, recursively over axes."""
    if len(dims) == 1:
        return factors[0]
    rest = rank1_flat(dims[1:], factors[1:])
    stride = math.prod(dims[1:])
    out = 0
    u = factors[0]
    while u:
        i = (u & -u).bit_length() - 1
        out |= rest << (i * stride)
        u &= u - 1
    return out


def contract(r: Tensor, s: Tensor) -> Tensor | int:
    """Sum over the leading axes of r against all axes of s.

    (rs)_{i_{a+1}..i_{a+b}} = sum_{j_1..j_a} r_{j,i} s_j over GF(2); the
    matrix-times-vector case sums over the FIRST matrix coordinate.  When
    r and s have identical shapes the result is the scalar dot product.
    """
    a = s.shape.d
    if r.shape.dims[:a] != s.shape.dims:
        raise DimensionMismatch("leading dims of r must equal dims of s")
    r_arr = r.to_array()
    s_arr = s.to_array()
    out = np.tensordot(r_arr.astype(np.int64), s_arr.astype(np.int64), axes=(tuple(range(a)), tuple(range(a)))) & 1
    if r.shape.d == a:
        return int(out)
    return Tensor.from_array(out.astype(np.uint8))


def dot_flat(x: int, y: int) -> int:
    return (x & y).bit_count() & 1


def matvec_first(data: int, u: int, n1: int, n2: int) -> int:
    """Contraction of an (n1,n2) matrix against u over the first axis."""
    mask = (1 << n2) - 1
    acc = 0
    while u:
        i = (u & -u).bit_length() - 1
        acc ^= (data >> (i * n2)) & mask
        u &= u - 1
    return acc


def matrix_rows(data: int, n1: int, n2: int) -> list[int]:
    mask = (1 << n2) - 1
    return [(data >> (i * n2)) & mask for i in range(n1)]


def matrix_rank(data: int, n1: int, n2: int) -> int:
    return rref(matrix_rows(data, n1, n2), n2).dim


def axis_position_map(shape: TensorShape, axes: tuple[int, ...]) -> np.ndarray:
    """Array M[p_I, p_Ic] of flat positions, I = ``axes`` ascending."""
    axes = tuple(sorted(axes))
    comp = tuple(a for a in range(shape.d) if a not in axes)
    arr = np.arange(shape.total, dtype=np.int64).reshape(shape.dims)
    perm = axes + comp
    p_i = math.prod(shape.dims[a] for a in axes)
    return np.transpose(arr, perm).reshape(p_i, -1)


def embed_blowup(shape: TensorShape, axes: tuple[int, ...], space: Subspace) -> Subspace:
    """H (x) F2^{I^c} as a subspace of the flattened tensor space.

    ``space`` lives in F2^I with I = ``axes``; the result consists of all
    tensors whose every I^c-indexed slice along the I axes lies in H.
    """
    axes = tuple(sorted(axes))
    p_i = math.prod(shape.dims[a] for a in axes)
    if space.ambient_dim != p_i:
        raise DimensionMismatch("subspace ambient does not match axis product")
    posmap = axis_position_map(shape, axes)
    gens = []
    for row in space.rows:
        bit_rows = [k for k in range(p_i) if (row >> k) & 1]
        for j in range(posmap.shape[1]):
            v = 0
            for k in bit_rows:
                v |= 1 << int(posmap[k, j])
            gens.append(v)
    return rref(gens, shape.total)


def sum_of_blowups(
    shape: TensorShape, spaces: Mapping[tuple[int, ...], Subspace]
) -> Subspace:
    out = Subspace.zero(shape.total)
    for axes, space in spaces.items():
        out = out.sum(embed_blowup(shape, tuple(axes), space))
    return out


def _normalize_spaces(
    shape: TensorShape, spaces: Mapping[tuple[int, ...], Subspace]
) -> dict[tuple[int, ...], Subspace]:
    """Fill every nonempty axis subset, defaulting to the full space."""
    out: dict[tuple[int, ...], Subspace] = {}
    d = shape.d
    for mask in range(1, 1 << d):
        axes = tuple(a for a in range(d) if (mask >> a) & 1)
        p_i = math.prod(shape.dims[a] for a in axes)
        out[axes] = Subspace.full(p_i)
    for axes, space in spaces.items():
        key = tuple(sorted(axes))
        if key not in out:
            raise ValueError(f"invalid axis subset {axes}")
        p_i = math.prod(shape.dims[a] for a in key)
        if space.ambient_dim != p_i:
            raise DimensionMismatch(f"space for {key} has wrong ambient")
        out[key] = space
    return out


@dataclass(frozen=True)
class SimpleSet:
    """Translate of the intersection of H_I (x) F2^{I^c} over nonempty I.

    ``spaces`` may omit subsets; omitted ones default to the full space.
    The recorded simplicity witness is the maximum codimension.
    """

    shape: TensorShape
    translate: Tensor
    spaces: Mapping[tuple[int, ...], Subspace] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(
            self, "spaces", _normalize_spaces(self.shape, self.spaces)
        )
        if self.translate.shape != self.shape:
            raise DimensionMismatch("translate shape differs")

    @property
    def simplicity(self) -> int:
        return max(s.codim for s in self.spaces.values())

    def member(self, x: Tensor) -> bool:
        if x.shape != self.shape:
            raise DimensionMismatch("tensor shape differs")
        y = x.data ^ self.translate.data
        y_arr = Tensor(self.shape, y).to_array()
        for axes, space in self.spaces.items():
            comp = tuple(a for a in range(self.shape.d) if a not in axes)
            perm = axes + comp
            sliced = np.transpose(y_arr, perm).reshape(space.ambient_dim, -1)
            for z in space.complement().rows:
                zbits = np.array(
                    [(z >> k) & 1 for k in range(space.ambient_dim)], dtype=np.int64
                )
                if np.any((zbits @ sliced) & 1):
                    return False
        return True

    def subspace(self) -> Subspace:
        """The underlying subspace (ignoring the translate)."""
        constraints: list[int] = []
        for axes, space in self.spaces.items():
            comp_space = space.complement()
            if not comp_space.rows:
                continue
            posmap = axis_position_map(self.shape, axes)
            for z in comp_space.rows:
                bit_rows = [k for k in range(space.ambient_dim) if (z >> k) & 1]
                for j in range(posmap.shape[1]):
                    v = 0
                    for k in bit_rows:
                        v |= 1 << int(posmap[k, j])
                    constraints.append(v)
        return rref(constraints, self.shape.total).complement()

    def size(self) -> int:
        return 1 << self.subspace().dim

    def to_json(self) -> dict:
        return {
            "translate": self.translate.to_json(),
            "spaces": [
                {"axes": list(axes), "rows": space.to_rows_hex()}
                for axes, space in sorted(self.spaces.items())
            ],
        }


def simple_set_member(simple: SimpleSet, x: Tensor) -> bool:
    return simple.member(x)


def simple_set_size(simple: SimpleSet) -> int:
    return simple.size()


class LSystem:
    """Nested subspace family producing a multiset of rank-1 tensors.

    root is a subspace of the first axis; for each prefix (u_1,..,u_{j-1})
    of factors there is a subspace of axis j, stored explicitly in
    ``children`` or produced by ``rule`` for structured families.
    ``bound`` is the declared codimension bound l.
    """

    def __init__(
        self,
        shape: TensorShape,
        root: Subspace,
        children: dict[tuple[int, ...], Subspace] | None = None,
        rule: Callable[[tuple[int, ...]], Subspace] | None = None,
        bound: int = 0,
    ):
        if root.ambient_dim != shape.dims[0]:
            raise DimensionMismatch("root ambient differs from first axis")
        self.shape = shape
        self.root = root
        self.children = dict(children or {})
        self.rule = rule
        self.bound = bound

    def child(self, prefix: tuple[int, ...]) -> Subspace:
        if not 1 <= len(prefix) <= self.shape.d - 1:
            raise ValueError(f"bad prefix length {len(prefix)}")
        got = self.children.get(prefix)
        if got is None and self.rule is not None:
            got = self.rule(prefix)
        if got is None:
            raise KeyError(f"no subspace for prefix {prefix}")
        if got.ambient_dim != self.shape.dims[len(prefix)]:
            raise DimensionMismatch("child ambient differs from its axis")
        return got

    def factor_tuples(self, budget: int = 2**22) -> Iterator[tuple[int, ...]]:
        def walk(prefix: tuple[int, ...]):
            if len(prefix) == self.shape.d:
                yield prefix
                return
            space = self.root if not prefix else self.child(prefix)
            check_enumeration(1 << space.dim, budget)
            for u in space.enumerate(budget):
                yield from walk(prefix + (u,))

        yield from walk(())

    def element_counter(self, budget: int = 2**22) -> Counter:
        out: Counter = Counter()
        for tup in self.factor_tuples(budget):
            out[rank1_flat(self.shape.dims, tup)] += 1
        return out

    def max_codim(self, budget: int = 2**22) -> int:
        worst = self.root.codim
        for tup in self.factor_tuples(budget):
            for j in range(1, self.shape.d):
                worst = max(worst, self.child(tup[:j]).codim)
        return worst

    @classmethod
    def full(cls, shape: TensorShape) -> "LSystem":
        return cls(
            shape,
            Subspace.full(shape.dims[0]),
            rule=lambda prefix: Subspace.full(shape.dims[len(prefix)]),
            bound=0,
        )


def lsystem_intersect(q: LSystem, q2: LSystem, budget: int = 2**22) -> LSystem:
    """System contained in both inputs: intersect spaces prefix by prefix."""
    if q.shape != q2.shape:
        raise DimensionMismatch("system shapes differ")
    root = q.root.intersect(q2.root)
    children: dict[tuple[int, ...], Subspace] = {}

    def walk(prefix: tuple[int, ...], space: Subspace):
        if len(prefix) == q.shape.d - 1:
            return
        check_enumeration(1 << space.dim, budget)
        for u in space.enumerate(budget):
            new_prefix = prefix + (u,)
            meet = q.child(new_prefix).intersect(q2.child(new_prefix))
            children[new_prefix] = meet
            walk(new_prefix, meet)

    if q.shape.d > 1:
        walk((), root)
    return LSystem(q.shape, root, children, bound=q.bound + q2.bound)


@dataclass(frozen=True)
class DegeneracyDecision:
    decided: bool
    degenerate: bool | None
    witness: dict[tuple[int, ...], Subspace] | None
    reason: str | None = None


def _count_subspaces_upto(n: int, k: int) -> int:
    total = 0
    for j in range(min(n, k) + 1):
        num = den = 1
        for i in range(j):
            num *= 2**n - 2**i
            den *= 2**j - 2**i
        total += num // den
    return total


def degenerate_decide(
    r: Tensor, k: int, search_budget: int = 2**20
) -> DegeneracyDecision:
    """Decide whether r lies in a sum of dim<=k blowups over I within the
    first d-1 axes (the one-sided form of k-degeneracy).

    Exhaustive over canonical subspace tuples; an oversized search space
    yields an explicit undecided result, never a silent False.
    """
    shape = r.shape
    d = shape.d
    subsets = []
    for mask in range(1, 1 << (d - 1)):
        axes = tuple(a for a in range(d - 1) if (mask >> a) & 1)
        subsets.append(axes)
    if not subsets:
        degenerate = r.data == 0
        return DegeneracyDecision(True, degenerate, {} if degenerate else None)

    cost = 1
    for axes in subsets:
        p_i = math.prod(shape.dims[a] for a in axes)
        cost *= _count_subspaces_upto(p_i, k)
        if cost > search_budget:
            return DegeneracyDecision(
                False, None, None, reason=f"search space exceeds {search_budget}"
            )

    candidates = {
        axes: list(all_subspaces(math.prod(shape.dims[a] for a in axes), k))
        for axes in subsets
    }

    # depth-first over subset choices, carrying the partial sum subspace
    def search(level: int, partial: Subspace, chosen: dict) -> dict | None:
        if partial.contains(r.data):
            out = dict(chosen)
            for axes in subsets[level:]:
                p_i = math.prod(shape.dims[a] for a in axes)
                out[axes] = Subspace.zero(p_i)
            return out
        if level == len(subsets):
            return None
        axes = subsets[level]
        for cand in candidates[axes]:
            nxt = partial.sum(embed_blowup(shape, axes, cand))
            got = search(level + 1, nxt, {**chosen, axes: cand})
            if got is not None:
                return got
        return None

    witness = search(0, Subspace.zero(shape.total), {})
    if witness is None:
        return DegeneracyDecision(True, False, None)
    return DegeneracyDecision(True, True, witness)


def rank_one_counter(shape: TensorShape, nonzero_only: bool = False) -> Counter:
    """Multiset of all rank-1 tensors as a Counter over packed ints.

    With ``nonzero_only`` the factors range over nonzero vectors, matching
    the generator set of the tensor Cayley graph; otherwise zero factors
    are included with multiplicity.
    """
    ranges = []
    for n in shape.dims:
        lo = 1 if nonzero_only else 0
        check_enumeration(1 << n)
        ranges.append(range(lo, 1 << n))
    out: Counter = Counter()
    for tup in product(*ranges):
        out[rank1_flat(shape.dims, tup)] += 1
    return out
