"""Tests for tensor shapes, rank-1 algebra, simple sets and l-systems."""

import math
from collections import Counter
from itertools import product

import numpy as np
import pytest

from closurelab.budgets import DimensionMismatch
from closurelab.gf2 import Subspace, random_subspace, rref
from closurelab.tensor import (
    DegeneracyDecision,
    LSystem,
    SimpleSet,
    Tensor,
    TensorShape,
    contract,
    degenerate_decide,
    embed_blowup,
    lsystem_intersect,
    matrix_rank,
    matvec_first,
    rank1,
    rank1_flat,
    rank_one_counter,
    simple_set_member,
    simple_set_size,
    sum_of_blowups,
)

from .oracles import dense_contract, matrix_rank_oracle, partition_rank_oracle


def test_flat_unflat_bijection_exhaustive():
    for dims in [(2,), (3, 5), (2, 3, 2), (2, 2, 2, 2)]:
        shape = TensorShape(dims)
        seen = set()
        for idx in product(*(range(n) for n in dims)):
            pos = shape.flat(idx)
            assert 0 <= pos < shape.total
            assert shape.unflat(pos) == idx
            seen.add(pos)
        assert len(seen) == shape.total


def test_flat_is_row_major_last_axis_fastest():
    shape = TensorShape((2, 3))
    assert shape.flat((0, 1)) == 1
    assert shape.flat((1, 0)) == 3


def test_tensor_array_roundtrip():
    rng = np.random.default_rng(1)
    for dims in [(4,), (3, 4), (2, 3, 2)]:
        shape = TensorShape(dims)
        for _ in range(10):
            data = int(rng.integers(0, 1 << shape.total))
            t = Tensor(shape, data)
            assert Tensor.from_array(t.to_array()) == t


def test_rank1_examples():
    shape = TensorShape((2, 2))
    t = rank1(shape, (0b01, 0b10))  # e1 (x) e2
    assert t.entry((0, 1)) == 1
    assert t.data.bit_count() == 1
    assert rank1(shape, (0b11, 0)).data == 0

    shape3 = TensorShape((2, 2, 2))
    t3 = rank1(shape3, (0b11, 0b01, 0b11))
    for i, j, k in product(range(2), repeat=3):
        assert t3.entry((i, j, k)) == (1 if j == 0 else 0)


def test_rank1_matches_outer_product_of_bits():
    rng = np.random.default_rng(2)
    shape = TensorShape((3, 2, 3))
    for _ in range(30):
        factors = tuple(int(rng.integers(0, 1 << n)) for n in shape.dims)
        t = rank1(shape, factors)
        arrs = [
            np.array([(u >> i) & 1 for i in range(n)], dtype=np.uint8)
            for u, n in zip(factors, shape.dims)
        ]
        expect = arrs[0]
        for a in arrs[1:]:
            expect = np.multiply.outer(expect, a)
        assert np.array_equal(t.to_array(), expect)


def test_contract_rank1_reduction():
    shape = TensorShape((3, 4))
    u, v, w = 0b101, 0b1100, 0b011
    r = rank1(shape, (u, v))
    s = Tensor(TensorShape((3,)), w)
    out = contract(r, s)
    expect = v if (u & w).bit_count() % 2 else 0
    assert out.data == expect

    zero = Tensor(TensorShape((3,)), 0)
    assert contract(r, zero).data == 0


def test_contract_matches_dense_loop_oracle():
    rng = np.random.default_rng(3)
    shape = TensorShape((3, 3))
    for _ in range(20):
        r = Tensor(shape, int(rng.integers(0, 1 << 9)))
        for s_val in range(8):
            s = Tensor(TensorShape((3,)), s_val)
            got = contract(r, s)
            want = dense_contract(r.to_array(), s.to_array())
            assert np.array_equal(got.to_array(), want)


def test_contract_full_is_symmetric_nondegenerate_dot():
    shape = TensorShape((2, 3, 2))
    n = shape.total
    for x in range(1 << n):
        t = Tensor(shape, x)
        assert contract(t, t) == (x.bit_count() & 1)
    rng = np.random.default_rng(4)
    for _ in range(50):
        a = Tensor(shape, int(rng.integers(0, 1 << n)))
        b = Tensor(shape, int(rng.integers(0, 1 << n)))
        assert contract(a, b) == contract(b, a)
    # nondegenerate: only 0 is orthogonal to everything
    for x in range(1, 1 << n):
        t = Tensor(shape, x)
        assert any(
            contract(t, Tensor(shape, 1 << k)) for k in range(n)
        )


def test_contract_multiplicative_on_rank1_inputs_exhaustive_222():
    shape = TensorShape((2, 2, 2))
    tail = TensorShape((2, 2))
    for u1, u2, u3, s1 in product(range(4), repeat=4):
        r = rank1(shape, (u1, u2, u3))
        s = Tensor(TensorShape((2,)), s1)
        got = contract(r, s)
        scale = (u1 & s1).bit_count() & 1
        want = rank1(tail, (u2, u3)).data if scale else 0
        assert got.data == want


def test_contract_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        contract(Tensor(TensorShape((2, 2)), 1), Tensor(TensorShape((3,)), 1))


def test_matvec_first_agrees_with_contract():
    rng = np.random.default_rng(5)
    shape = TensorShape((4, 3))
    for _ in range(40):
        data = int(rng.integers(0, 1 << 12))
        u = int(rng.integers(0, 16))
        got = matvec_first(data, u, 4, 3)
        want = contract(Tensor(shape, data), Tensor(TensorShape((4,)), u))
        assert got == want.data


def test_matrix_rank_matches_oracle():
    rng = np.random.default_rng(6)
    for _ in range(100):
        data = int(rng.integers(0, 1 << 12))
        assert matrix_rank(data, 4, 3) == matrix_rank_oracle(data, 4, 3)


def test_simple_set_membership_full_and_row_constraint():
    shape = TensorShape((2, 2))
    zero = Tensor(shape, 0)
    everything = SimpleSet(shape, zero)
    assert all(
        simple_set_member(everything, Tensor(shape, x)) for x in range(16)
    )

    # H_{0} = span{e1} in F2^2: members have zero second row
    constrained = SimpleSet(shape, zero, {(0,): rref([0b01], 2)})
    members = [x for x in range(16) if simple_set_member(constrained, Tensor(shape, x))]
    # row-major (2,2): positions 0,1 = first row; 2,3 = second row
    assert members == [x for x in range(16) if x & 0b1100 == 0]


def test_simple_set_member_count_matches_constraint_rank_oracle():
    rng = np.random.default_rng(7)
    shape = TensorShape((3, 3))
    for _ in range(10):
        spaces = {}
        for axes in [(0,), (1,), (0, 1)]:
            amb = 3 if len(axes) == 1 else 9
            spaces[axes] = random_subspace(amb, int(rng.integers(1, amb + 1)), rng)
        translate = Tensor(shape, int(rng.integers(0, 1 << 9)))
        simple = SimpleSet(shape, translate, spaces)
        count = sum(
            1 for x in range(1 << 9) if simple_set_member(simple, Tensor(shape, x))
        )
        assert count == simple_set_size(simple)
        assert count == 1 << simple.subspace().dim


def test_simple_set_size_examples():
    shape = TensorShape((2, 2))
    zero = Tensor(shape, 0)
    assert simple_set_size(SimpleSet(shape, zero)) == 16
    one_constraint = SimpleSet(shape, zero, {(0,): rref([0b01], 2)})
    assert simple_set_size(one_constraint) == 4


def test_simple_set_size_drop_factor_bound():
    # intersecting with H_{[d]} costs at most 2^codim
    rng = np.random.default_rng(8)
    shape = TensorShape((3, 3))
    for _ in range(20):
        spaces = {
            (0,): random_subspace(3, int(rng.integers(1, 4)), rng),
            (1,): random_subspace(3, int(rng.integers(1, 4)), rng),
        }
        base = SimpleSet(shape, Tensor(shape, 0), spaces)
        h12 = random_subspace(9, int(rng.integers(5, 10)), rng)
        cut = SimpleSet(shape, Tensor(shape, 0), {**spaces, (0, 1): h12})
        assert simple_set_size(cut) * (1 << h12.codim) >= simple_set_size(base)


def test_simple_set_translation_consistency():
    rng = np.random.default_rng(9)
    shape = TensorShape((3, 3))
    spaces = {(0,): rref([0b011, 0b101], 3), (1,): rref([0b110], 3)}
    c0 = SimpleSet(shape, Tensor(shape, 0), spaces)
    for _ in range(50):
        t = int(rng.integers(0, 1 << 9))
        x = int(rng.integers(0, 1 << 9))
        shifted = SimpleSet(shape, Tensor(shape, t), spaces)
        assert simple_set_member(c0, Tensor(shape, x)) == simple_set_member(
            shifted, Tensor(shape, x ^ t)
        )


def test_embed_blowup_membership_semantics():
    shape = TensorShape((2, 3))
    h = rref([0b01], 2)  # span{e1} on axis 0
    blown = embed_blowup(shape, (0,), h)
    for x in range(1 << 6):
        cols_in_h = all(((x >> j) & 1, (x >> (3 + j)) & 1) != (0, 1) or False
                        for j in range(3))
        # direct slice check: columns (fixing axis-1 index j) must lie in h
        ok = True
        for j in range(3):
            col = ((x >> j) & 1) | (((x >> (3 + j)) & 1) << 1)
            if not h.contains(col):
                ok = False
        assert blown.contains(x) == ok


def test_lsystem_elements_and_intersect():
    shape = TensorShape((3, 3))
    rng = np.random.default_rng(10)
    for _ in range(10):
        root_a = random_subspace(3, 2, rng)
        root_b = random_subspace(3, 2, rng)
        a = LSystem(
            shape,
            root_a,
            {(u,): random_subspace(3, 2, rng) for u in root_a.enumerate()},
            bound=1,
        )
        b = LSystem(
            shape,
            root_b,
            {(u,): random_subspace(3, 2, rng) for u in root_b.enumerate()},
            bound=1,
        )
        meet = lsystem_intersect(a, b)
        assert meet.bound == 2
        elems_a = a.element_counter()
        elems_b = b.element_counter()
        for t in meet.element_counter():
            assert t in elems_a and t in elems_b
        # codim additivity bound at every node
        assert meet.root.codim <= a.root.codim + b.root.codim
        for prefix, space in meet.children.items():
            assert space.codim <= a.child(prefix).codim + b.child(prefix).codim


def test_lsystem_self_intersection_is_identity_on_elements():
    shape = TensorShape((3, 3))
    rng = np.random.default_rng(11)
    root = random_subspace(3, 2, rng)
    q = LSystem(
        shape, root, {(u,): random_subspace(3, 2, rng) for u in root.enumerate()}
    )
    assert lsystem_intersect(q, q).element_counter() == q.element_counter()


def test_lsystem_full_and_rule_variant():
    shape = TensorShape((2, 2, 2))
    full = LSystem.full(shape)
    assert full.element_counter() == rank_one_counter(shape)
    meet = lsystem_intersect(full, full)
    assert meet.element_counter() == full.element_counter()


def test_degenerate_decide_zero_tensor():
    for dims in [(2, 2), (2, 2, 2)]:
        res = degenerate_decide(Tensor(TensorShape(dims), 0), 0)
        assert res.decided and res.degenerate


def test_degenerate_decide_matches_matrix_rank_exhaustive_33():
    shape = TensorShape((3, 3))
    for k in range(0, 4):
        for x in range(1 << 9):
            res = degenerate_decide(Tensor(shape, x), k)
            assert res.decided
            assert res.degenerate == (matrix_rank_oracle(x, 3, 3) <= k)


def test_degenerate_witness_spans_the_tensor():
    shape = TensorShape((3, 3))
    rng = np.random.default_rng(12)
    for _ in range(20):
        x = int(rng.integers(0, 1 << 9))
        res = degenerate_decide(Tensor(shape, x), 2)
        if res.degenerate:
            total = sum_of_blowups(shape, res.witness)
            assert total.contains(x)


def test_degenerate_implies_partition_rank_bound_222():
    shape = TensorShape((2, 2, 2))
    k = 1
    hits = 0
    for x in range(1 << 8):
        res = degenerate_decide(Tensor(shape, x), k)
        assert res.decided
        if res.degenerate:
            pr = partition_rank_oracle(x, (2, 2, 2))
            assert pr is not None and pr <= (1 << (shape.d - 1)) * k
            hits += 1
    assert hits > 1  # the sum e1x e1 x e1 + e2 x e2 x e2 cases exist


def test_degenerate_diagonal_222_case():
    shape = TensorShape((2, 2, 2))
    diag = rank1(shape, (1, 1, 1)).data ^ rank1(shape, (2, 2, 2)).data
    res = degenerate_decide(Tensor(shape, diag), 1)
    assert res.decided
    if res.degenerate:
        pr = partition_rank_oracle(diag, (2, 2, 2))
        assert pr <= 4


def test_degenerate_decide_budget_refusal_is_explicit():
    shape = TensorShape((2, 2, 2, 2))
    res = degenerate_decide(Tensor(shape, 1), 2, search_budget=10)
    assert not res.decided
    assert res.degenerate is None
    assert "exceeds" in res.reason


def test_rank_one_counter_multiplicities():
    shape = TensorShape((2, 2))
    full = rank_one_counter(shape)
    assert sum(full.values()) == 16
    assert full[0] == 4 + 4 - 1  # u=0 or v=0 pairs
    nz = rank_one_counter(shape, nonzero_only=True)
    assert sum(nz.values()) == 9
    assert 0 not in nz


def test_tensor_shape_budget_guard():
    import pytest
    from closurelab.budgets import BudgetExceeded

    with pytest.raises(BudgetExceeded):
        TensorShape((5, 6))  # 30 cells over the default 24-bit budget
