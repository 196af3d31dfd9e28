"""Forcing multisets and the executable matrix-case pipeline.

The central objects: agreement profiles (how many elements of a multiset
each array annihilates), forcing certificates (containment of the
high-agreement set in a sum of subspace blowups), and the constructive
chain dense-pairs -> fibre subspaces -> structured multiset Q ->
witnessed containment that realizes the d=2 analysis at desk scale.

Rank-one multisets are handled as explicit factor tuples (u_1,..,u_d)
rather than flattened tensors: fibre densities are part of every
construction here, and the zero tensor's fibres are not recoverable from
the flattened multiset.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .budgets import (
    BudgetExceeded,
    DensityTooLow,
    DimensionMismatch,
    VerificationFailure,
    check_enumeration,
)
from .gf2 import Subspace, rref
from .spectral import GroupMultiset, GroupSet, bogolyubov, wht
from .tensor import (
    LSystem,
    SimpleSet,
    Tensor,
    TensorShape,
    contract,
    lsystem_intersect,
    matvec_first,
    rank1_flat,
    sum_of_blowups,
)


# ---------------------------------------------------------------------------
# agreement profiles and forcing certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AgreementProfile:
    """counts[r] = #{q in Q : r.q = 0}, multiplicities included."""

    q: GroupMultiset
    counts: np.ndarray  # int64, length 2^n

    @property
    def total(self) -> int:
        return self.q.total


def agreement_profile(
    q: GroupMultiset, shape: TensorShape | None = None, budget_exp: int = 20
) -> AgreementProfile:
    """Exact agreement counts for every array, via one transform.

    counts[r] = (|Q| + sum_q mult(q)(-1)^(r.q)) / 2.
    """
    if shape is not None and shape.total != q.n:
        raise DimensionMismatch("shape.total differs from multiset exponent")
    if q.n > budget_exp:
        raise BudgetExceeded(f"2^{q.n} profile exceeds 2^{budget_exp} budget")
    spec = wht(q.counts_array(), q.n)
    counts = (q.total + spec.coeffs) // 2
    if int(counts[0]) != q.total or int(counts.max()) > q.total or counts.min() < 0:
        raise VerificationFailure("agreement profile out of range")  # pragma: no cover
    return AgreementProfile(q, counts)


def agreement_threshold(total: int, alpha: Fraction) -> int:
    """Smallest integer count c with c >= alpha * total."""
    alpha = Fraction(alpha)
    return -(-alpha.numerator * total // alpha.denominator)


@dataclass(frozen=True)
class ForcingCertificate:
    q: GroupMultiset
    alpha: Fraction
    spaces: Mapping[tuple[int, ...], Subspace]
    k: int
    verified: bool
    counterexample: int | None = None
    agreement_set_size: int = 0

    def to_json(self) -> dict:
        return {
            "alpha_num": self.alpha.numerator,
            "alpha_den": self.alpha.denominator,
            "k": self.k,
            "verified": self.verified,
            "counterexample": self.counterexample,
            "agreement_set_size": self.agreement_set_size,
            "spaces": [
                {"axes": list(axes), "rows": space.to_rows_hex()}
                for axes, space in sorted(self.spaces.items())
            ],
        }


def check_forcing(
    profile: AgreementProfile,
    alpha: Fraction,
    spaces: Mapping[tuple[int, ...], Subspace],
    shape: TensorShape,
) -> ForcingCertificate:
    """Verify that the alpha-agreement set sits inside sum_I V_I (x) F2^{I^c}.

    Failure is a result carrying a counterexample array, not an error.
    """
    alpha = Fraction(alpha)
    thresh = agreement_threshold(profile.total, alpha)
    candidates = np.flatnonzero(profile.counts >= thresh)
    target = sum_of_blowups(shape, spaces)
    k = max((s.dim for s in spaces.values()), default=0)
    for r in candidates:
        if not target.contains(int(r)):
            return ForcingCertificate(
                profile.q, alpha, dict(spaces), k, False, int(r), int(candidates.size)
            )
    return ForcingCertificate(
        profile.q, alpha, dict(spaces), k, True, None, int(candidates.size)
    )


# ---------------------------------------------------------------------------
# exact sumset reachability with witnesses
# ---------------------------------------------------------------------------


class SumsetReach:
    """Layered BFS bitmaps: sums of at most j generators, with witnesses."""

    def __init__(self, generators: Iterable[int], nbits: int, depth: int,
                 budget: int = 2**24):
        size = 1 << nbits
        check_enumeration(size, budget)
        self.nbits = nbits
        self.depth = depth
        self.generators = sorted(set(int(g) for g in generators))
        idx = np.arange(size, dtype=np.int64)
        reach = np.zeros(size, dtype=bool)
        reach[0] = True
        self.layers = [reach.copy()]
        for _ in range(depth):
            nxt = reach.copy()
            for g in self.generators:
                nxt |= reach[idx ^ g]
            self.layers.append(nxt)
            reach = nxt

    def depth_of(self, x: int) -> int | None:
        for j, layer in enumerate(self.layers):
            if layer[x]:
                return j
        return None

    def witness(self, x: int) -> list[int] | None:
        """Generators (at most ``depth`` of them) summing to x, or None."""
        j = self.depth_of(x)
        if j is None:
            return None
        out: list[int] = []
        while j > 0:
            if self.layers[j - 1][x]:
                j -= 1
                continue
            for g in self.generators:
                if self.layers[j - 1][x ^ g]:
                    out.append(g)
                    x ^= g
                    j -= 1
                    break
            else:  # pragma: no cover - contradicts layer construction
                raise VerificationFailure("witness backtrack lost its path")
        return out


# ---------------------------------------------------------------------------
# rank-one factor tuples
# ---------------------------------------------------------------------------


def tuple_to_tensor_int(dims: tuple[int, ...], factors: tuple[int, ...]) -> int:
    return rank1_flat(dims, factors)


def random_factor_tuples(
    dims: tuple[int, ...], count: int, rng
) -> set[tuple[int, ...]]:
    """``count`` distinct factor tuples, uniform over the product space."""
    bits = sum(dims)
    check_enumeration(1 << bits)
    raw = rng.choice(1 << bits, size=count, replace=False)
    out = set()
    for packed in raw.tolist():
        tup = []
        for n in dims:
            tup.append(packed & ((1 << n) - 1))
            packed >>= n
        out.add(tuple(tup))
    return out


def tuples_density(dims: tuple[int, ...], tuples) -> Fraction:
    return Fraction(len(tuples), 1 << sum(dims))


def tensor_multiset(shape: TensorShape, tuples) -> GroupMultiset:
    counter: Counter = Counter()
    for tup in tuples:
        counter[rank1_flat(shape.dims, tup)] += 1
    return GroupMultiset.from_counter(shape.total, counter)


# ---------------------------------------------------------------------------
# the matrix-case structure finder
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StructureResult:
    shape: TensorShape
    u_space: Subspace
    v_spaces: dict[int, Subspace]  # u -> V_u, common codimension
    fibre_codim_bound: int  # Bogolyubov bound 2/(delta/2)^2 clamped to n2
    common_codim: int
    decompositions: dict[int, tuple[int, int, int, int]]  # u -> (t1..t4)
    witnesses: dict[tuple[int, int], list[int]]  # (u, v) -> 16-sum witness


def find_structure_matrix(
    pairs: Iterable[tuple[int, int]],
    shape: TensorShape,
    delta: Fraction,
    verify: bool = True,
) -> StructureResult:
    """Dense rank-one pairs -> subspaces U and (V_u) with u (x) V_u in 16B'.

    Follows the fibre argument directly: per-u fibre densities define T,
    Bogolyubov on each fibre gives W_u, Bogolyubov on T gives U, each
    u in U is split as t1+t2+t3+t4 over T (lexicographically first
    triple), and V_u is the intersection of the four W_{t_i} trimmed to
    the common codimension.  With ``verify`` every output pair is
    certified by an explicit 16-term witness over B'.
    """
    delta = Fraction(delta)
    n1, n2 = shape.dims
    pair_set = set(pairs)
    if Fraction(len(pair_set), 1 << (n1 + n2)) < delta:
        raise DensityTooLow(
            f"{len(pair_set)} pairs is below density {delta} of 2^{n1 + n2}"
        )

    fibres: dict[int, set[int]] = defaultdict(set)
    for u, v in pair_set:
        fibres[u].add(v)
    half = delta / 2
    t_set = sorted(
        u
        for u, fibre in fibres.items()
        if Fraction(len(fibre), 1 << n2) >= half
    )
    if Fraction(len(t_set), 1 << n1) < half:
        raise VerificationFailure("averaging bound for |T| failed")

    w_spaces = {
        u: bogolyubov(GroupSet.from_elements(n2, fibres[u])) for u in t_set
    }
    u_space = bogolyubov(GroupSet.from_elements(n1, t_set))

    t_lookup = set(t_set)
    decompositions: dict[int, tuple[int, int, int, int]] = {}
    v_raw: dict[int, Subspace] = {}
    for u in u_space.enumerate():
        found = None
        for t1 in t_set:
            for t2 in t_set:
                partial = u ^ t1 ^ t2
                for t3 in t_set:
                    if partial ^ t3 in t_lookup:
                        found = (t1, t2, t3, partial ^ t3)
                        break
                if found:
                    break
            if found:
                break
        if found is None:  # pragma: no cover - Bogolyubov guarantees a split
            raise VerificationFailure(f"no 4-decomposition of {u:#x} over T")
        decompositions[u] = found
        meet = w_spaces[found[0]]
        for t in found[1:]:
            meet = meet.intersect(w_spaces[t])
        v_raw[u] = meet

    common = max(space.codim for space in v_raw.values())
    v_spaces = {
        u: space.drop_last_rows(n2 - common) for u, space in v_raw.items()
    }

    witnesses: dict[tuple[int, int], list[int]] = {}
    if verify:
        matrices = [tuple_to_tensor_int(shape.dims, tup) for tup in pair_set]
        reach = SumsetReach(matrices, shape.total, 16)
        for u, space in v_spaces.items():
            for v in space.enumerate():
                wit = reach.witness(tuple_to_tensor_int(shape.dims, (u, v)))
                if wit is None:
                    raise VerificationFailure(
                        f"{u:#x} (x) {v:#x} missed the 16-fold sumset"
                    )
                witnesses[(u, v)] = wit

    alpha_half = half if half > 0 else Fraction(1)
    bogo_bound = min(n2, math.ceil(2 / (alpha_half * alpha_half)))
    return StructureResult(
        shape, u_space, v_spaces, bogo_bound, common, decompositions, witnesses
    )


class StructuredMultiset(GroupMultiset):
    """Multiset union_{u in U} (u (x) V_u) keeping its construction."""

    def __init__(
        self,
        shape: TensorShape,
        u_space: Subspace,
        v_spaces: Mapping[int, Subspace],
        counts: Mapping[int, int],
    ):
        super().__init__(shape.total, counts)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "u_space", u_space)
        object.__setattr__(self, "v_spaces", dict(v_spaces))


def build_q_matrix(
    u_space: Subspace, v_spaces: Mapping[int, Subspace], shape: TensorShape
) -> StructuredMultiset:
    """The multiset union_{u in U} (u (x) V_u); |Q| = |U| * |V_.|."""
    codims = {space.codim for space in v_spaces.values()}
    if len(codims) > 1:
        raise ValueError(f"V_u codimensions differ: {sorted(codims)}")
    counter: Counter = Counter()
    for u in u_space.enumerate():
        space = v_spaces[u]
        for v in space.enumerate():
            counter[tuple_to_tensor_int(shape.dims, (u, v))] += 1
    q = StructuredMultiset(shape, u_space, dict(v_spaces), dict(counter))
    expected = (1 << u_space.dim) * (1 << next(iter(v_spaces.values())).dim)
    if q.total != expected:  # pragma: no cover - arithmetic identity
        raise VerificationFailure("structured multiset size mismatch")
    return q


build_Q_matrix = build_q_matrix


# ---------------------------------------------------------------------------
# small-rank collisions and the reduced witness
# ---------------------------------------------------------------------------


def tensor_agreement(q: GroupMultiset, r: int) -> int:
    """#{q in Q : r.q = 0} for one array, by direct counting."""
    return sum(
        mult for elem, mult in q.counts.items() if (r & elem).bit_count() % 2 == 0
    )


@dataclass(frozen=True)
class SmallRankPair:
    i: int
    j: int
    kernel: Subspace  # {u in U : (r_i - r_j) u = 0}
    common_contractions: int


def smallrank_pair(
    q: StructuredMultiset, rs: Sequence[Tensor], k: int
) -> SmallRankPair:
    """Find i != j whose difference annihilates many u in U.

    Requires len(rs) == 2^(k+3) arrays, each agreeing with at least 3/4
    of Q; the collision count of the returned pair meets the pigeonhole
    bound |U| / (4 m^2).
    """
    m = 1 << (k + 3)
    if len(rs) != m:
        raise ValueError(f"need exactly m = 2^(k+3) = {m} arrays, got {len(rs)}")
    n1, n2 = q.shape.dims
    bad = [
        i
        for i, r in enumerate(rs)
        if 4 * tensor_agreement(q, r.data) < 3 * q.total
    ]
    if bad:
        raise ValueError(f"arrays {bad} fall below 3/4 agreement with Q")

    u_elems = list(q.u_space.enumerate())
    collision_counts: Counter = Counter()
    for u in u_elems:
        perp = q.v_spaces[u].complement()
        buckets: dict[int, list[int]] = defaultdict(list)
        for i, r in enumerate(rs):
            image = matvec_first(r.data, u, n1, n2)
            if perp.contains(image):
                buckets[image].append(i)
        for members in buckets.values():
            for a in range(len(members)):
                for b in range(a + 1, len(members)):
                    collision_counts[(members[a], members[b])] += 1

    if not collision_counts:  # pragma: no cover - excluded by the pigeonhole
        raise VerificationFailure("no colliding pair found")
    (i, j), best = max(collision_counts.items(), key=lambda kv: (kv[1], kv[0]))
    if best * 4 * m * m < len(u_elems):  # pragma: no cover - theorem bound
        raise VerificationFailure("collision count below the pigeonhole bound")

    kernel = _kernel_in_space(rs[i].data ^ rs[j].data, q.u_space, n1, n2)
    return SmallRankPair(i, j, kernel, best)


def _kernel_in_space(diff: int, u_space: Subspace, n1: int, n2: int) -> Subspace:
    """{u in U : diff u = 0} via coefficients over U's basis."""
    images = [matvec_first(diff, row, n1, n2) for row in u_space.rows]
    b = len(images)
    coord_rows = []
    for c in range(n2):
        row = 0
        for idx, img in enumerate(images):
            if (img >> c) & 1:
                row |= 1 << idx
        coord_rows.append(row)
    coeff_kernel = rref(coord_rows, max(b, 1)).complement()
    gens = []
    for lam in coeff_kernel.rows:
        v = 0
        for idx in range(b):
            if (lam >> idx) & 1:
                v ^= u_space.rows[idx]
        gens.append(v)
    return rref(gens, u_space.ambient_dim)


@dataclass(frozen=True)
class ReducedWitness:
    w1: Subspace  # U^perp in F2^{n1}
    w2: Subspace  # span(X) in F2^{n2}
    x_list: list[int]


def reduced_witness(q: StructuredMultiset, l: int) -> ReducedWitness:
    """W1 = U^perp; W2 = span{x : x in V_u^perp for >= |U|/(10*2^l) u's}.

    |X| <= 10 * 2^(k+l) is guaranteed by counting and re-checked here.
    """
    n1, n2 = q.shape.dims
    u_elems = list(q.u_space.enumerate())
    hits = Counter()
    for u in u_elems:
        for x in q.v_spaces[u].complement().enumerate():
            hits[x] += 1
    scale = 10 * (1 << l)
    x_list = sorted(x for x, c in hits.items() if c * scale >= len(u_elems))
    k = max(space.codim for space in q.v_spaces.values())
    if len(x_list) > 10 * (1 << (k + l)):  # pragma: no cover - counting bound
        raise VerificationFailure("|X| exceeded its counting bound")
    return ReducedWitness(q.u_space.complement(), rref(x_list, n2), x_list)


# ---------------------------------------------------------------------------
# l-system construction from dense generator sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SystemResult:
    system: LSystem
    sumset_depth: int  # elements certified inside depth-fold sums of B'
    witnesses: dict[int, list[int]] | None


def find_system(
    tuples,
    shape: TensorShape,
    delta: Fraction,
    verify: bool = True,
) -> SystemResult:
    """Nested-subspace system with elements inside 4^d-fold sums of B'.

    d=1 is Bogolyubov directly; d>1 recurses on dense fibres, extracts a
    subspace of the dense fibre index set, and intersects four recursive
    systems for each of its elements.
    """
    delta = Fraction(delta)
    tuples = set(tuples)
    if tuples_density(shape.dims, tuples) < delta:
        raise DensityTooLow(f"density below {delta}")
    system = _find_system_inner(tuples, shape, delta)
    depth = 4**shape.d
    witnesses = None
    if verify:
        gens = [tuple_to_tensor_int(shape.dims, tup) for tup in tuples]
        reach = SumsetReach(gens, shape.total, depth)
        witnesses = {}
        for elem in system.element_counter():
            wit = reach.witness(elem)
            if wit is None:
                raise VerificationFailure(
                    f"system element {elem:#x} missed the {depth}-fold sumset"
                )
            witnesses[elem] = wit
    return SystemResult(system, depth, witnesses)


def _find_system_inner(tuples, shape: TensorShape, delta: Fraction) -> LSystem:
    n1 = shape.dims[0]
    if shape.d == 1:
        root = bogolyubov(GroupSet.from_elements(n1, [t[0] for t in tuples]))
        return LSystem(shape, root, bound=root.codim)

    tail_dims = shape.dims[1:]
    tail_shape = TensorShape(tail_dims)
    tail_size = 1 << sum(tail_dims)
    fibres: dict[int, set[tuple[int, ...]]] = defaultdict(set)
    for tup in tuples:
        fibres[tup[0]].add(tup[1:])
    half = delta / 2
    t_set = sorted(
        u for u, fibre in fibres.items() if Fraction(len(fibre), tail_size) >= half
    )
    if Fraction(len(t_set), 1 << n1) < half:  # pragma: no cover - averaging
        raise VerificationFailure("averaging bound for |T| failed")

    recursive = {
        t: _find_system_inner(fibres[t], tail_shape, half) for t in t_set
    }
    u_space = bogolyubov(GroupSet.from_elements(n1, t_set))
    t_lookup = set(t_set)

    children: dict[tuple[int, ...], Subspace] = {}
    bound = u_space.codim
    for u in u_space.enumerate():
        found = None
        for t1 in t_set:
            for t2 in t_set:
                partial = u ^ t1 ^ t2
                for t3 in t_set:
                    if partial ^ t3 in t_lookup:
                        found = (t1, t2, t3, partial ^ t3)
                        break
                if found:
                    break
            if found:
                break
        if found is None:  # pragma: no cover - Bogolyubov guarantees a split
            raise VerificationFailure(f"no 4-decomposition of {u:#x} over T")
        sub = lsystem_intersect(
            lsystem_intersect(recursive[found[0]], recursive[found[1]]),
            lsystem_intersect(recursive[found[2]], recursive[found[3]]),
        )
        children[(u,)] = sub.root
        bound = max(bound, sub.root.codim)
        for prefix, space in sub.children.items():
            children[(u,) + prefix] = space
            bound = max(bound, space.codim)
    return LSystem(shape, u_space, children, bound=bound)


def system_in_simple(q: LSystem, simple: SimpleSet) -> LSystem:
    """Intersection of an l-system with a subspace-form simple set.

    Walks the prefix tree; at axis j every constraint subset I with
    max(I) = j cuts the child space by the linear conditions induced by
    the fixed prefix factors.
    """
    if simple.translate.data != 0:
        raise ValueError("simple set must be a subspace (translate 0)")
    if simple.shape != q.shape:
        raise DimensionMismatch("system and simple set shapes differ")
    shape = q.shape

    by_axis: dict[int, list[tuple[tuple[int, ...], Subspace]]] = defaultdict(list)
    for axes, space in simple.spaces.items():
        by_axis[max(axes)].append((axes, space))

    def constrain(space: Subspace, prefix: tuple[int, ...], j: int) -> Subspace:
        for axes, l_space in by_axis.get(j, []):
            lead_axes = tuple(a for a in axes if a != j)
            if lead_axes:
                lead_dims = tuple(shape.dims[a] for a in lead_axes)
                lead = rank1_flat(lead_dims, tuple(prefix[a] for a in lead_axes))
                if lead == 0:
                    continue
            conditions = []
            comp = l_space.complement()
            for z in comp.rows:
                if lead_axes:
                    z_tensor = Tensor(TensorShape(lead_dims + (shape.dims[j],)), z)
                    w = contract(
                        z_tensor,
                        Tensor(
                            TensorShape(lead_dims), lead
                        ),
                    )
                    conditions.append(w.data)
                else:
                    conditions.append(z)
            space = space.intersect(rref(conditions, shape.dims[j]).complement())
        return space

    root = constrain(q.root, (), 0)
    children: dict[tuple[int, ...], Subspace] = {}

    def walk(prefix: tuple[int, ...], space: Subspace):
        if len(prefix) == shape.d - 1:
            return
        for u in space.enumerate():
            new_prefix = prefix + (u,)
            child = constrain(q.child(new_prefix), new_prefix, len(new_prefix))
            children[new_prefix] = child
            walk(new_prefix, child)

    if shape.d > 1:
        walk((), root)
    return LSystem(shape, root, children, bound=q.bound + simple.simplicity)


# ---------------------------------------------------------------------------
# degeneracy clustering
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClusterResult:
    centers: list[Tensor]
    assignments: list[tuple[int, dict]]  # per input: (center index, witness)


def degeneracy_cluster(
    rs: Sequence[Tensor],
    k: int,
    q: GroupMultiset | None = None,
    search_budget: int = 2**20,
) -> ClusterResult:
    """Greedy maximal subset of rs with pairwise non-degenerate differences.

    Every input then splits as center + k-degenerate remainder, verified
    by the decision procedure.  With ``q`` given, each input must agree
    with at least 3/4 of it.  An undecidable shape raises BudgetExceeded
    rather than guessing.
    """
    from .tensor import degenerate_decide

    if q is not None:
        bad = [
            i
            for i, r in enumerate(rs)
            if 4 * tensor_agreement(q, r.data) < 3 * q.total
        ]
        if bad:
            raise ValueError(f"arrays {bad} fall below 3/4 agreement with Q")

    centers: list[Tensor] = []
    assignments: list[tuple[int, dict]] = []
    for r in rs:
        placed = False
        for idx, center in enumerate(centers):
            decision = degenerate_decide(r ^ center, k, search_budget)
            if not decision.decided:
                raise BudgetExceeded(
                    f"degeneracy undecidable at this shape: {decision.reason}"
                )
            if decision.degenerate:
                assignments.append((idx, decision.witness))
                placed = True
                break
        if not placed:
            centers.append(r)
            zero_witness = degenerate_decide(r ^ r, k, search_budget).witness
            assignments.append((len(centers) - 1, zero_witness))
    return ClusterResult(centers, assignments)


# ---------------------------------------------------------------------------
# multiplicity equalization
# ---------------------------------------------------------------------------


def equalize_multiplicities(
    multisets: Sequence[GroupMultiset], cap: int = 2**20
) -> list[GroupMultiset]:
    """Scale multisets to (near-)equal totals.

    Exact least-common-multiple scaling when it fits under ``cap``;
    otherwise floor scaling to the cap, which still guarantees
    max total <= 2 * min total.
    """
    totals = [m.total for m in multisets]
    if any(t < 1 for t in totals):
        raise ValueError("multisets must be nonempty")
    lcm = math.lcm(*totals)
    if lcm <= cap:
        return [m.scaled(lcm // t) for m, t in zip(multisets, totals)]
    if max(totals) > cap:
        raise BudgetExceeded(f"multiset total exceeds cap {cap}")
    return [m.scaled(cap // t) for m, t in zip(multisets, totals)]


# ---------------------------------------------------------------------------
# the full matrix-case pipeline experiment
# ---------------------------------------------------------------------------


@dataclass
class PipelineResult:
    shape: TensorShape
    delta: Fraction
    epsilon: Fraction
    rank_threshold: int
    structure: StructureResult
    q: StructuredMultiset
    agreement_set: list[int]
    centers: list[int]
    w1: Subspace
    w2: Subspace
    verified: bool
    counterexample: int | None
    measured: dict = field(default_factory=dict)

    def containment_space(self) -> Subspace:
        """span(centers) + W1 (x) F2^{n2} + F2^{n1} (x) W2."""
        space = sum_of_blowups(self.shape, {(0,): self.w1, (1,): self.w2})
        return space.sum(rref(self.centers, self.shape.total))


def rank_reach(shape: TensorShape) -> SumsetReach:
    """Layered reachability over nonzero rank-1 matrices.

    Over GF(2), rank(M) equals the minimum number of rank-1 summands, so
    layer l is exactly the rank<=l bitmap.
    """
    n1, n2 = shape.dims
    gens = [
        tuple_to_tensor_int(shape.dims, (u, v))
        for u in range(1, 1 << n1)
        for v in range(1, 1 << n2)
    ]
    return SumsetReach(set(gens), shape.total, min(n1, n2))


def matrix_pipeline(
    pairs,
    shape: TensorShape,
    delta: Fraction,
    epsilon: Fraction = Fraction(1, 32),
    rank_threshold: int = 1,
) -> PipelineResult:
    """Run the whole matrix-case experiment and verify its containment.

    find_structure -> Q -> exhaustive high-agreement set R at 1-epsilon ->
    greedy rank-threshold clustering of R -> reduced witness (W1, W2) ->
    exhaustive check R subset of span(centers) + W1 (x) F2 + F2 (x) W2.
    """
    if not 0 <= rank_threshold <= min(shape.dims):
        raise ValueError(f"rank threshold {rank_threshold} out of range")
    structure = find_structure_matrix(pairs, shape, delta)
    q = build_q_matrix(structure.u_space, structure.v_spaces, shape)
    profile = agreement_profile(q, shape)
    thresh = agreement_threshold(q.total, 1 - Fraction(epsilon))
    r_arr = np.flatnonzero(profile.counts >= thresh).astype(np.int64)
    r_set = [int(r) for r in r_arr]

    # greedy clustering in ascending order; a point joins the centers iff
    # its difference with every earlier center has rank > threshold
    low_rank = rank_reach(shape).layers[rank_threshold]
    covered = np.zeros(r_arr.size, dtype=bool)
    centers: list[int] = []
    for idx in range(r_arr.size):
        if covered[idx]:
            continue
        c = int(r_arr[idx])
        centers.append(c)
        covered |= low_rank[r_arr ^ c]

    witness = reduced_witness(q, rank_threshold)
    target = sum_of_blowups(shape, {(0,): witness.w1, (1,): witness.w2})
    target = target.sum(rref(centers, shape.total))

    counterexample = None
    outside = np.zeros(r_arr.size, dtype=bool)
    for z in target.complement().rows:
        outside |= np.bitwise_count(np.bitwise_and(r_arr, np.int64(z))).astype(np.int64) % 2 == 1
    bad = np.flatnonzero(outside)
    if bad.size:
        counterexample = int(r_arr[bad[0]])

    measured = {
        "u_codim": structure.u_space.codim,
        "v_common_codim": structure.common_codim,
        "q_total": q.total,
        "agreement_set_size": len(r_set),
        "num_centers": len(centers),
        "dim_w1": witness.w1.dim,
        "dim_w2": witness.w2.dim,
        "x_size": len(witness.x_list),
        "containment_dim": target.dim,
    }
    return PipelineResult(
        shape=shape,
        delta=Fraction(delta),
        epsilon=Fraction(epsilon),
        rank_threshold=rank_threshold,
        structure=structure,
        q=q,
        agreement_set=r_set,
        centers=centers,
        w1=witness.w1,
        w2=witness.w2,
        verified=counterexample is None,
        counterexample=counterexample,
        measured=measured,
    )
