import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pseudospec.cartan import GroupShape, ShapeError
from pseudospec.diagrams import (
    ArcA,
    ArcB,
    BareZ,
    Chain,
    Cycle,
    Signature,
    bare_count,
    diagram_sign,
    enumerate_merged_diagrams,
    iter_split_diagrams,
    iter_bare_diagrams,
    iter_merged_diagrams,
    iter_splits,
    split_count,
    permutation_sign,
    slot_map,
    merged_count,
)

SHAPES = [GroupShape(p, q) for p in range(1, 5) for q in range(1, p + 1) if p + q <= 5]


def cases():
    for shape in SHAPES:
        for r in range(shape.q + 1):
            for k in range(r, shape.q + 1):
                yield shape, r, k


def cycle_sign(perm):
    """Parity from the cycle decomposition (independent of inversion counting)."""
    seen, sign = set(), 1
    for s in range(len(perm)):
        if s in seen:
            continue
        length, j = 0, s
        while j not in seen:
            seen.add(j)
            j = perm[j]
            length += 1
        sign *= -1 if length % 2 == 0 else 1
    return sign


def test_forced_diagram_u11():
    # U(1,1), r = k = 1: the single cycle is the only option
    ds = enumerate_merged_diagrams(GroupShape(1, 1), 1, 1)
    assert len(ds) == 1
    assert ds[0].pieces == (Cycle(1, 1),)
    assert ds[0].sign == 1


@pytest.mark.parametrize("shape,r,k", list(cases()), ids=str)
def test_counts_and_uniqueness(shape, r, k):
    tilde = list(iter_merged_diagrams(shape, r, k))
    assert len(tilde) == merged_count(shape, r, k)
    assert len(tilde) == math.factorial(k) * math.factorial(shape.n - 2 * r) // math.factorial(k - r)
    assert len({d.key() for d in tilde}) == len(tilde)
    for A in iter_splits(shape, r):
        sig = Signature(shape, r, A)
        assert sum(1 for _ in iter_split_diagrams(sig, k)) == split_count(shape, r, k)
        assert sum(1 for _ in iter_bare_diagrams(sig, k)) == bare_count(shape, r, k)


@pytest.mark.parametrize("shape,r,k", list(cases()), ids=str)
def test_fixed_split_families_partition_the_merged_family(shape, r, k):
    # each merged diagram fixes A as the c's on phi arcs plus chain left ends
    merged = {d.key() for d in iter_merged_diagrams(shape, r, k)}
    union = []
    for A in iter_splits(shape, r):
        union.extend(d.key() for d in iter_split_diagrams(Signature(shape, r, A), k))
    assert len(union) == len(set(union))
    assert set(union) == merged


@pytest.mark.parametrize("shape,r,k", list(cases()), ids=str)
def test_signs_match_cycle_parity(shape, r, k):
    for d in iter_merged_diagrams(shape, r, k):
        perm = slot_map(shape, r, k, d.pieces)
        assert d.sign == cycle_sign(perm) == diagram_sign(d, shape, r, k)


def test_empty_when_k_below_r():
    assert list(iter_merged_diagrams(GroupShape(2, 2), 2, 1)) == []
    assert merged_count(GroupShape(2, 2), 2, 1) == 0


def test_slot_map_rejects_non_bijections():
    shape = GroupShape(1, 1)
    with pytest.raises(ShapeError):
        slot_map(shape, 0, 0, [ArcA(1, 1), ArcA(2, 1)])
    with pytest.raises(ShapeError):
        slot_map(shape, 0, 0, [ArcA(1, 1)])
    with pytest.raises(ShapeError):
        slot_map(shape, 0, 1, [BareZ(1)])


def test_known_sign_u11_chain():
    # c_1 -> z_1, c_2 -> -conj z_1 is the identity slot map
    assert diagram_sign([Chain(1, 1, 2)], GroupShape(1, 1), 0, 1) == 1
    assert diagram_sign([Chain(2, 1, 1)], GroupShape(1, 1), 0, 1) == -1
    assert diagram_sign([ArcA(2, 1), ArcB(1, 1)], GroupShape(1, 1), 0, 0) == -1


def test_signature_validation():
    shape = GroupShape(2, 1)
    with pytest.raises(ShapeError):
        Signature(shape, 0, (1,), (3, 2, 1))
    with pytest.raises(ShapeError):
        Signature(shape, 0, (1, 2), (1, 2, 3), strict=True)
    with pytest.raises(ShapeError):
        Signature(shape, 1, (1,), (2,), (0,), (-1.0,), strict=True)
    sig = Signature(shape, 0, (1, 3), (3, 2, 1))
    assert sig.B == (2,)


@given(st.permutations(list(range(7))))
def test_inversion_parity_equals_cycle_parity(perm):
    assert permutation_sign(perm) == cycle_sign(perm)


@given(st.permutations(list(range(6))), st.permutations(list(range(6))))
def test_sign_is_multiplicative(a, b):
    comp = [a[b[i]] for i in range(6)]
    assert permutation_sign(comp) == permutation_sign(a) * permutation_sign(b)


def test_enumeration_order_is_deterministic():
    shape = GroupShape(2, 2)
    first = [d.key() for d in iter_merged_diagrams(shape, 1, 2)]
    second = [d.key() for d in iter_merged_diagrams(shape, 1, 2)]
    assert first == second
    assert len(list(itertools.islice(iter_merged_diagrams(shape, 0, 2), 3))) == 3
