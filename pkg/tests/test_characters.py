import cmath
import math

import numpy as np
import pytest

from pseudospec.cartan import CartanPoint, GroupShape, ShapeError, random_point, symmetry_type
from pseudospec.characters import (
    check_vandermonde_identity,
    merged_character_on_chamber,
    merged_character,
    character_density,
    split_sum_character,
    parameter_vandermonde,
)
from pseudospec.diagrams import Signature, iter_splits

SHAPES = [GroupShape(1, 1), GroupShape(2, 1), GroupShape(2, 2), GroupShape(3, 1)]


def strict_sig(shape, r, A, rng):
    size = shape.n - 2 * r
    c = sorted(rng.choice(np.arange(-5, 6), size, replace=False).tolist(), reverse=True)
    rho = sorted(rng.uniform(0.3, 2.0, r).tolist(), reverse=True)
    return Signature(shape, r, A, c, rng.integers(-2, 3, r).tolist(), rho, strict=True)


def cases():
    for shape in SHAPES:
        for r in range(shape.q + 1):
            for k in range(r, shape.q + 1):
                yield shape, r, k


def test_u11_compact_character_by_hand():
    shape = GroupShape(1, 1)
    sig = Signature(shape, 0, (1,), (3, -1))
    h = CartanPoint(0, (0.4,), (-1.1,))
    # one diagram: c_1 on phi, c_2 on psi, with global sign -1
    want = -cmath.exp(1j * (3 * 0.4 + (-1) * (-1.1)))
    assert abs(character_density(sig, 0, h) - want) < 1e-14


def test_u11_cycle_character_by_hand():
    shape = GroupShape(1, 1)
    sig = Signature(shape, 1, (), (), (2,), (0.7,))
    h = CartanPoint(1, (), (), (0.5,), (0.3,))
    assert abs(merged_character(sig, 1, h) - cmath.exp(2j * 0.3) * 2j * math.sin(0.7 * 0.5)) < 1e-14


def test_parameter_vandermonde_by_hand():
    sig = Signature(GroupShape(1, 1), 1, (), (), (1,), (2.0,))
    d = 0.5 * (1 + 2j)
    assert abs(parameter_vandermonde(sig) - (d - d.conjugate())) < 1e-14


@pytest.mark.parametrize("shape,r,k", list(cases()), ids=str)
def test_split_sum_routes_agree(shape, r, k, rng):
    sig = strict_sig(shape, r, (), rng)
    for _ in range(3):
        h = random_point(shape, k, rng)
        a = split_sum_character(sig, k, h, "splits")
        b = split_sum_character(sig, k, h, "tilde")
        assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


@pytest.mark.parametrize("shape,r,k", list(cases()), ids=str)
def test_density_skew_and_merged_symmetric(shape, r, k, rng):
    A = next(iter_splits(shape, r))
    sig = strict_sig(shape, r, A, rng)
    rep = symmetry_type(shape, k, lambda h: character_density(sig, k, h), samples=10, rng=rng)
    assert rep.skew_violation <= 1e-10
    rep = symmetry_type(shape, k, lambda h: merged_character(sig, k, h), samples=10, rng=rng)
    assert rep.symmetric_violation <= 1e-10


@pytest.mark.parametrize("shape,r,k", list(cases()), ids=str)
def test_chamber_expansion_matches_pointwise_eta(shape, r, k, rng):
    sig = strict_sig(shape, r, (), rng)
    for _ in range(4):
        h = random_point(shape, k, rng)
        signs = tuple(1 if x > 0 else -1 for x in h.t)
        got = merged_character_on_chamber(sig, k, signs)(h)
        assert abs(got - merged_character(sig, k, h)) <= 1e-12 * max(1.0, abs(got))


@pytest.mark.parametrize("shape,r,k", list(cases()), ids=str)
def test_operator_identity(shape, r, k, rng):
    sig = strict_sig(shape, r, (), rng)
    rep = check_vandermonde_identity(sig, k, samples=10, rng=rng)
    assert rep.passed, rep


def test_uncorrected_sign_fails_where_the_correction_is_odd(rng):
    # (k - r)(q - k + 1) odd: U(2,1) with r = 0, k = 1
    sig = strict_sig(GroupShape(2, 1), 0, (), rng)
    rep = check_vandermonde_identity(sig, 1, samples=5, rng=rng, convention="uncorrected")
    assert not rep.passed


def test_zero_below_r_and_point_checks(rng):
    shape = GroupShape(2, 2)
    sig = strict_sig(shape, 2, (), rng)
    h = random_point(shape, 1, rng)
    assert split_sum_character(sig, 1, h) == 0
    with pytest.raises(ShapeError):
        character_density(sig, 2, h)
    with pytest.raises(ShapeError):
        merged_character_on_chamber(sig, 2, (1, 0))
