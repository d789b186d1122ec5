import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pseudospec.cartan import GroupShape, ShapeError
from pseudospec.diagrams import Signature
from pseudospec.exppoly import ExpPoly, PreconditionError, apply_vandermonde_op
from pseudospec.projectors import (
    GridTorusFunction,
    PoleError,
    OrbitalFamily,
    cutoff_ladder,
    kernel_transform_check,
    cycle_series_check,
    fourier_inversion_check,
    multiplicities,
    pair_pieces,
    plancherel_density_factor,
    random_family,
    most_continuous_prefactor,
    richardson,
    series_prefactor,
    split_projector_pairing,
    mode_projector_pairing,
    most_continuous_pairing,
    series_projector_pairing,
    weyl_average,
)

U11 = GroupShape(1, 1)


def odd_member(rng, n_terms=3):
    """Function of (t, theta), odd in t, as an applied U(1,1) H_1 member."""
    f = ExpPoly(0, 0, 1)
    for _ in range(n_terms):
        f = f + ExpPoly.term(
            None, 1, complex(rng.normal(), rng.normal()), (), (), (int(rng.integers(-3, 4)),),
            (int(2 * rng.integers(0, 3) + 1),), (float(rng.uniform(0.5, 1.5)),), dims=(0, 0),
        )
    return f


def t_grid(half=16.0, n=320000):
    # midpoint rule: symmetric nodes that skip t = 0
    dt = 2 * half / n
    return -half + (np.arange(n) + 0.5) * dt, dt


def quad_t(F, theta, kernel):
    t, dt = t_grid()
    vals = F.eval_many(np.zeros((len(t), 0)), np.zeros((len(t), 0)), t.reshape(-1, 1), np.full((len(t), 1), theta))
    return np.sum(vals * kernel(t)) * dt


def quad_t_theta(F, weight, n_theta=64):
    th = 2 * math.pi * np.arange(n_theta) / n_theta
    t, dt = t_grid(n=40000)
    T, TH = np.meshgrid(t, th, indexing="ij")
    vals = F.eval_many(np.zeros((T.size, 0)), np.zeros((T.size, 0)), T.reshape(-1, 1), TH.reshape(-1, 1))
    return np.sum(vals.reshape(T.shape) * weight(T, TH)) * dt * (2 * math.pi / n_theta)


def test_density_factor():
    assert plancherel_density_factor(0, 1.0) == pytest.approx(-0.5j / math.tanh(math.pi / 2))
    assert plancherel_density_factor(3, 1.0) == pytest.approx(-0.5j * math.tanh(math.pi / 2))
    assert plancherel_density_factor(1, 0.0) == 0
    with pytest.raises(PoleError):
        plancherel_density_factor(2, 0.0)


def test_deltas_pairing_against_direct_quadrature(rng):
    F = odd_member(rng)
    got, err = pair_pieces(F, [], [], [("deltas",)])
    want = quad_t(F, 0.0, lambda t: 1 / np.tanh(t / 2)) + quad_t(F, math.pi, lambda t: np.tanh(t / 2))
    assert abs(got - want) < 1e-6 * max(1, abs(want))
    assert err < 1e-8


@pytest.mark.parametrize("ca,cb", [(2, -1), (1, 0), (0, -3)])
def test_chain_pairing_against_direct_quadrature(ca, cb, rng):
    F = odd_member(rng)
    F = F + ExpPoly.term(None, 1, 1.5, (), (), (-(ca + cb),), (1,), (0.8,), dims=(0, 0))
    got, _ = pair_pieces(F, [], [], [("chain", ca, cb)])
    want = quad_t_theta(F, lambda t, th: np.sign(t) * np.exp(-abs(ca - cb) * np.abs(t) + 1j * (ca + cb) * th))
    assert abs(got - want) < 1e-5 * max(1, abs(want))


@pytest.mark.parametrize("m", [0, 1, -2])
def test_cycle_pairing_against_direct_quadrature(m, rng):
    F = odd_member(rng)
    F = F + ExpPoly.term(None, 1, 1.0, (), (), (-m,), (3,), (1.1,), dims=(0, 0))
    kern = (lambda t: 1 / np.tanh(t)) if m % 2 == 0 else (lambda t: 1 / np.sinh(t))
    got, _ = pair_pieces(F, [], [], [("cycle", m)])
    want = quad_t_theta(F, lambda t, th: np.exp(1j * m * th) * kern(t))
    assert abs(got - want) < 1e-5 * max(1, abs(want))


def test_angle_pairings():
    F = ExpPoly.term(None, 0, 2.0, (3,), (-1,), dims=(1, 1))
    assert pair_pieces(F, [("delta",)], [("delta",)], [])[0] == 2.0
    assert pair_pieces(F, [("phase", -3)], [("phase", 1)], [])[0] == pytest.approx(2.0 * (2 * math.pi) ** 2)
    assert pair_pieces(F, [("phase", 3)], [("phase", 1)], [])[0] == 0


def test_pole_pairings_need_odd_functions():
    even = ExpPoly.term(None, 1, 1.0, (), (), (0,), (2,), (1.0,), dims=(0, 0))
    with pytest.raises(PreconditionError):
        pair_pieces(even, [], [], [("deltas",)])
    with pytest.raises(PreconditionError):
        pair_pieces(even, [], [], [("cycle", 0)])


def test_grid_torus_function_fourier_is_exact_for_trig_polys():
    fn = lambda x, y: 1 + 2 * np.exp(1j * (2 * x - y)) + 0.5 * np.exp(-3j * y)
    G = GridTorusFunction.from_callable(fn, size=32)
    assert G.fourier(2, -1) == pytest.approx(2.0)
    assert G.fourier(0, -3) == pytest.approx(0.5)
    assert abs(G.fourier(1, 1)) < 1e-14
    assert G.origin == pytest.approx(3.5)
    assert pair_pieces(G, [("phase", -2)], [("phase", 1)], [])[0] == pytest.approx(2 * (2 * math.pi) ** 2)


@pytest.mark.parametrize("shape", [U11, GroupShape(2, 1), GroupShape(2, 2), GroupShape(3, 1)], ids=str)
def test_random_families_have_the_right_symmetry(shape, rng):
    fam = random_family(shape, rng)
    fam.validate()
    for k in fam.members:
        assert not fam.members[k].is_zero()
        applied = OrbitalFamily(shape, {k: fam.F(k)}, {k})
        applied.validate()


def test_validate_rejects_wrong_symmetry(rng):
    shape = GroupShape(2, 1)
    bad = ExpPoly.term(shape, 0, 1.0, (1, 0), (0,))
    with pytest.raises(PreconditionError):
        OrbitalFamily(shape, {0: bad}).validate()
    assert OrbitalFamily(shape, {0: weyl_average(bad, shape, 0)}).check_symmetry()[0] < 1e-12


def test_weyl_average_is_idempotent(rng):
    shape = GroupShape(2, 2)
    f = random_family(shape, rng).members[1]
    assert weyl_average(f, shape, 1).equals(f, tol=1e-12)


def test_prefactors():
    sign, rat, pw = series_prefactor(U11, 1, 1)
    # n(n-1)/2 + pq + qr + r(r-1)/2 = 1 + 1 + 1 = 3; 2^0 * 1 * omega_1 = 1/2
    assert (sign, rat, pw) == (-1, 0.5, 1)
    sign, rat, pw = most_continuous_prefactor(U11)
    assert (sign, rat, pw) == (-1, 0.5, 1)


def test_remark_route_matches_general_formula(rng):
    for shape in (U11, GroupShape(2, 1), GroupShape(2, 2)):
        fam = random_family(shape, rng)
        a = series_projector_pairing(shape, shape.q, fam).value
        b = most_continuous_pairing(shape, fam).value
        assert abs(a - b) <= 1e-12 * abs(a)


def test_u11_theta1_by_hand(rng):
    # single member on H_1 with F = t e^{-t^2}: -pi/2 * <F, coth/tanh deltas>
    F = ExpPoly.term(None, 1, 1.0, (), (), (0,), (1,), (1.0,), dims=(0, 0))
    fam = OrbitalFamily(U11, {1: F}, {1})
    t, dt = t_grid()
    g = t * np.exp(-t * t)
    want = -math.pi / 2 * np.sum(g / np.tanh(t / 2) + g * np.tanh(t / 2)) * dt
    assert abs(series_projector_pairing(U11, 1, fam).value - want) < 1e-7


def test_refined_m_sum_reproduces_theta_Ac(rng):
    fam = random_family(U11, rng, ks=(1,), max_mode=3)
    sig = Signature(U11, 1, (), (), (0,), (1.0,))
    whole = split_projector_pairing(sig, fam).value
    parts = sum(mode_projector_pairing(Signature(U11, 1, (), (), (m,), (1.0,)), fam).value for m in range(-8, 9))
    assert abs(whole - parts) < 1e-10 * abs(whole)


def test_unsorted_m_is_sorted_with_warning(rng):
    fam = random_family(GroupShape(2, 2), rng)
    res = mode_projector_pairing(Signature(GroupShape(2, 2), 2, (), (), (-1, 2), (2.0, 1.0)), fam)
    assert "warning" in res.truncation


def test_multiplicities():
    assert multiplicities((3, 3, 1, 0, 0, 0)) == [2, 1, 3]
    assert multiplicities(()) == []


def test_cutoff_ladder():
    assert cutoff_ladder(60) == [60, 55, 50, 45, 40]
    assert cutoff_ladder(5, 3) == [5, 4, 3]
    with pytest.raises(ValueError):
        cutoff_ladder(3, 5)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=4), st.integers(20, 80))
def test_richardson_is_exact_on_polynomials_in_inverse_cutoff(coeffs, N):
    ladder = cutoff_ladder(N, len(coeffs) + 1)
    vals = [sum(c / n**i for i, c in enumerate(coeffs)) for n in ladder]
    assert abs(richardson(vals, ladder) - coeffs[0]) < 1e-6 * (1 + sum(abs(c) for c in coeffs))


def test_lemma34_on_cosine_is_exact():
    f = ExpPoly.term(None, 0, 0.5, (1,), (), dims=(1, 0)) + ExpPoly.term(None, 0, 0.5, (-1,), (), dims=(1, 0))
    res = fourier_inversion_check(f, 1)
    assert res["error"] <= 1e-12
    assert res["target"] == pytest.approx(2 * math.pi)
    assert fourier_inversion_check(f, 0)["error"] == pytest.approx(2 * math.pi)


def test_lemma31_simple_function():
    f = ExpPoly.term(None, 1, 1.0, (), (), (0,), (1,), (1.0,), dims=(0, 0))
    for v in ("coth", "tanh"):
        assert kernel_transform_check(f, v)["error"] < 1e-8


def test_lemma32_error_curve_decreases(rng):
    f = odd_member(rng)
    errs = [c["error"] for c in cycle_series_check(f, (1, 2, 4))["curve"]]
    assert errs[-1] < 1e-8  # all modes of f are within |m| <= 3


seeds = st.integers(0, 2**31)


@given(seeds, st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_theta_pairings_are_linear(seed, c):
    rng = np.random.default_rng(seed)
    shape = GroupShape(2, 1)
    f, g = random_family(shape, rng), random_family(shape, rng)
    for r in (0, 1):
        lhs = series_projector_pairing(shape, r, f + g.scaled(c)).value
        rhs = series_projector_pairing(shape, r, f).value + c * series_projector_pairing(shape, r, g).value
        assert abs(lhs - rhs) <= 1e-9 * (1 + abs(lhs) + abs(rhs))


@given(seeds)
def test_applied_members_are_odd_in_t(seed):
    rng = np.random.default_rng(seed)
    shape = GroupShape(2, 2)
    fam = random_family(shape, rng, ks=(2,), n_terms=2)
    F = apply_vandermonde_op(fam.members[2], shape, 2)
    for g in range(2):
        assert F.parity_part(g, odd=False).max_abs_coeff() <= 1e-9 * max(1, F.max_abs_coeff())


def test_family_chart_checked(rng):
    with pytest.raises(ShapeError):
        OrbitalFamily(U11, {0: ExpPoly(2, 0, 0)})
