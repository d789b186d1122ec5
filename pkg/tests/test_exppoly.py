import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pseudospec.cartan import CartanPoint, GroupShape, ShapeError, random_point
from pseudospec.exppoly import (
    ExpPoly,
    PreconditionError,
    apply_vandermonde_op,
    apply_X,
    integrate_t,
    moment,
)


def random_poly(rng, dims, n_terms=3, max_mode=2, max_exp=3):
    n_phi, n_psi, k = dims
    f = ExpPoly(n_phi, n_psi, k)
    for _ in range(n_terms):
        f = f + ExpPoly.term(
            None,
            k,
            complex(rng.normal(), rng.normal()),
            rng.integers(-max_mode, max_mode + 1, n_phi),
            rng.integers(-max_mode, max_mode + 1, n_psi),
            rng.integers(-max_mode, max_mode + 1, k),
            rng.integers(0, max_exp + 1, k),
            rng.uniform(0.4, 1.5, k),
            dims=(n_phi, n_psi),
        )
    return f


def point(rng, dims):
    n_phi, n_psi, k = dims
    return CartanPoint(k, rng.uniform(-3, 3, n_phi), rng.uniform(-3, 3, n_psi), rng.normal(0, 1, k), rng.uniform(-3, 3, k))


def shifted(h, block, idx, step):
    vals = {name: list(getattr(h, name)) for name in ("phi", "psi", "t", "theta")}
    vals[block][idx] += step
    return CartanPoint(h.k, vals["phi"], vals["psi"], vals["t"], vals["theta"])


def d(f, h, block, idx, step=1e-5):
    return (f(shifted(h, block, idx, step)) - f(shifted(h, block, idx, -step))) / (2 * step)


@pytest.mark.parametrize("dims", [(1, 1, 0), (2, 0, 1), (1, 1, 1), (0, 0, 2)])
def test_single_operators_match_finite_differences(dims, rng):
    f = random_poly(rng, dims)
    n_phi, n_psi, k = dims
    h = point(rng, dims)
    for j in range(1, n_phi + n_psi + 2 * k + 1):
        got = apply_X(j, f)(h)
        if j <= n_phi:
            want = -1j * d(f, h, "phi", j - 1)
        elif j <= n_phi + k:
            g = j - n_phi - 1
            want = 0.5 * (d(f, h, "t", g) - 1j * d(f, h, "theta", g))
        elif j <= n_phi + k + n_psi:
            want = -1j * d(f, h, "psi", j - n_phi - k - 1)
        else:
            g = j - n_phi - k - n_psi - 1
            want = 0.5 * (-d(f, h, "t", g) - 1j * d(f, h, "theta", g))
        assert abs(got - want) <= 1e-6 * max(1.0, abs(want))


@pytest.mark.parametrize("dims", [(1, 1, 0), (2, 1, 0), (1, 0, 1), (1, 1, 1), (0, 0, 2), (1, 0, 2)])
def test_vandermonde_operator_equals_composed_differences(dims, rng):
    f = random_poly(rng, dims)
    n = dims[0] + dims[1] + 2 * dims[2]
    composed = f
    for j in range(1, n + 1):
        for l in range(j + 1, n + 1):
            composed = apply_X(j, composed) - apply_X(l, composed)
    fast = apply_vandermonde_op(f)
    scale = max(composed.max_abs_coeff(), 1.0)
    assert fast.equals(composed, tol=1e-9 * scale)


def test_u11_hyperbolic_vandermonde_is_t_derivative(rng):
    f = random_poly(rng, (0, 0, 1))
    h = point(rng, (0, 0, 1))
    assert abs(apply_vandermonde_op(f)(h) - d(f, h, "t", 0)) < 1e-6 * max(1, abs(f(h)))


def test_vandermonde_checks_shape(rng):
    f = random_poly(rng, (1, 1, 0))
    with pytest.raises(ShapeError):
        apply_vandermonde_op(f, GroupShape(2, 1), 0)


def trapezoid(fn, lo=-14.0, hi=14.0, n=400001):
    t = np.linspace(lo, hi, n)
    y = fn(t)
    return np.sum((y[1:] + y[:-1]) * 0.5) * (t[1] - t[0])


@pytest.mark.parametrize("e", [0, 1, 2, 5])
@pytest.mark.parametrize("w", [0.3, 1.0, 2.5])
def test_plain_moments_against_trapezoid(e, w):
    lam = 0.4 - 0.3j
    val, _ = moment(e, w, lam)
    want = trapezoid(lambda t: t**e * np.exp(-w * t * t + lam * t), lo=-30, hi=30)
    assert abs(val - want) < 1e-9 * max(1.0, abs(want))


def test_plain_moment_closed_form():
    w, lam = 0.7, 0.5 + 0.2j
    g0 = math.sqrt(math.pi / w) * np.exp(lam * lam / (4 * w))
    assert abs(moment(0, w, lam)[0] - g0) < 1e-13
    assert abs(moment(1, w, lam)[0] - lam / (2 * w) * g0) < 1e-13


KERNELS = {
    "coth_half": lambda t: 1 / np.tanh(t / 2),
    "tanh_half": lambda t: np.tanh(t / 2),
    "coth": lambda t: 1 / np.tanh(t),
    "csch": lambda t: 1 / np.sinh(t),
}


@pytest.mark.parametrize("kernel", sorted(KERNELS))
@pytest.mark.parametrize("e", [1, 3])
def test_odd_kernel_moments_against_trapezoid(kernel, e):
    w = 0.8
    val, err = moment(e, w, kernel=kernel)
    # even grid avoids t = 0; the integrand t^e K(t) is even and regular there
    t = np.linspace(1e-9, 20, 400000)
    y = t**e * np.exp(-w * t * t) * KERNELS[kernel](t)
    want = 2 * np.sum((y[1:] + y[:-1]) * 0.5) * (t[1] - t[0])
    assert abs(val - want) < 1e-7
    assert err < 1e-8


def test_odd_kernel_even_power_vanishes():
    assert moment(2, 1.0, kernel="coth")[0] == 0


def test_chain_kernel():
    rate, w = 1.3, 0.9
    val, _ = moment(1, w, kernel="chain", rate=rate)
    t = np.linspace(0, 20, 400001)
    y = t * np.exp(-w * t * t - rate * t)
    want = 2 * np.sum((y[1:] + y[:-1]) * 0.5) * (t[1] - t[0])
    assert abs(val - want) < 1e-8


def test_moment_preconditions():
    with pytest.raises(PreconditionError):
        moment(1, 0.0, kernel="coth")
    with pytest.raises(PreconditionError):
        moment(1, 1.0, 0.5, kernel="coth")
    with pytest.raises(ValueError):
        moment(1, 1.0, kernel="cosh")


def test_integrate_t_rejects_even_function_against_pole():
    f = ExpPoly.term(None, 1, 1.0, (), (), (0,), (0,), (1.0,), dims=(0, 0))
    with pytest.raises(PreconditionError):
        integrate_t(f, ["coth_half"])


def test_json_roundtrip(rng):
    f = random_poly(rng, (1, 1, 1))
    f = f + ExpPoly.term(None, 1, 2.0, (1,), (0,), (1,), (1,), (0.5,), (0.3 + 0.1j,), dims=(1, 1))
    g = ExpPoly.from_json(f.to_json())
    assert g.dims == f.dims
    assert f.equals(g, tol=1e-15)


def test_term_validation():
    with pytest.raises(ShapeError):
        ExpPoly.term(GroupShape(2, 1), 1, 1.0, (1, 2))
    with pytest.raises(ValueError):
        ExpPoly.term(None, 1, 1.0, (), (), (0,), (0,), (-1.0,), dims=(0, 0))


# -- algebraic properties --------------------------------------------------------

seeds = st.integers(0, 2**31)
dim_choices = st.sampled_from([(1, 1, 0), (2, 0, 1), (1, 1, 1), (0, 0, 2)])


@given(seeds, dim_choices)
def test_evaluation_is_an_algebra_map(seed, dims):
    rng = np.random.default_rng(seed)
    f, g = random_poly(rng, dims, 2), random_poly(rng, dims, 2)
    h = point(rng, dims)
    assert abs((f + g)(h) - f(h) - g(h)) < 1e-9 * (1 + abs(f(h)) + abs(g(h)))
    assert abs((f * g)(h) - f(h) * g(h)) < 1e-9 * (1 + abs(f(h) * g(h)))
    assert abs((f - f)(h)) == 0


@given(seeds, st.sampled_from([(0, 0, 1), (1, 1, 1), (0, 0, 2)]))
def test_reflection_is_an_involution_matching_evaluation(seed, dims):
    rng = np.random.default_rng(seed)
    f = random_poly(rng, dims)
    f = f + ExpPoly.term(None, dims[2], 1.0, lams=[0.3] * dims[2], widths=[1.0] * dims[2], dims=dims[:2])
    h = point(rng, dims)
    g = int(rng.integers(dims[2]))
    assert f.reflect(g).reflect(g).equals(f, tol=1e-14)
    t = list(h.t)
    t[g] = -t[g]
    hr = CartanPoint(h.k, h.phi, h.psi, t, h.theta)
    assert abs(f.reflect(g)(h) - f(hr)) < 1e-10 * max(1, abs(f(hr)))
    odd = f.parity_part(g, odd=True)
    assert abs(odd(h) + odd(hr)) < 1e-10 * max(1, abs(odd(h)))


@given(seeds)
def test_permute_matches_permuted_evaluation(seed):
    from pseudospec.cartan import WeylElement, weyl_act

    rng = np.random.default_rng(seed)
    shape = GroupShape(3, 2)
    k = 1
    f = random_poly(rng, (2, 1, 1))
    pp = tuple(rng.permutation(2))
    w = WeylElement(pp, (0,), (0,))
    h = random_point(shape, k, rng, avoid_singular=False)
    assert abs(f.permute(pp, None, None)(h) - f(weyl_act(w, h))) < 1e-10 * max(1, abs(f(h)))


@given(seeds, dim_choices)
def test_vandermonde_operator_is_linear(seed, dims):
    rng = np.random.default_rng(seed)
    f, g = random_poly(rng, dims, 2), random_poly(rng, dims, 2)
    c = complex(rng.normal(), rng.normal())
    lhs = apply_vandermonde_op(f + g.scale(c))
    rhs = apply_vandermonde_op(f) + apply_vandermonde_op(g).scale(c)
    assert lhs.equals(rhs, tol=1e-9 * max(1.0, rhs.max_abs_coeff()))
