import json
import math

import numpy as np
import pytest

from pseudospec.cartan import CartanPoint, ShapeError, weyl_weight
from pseudospec.smallgroup import (
    SHAPE,
    GroupPoint11,
    SingularPointError,
    SmoothGroupFunction,
    EllipticOrbitalFit,
    cartan_integrals,
    completeness_check,
    fiber_consistency,
    fit_hyperbolic_orbital,
    group_entries,
    haar_integral,
    haar_invariance_test,
    orbital_integral,
    load_functions,
    random_group_point,
    weyl_integration_check,
    weyl_invariance,
    normalized_orbital_integral,
)


@pytest.fixture(scope="module")
def funcs():
    rng = np.random.default_rng(7)
    return [SmoothGroupFunction.random(rng) for _ in range(4)]


def test_parametrisation_lies_in_the_group(rng):
    for _ in range(10):
        g = random_group_point(rng, s_scale=1.5)
        assert g.defining_residual() < 1e-10
        assert abs(abs(np.linalg.det(g.matrix())) - 1) < 1e-10
    with pytest.raises(ValueError):
        GroupPoint11(0.0, -1.0, 0.0, 0.0)


def test_function_validation_and_json(tmp_path, funcs):
    with pytest.raises(ValueError):
        SmoothGroupFunction([(1.0, (0,) * 8)], lam=0.0)
    with pytest.raises(ShapeError):
        SmoothGroupFunction([(1.0, (0,) * 7)])
    path = tmp_path / "f.json"
    path.write_text(json.dumps([f.to_json() for f in funcs]))
    loaded = load_functions(str(path))
    g = np.array(group_entries(0.3, 0.4, 1.0, -0.2)).reshape(2, 2)
    assert [f(g) for f in loaded] == pytest.approx([f(g) for f in funcs])


def test_identity_value():
    f = SmoothGroupFunction([(2.0, (0,) * 8), (1.0, (1, 0, 0, 0, 0, 0, 0, 0))], lam=1.0)
    assert f.at_identity() == pytest.approx(3.0)


def test_haar_integral_against_monte_carlo(funcs):
    # plain sampling through the matrix path, independent of the tensor grid
    f = funcs[0]
    rng = np.random.default_rng(1)
    S = 0.5 * math.acosh(2.0 + 20.0 / f.lam) + 0.25
    n = 200_000
    a, b, c = (rng.uniform(0, 2 * math.pi, n) for _ in range(3))
    s = rng.uniform(0, S, n)
    ent = group_entries(a, s, b, c)
    vals = f.on_entries(ent) * np.sinh(2 * s)
    mc = (2 * math.pi) ** 3 * S * np.mean(vals)
    stderr = (2 * math.pi) ** 3 * S * np.std(vals) / math.sqrt(n)
    assert abs(haar_integral(f) - mc) < 5 * stderr


def test_haar_invariance(funcs, rng):
    ts = [random_group_point(rng, 0.4) for _ in range(2)]
    rep = haar_invariance_test(funcs[:2], ts, angle_nodes=48)
    assert rep["left"] < 1e-8 and rep["right"] < 1e-8


def test_orbital_integrals_refuse_singular_points(funcs):
    with pytest.raises(SingularPointError):
        orbital_integral(funcs[0], CartanPoint(0, (0.5,), (0.5,)))
    with pytest.raises(SingularPointError):
        orbital_integral(funcs[0], CartanPoint(1, (), (), (0.0,), (0.3,)))
    with pytest.raises(SingularPointError):
        normalized_orbital_integral(funcs[0], CartanPoint(0, (0.5,), (0.5,)))


def test_orbital_integral_structure(funcs, rng):
    f = funcs[1]
    pts = [CartanPoint(1, (), (), (t,), (th,)) for t, th in [(0.4, 0.3), (1.2, -2.0), (-0.7, 1.0)]]
    assert weyl_invariance(f, pts) < 1e-10
    for h in pts + [CartanPoint(0, (0.9,), (-0.4,))]:
        assert fiber_consistency(f, h, rng) < 1e-10


def test_xi_transform_relation(funcs):
    # normalized = sgn(t) conj(vandermonde) orbital on H_1, with Delta = e^{z} - e^{-conj z}
    f = funcs[2]
    t, th = 0.8, 0.5
    h = CartanPoint(1, (), (), (t,), (th,))
    z = complex(t, th)
    delta = np.exp(z) - np.exp(-z.conjugate())
    assert normalized_orbital_integral(f, h) == pytest.approx(np.conj(delta) * orbital_integral(f, h), rel=1e-10)


def test_limit_at_identity_is_two_pi_f_e(funcs):
    # both one-sided limits of Delta_0(d) Xi_0 at e give 2 pi f(e)
    for f in funcs[:2]:
        fit = EllipticOrbitalFit(f)
        assert fit.tail < 1e-6
        for side in "+-":
            assert fit.applied_at_identity(side) == pytest.approx(2 * math.pi * f.at_identity(), rel=1e-4)


def test_xi1_fit_residual(funcs):
    fit = fit_hyperbolic_orbital(funcs[0])
    assert fit.rms_residual < 1e-2
    assert fit.member.dims == (0, 0, 1)


def test_weyl_integration_with_unit_slices(funcs):
    # int_G f = omega_0 nu_0 A_0 + omega_1 nu_1 A_1 with nu = (1, 2)
    for f in funcs[:2]:
        a0, a1 = cartan_integrals(f)
        pred = float(weyl_weight(SHAPE, 0)) * a0 + 2 * float(weyl_weight(SHAPE, 1)) * a1
        assert pred == pytest.approx(haar_integral(f), rel=1e-6)


def test_weyl_check_calibration(funcs):
    rep = weyl_integration_check(funcs[:2], funcs[2:], tol=0.02)
    assert rep.passed
    assert rep.constants[0] == pytest.approx(1.0, abs=1e-6)
    assert rep.constants[1] == pytest.approx(2.0, abs=1e-6)


def test_completeness_constant(funcs):
    rep = completeness_check(funcs[:3])
    assert rep.passed
    # reduces to 4 pi^2 * (2 pi f(e)) with unit slice constants
    assert rep.estimate == pytest.approx(8 * math.pi**3, rel=1e-3)


def test_completeness_needs_nonzero_identity_value():
    f = SmoothGroupFunction([(1.0, (1, 0, 0, 0, 0, 0, 0, 0)), (-1.0, (0,) * 8)])
    with pytest.raises(ValueError):
        completeness_check([f])
