"""Numerical laboratory for U(1,1).

Group elements are written as

    g = e^{i alpha} [[cosh s e^{i beta},  sinh s e^{i gamma}],
                     [sinh s e^{-i gamma}, cosh s e^{-i beta}]]

with Haar density proportional to sinh(2s). Test functions are finite sums
of monomials in the matrix entries (and their conjugates) times the window
exp(-lam ||g - e||_F^2), which stands in for compact support.

Orbital integrals are computed on two-dimensional slices transversal to the
Cartan subgroups:

* H_0 (diag(e^{i phi}, e^{i psi})): cosets of the elliptic torus, rewritten
  in the variable y = cosh(2r) |sin delta|, delta = (phi - psi)/2, so the
  integrand lives on an O(1) scale even near the singular set;
* H_1 (e^{i theta} times the hyperbolic boost of rapidity t): cosets
  k_beta n_x, with x rescaled so that n h n^-1 = h n_x'.

Measure normalisations of G and of G/H_k are left as constants that
:func:`weyl_integration_check` calibrates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as cheb

from .cartan import CartanPoint, GroupShape, ShapeError, weyl_weight
from .exppoly import ExpPoly
from .projectors import GridTorusFunction, OrbitalFamily, series_projector_pairing

SHAPE = GroupShape(1, 1)
TWO_PI = 2.0 * math.pi

# monomial exponents refer to (g11, g12, g21, g22, conj g11, ..., conj g22)
N_ENTRIES = 8


class SingularPointError(ValueError):
    pass


class FitError(RuntimeError):
    def __init__(self, message: str, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class CalibrationError(RuntimeError):
    pass


# -- group points ----------------------------------------------------------------


@dataclass(frozen=True)
class GroupPoint11:
    alpha: float
    s: float
    beta: float
    gamma: float

    def __post_init__(self):
        if self.s < 0:
            raise ValueError("s must be non-negative")

    def matrix(self) -> np.ndarray:
        return np.array(group_entries(self.alpha, self.s, self.beta, self.gamma)).reshape(2, 2)

    def defining_residual(self) -> float:
        g = self.matrix()
        J = np.diag([1.0, -1.0])
        return float(np.max(np.abs(g @ J @ g.conj().T - J)))


def group_entries(alpha, s, beta, gamma) -> tuple:
    """(g11, g12, g21, g22) as broadcast arrays."""
    ph = np.exp(1j * np.asarray(alpha))
    ch, sh = np.cosh(s), np.sinh(s)
    return (
        ph * ch * np.exp(1j * np.asarray(beta)),
        ph * sh * np.exp(1j * np.asarray(gamma)),
        ph * sh * np.exp(-1j * np.asarray(gamma)),
        ph * ch * np.exp(-1j * np.asarray(beta)),
    )


def matmul_entries(x: Sequence, y: Sequence) -> tuple:
    a, b, c, d = x
    e, f, g, h = y
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def random_group_point(rng: np.random.Generator, s_scale: float = 0.8) -> GroupPoint11:
    return GroupPoint11(*rng.uniform(0, TWO_PI, 1), abs(rng.normal(0, s_scale)), *rng.uniform(0, TWO_PI, 2))


def haar_weight(x: GroupPoint11 | float) -> float:
    """Haar density in (alpha, s, beta, gamma), up to a calibrated constant."""
    s = x.s if isinstance(x, GroupPoint11) else float(x)
    if s < 0:
        raise ValueError("s must be non-negative")
    return math.sinh(2.0 * s)


# -- test functions --------------------------------------------------------------------


@dataclass
class SmoothGroupFunction:
    """sum_j coeff_j prod(entries^exps_j) * exp(-lam ||g - e||_F^2)."""

    terms: list
    lam: float = 1.0

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("window rate lam must be positive")
        clean = []
        for coeff, exps in self.terms:
            exps = tuple(int(e) for e in exps)
            if len(exps) != N_ENTRIES or min(exps, default=0) < 0:
                raise ShapeError("monomial needs 8 non-negative exponents")
            clean.append((complex(coeff), exps))
        self.terms = clean

    def on_entries(self, ent: Sequence) -> np.ndarray:
        ent = [np.asarray(e, dtype=complex) for e in ent]
        full = ent + [np.conj(e) for e in ent]
        poly = 0j
        for coeff, exps in self.terms:
            mono = coeff
            for e, x in zip(exps, full):
                if e:
                    mono = mono * x**e
            poly = poly + mono
        dist = (
            np.abs(ent[0] - 1) ** 2 + np.abs(ent[1]) ** 2 + np.abs(ent[2]) ** 2 + np.abs(ent[3] - 1) ** 2
        )
        return poly * np.exp(-self.lam * dist)

    def __call__(self, g) -> complex:
        if isinstance(g, GroupPoint11):
            g = g.matrix()
        g = np.asarray(g)
        return complex(self.on_entries((g[0, 0], g[0, 1], g[1, 0], g[1, 1])))

    def at_identity(self) -> complex:
        return self(np.eye(2))

    def scaled(self, factor: complex) -> "SmoothGroupFunction":
        return SmoothGroupFunction([(c * factor, e) for c, e in self.terms], self.lam)

    def to_json(self) -> dict:
        return {"lam": self.lam, "terms": [[[c.real, c.imag], list(e)] for c, e in self.terms]}

    @classmethod
    def from_json(cls, data: dict) -> "SmoothGroupFunction":
        terms = []
        for coeff, exps in data["terms"]:
            c = complex(*coeff) if isinstance(coeff, (list, tuple)) else complex(coeff)
            terms.append((c, exps))
        return cls(terms, float(data.get("lam", 1.0)))

    @classmethod
    def random(
        cls, rng: np.random.Generator, n_terms: int = 3, degree: int = 2, lam_range=(0.6, 1.4)
    ) -> "SmoothGroupFunction":
        """Constant term plus ``n_terms`` random monomials of total degree <= ``degree``."""
        terms = [(complex(1.0 + rng.uniform(), rng.normal() * 0.3), (0,) * N_ENTRIES)]
        for _ in range(n_terms):
            exps = [0] * N_ENTRIES
            for _ in range(int(rng.integers(1, degree + 1))):
                exps[int(rng.integers(N_ENTRIES))] += 1
            terms.append((complex(rng.normal(), rng.normal()) * 0.5, tuple(exps)))
        return cls(terms, float(rng.uniform(*lam_range)))


def load_functions(path: str) -> list:
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = data.get("functions", [data])
    return [SmoothGroupFunction.from_json(d) for d in data]


# -- Haar quadrature --------------------------------------------------------------------


def _s_cutoff(lam: float) -> float:
    # ||g - e||^2 >= 2 cosh(2s) - 4, so the window is below e^-40 beyond this
    return 0.5 * math.acosh(2.0 + 20.0 / lam) + 0.25


def haar_integral(
    f: SmoothGroupFunction,
    angle_nodes: int = 32,
    s_nodes: int = 64,
    left: np.ndarray | None = None,
    right: np.ndarray | None = None,
) -> complex:
    """int_G f(left g right) sinh(2s) d alpha ds d beta d gamma.

    Trapezoid in the three angles, Gauss-Legendre in s on [0, S].
    """
    S = _s_cutoff(f.lam)
    if left is not None or right is not None:
        # translation moves mass; widen the s-range by the translation size
        for m in (left, right):
            if m is not None:
                S += math.acosh(max(1.0, float(np.max(np.abs(m))))) + 0.5
    x, w = np.polynomial.legendre.leggauss(s_nodes)
    s = 0.5 * S * (x + 1.0)
    ws = 0.5 * S * w * np.sinh(2.0 * s)
    ang = TWO_PI * np.arange(angle_nodes) / angle_nodes
    A, Sg, B, C = np.meshgrid(ang, s, ang, ang, indexing="ij")
    ent = group_entries(A, Sg, B, C)
    if left is not None:
        ent = matmul_entries(tuple(np.asarray(left).ravel()), ent)
    if right is not None:
        ent = matmul_entries(ent, tuple(np.asarray(right).ravel()))
    vals = f.on_entries(ent)
    step = (TWO_PI / angle_nodes) ** 3
    return complex(np.einsum("ijkl,j->", vals, ws) * step)


def haar_invariance_test(
    fs: Sequence[SmoothGroupFunction], translations: Sequence[GroupPoint11], **nodes
) -> dict:
    """Relative change of int f under left and right translation."""
    worst_left = worst_right = 0.0
    for f in fs:
        base = haar_integral(f, **nodes)
        for g0 in translations:
            m = g0.matrix()
            scale = max(abs(base), 1e-300)
            worst_left = max(worst_left, abs(haar_integral(f, left=m, **nodes) - base) / scale)
            worst_right = max(worst_right, abs(haar_integral(f, right=m, **nodes) - base) / scale)
    return {"left": worst_left, "right": worst_right}


# -- Cartan subgroups and orbital integrals ------------------------------------------------


def cartan_entries(h: CartanPoint) -> tuple:
    if h.k == 0:
        return (complex(np.exp(1j * h.phi[0])), 0j, 0j, complex(np.exp(1j * h.psi[0])))
    t, th = h.t[0], h.theta[0]
    ph = complex(np.exp(1j * th))
    return (ph * math.cosh(t), ph * math.sinh(t), ph * math.sinh(t), ph * math.cosh(t))


@dataclass
class QuadratureGrid:
    """Node counts for the orbital-integral slices."""

    radial: int = 64
    angular: int = 16
    window: float = 7.0

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _elliptic_core(f: SmoothGroupFunction, u, psi, grid: QuadratureGrid) -> np.ndarray:
    """J_0(u, psi) = int_{|sin delta|}^inf dy int d gamma f(y h y^-1) for u in [0, 2 pi].

    delta = u / 2, phi = psi + u. The conjugate y h y^-1 has diagonal
    e^{iv}(cos delta +- i y) and off-diagonal -+ i x e^{+-i gamma} e^{iv},
    x = sqrt(y^2 - sin^2 delta), v = (phi + psi)/2.
    """
    u = np.asarray(u, dtype=float)
    psi = np.asarray(psi, dtype=float)
    u, psi = np.broadcast_arrays(u, psi)
    delta = 0.5 * u
    sd = np.abs(np.sin(delta))
    v = psi + delta
    width = grid.window / math.sqrt(f.lam)
    xg, wg = np.polynomial.legendre.leggauss(grid.radial)
    # y in [sd, sd + width]
    y = sd[..., None] + 0.5 * width * (xg + 1.0)
    wy = 0.5 * width * wg
    gam = TWO_PI * np.arange(grid.angular) / grid.angular
    x = np.sqrt(np.maximum(y**2 - sd[..., None] ** 2, 0.0))
    ph = np.exp(1j * v)[..., None, None]
    cd = np.cos(delta)[..., None, None]
    yy = y[..., None]
    xx = x[..., None]
    eg = np.exp(1j * gam)
    ent = (
        ph * (cd + 1j * yy),
        ph * (-1j) * xx * eg,
        ph * 1j * xx * np.conj(eg),
        ph * (cd - 1j * yy),
    )
    vals = f.on_entries(ent)
    return np.einsum("...ij,i->...", vals, wy) * (TWO_PI / grid.angular)


def _hyperbolic_core(f: SmoothGroupFunction, t, theta, grid: QuadratureGrid) -> np.ndarray:
    """J_1(t, theta) = int d beta int dx f(k_beta h n_x k_beta^-1).

    n_x = 1 + i x [[1, -1], [1, -1]]; conjugating n by the boost scales x by
    e^{2t}, hence n_x h n_x^-1 = h n_{x (e^{-2t} - 1)}. The integral is taken
    in scaled_x = x e^{t}, for which h n_x = h + i scaled_x [[1, -1], [1, -1]] e^{i theta}
    keeps an O(1) width for every t.
    """
    t = np.asarray(t, dtype=float)
    theta = np.asarray(theta, dtype=float)
    t, theta = np.broadcast_arrays(t, theta)
    width = grid.window / math.sqrt(f.lam)
    xg, wg = np.polynomial.legendre.leggauss(2 * grid.radial)
    scaled_x = width * xg
    wx = width * wg
    beta = TWO_PI * np.arange(grid.angular) / grid.angular
    ph = np.exp(1j * theta)[..., None, None]
    ch = np.cosh(t)[..., None, None]
    sh = np.sinh(t)[..., None, None]
    xx = 1j * scaled_x[:, None]
    hn = (ph * (ch + xx), ph * (sh - xx), ph * (sh + xx), ph * (ch - xx))
    kb = np.exp(2j * beta)
    # k hn k^-1 with k = diag(e^{i beta}, e^{-i beta})
    ent = (hn[0] + 0 * kb, hn[1] * kb, hn[2] * np.conj(kb), hn[3] + 0 * kb)
    vals = f.on_entries(ent)
    return np.exp(-t) * np.einsum("...ij,i->...", vals, wx) * (TWO_PI / grid.angular)


def orbital_integral(
    f: SmoothGroupFunction, h: CartanPoint, grid: QuadratureGrid | None = None, tol: float = 1e-8
) -> complex:
    """Orbital integral I_k f(h) with unit slice normalisation.

    Refuses points on the singular set, where I_k blows up like 1/|Delta(h)|.
    """
    grid = grid or QuadratureGrid()
    h.check(SHAPE)
    if h.k == 0:
        delta = 0.5 * (h.phi[0] - h.psi[0])
        sd = abs(math.sin(delta))
        if sd < tol:
            raise SingularPointError(f"phi = psi (|sin delta| = {sd:.1e}): orbital integral diverges")
        u = (h.phi[0] - h.psi[0]) % TWO_PI
        return complex(_elliptic_core(f, u, h.psi[0], grid)) / (2.0 * sd)
    t = h.t[0]
    if abs(t) < tol:
        raise SingularPointError("t = 0: orbital integral diverges")
    return complex(_hyperbolic_core(f, t, h.theta[0], grid)) / abs(math.expm1(-2.0 * t))


def normalized_orbital_integral(f: SmoothGroupFunction, h: CartanPoint, grid: QuadratureGrid | None = None) -> complex:
    """prod sgn(t) * conj(Delta(h)) * I_k f(h), computed without the 1/|Delta| cancellation."""
    grid = grid or QuadratureGrid()
    h.check(SHAPE)
    if h.k == 0:
        u = (h.phi[0] - h.psi[0]) % TWO_PI
        if u == 0:
            raise SingularPointError("use the one-sided limits of EllipticOrbitalFit on the singular set")
        return complex(_elliptic_normalized(f, u, h.psi[0], grid))
    return complex(_hyperbolic_normalized(f, h.t[0], h.theta[0], grid))


def _elliptic_normalized(f, u, psi, grid):
    # conj(Delta) / (2 |sin delta|) = -i e^{-i(phi+psi)/2} on 0 < u < 2 pi
    u = np.asarray(u, dtype=float)
    psi = np.asarray(psi, dtype=float)
    return -1j * np.exp(-1j * (psi + 0.5 * u)) * _elliptic_core(f, u, psi, grid)


def _hyperbolic_normalized(f, t, theta, grid):
    # sgn t * e^{-i theta} 2 sinh t / |e^{-2t} - 1| = e^{-i theta} e^{t}
    t = np.asarray(t, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return np.exp(-1j * theta + t) * _hyperbolic_core(f, t, theta, grid)


def fiber_consistency(f: SmoothGroupFunction, h: CartanPoint, rng: np.random.Generator, samples: int = 8) -> float:
    """max |f(y h' h h'^-1 y^-1) - f(y h y^-1)| / scale over random y and h' in H_k."""
    he = np.array(cartan_entries(h)).reshape(2, 2)
    worst = 0.0
    for _ in range(samples):
        y = random_group_point(rng).matrix()
        if h.k == 0:
            hp = np.diag(np.exp(1j * rng.uniform(0, TWO_PI, 2)))
        else:
            tt, th = rng.normal(), rng.uniform(0, TWO_PI)
            hp = np.exp(1j * th) * np.array([[math.cosh(tt), math.sinh(tt)], [math.sinh(tt), math.cosh(tt)]])
        yh = y @ hp
        a = f(yh @ he @ np.linalg.inv(yh))
        b = f(y @ he @ np.linalg.inv(y))
        worst = max(worst, abs(a - b) / max(abs(b), 1e-12))
    return worst


def weyl_invariance(f: SmoothGroupFunction, points: Iterable[CartanPoint], grid: QuadratureGrid | None = None) -> float:
    """Relative change of I_1 f under t -> -t (the only nontrivial Weyl element)."""
    worst = 0.0
    for h in points:
        if h.k != 1:
            continue
        a = orbital_integral(f, h, grid)
        b = orbital_integral(f, CartanPoint(1, (), (), (-h.t[0],), h.theta), grid)
        worst = max(worst, abs(a - b) / max(abs(a), 1e-300))
    return worst


# -- fits consumed by the projector machinery -------------------------------------------


class EllipticOrbitalFit:
    """Chebyshev (in u = phi - psi on [0, 2 pi]) x Fourier (in psi) model of the
    normalized elliptic orbital integral.

    It jumps across phi = psi; the model is smooth on the open cell
    0 < u < 2 pi and its endpoint values are the two one-sided limits.
    """

    def __init__(self, f: SmoothGroupFunction, u_degree: int = 40, psi_nodes: int = 32, grid: QuadratureGrid | None = None):
        grid = grid or QuadratureGrid()
        self.u_degree = u_degree
        self.psi_nodes = psi_nodes
        npts = u_degree + 1
        # Chebyshev points of the first kind mapped to [0, 2 pi]
        xk = np.cos(math.pi * (np.arange(npts) + 0.5) / npts)
        u = math.pi * (xk + 1.0)
        psi = TWO_PI * np.arange(psi_nodes) / psi_nodes
        U, P = np.meshgrid(u, psi, indexing="ij")
        vals = _elliptic_normalized(f, U, P, grid)
        # Fourier in psi, Chebyshev in x = u/pi - 1
        four = np.fft.fft(vals, axis=1) / psi_nodes
        self.modes = np.fft.fftfreq(psi_nodes, 1.0 / psi_nodes).astype(int)
        self.coef = np.array([cheb.chebfit(xk, four[:, j], u_degree) for j in range(psi_nodes)]).T
        self.tail = float(np.max(np.abs(self.coef[-3:]))) / max(float(np.max(np.abs(self.coef))), 1e-300)

    def _eval(self, coef, u, psi):
        x = np.asarray(u, dtype=float) / math.pi - 1.0
        psi = np.asarray(psi, dtype=float)
        out = 0j
        for j, mode in enumerate(self.modes):
            out = out + cheb.chebval(x, coef[:, j]) * np.exp(1j * mode * psi)
        return out

    def value(self, u, psi):
        return self._eval(self.coef, u, psi)

    def applied(self, u, psi):
        """Delta_0(d) applied to the model: (1/i)(2 d/du - d/dpsi) in (u, psi) coordinates."""
        du = cheb.chebder(self.coef, axis=0) / math.pi
        dpsi = self.coef * (1j * self.modes)[None, :]
        return (2.0 * self._eval(du, u, psi) - self._eval(dpsi, u, psi)) / 1j

    def applied_at_identity(self, side: str = "+") -> complex:
        """One-sided limit of the applied model at h = e (u -> 0+ or u -> 2 pi-)."""
        u = 0.0 if side == "+" else TWO_PI
        return complex(self.applied(u, 0.0))

    def torus_member(self, size: int = 128, side: str = "+") -> GridTorusFunction:
        """Grid of the applied member over (phi, psi), singular diagonal averaged."""
        ang = TWO_PI * np.arange(size) / size
        PHI, PSI = np.meshgrid(ang, ang, indexing="ij")
        u = (PHI - PSI) % TWO_PI
        vals = self.applied(u, PSI)
        diag = u == 0
        if np.any(diag):
            vals[diag] = 0.5 * (self.applied(np.zeros(diag.sum()), PSI[diag]) + self.applied(np.full(diag.sum(), TWO_PI), PSI[diag]))
        return GridTorusFunction(vals, self.applied_at_identity(side))


@dataclass
class HyperbolicOrbitalFit:
    member: ExpPoly
    rms_residual: float
    width: float
    diagnostics: dict = field(default_factory=dict)


def fit_hyperbolic_orbital(
    f: SmoothGroupFunction,
    max_power: int = 10,
    theta_nodes: int = 48,
    t_nodes: int = 48,
    grid: QuadratureGrid | None = None,
    width: float | None = None,
    tol: float = 0.01,
) -> HyperbolicOrbitalFit:
    """Least-squares fit of the normalized hyperbolic orbital integral by sum_m e^{i m theta} t^{2j} e^{-width t^2}.

    Even powers only, so the fitted member is reflection invariant. Raises
    :class:`FitError` when the relative RMS residual exceeds ``tol``.
    """
    grid = grid or QuadratureGrid()
    width = 2.0 * f.lam if width is None else width
    T = math.sqrt(40.0 / width)
    t = T * (0.5 - 0.5 * np.cos(math.pi * (np.arange(t_nodes) + 0.5) / t_nodes))
    theta = TWO_PI * np.arange(theta_nodes) / theta_nodes
    Tm, Th = np.meshgrid(t, theta, indexing="ij")
    vals = _hyperbolic_normalized(f, Tm, Th, grid)
    four = np.fft.fft(vals, axis=1) / theta_nodes
    modes = np.fft.fftfreq(theta_nodes, 1.0 / theta_nodes).astype(int)
    scale = T / 2.0
    basis = np.stack([(t / scale) ** (2 * j) * np.exp(-width * t**2) for j in range(max_power + 1)], axis=1)
    coefs, *_ = np.linalg.lstsq(basis, four, rcond=None)
    approx = basis @ coefs
    resid_modes = four - approx
    # residual measured in physical space
    resid = np.fft.ifft(resid_modes * theta_nodes, axis=1)
    rms = float(np.sqrt(np.mean(np.abs(resid) ** 2)) / max(np.sqrt(np.mean(np.abs(vals) ** 2)), 1e-300))
    member = ExpPoly.zero(SHAPE, 1)
    for j in range(max_power + 1):
        for mi, m in enumerate(modes):
            c = coefs[j, mi] / scale ** (2 * j)
            if abs(coefs[j, mi]) > 1e-14 * np.max(np.abs(coefs)):
                member = member + ExpPoly.term(SHAPE, 1, c, (), (), [m], [2 * j], [width])
    mode_mass = np.sqrt(np.sum(np.abs(four) ** 2, axis=0))
    diag = {
        "modes": modes.tolist(),
        "mode_mass": mode_mass.tolist(),
        "rms_residual": rms,
    }
    if rms > tol:
        raise FitError(f"hyperbolic fit residual {rms:.2e} exceeds {tol:.0e}", resid)
    return HyperbolicOrbitalFit(member, rms, width, diag)


def build_orbital_family(
    f: SmoothGroupFunction,
    side: str = "+",
    grid: QuadratureGrid | None = None,
    fit_tol: float = 0.01,
    u_degree: int = 40,
) -> tuple:
    """(OrbitalFamily, diagnostics) for a group function.

    The H_0 member is the applied grid model (paired at the one-sided limit
    ``side`` at the identity); the H_1 member is the fitted hyperbolic model.
    """
    grid = grid or QuadratureGrid()
    x0 = EllipticOrbitalFit(f, u_degree=u_degree, grid=grid)
    x1 = fit_hyperbolic_orbital(f, grid=grid, tol=fit_tol)
    fam = OrbitalFamily(SHAPE, {0: x0.torus_member(side=side), 1: x1.member})
    return fam, {"xi0_tail": x0.tail, "xi1_rms": x1.rms_residual, "F0_plus": x0.applied_at_identity("+"), "F0_minus": x0.applied_at_identity("-")}


# -- Weyl integration and completeness -----------------------------------------------


def cartan_integrals(f: SmoothGroupFunction, grid: QuadratureGrid | None = None, nodes: int = 32) -> tuple:
    """(int_{H_0} I_0 f |Delta|^2, int_{H_1} I_1 f |Delta|^2) with unit slice constants."""
    grid = grid or QuadratureGrid()
    # H_0: |Delta|^2 I_0 = 2 |sin delta| J_0 over the cell 0 < u < 2 pi
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    u = math.pi * (xg + 1.0)
    wu = math.pi * wg
    psi = TWO_PI * np.arange(nodes) / nodes
    U, P = np.meshgrid(u, psi, indexing="ij")
    J0 = _elliptic_core(f, U, P, grid)
    part0 = np.sum(wu[:, None] * 2.0 * np.abs(np.sin(0.5 * U)) * J0) * (TWO_PI / nodes)
    # H_1: |Delta|^2 I_1 = 2 |sinh t| e^{t} J_1 (t = 0 is a kink, split there)
    T = _s_cutoff(f.lam) + 0.5
    t = 0.5 * T * (xg + 1.0)
    wt = 0.5 * T * wg
    tt = np.concatenate([-t, t])
    wtt = np.concatenate([wt, wt])
    th = TWO_PI * np.arange(nodes) / nodes
    Tm, Th = np.meshgrid(tt, th, indexing="ij")
    J1 = _hyperbolic_core(f, Tm, Th, grid)
    # 4 sinh^2 t * e^{t}/(2|sinh t|) = 2 |sinh t| e^{t}; with |e^{-2t}-1| = 2|sinh t| e^{-t}
    part1 = np.sum(wtt[:, None] * 2.0 * np.abs(np.sinh(Tm)) * np.exp(Tm) * J1) * (TWO_PI / nodes)
    return complex(part0), complex(part1)


@dataclass
class WeylReport:
    constants: tuple
    condition: float
    calibration_residual: float
    validation_errors: list
    max_error: float
    passed: bool

    def to_json(self) -> dict:
        return {
            "constants": [[c.real, c.imag] for c in self.constants],
            "condition": self.condition,
            "calibration_residual": self.calibration_residual,
            "validation_errors": self.validation_errors,
            "max_error": self.max_error,
            "passed": self.passed,
        }


def weyl_integration_check(
    calibration: Sequence[SmoothGroupFunction],
    validation: Sequence[SmoothGroupFunction],
    tol: float = 0.02,
    max_condition: float = 1e8,
    grid: QuadratureGrid | None = None,
) -> WeylReport:
    """Fit nu_0, nu_1 in int_G f = sum_k weyl_weight_k nu_k int_{H_k} I_k f |Delta|^2 and validate.

    The Haar scale is fixed to sinh(2s) d alpha ds d beta d gamma; nu_k
    absorb the slice normalisations. Calibration uses least squares when
    more than two functions are given.
    """
    if len(calibration) < 2 or len(validation) < 1:
        raise CalibrationError("need at least 2 calibration and 1 validation function")
    w = [float(weyl_weight(SHAPE, k)) for k in (0, 1)]

    def row(f):
        a0, a1 = cartan_integrals(f, grid)
        return [w[0] * a0, w[1] * a1], haar_integral(f)

    rows, rhs = zip(*(row(f) for f in calibration))
    M = np.array(rows)
    b = np.array(rhs)
    cond = float(np.linalg.cond(M))
    if not np.isfinite(cond) or cond > max_condition:
        raise CalibrationError(f"calibration system is ill-conditioned (cond = {cond:.2e})")
    nu, *_ = np.linalg.lstsq(M, b, rcond=None)
    cal_res = float(np.max(np.abs(M @ nu - b) / np.maximum(np.abs(b), 1e-300)))
    errs = []
    for f in validation:
        r, lhs = row(f)
        pred = r[0] * nu[0] + r[1] * nu[1]
        scale = abs(lhs)
        errs.append(float(abs(pred - lhs) / scale) if scale > 1e-12 else float(abs(pred - lhs)))
    worst = max(errs)
    return WeylReport((complex(nu[0]), complex(nu[1])), cond, cal_res, errs, worst, worst <= tol)


@dataclass
class CompletenessReport:
    ratios: list
    spread: float
    estimate: complex
    per_r: list
    passed: bool

    def to_json(self) -> dict:
        return {
            "ratios": [[r.real, r.imag] for r in self.ratios],
            "spread": self.spread,
            "plancherel_constant_estimate": [self.estimate.real, self.estimate.imag],
            "per_r": self.per_r,
            "passed": self.passed,
        }


def completeness_check(
    fs: Sequence[SmoothGroupFunction],
    side: str = "+",
    tol: float = 0.02,
    grid: QuadratureGrid | None = None,
) -> CompletenessReport:
    """Ratios sum_r (series-r pairing) / f(e) for each f; their spread and mean.

    The spread is max |ratio - mean| / |mean|.
    """
    ratios, per_r = [], []
    for f in fs:
        fe = f.at_identity()
        if abs(fe) < 1e-12:
            raise ValueError("completeness ratio needs f(e) != 0")
        fam, _ = build_orbital_family(f, side=side, grid=grid)
        vals = [series_projector_pairing(SHAPE, r, fam).value for r in range(SHAPE.q + 1)]
        per_r.append([[v.real, v.imag] for v in vals])
        ratios.append(sum(vals) / fe)
    mean = complex(np.mean(ratios))
    if abs(mean) == 0:
        raise ValueError("degenerate family: all pairings vanish")
    spread = max(abs(r - mean) for r in ratios) / abs(mean)
    return CompletenessReport(ratios, float(spread), mean, per_r, spread <= tol)
