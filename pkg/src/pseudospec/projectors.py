"""Plancherel density factors, projector distributions and summation checks.

A projector pairing takes an :class:`OrbitalFamily` (one test function per
Cartan subgroup H_r, ..., H_q) and returns the pairing up to the overall
Plancherel constant, which is never fixed here.

Every pairing is reduced term by term to products of one-dimensional
functionals:

* an angle paired with a delta at 0 evaluates the phase (gives 1),
* an angle paired with ``e^{i c phi}`` picks the Fourier mode ``-c``,
* a hyperbolic pair (t, theta) paired with
  ``coth(t/2) delta(theta) + tanh(t/2) delta(theta - pi)`` (``'deltas'``),
  with a chain kernel, or with a cycle weight ``e^{i m theta} f_m(t)``.

The t-parts become the moments of :func:`pseudospec.exppoly.moment`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy import integrate

from .cartan import GroupShape, ShapeError, iter_weyl_group, weyl_weight, weyl_generators
from .diagrams import (
    ArcA,
    ArcB,
    BareZ,
    Chain,
    Cycle,
    Diagram,
    Signature,
    iter_split_diagrams,
    iter_bare_diagrams,
    iter_merged_diagrams,
    iter_splits,
)
from .exppoly import (
    ExpPoly,
    PreconditionError,
    QuadratureError,
    _gauss_plain,
    apply_vandermonde_op,
    moment,
)

__all__ = [
    "PoleError",
    "plancherel_density_factor",
    "PairingResult",
    "GridTorusFunction",
    "OrbitalFamily",
    "weyl_average",
    "random_family",
    "pair_pieces",
    "projector_sign_exponent",
    "series_prefactor",
    "most_continuous_prefactor",
    "series_projector_pairing",
    "most_continuous_pairing",
    "split_projector_pairing",
    "mode_projector_pairing",
    "multiplicities",
    "richardson",
    "cutoff_ladder",
    "chain_series",
    "sum_mode_projectors",
    "sum_split_projectors",
    "kernel_transform_check",
    "cycle_series_check",
    "chain_series_check",
    "fourier_inversion_check",
    "diagram_sum_value",
    "diagram_sum_closed_form",
    "diagram_sum_check",
]

TWO_PI = 2.0 * math.pi


class PoleError(ZeroDivisionError):
    pass


def plancherel_density_factor(m: int, rho: float) -> complex:
    """-(i/2) coth(pi rho/2) for even m, -(i/2) tanh(pi rho/2) for odd m."""
    x = math.pi * rho / 2.0
    if m % 2 == 0:
        if rho == 0:
            raise PoleError("coth(pi rho/2) has a pole at rho = 0 (even m)")
        return -0.5j / math.tanh(x)
    return -0.5j * math.tanh(x)


@dataclass
class PairingResult:
    value: complex
    error: float = 0.0
    truncation: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "value": [self.value.real, self.value.imag],
            "error": self.error,
            "truncation": self.truncation,
        }


# -- family members -----------------------------------------------------------


class GridTorusFunction:
    """A continuous function on the 2-torus (phi, psi) given on a uniform grid.

    Used for the H_0 member of U(1,1) families built from group data: it is
    already the result of applying Delta_0(d), is piecewise smooth, and is
    paired by evaluation at the origin or through its Fourier coefficients.
    ``origin`` overrides the value at (0, 0) (e.g. a one-sided limit).
    """

    n_phi, n_psi, k = 1, 1, 0

    def __init__(self, values: np.ndarray, origin: complex | None = None):
        values = np.asarray(values, dtype=complex)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ShapeError("grid values must be a square 2-D array")
        self.values = values
        self.origin = complex(values[0, 0]) if origin is None else complex(origin)
        self._fft = np.fft.fft2(values) / values.size

    @classmethod
    def from_callable(cls, fn: Callable, size: int = 256, origin: complex | None = None):
        grid = -math.pi + TWO_PI * np.arange(size) / size
        phi, psi = np.meshgrid(grid, grid, indexing="ij")
        vals = fn(phi, psi)
        # reorder so that index 0 is angle 0
        vals = np.roll(vals, -size // 2, axis=(0, 1))
        if origin is None:
            origin = complex(fn(np.array(0.0), np.array(0.0)))
        return cls(vals, origin)

    @property
    def dims(self):
        return (1, 1, 0)

    def fourier(self, a: int, b: int) -> complex:
        """(1/4 pi^2) int int F e^{-i(a phi + b psi)} via the grid (trapezoid)."""
        n = self.values.shape[0]
        if max(abs(a), abs(b)) >= n // 2:
            return 0j
        return complex(self._fft[a % n, b % n])

    def __call__(self, phi: float, psi: float) -> complex:
        n = self.values.shape[0]
        i = int(round((phi % TWO_PI) / TWO_PI * n)) % n
        j = int(round((psi % TWO_PI) / TWO_PI * n)) % n
        return complex(self.values[i, j])


@dataclass
class OrbitalFamily:
    """Test data for the projector pairings: one member per Cartan subgroup.

    ``members[k]`` is an ExpPoly standing for the normalized orbital integral
    on H_k, or (if ``k`` is in ``applied``) for Delta_k(d) applied to it; for U(1,1) the k = 0 member may also
    be a :class:`GridTorusFunction` (always treated as applied).
    """

    shape: GroupShape
    members: dict
    applied: frozenset = frozenset()

    def __post_init__(self):
        self.applied = frozenset(self.applied)
        for k, mem in self.members.items():
            self.shape.check_k(k)
            dims = mem.dims
            if dims != (self.shape.p - k, self.shape.q - k, k):
                raise ShapeError(f"member {k} has chart {dims}")
            if isinstance(mem, GridTorusFunction):
                self.applied = self.applied | {k}
        self._cache: dict = {}

    def F(self, k: int):
        """Delta_k(d) applied to member k (zero if the member is absent)."""
        if k not in self._cache:
            mem = self.members.get(k)
            if mem is None:
                self._cache[k] = ExpPoly.zero(self.shape, k)
            elif k in self.applied:
                self._cache[k] = mem
            else:
                self._cache[k] = apply_vandermonde_op(mem, self.shape, k)
        return self._cache[k]

    def scaled(self, s: complex) -> "OrbitalFamily":
        return OrbitalFamily(
            self.shape,
            {k: (m.scale(s) if isinstance(m, ExpPoly) else _scale_grid(m, s)) for k, m in self.members.items()},
            self.applied,
        )

    def __add__(self, other: "OrbitalFamily") -> "OrbitalFamily":
        if other.shape != self.shape or other.applied != self.applied:
            raise ShapeError("families must share shape and applied flags")
        keys = set(self.members) | set(other.members)
        out = {}
        for k in keys:
            a, b = self.members.get(k), other.members.get(k)
            out[k] = a if b is None else b if a is None else a + b
        return OrbitalFamily(self.shape, out, self.applied)

    def check_symmetry(self, tol: float = 1e-9) -> dict:
        """Symbolic symmetry audit of ExpPoly members.

        A plain member must be epsilon_k-skew-symmetric (so even in every t), and an
        applied member must be epsilon_k-symmetric (odd in
        every t). Returns the worst relative violation per k.
        """
        report = {}
        for k, mem in self.members.items():
            if not isinstance(mem, ExpPoly):
                continue
            is_applied = k in self.applied
            scale = max(mem.max_abs_coeff(), 1e-300)
            worst = 0.0
            gens = weyl_generators(self.shape, k)
            for fam, elems in gens.items():
                for w in elems:
                    if fam == "reflection":
                        (g,) = tuple(w.reflections)
                        img = mem.reflect(g)
                        expected = -1 if is_applied else 1
                    else:
                        img = mem.permute(w.perm_phi, w.perm_psi, w.perm_z)
                        expected = 1 if (is_applied or fam == "z") else -1
                    worst = max(worst, (img - mem.scale(expected)).max_abs_coeff() / scale)
            report[k] = worst
        return report

    def validate(self, tol: float = 1e-9) -> None:
        for k, worst in self.check_symmetry(tol).items():
            if worst > tol:
                kind = "epsilon_k-symmetric" if k in self.applied else "epsilon_k-skew-symmetric"
                raise PreconditionError(
                    f"member on H_{k} is not {kind} (relative violation {worst:.2e})"
                )


def weyl_average(f: ExpPoly, shape: GroupShape, k: int, kind: str = "skew") -> ExpPoly:
    """Project f onto the epsilon_k-skew ('skew') or epsilon_k-symmetric ('symmetric') class.

    Averages chi(w) f(w h) over all of W_k, so only use on small shapes.
    """
    if kind not in ("skew", "symmetric"):
        raise ValueError(f"unknown symmetry class {kind!r}")
    total = ExpPoly.zero(shape, k)
    count = 0
    for w in iter_weyl_group(shape, k):
        img = f
        for g in sorted(w.reflections):
            img = img.reflect(g)
        img = img.permute(w.perm_phi, w.perm_psi, w.perm_z)
        if kind == "skew":
            chi = w.parity_phi_psi()
        else:
            chi = -1 if len(w.reflections) % 2 else 1
        total = total + img.scale(chi)
        count += 1
    return total.scale(1.0 / count)


def random_family(
    shape: GroupShape,
    rng: np.random.Generator,
    ks: Iterable[int] | None = None,
    n_terms: int = 3,
    max_mode: int = 2,
    max_exp: int = 4,
    widths: tuple = (0.5, 1.5),
) -> OrbitalFamily:
    """Random family of epsilon_k-skew Gaussian-polynomial members.

    Exponents of t are even (odd ones would be averaged away).
    """
    ks = range(shape.q + 1) if ks is None else ks
    if 2 * max_mode + 1 < shape.p:
        raise ValueError("max_mode too small: skew averaging needs distinct angle modes")
    members = {}
    for k in ks:
        avg = ExpPoly.zero(shape, k)
        # skew averaging kills terms with repeated modes; redraw until something survives
        for _ in range(50):
            f = ExpPoly.zero(shape, k)
            for _ in range(n_terms):
                f = f + ExpPoly.term(
                    shape,
                    k,
                    complex(rng.normal(), rng.normal()),
                    rng.integers(-max_mode, max_mode + 1, shape.p - k),
                    rng.integers(-max_mode, max_mode + 1, shape.q - k),
                    rng.integers(-max_mode, max_mode + 1, k),
                    2 * rng.integers(0, max_exp // 2 + 1, k),
                    rng.uniform(*widths, k).round(3),
                )
            avg = weyl_average(f, shape, k, "skew")
            if not avg.is_zero():
                break
        members[k] = avg
    return OrbitalFamily(shape, members)


def _scale_grid(g: GridTorusFunction, s: complex) -> GridTorusFunction:
    return GridTorusFunction(g.values * s, g.origin * s)


# -- generic pairing ------------------------------------------------------------


def _odd_check(F: ExpPoly, g: int, tol: float = 1e-9):
    even = F.parity_part(g, odd=False)
    if even.max_abs_coeff() > tol * max(F.max_abs_coeff(), 1e-300):
        raise PreconditionError(
            f"test function is not odd in t_{g + 1}; singular kernels need odd functions"
        )


def _z_factor(spec, mg: int, e: int, w: float, lam: complex) -> tuple:
    """One hyperbolic coordinate: returns (value, error)."""
    kind = spec[0]
    if lam != 0:
        raise PreconditionError("pairings need lam = 0 test functions")
    if kind == "deltas":
        v1, e1 = moment(e, w, 0j, "coth_half")
        v2, e2 = moment(e, w, 0j, "tanh_half")
        sign = -1 if mg % 2 else 1
        return v1 + sign * v2, e1 + e2
    if kind == "chain":
        ca, cb = spec[1], spec[2]
        if mg != -(ca + cb):
            return 0j, 0.0
        v, er = moment(e, w, 0j, "chain", float(abs(ca - cb)))
        return TWO_PI * v, TWO_PI * er
    if kind == "cycle":
        ms = spec[1]
        if mg != -ms:
            return 0j, 0.0
        v, er = moment(e, w, 0j, "coth" if ms % 2 == 0 else "csch")
        return TWO_PI * v, TWO_PI * er
    if kind == "plain_phase":
        # e^{i mu theta} times plain t-weight; used for flat pairings
        mu = spec[1]
        if mg != -mu:
            return 0j, 0.0
        v, er = moment(e, w, 0j, "plain")
        return TWO_PI * v, TWO_PI * er
    raise ValueError(f"unknown hyperbolic spec {spec!r}")


def pair_pieces(F, phi_specs: Sequence, psi_specs: Sequence, z_specs: Sequence) -> tuple:
    """Pair F with a product of one-coordinate distributions.

    ``phi_specs[i]`` / ``psi_specs[i]`` are ``('delta',)`` or ``('phase', c)``
    (pairing against ``e^{i c x}``). ``z_specs[g]`` is ``('deltas',)``,
    ``('chain', c_left, c_right)`` or ``('cycle', m)``. Returns (value, error).
    """
    if isinstance(F, GridTorusFunction):
        if z_specs:
            raise ShapeError("torus member has no hyperbolic coordinates")
        (ps,), (qs,) = phi_specs, psi_specs
        if ps[0] == "delta" and qs[0] == "delta":
            return F.origin, 0.0
        if ps[0] == "phase" and qs[0] == "phase":
            return TWO_PI**2 * F.fourier(-ps[1], -qs[1]), 0.0
        raise ValueError("mixed delta/phase pairing not supported for grid members")
    if (len(phi_specs), len(psi_specs), len(z_specs)) != F.dims:
        raise ShapeError("one spec per coordinate required")
    for g, spec in enumerate(z_specs):
        if spec[0] in ("deltas", "cycle"):
            _odd_check(F, g)
    total = 0j
    err = 0.0
    for (a, b, m, w, l), poly in F.terms.items():
        ang = 1.0
        for aa, spec in zip(a, phi_specs):
            if spec[0] == "phase" and aa != -spec[1]:
                ang = 0.0
                break
            if spec[0] == "phase":
                ang *= TWO_PI
        if ang == 0.0:
            continue
        for bb, spec in zip(b, psi_specs):
            if spec[0] == "phase" and bb != -spec[1]:
                ang = 0.0
                break
            if spec[0] == "phase":
                ang *= TWO_PI
        if ang == 0.0:
            continue
        for e, c in poly.items():
            val = c * ang
            verr = 0.0
            for g, spec in enumerate(z_specs):
                fv, fe = _z_factor(spec, m[g], e[g], w[g], l[g])
                verr = verr * abs(fv) + abs(val) * fe
                val *= fv
                if val == 0:
                    break
            total += val
            err += verr
    return complex(total), err


# -- prefactors -----------------------------------------------------------------


def projector_sign_exponent(shape: GroupShape, r: int) -> int:
    n, p, q = shape.n, shape.p, shape.q
    return n * (n - 1) // 2 + p * q + q * r + r * (r - 1) // 2


def _sign(exponent: int) -> int:
    return -1 if exponent % 2 else 1


def series_prefactor(shape: GroupShape, r: int, k: int) -> tuple:
    """(sign, rational part, power of pi) of the k-th summand of the series-r projector."""
    n = shape.n
    rat = (
        Fraction(2 ** (n - 2 * k) * math.factorial(k), math.factorial(k - r) * math.factorial(r))
        * weyl_weight(shape, k)
    )
    return _sign(projector_sign_exponent(shape, r)), rat, n - k


def most_continuous_prefactor(shape: GroupShape) -> tuple:
    """Prefactor of the specialised formula for the most continuous series."""
    p, q = shape.p, shape.q
    sign = _sign(p * (p - 1) // 2 + q * q)
    return sign, Fraction(2**p, 2**q) * weyl_weight(shape, q), p


def _deltas_pairing(F, shape: GroupShape, k: int) -> tuple:
    return pair_pieces(
        F,
        [("delta",)] * (shape.p - k),
        [("delta",)] * (shape.q - k),
        [("deltas",)] * k,
    )


def series_projector_pairing(shape: GroupShape, r: int, fam: OrbitalFamily, validate: bool = True) -> PairingResult:
    """Series-r projector pairing: sum over k = r..q of prefactor times the delta pairing."""
    if not (0 <= r <= shape.q):
        raise ShapeError(f"r={r} outside [0, {shape.q}]")
    if validate:
        fam.validate()
    total = 0j
    err = 0.0
    per_k = {}
    for k in range(r, shape.q + 1):
        sign, rat, pw = series_prefactor(shape, r, k)
        coef = sign * float(rat) * math.pi**pw
        val, e = _deltas_pairing(fam.F(k), shape, k)
        per_k[k] = [(coef * val).real, (coef * val).imag]
        total += coef * val
        err += abs(coef) * e
    return PairingResult(total, err, {"angular": "exact", "per_k": per_k})


def most_continuous_pairing(shape: GroupShape, fam: OrbitalFamily, nodes: int = 160) -> PairingResult:
    """The most-continuous-series pairing through its specialised prefactor.

    Independent route: the t-integrals are done by tensor Gauss-Legendre
    quadrature of pointwise values (F(t) coth(t/2) is smooth for odd F), not
    by the moment engine.
    """
    q = shape.q
    F = fam.F(q)
    if not isinstance(F, ExpPoly):
        raise ShapeError("remark route needs an ExpPoly member on H_q")
    for g in range(q):
        _odd_check(F, g)
    widths = [w for (_, _, _, ws, _) in F.terms for w in ws] or [1.0]
    half = math.sqrt(46.0 / min(widths)) + 2.0
    x, wts = np.polynomial.legendre.leggauss(nodes)
    x, wts = x * half, wts * half
    total = 0j
    for pattern in range(2**q):
        thetas = [math.pi if (pattern >> g) & 1 else 0.0 for g in range(q)]
        grids = np.meshgrid(*([x] * q), indexing="ij")
        tpts = np.stack([gr.ravel() for gr in grids], axis=1)
        wgt = np.ones(len(tpts))
        for g in range(q):
            wg = np.meshgrid(*([wts] * q), indexing="ij")[g].ravel()
            tg = tpts[:, g]
            kern = np.tanh(tg / 2) if thetas[g] else 1.0 / np.tanh(tg / 2)
            wgt = wgt * wg * kern
        vals = F.eval_many(
            np.zeros((len(tpts), shape.p - q)),
            np.zeros((len(tpts), 0)),
            tpts,
            np.tile(thetas, (len(tpts), 1)),
        )
        total += np.sum(vals * wgt)
    sign, rat, pw = most_continuous_prefactor(shape)
    return PairingResult(sign * float(rat) * math.pi**pw * total, 0.0, {"nodes": nodes})


def split_projector_pairing(sig: Signature, fam: OrbitalFamily, validate: bool = True) -> PairingResult:
    """Projector for a fixed (A; c), summed over the bare-pair diagrams.

    Prefactor per k is sign * weyl_weight * pi^r (the choice that makes the sum
    over (A; c) reproduce the series-r projector).
    """
    shape, r = sig.shape, sig.r
    if validate:
        fam.validate()
    sign = _sign(projector_sign_exponent(shape, r))
    total = 0j
    err = 0.0
    for k in range(r, shape.q + 1):
        F = fam.F(k)
        coef = sign * float(weyl_weight(shape, k)) * math.pi**r
        for dg in iter_bare_diagrams(sig, k):
            val, e = _diagram_pairing(F, dg, sig, shape, k, bare="deltas")
            total += coef * val
            err += abs(coef) * e
    return PairingResult(total, err, {"angular": "exact"})


def multiplicities(m: Sequence[int]) -> list:
    """Run lengths of a sorted tuple."""
    out = []
    prev = object()
    for x in m:
        if x == prev:
            out[-1] += 1
        else:
            out.append(1)
            prev = x
    return out


def mode_projector_pairing(sig: Signature, fam: OrbitalFamily, validate: bool = True) -> PairingResult:
    """Projector for a fixed (A; c, m) with cycle weights e^{i m theta} f_m(t).

    f_m = coth for even m, 1/sinh for odd m. Diagrams run over the fixed-split
    family; the weight is sign * weyl_weight / prod(u!) for multiplicities u of m.
    """
    shape, r = sig.shape, sig.r
    m = tuple(sig.m)
    notes = {}
    if list(m) != sorted(m, reverse=True):
        notes["warning"] = "m was not sorted decreasingly; sorted before use"
        m = tuple(sorted(m, reverse=True))
        sig = Signature(shape, r, sig.A, sig.c, m, sig.rho or (1.0,) * r)
    if validate:
        fam.validate()
    sign = _sign(projector_sign_exponent(shape, r))
    mult = math.prod(math.factorial(u) for u in multiplicities(m))
    total = 0j
    err = 0.0
    for k in range(r, shape.q + 1):
        F = fam.F(k)
        coef = sign * float(weyl_weight(shape, k)) / mult
        for dg in iter_split_diagrams(sig, k):
            val, e = _diagram_pairing(F, dg, sig, shape, k, bare=None)
            total += coef * val
            err += abs(coef) * e
    return PairingResult(total, err, {"angular": "exact", "multiplicity_factor": mult, **notes})


def _diagram_pairing(F, dg: Diagram, sig: Signature, shape: GroupShape, k: int, bare) -> tuple:
    c = sig.c
    phi_specs = [None] * (shape.p - k)
    psi_specs = [None] * (shape.q - k)
    z_specs = [None] * k
    for pc in dg.pieces:
        if isinstance(pc, ArcA):
            phi_specs[pc.phi - 1] = ("phase", c[pc.c - 1])
        elif isinstance(pc, ArcB):
            psi_specs[pc.psi - 1] = ("phase", c[pc.c - 1])
        elif isinstance(pc, Chain):
            z_specs[pc.z - 1] = ("chain", c[pc.left - 1], c[pc.right - 1])
        elif isinstance(pc, Cycle):
            z_specs[pc.z - 1] = ("cycle", sig.m[pc.d - 1])
        elif isinstance(pc, BareZ):
            z_specs[pc.z - 1] = (bare,)
    return pair_pieces(F, phi_specs, psi_specs, z_specs)


# -- truncated sums and extrapolation ------------------------------------------


def richardson(values: Sequence[complex], cutoffs: Sequence[int]) -> complex:
    """Extrapolate truncated sums S(N) to N = infinity.

    Fits the polynomial in 1/N through the points (1/N_i, S(N_i)) and
    evaluates it at 0 (Neville's scheme), i.e. assumes
    S(N) = S + a_1/N + a_2/N^2 + ...
    """
    if len(values) != len(cutoffs):
        raise ValueError("one value per cutoff")
    h = [1.0 / n for n in cutoffs]
    table = [complex(v) for v in values]
    size = len(h)
    for m in range(1, size):
        for i in range(size - m):
            table[i] = (h[i + m] * table[i] - h[i] * table[i + 1]) / (h[i + m] - h[i])
    return table[0]


def cutoff_ladder(N: int, levels: int = 5) -> list:
    """N and ``levels - 1`` smaller cutoffs spaced by max(1, N // 12)."""
    step = max(1, N // 12)
    out = [N - i * step for i in range(levels)]
    if out[-1] < 1:
        raise ValueError(f"cutoff {N} too small for {levels} levels")
    return out


def chain_series(e: int, w: float, mode: int, N: int) -> complex:
    """sum_{|a|,|b|<=N} int int t^e e^{-w t^2} e^{i mode theta} sgn(t) e^{-|a-b||t| + i(a+b) theta}."""
    total = 0j
    lo, hi = max(-N, -mode - N), min(N, -mode + N)
    for a in range(lo, hi + 1):
        d = abs(2 * a + mode)
        total += moment(e, w, 0j, "chain", float(d))[0]
    return TWO_PI * total


def sum_mode_projectors(sig: Signature, fam: OrbitalFamily, cutoff: int = 40) -> PairingResult:
    """Sum of the (A; c, m) projectors over sorted m with |m_s| <= cutoff."""
    shape, r = sig.shape, sig.r
    fam.validate()
    total = 0j
    err = 0.0
    count = 0
    for ms in _sorted_tuples(r, cutoff):
        res = mode_projector_pairing(
            Signature(shape, r, sig.A, sig.c, ms, (1.0,) * r), fam, validate=False
        )
        total += res.value
        err += res.error
        count += 1
    return PairingResult(total, err, {"m_cutoff": cutoff, "terms": count})


def _sorted_tuples(r: int, cutoff: int):
    def rec(prefix, upper, left):
        if left == 0:
            yield tuple(prefix)
            return
        for x in range(upper, -cutoff - 1, -1):
            yield from rec(prefix + [x], x, left - 1)

    yield from rec([], cutoff, r)


def _strict_tuples(size: int, cutoff: int):
    def rec(prefix, upper, left):
        if left == 0:
            yield tuple(prefix)
            return
        for x in range(upper, -cutoff - 1 + left - 1, -1):
            yield from rec(prefix + [x], x - 1, left - 1)

    yield from rec([], cutoff, size)


def sum_split_projectors(
    shape: GroupShape, r: int, fam: OrbitalFamily, cutoff: int = 40, levels: int = 5
) -> PairingResult:
    """Sum of the (A; c) projectors over all splits A and strictly decreasing c with |c_j| <= N.

    Computed on the cutoffs of :func:`cutoff_ladder` and extrapolated in
    1/N; the raw values are kept in the truncation report and the error is
    the change from dropping the coarsest cutoff.
    """
    fam.validate()
    ladder = cutoff_ladder(cutoff, levels) if levels > 1 else [cutoff]
    raw = []
    for N in ladder:
        total = 0j
        for A in iter_splits(shape, r):
            for c in _strict_tuples(shape.n - 2 * r, N):
                sig = Signature(shape, r, A, c, (0,) * r, (1.0,) * r)
                total += split_projector_pairing(sig, fam, validate=False).value
        raw.append(total)
    if len(raw) == 1:
        return PairingResult(raw[0], float("nan"), {"c_cutoffs": ladder, "raw": [[raw[0].real, raw[0].imag]]})
    value = richardson(raw, ladder)
    return PairingResult(
        value,
        abs(richardson(raw[:-1], ladder[:-1]) - value),
        {"c_cutoffs": ladder, "raw": [[v.real, v.imag] for v in raw]},
    )


# -- lemma oracles ----------------------------------------------------------------


def _one_dim_terms(f: ExpPoly) -> list:
    """(coeff, e, w) for a function of a single t (no angles)."""
    if f.dims != (0, 0, 1):
        raise ShapeError("expected a function of one hyperbolic coordinate")
    out = []
    for (a, b, m, w, l), poly in f.terms.items():
        if m[0] != 0 or l[0] != 0:
            raise ShapeError("expected a theta-independent Gaussian polynomial")
        for e, c in poly.items():
            out.append((c, e[0], w[0]))
    return out


def _fourier_t(terms, rho: float) -> complex:
    """int f(t) e^{i rho t} dt in closed form."""
    return sum(c * _gauss_plain(e, w, 1j * rho) for c, e, w in terms)


def _rho_cutoff(terms) -> float:
    wmax = max(w for _, _, w in terms)
    emax = max(e for _, e, _ in terms)
    # |FT| ~ rho^e exp(-rho^2/(4w)); stop when below 1e-18
    return math.sqrt(4.0 * wmax * (42.0 + emax * math.log(10.0 + emax))) + 1.0


def kernel_transform_check(f: ExpPoly, variant: str = "coth") -> dict:
    """int int f(t) e^{i rho t} dt w(pi rho/2) d rho versus int f 2i K(t) dt.

    w = coth, K = coth for ``variant='coth'``; w = tanh, K = 1/sinh for 'tanh'.
    f must be odd; the inner transform is closed-form, the outer integral
    adaptive.
    """
    _odd_check(f, 0)
    terms = _one_dim_terms(f)
    wfun = (lambda x: 1.0 / math.tanh(x)) if variant == "coth" else math.tanh
    upper = _rho_cutoff(terms)

    def integrand(rho, part):
        val = _fourier_t(terms, rho) * wfun(math.pi * rho / 2.0)
        return val.real if part == 0 else val.imag

    lhs = 0j
    lerr = 0.0
    for part in (0, 1):
        v, e = integrate.quad(integrand, 0.0, upper, args=(part,), epsabs=1e-14, epsrel=1e-12, limit=400)
        lhs += (1j if part else 1.0) * 2.0 * v  # even integrand in rho
        lerr += 2.0 * e
    kern = "coth" if variant == "coth" else "csch"
    rhs = 0j
    rerr = 0.0
    for c, e, w in terms:
        v, er = moment(e, w, 0j, kern)
        rhs += 2j * c * v
        rerr += abs(2 * c) * er
    return {"lhs": lhs, "rhs": rhs, "error": abs(lhs - rhs), "quad_error": lerr + rerr}


@lru_cache(maxsize=10_000)
def _cycle_rho_integral(e: int, w: float, parity: int, half: bool) -> complex:
    """int_{rho>0} e_m(rho) int t^e e^{-w t^2} (e^{i rho t} - e^{-i rho t}) dt d rho.

    With ``half=False`` the rho-integral runs over R (twice the half-line
    value, the integrand being even in rho).
    """
    if e % 2 == 0:
        return 0j
    upper = math.sqrt(4.0 * w * (42.0 + e * math.log(10.0 + e))) + 1.0

    def integrand(rho):
        g = _gauss_plain(e, w, 1j * rho) - _gauss_plain(e, w, -1j * rho)
        return (plancherel_density_factor(parity, rho) * g).real

    v, _ = integrate.quad(integrand, 1e-300, upper, epsabs=1e-15, epsrel=1e-12, limit=400)
    # the product e_m * (G(rho) - G(-rho)) is real: -(i/2) K * (2i Im G) = K Im G
    return complex(v if half else 2.0 * v)


def _t_theta_terms(f: ExpPoly) -> list:
    if f.dims != (0, 0, 1):
        raise ShapeError("expected a function of (t, theta)")
    out = []
    for (a, b, m, w, l), poly in f.terms.items():
        if l[0] != 0:
            raise ShapeError("expected lam = 0")
        for e, c in poly.items():
            out.append((c, m[0], e[0], w[0]))
    return out


def _delta_side(f: ExpPoly, half_line: bool) -> complex:
    """pi <f, coth(t/2) delta(theta) + tanh(t/2) delta(theta - pi)> over R or R_+."""
    total = 0j
    for c, mu, e, w in _t_theta_terms(f):
        v1, _ = moment(e, w, 0j, "coth_half")
        v2, _ = moment(e, w, 0j, "tanh_half")
        total += c * (v1 + (-1) ** (mu % 2) * v2)
    total *= math.pi
    return total / 2.0 if half_line else total


def cycle_series_check(f: ExpPoly, cutoffs: Iterable[int] = (10, 20, 40)) -> dict:
    """Truncated m-series of the cycle pairing against the delta-side value.

    Series: 1/2 sum_{|m|<=M} int_0^inf d rho int int f e^{i m theta}
    (e^{i rho t} - e^{-i rho t}) e_m(rho). Delta side: pi <f, coth(t/2)
    delta(theta) + tanh(t/2) delta(theta - pi)> on t > 0. f must be odd in t.
    """
    _odd_check(f, 0)
    terms = _t_theta_terms(f)
    delta = _delta_side(f, half_line=True)
    curve = []
    for M in cutoffs:
        total = 0j
        for c, mu, e, w in terms:
            if abs(mu) <= M:
                total += c * TWO_PI * _cycle_rho_integral(e, w, mu % 2, True)
        series = 0.5 * total
        curve.append({"M": M, "series": series, "error": abs(series - delta)})
    return {"delta_side": delta, "curve": curve, "error": curve[-1]["error"]}


def chain_series_check(
    f: ExpPoly, cutoff: int = 60, levels: int = 5, decay_order: int = 2
) -> dict:
    """Truncated double series over (a, b) against the delta-side pairing on R.

    Reports the raw square-truncated sum at N, its extrapolation in 1/N over
    :func:`cutoff_ladder`, and the term-decay diagnostics: a log-log slope of
    the term magnitudes in |a - b| and the bounding constant of
    |T| (1 + (a-b)^2)(1 + |a+b|^decay_order) over windows N/2 and N. The
    raw truncation error is O(1/N), which is why the extrapolated value is
    the one compared.
    """
    _odd_check(f, 0)
    terms = _t_theta_terms(f)
    delta = _delta_side(f, half_line=False)

    def series(N):
        tot = 0j
        for c, mu, e, w in terms:
            if abs(mu) <= 2 * N:
                tot += c * chain_series(e, w, mu, N)
        return tot

    ladder = cutoff_ladder(cutoff, levels)
    raw = [series(N) for N in ladder]
    extrap = richardson(raw, ladder)

    # term magnitudes T(a, b), grouped by (a - b, a + b)
    def term(a, b):
        s = a + b
        d = abs(a - b)
        tot = 0j
        for c, mu, e, w in terms:
            if mu == -s:
                tot += c * TWO_PI * moment(e, w, 0j, "chain", float(d))[0]
        return tot

    bounds = []
    for N in (cutoff // 2, cutoff):
        worst = 0.0
        for a in range(-N, N + 1):
            for b in range(-N, N + 1):
                t = abs(term(a, b))
                if t:
                    worst = max(worst, t * (1 + (a - b) ** 2) * (1 + abs(a + b) ** decay_order))
        bounds.append(worst)
    # slope in |a - b| along the dominant diagonal a + b = -mu0
    mu0 = max(terms, key=lambda x: abs(x[0]))[1]
    ds, mags = [], []
    for d in range(cutoff // 2, 2 * cutoff):
        if (d + mu0) % 2:
            continue
        a = (d - mu0) // 2
        b = a - d
        v = abs(term(a, b))
        if v > 0:
            ds.append(math.log(d))
            mags.append(math.log(v))
    slope = -np.polyfit(ds, mags, 1)[0] if len(ds) > 2 else float("nan")
    return {
        "delta_side": delta,
        "raw": raw[0],
        "raw_error": abs(raw[0] - delta),
        "extrapolated": extrap,
        "error": abs(extrap - delta),
        "cutoffs": ladder,
        "decay_slope_diff": float(slope),
        "decay_bounds": bounds,
        # the bound settles from below, so allow a small relative drift
        "decay_bounded": bounds[1] <= bounds[0] * 1.01,
    }


def fourier_inversion_check(f, K: int, grid: int = 4096) -> dict:
    """sum_{|k|<=K} int f(phi) e^{-i k phi} d phi versus 2 pi f(0).

    ``f`` is a one-angle ExpPoly (dims (1, 0, 0)) or a vectorised callable.
    Coefficients come from the trapezoid rule on ``grid`` points, which is
    exact for trigonometric polynomials of degree below grid/2.
    """
    phis = -math.pi + TWO_PI * np.arange(grid) / grid
    if isinstance(f, ExpPoly):
        if f.dims != (1, 0, 0):
            raise ShapeError("expected a function of one angle")
        vals = f.eval_many(phis.reshape(-1, 1), np.zeros((grid, 0)), np.zeros((grid, 0)), np.zeros((grid, 0)))
        f0 = f.eval_many(np.zeros((1, 1)), np.zeros((1, 0)), np.zeros((1, 0)), np.zeros((1, 0)))[0]
    else:
        vals = np.asarray(f(phis), dtype=complex)
        f0 = complex(f(np.array([0.0]))[0])
    ks = np.arange(-K, K + 1)
    coeffs = np.array([TWO_PI * np.mean(vals * np.exp(-1j * k * phis)) for k in ks])
    partial = complex(np.sum(coeffs))
    # decay constant: max |c_k| (1 + k^2) over the computed range
    decay = float(np.max(np.abs(coeffs) * (1 + ks.astype(float) ** 2)))
    return {
        "partial_sum": partial,
        "target": TWO_PI * f0,
        "error": abs(partial - TWO_PI * f0),
        "decay_constant": decay,
        "coefficients": coeffs,
    }


# -- per-diagram iterated sums ---------------------------------------------------------


def diagram_sum_value(
    F: ExpPoly, shape: GroupShape, r: int, k: int, dg: Diagram,
    arc_cutoff: int = 40, chain_cutoff: int = 40, m_cutoff: int = 40, levels: int = 5,
) -> dict:
    """Iterated truncated sum for one merged diagram.

    Every c-index, m and rho enters exactly one piece, so for each term of F
    the iterated sum factorises into per-coordinate series: arcs give
    sum_{|c|<=K} 2 pi [a = -c]; chains the double series of
    :func:`chain_series` (extrapolated in 1/N over :func:`cutoff_ladder`); cycles
    sum_{|m|<=M} 2 pi [mode = -m] int_R e_m(rho) int (e^{i rho t} -
    e^{-i rho t}) dt d rho.
    """
    if F.dims != (shape.p - k, shape.q - k, k):
        raise ShapeError("F does not live on H_k")
    kinds = ["chain"] * k
    for pc in dg.pieces:
        if isinstance(pc, Cycle):
            kinds[pc.z - 1] = "cycle"
    ladder = cutoff_ladder(chain_cutoff, levels)

    @lru_cache(maxsize=None)
    def chain_lim(e, w, mu):
        return richardson([chain_series(e, w, mu, N) for N in ladder], ladder)

    total = 0j
    for (a, b, m, w, l), poly in F.terms.items():
        if any(abs(x) > arc_cutoff for x in a + b):
            continue
        ang = TWO_PI ** (len(a) + len(b))
        for e, c in poly.items():
            val = c * ang
            for g in range(k):
                if kinds[g] == "chain":
                    val *= chain_lim(e[g], w[g], m[g])
                else:
                    if abs(m[g]) > m_cutoff:
                        val = 0
                        break
                    val *= TWO_PI * _cycle_rho_integral(e[g], w[g], m[g] % 2, False)
                if val == 0:
                    break
            total += val
    return {"value": total, "kinds": kinds, "chain_cutoffs": ladder}


def diagram_sum_closed_form(F: ExpPoly, shape: GroupShape, r: int, k: int) -> complex:
    """2^{n-2k+r} pi^{n-k} <F, prod delta(phi) prod delta(psi) prod(coth(t/2) delta + tanh(t/2) delta_pi)>."""
    val, _ = _deltas_pairing(F, shape, k)
    return 2.0 ** (shape.n - 2 * k + r) * math.pi ** (shape.n - k) * val


def diagram_sum_check(
    F: ExpPoly, shape: GroupShape, r: int, k: int, **cutoffs
) -> dict:
    """Iterated sums for every merged diagram, their spread, and the closed form."""
    for g in range(k):
        _odd_check(F, g)
    closed = diagram_sum_closed_form(F, shape, r, k)
    values = [diagram_sum_value(F, shape, r, k, dg, **cutoffs)["value"] for dg in iter_merged_diagrams(shape, r, k)]
    spread = max(abs(v - values[0]) for v in values) if values else 0.0
    worst = max(abs(v - closed) for v in values) if values else 0.0
    return {
        "closed_form": closed,
        "values": values,
        "pairwise_spread": spread,
        "max_error_vs_closed": worst,
        "diagrams": len(values),
    }
