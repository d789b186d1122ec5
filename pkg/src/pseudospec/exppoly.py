"""Exponential-polynomial test functions on a Cartan subgroup H_k.

A term is::

    coeff * exp(i a.phi + i b.psi + i m.theta) * t^e * exp(sum_g (-w_g t_g^2 + lam_g t_g))

with integer phase vectors ``a, b, m``, Gaussian widths ``w_g >= 0`` and
complex linear rates ``lam_g``. Test functions proper use ``lam = 0``;
nonzero rates let the same class hold the chamber-wise pieces of the
eta functions (``exp(-|c - c'| |t|)`` on a fixed sign of ``t``).

The class is closed under sums, products and the operators X_j, so
``apply_vandermonde_op`` is exact. Pairings against the kernels used by the
projector formulas reduce to one-dimensional moments, see :func:`moment`.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import integrate, special

from .cartan import CartanPoint, GroupShape, ShapeError

__all__ = [
    "PreconditionError",
    "QuadratureError",
    "ExpPoly",
    "apply_X",
    "apply_vandermonde_op",
    "vandermonde_symbol",
    "moment",
    "integrate_t",
    "ODD_KERNELS",
    "SINGULAR_KERNELS",
]


class PreconditionError(ValueError):
    """Input violates a mathematical precondition (e.g. oddness in t)."""


class QuadratureError(RuntimeError):
    pass


# key: (a, b, m, widths, lams)
Key = tuple


def _clean(poly: dict) -> dict:
    return {e: c for e, c in poly.items() if c != 0}


def _poly_mul(p1: Mapping, p2: Mapping) -> dict:
    out: dict = defaultdict(complex)
    for e1, c1 in p1.items():
        for e2, c2 in p2.items():
            out[tuple(x + y for x, y in zip(e1, e2))] += c1 * c2
    return _clean(out)


def _poly_dt(poly: Mapping, g: int, width: float, lam: complex) -> dict:
    """d/dt_g of poly * exp(-width t_g^2 + lam t_g), divided by the exponential."""
    out: dict = defaultdict(complex)
    for e, c in poly.items():
        if e[g] > 0:
            lo = list(e)
            lo[g] -= 1
            out[tuple(lo)] += e[g] * c
        if lam != 0:
            out[e] += lam * c
        if width != 0:
            hi = list(e)
            hi[g] += 1
            out[tuple(hi)] += -2.0 * width * c
    return _clean(out)


class ExpPoly:
    """Immutable-by-convention sum of exponential-polynomial terms.

    ``n_phi``, ``n_psi`` and ``k`` give the coordinate counts of the chart.
    """

    __slots__ = ("n_phi", "n_psi", "k", "terms")

    def __init__(self, n_phi: int, n_psi: int, k: int, terms: Mapping | None = None):
        self.n_phi, self.n_psi, self.k = int(n_phi), int(n_psi), int(k)
        self.terms: dict = {}
        if terms:
            for key, poly in terms.items():
                poly = _clean(dict(poly))
                if poly:
                    self.terms[key] = poly

    # -- construction ------------------------------------------------------

    @classmethod
    def zero(cls, shape: GroupShape, k: int) -> "ExpPoly":
        shape.check_k(k)
        return cls(shape.p - k, shape.q - k, k)

    @classmethod
    def term(
        cls,
        shape: GroupShape | None,
        k: int,
        coeff: complex = 1.0,
        a: Sequence[int] = (),
        b: Sequence[int] = (),
        m: Sequence[int] = (),
        exps: Sequence[int] | None = None,
        widths: Sequence[float] | None = None,
        lams: Sequence[complex] | None = None,
        dims: tuple | None = None,
    ) -> "ExpPoly":
        """Single term. Pass either ``shape`` or ``dims=(n_phi, n_psi)``."""
        if shape is not None:
            shape.check_k(k)
            n_phi, n_psi = shape.p - k, shape.q - k
        elif dims is not None:
            n_phi, n_psi = dims
        else:
            n_phi, n_psi = len(a), len(b)
        def given(v):
            return v is not None and len(v) > 0

        a = tuple(int(x) for x in a) if given(a) else (0,) * n_phi
        b = tuple(int(x) for x in b) if given(b) else (0,) * n_psi
        m = tuple(int(x) for x in m) if given(m) else (0,) * k
        exps = tuple(int(x) for x in exps) if given(exps) else (0,) * k
        widths = tuple(float(x) for x in widths) if given(widths) else (0.0,) * k
        lams = tuple(complex(x) for x in lams) if given(lams) else (0j,) * k
        if (len(a), len(b), len(m), len(exps), len(widths), len(lams)) != (
            n_phi,
            n_psi,
            k,
            k,
            k,
            k,
        ):
            raise ShapeError("term component lengths do not match the chart")
        if any(w < 0 for w in widths):
            raise ValueError("Gaussian widths must be non-negative")
        return cls(n_phi, n_psi, k, {(a, b, m, widths, lams): {exps: complex(coeff)}})

    def _like(self, terms: Mapping | None = None) -> "ExpPoly":
        return ExpPoly(self.n_phi, self.n_psi, self.k, terms)

    @property
    def dims(self) -> tuple:
        return (self.n_phi, self.n_psi, self.k)

    def _check(self, other: "ExpPoly"):
        if self.dims != other.dims:
            raise ShapeError(f"chart mismatch: {self.dims} vs {other.dims}")

    # -- algebra -----------------------------------------------------------

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        if isinstance(other, (int, float, complex)) and other == 0:
            return self
        self._check(other)
        terms = {key: dict(poly) for key, poly in self.terms.items()}
        for key, poly in other.terms.items():
            tgt = terms.setdefault(key, {})
            for e, c in poly.items():
                tgt[e] = tgt.get(e, 0) + c
        return self._like(terms)

    __radd__ = __add__

    def __neg__(self) -> "ExpPoly":
        return self.scale(-1)

    def __sub__(self, other: "ExpPoly") -> "ExpPoly":
        return self + (-other)

    def scale(self, s: complex) -> "ExpPoly":
        return self._like(
            {key: {e: c * s for e, c in poly.items()} for key, poly in self.terms.items()}
        )

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(complex(other))
        self._check(other)
        out: dict = {}
        for (a1, b1, m1, w1, l1), p1 in self.terms.items():
            for (a2, b2, m2, w2, l2), p2 in other.terms.items():
                key = (
                    tuple(x + y for x, y in zip(a1, a2)),
                    tuple(x + y for x, y in zip(b1, b2)),
                    tuple(x + y for x, y in zip(m1, m2)),
                    tuple(x + y for x, y in zip(w1, w2)),
                    tuple(x + y for x, y in zip(l1, l2)),
                )
                tgt = out.setdefault(key, {})
                for e, c in _poly_mul(p1, p2).items():
                    tgt[e] = tgt.get(e, 0) + c
        return self._like(out)

    def __rmul__(self, other):
        return self.__mul__(other)

    def is_zero(self) -> bool:
        return not self.terms

    def max_abs_coeff(self) -> float:
        return max((abs(c) for p in self.terms.values() for c in p.values()), default=0.0)

    def equals(self, other: "ExpPoly", tol: float = 0.0) -> bool:
        diff = self - other
        return diff.max_abs_coeff() <= tol

    def n_terms(self) -> int:
        return sum(len(p) for p in self.terms.values())

    # -- symmetry operations -----------------------------------------------

    def reflect(self, g: int) -> "ExpPoly":
        """f(..., -t_g, ...) for 0-based hyperbolic index ``g``."""
        out: dict = {}
        for (a, b, m, w, l), poly in self.terms.items():
            l2 = list(l)
            l2[g] = -l2[g]
            key = (a, b, m, w, tuple(l2))
            tgt = out.setdefault(key, {})
            for e, c in poly.items():
                tgt[e] = tgt.get(e, 0) + (-c if e[g] % 2 else c)
        return self._like(out)

    def permute(self, perm_phi=None, perm_psi=None, perm_z=None) -> "ExpPoly":
        """f(w h) for the coordinate permutation w (new_i = old_perm[i])."""
        perm_phi = tuple(perm_phi) if perm_phi is not None else tuple(range(self.n_phi))
        perm_psi = tuple(perm_psi) if perm_psi is not None else tuple(range(self.n_psi))
        perm_z = tuple(perm_z) if perm_z is not None else tuple(range(self.k))

        def move(vec, perm):
            # f(x_perm) has the coefficient of x_j at position perm^{-1}(j)
            out = [None] * len(vec)
            for i, j in enumerate(perm):
                out[i] = vec[j]
            return tuple(out)

        def inv(perm):
            out = [0] * len(perm)
            for i, j in enumerate(perm):
                out[j] = i
            return tuple(out)

        ip, iq, iz = inv(perm_phi), inv(perm_psi), inv(perm_z)
        terms: dict = {}
        for (a, b, m, w, l), poly in self.terms.items():
            key = (move(a, ip), move(b, iq), move(m, iz), move(w, iz), move(l, iz))
            tgt = terms.setdefault(key, {})
            for e, c in poly.items():
                e2 = move(e, iz)
                tgt[e2] = tgt.get(e2, 0) + c
        return self._like(terms)

    def parity_part(self, g: int, odd: bool) -> "ExpPoly":
        """Odd (or even) part in t_g: (f -+ R_g f)/2."""
        refl = self.reflect(g)
        return (self - refl).scale(0.5) if odd else (self + refl).scale(0.5)

    # -- evaluation --------------------------------------------------------

    def __call__(self, h: CartanPoint) -> complex:
        return self.eval(h)

    def eval(self, h: CartanPoint) -> complex:
        if (len(h.phi), len(h.psi), h.k) != self.dims:
            raise ShapeError("point does not lie in the chart of this function")
        vals = self.eval_many(
            np.array([h.phi]).reshape(1, self.n_phi),
            np.array([h.psi]).reshape(1, self.n_psi),
            np.array([h.t]).reshape(1, self.k),
            np.array([h.theta]).reshape(1, self.k),
        )
        return complex(vals[0])

    def eval_many(self, phi, psi, t, theta) -> np.ndarray:
        """Vectorised evaluation; each argument has shape (N, dim)."""
        arrs = [np.asarray(x, float) for x in (phi, psi, t, theta)]
        dims = (self.n_phi, self.n_psi, self.k, self.k)
        npts = max((x.size // d for x, d in zip(arrs, dims) if d), default=1)
        phi, psi, t, theta = (
            x.reshape(npts, d) if d else np.zeros((npts, 0)) for x, d in zip(arrs, dims)
        )
        out = np.zeros(npts, dtype=complex)
        for (a, b, m, w, l), poly in self.terms.items():
            phase = np.zeros(npts)
            if self.n_phi:
                phase = phase + phi @ np.asarray(a, float)
            if self.n_psi:
                phase = phase + psi @ np.asarray(b, float)
            expo = np.zeros(npts, dtype=complex)
            if self.k:
                phase = phase + theta @ np.asarray(m, float)
                expo = -(t**2) @ np.asarray(w, float) + t @ np.asarray(l, complex)
            pol = np.zeros(npts, dtype=complex)
            for e, c in poly.items():
                mon = np.ones(npts)
                for g, eg in enumerate(e):
                    if eg:
                        mon = mon * t[:, g] ** eg
                pol = pol + c * mon
            out += pol * np.exp(1j * phase + expo)
        return out

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        terms = []
        for (a, b, m, w, l), poly in sorted(self.terms.items(), key=lambda kv: repr(kv[0])):
            item = {
                "coeff": [1.0, 0.0],
                "a": list(a),
                "b": list(b),
                "m": list(m),
                "poly": {
                    ",".join(map(str, e)): [c.real, c.imag] for e, c in sorted(poly.items())
                },
                "widths": list(w),
            }
            if any(x != 0 for x in l):
                item["lams"] = [[x.real, x.imag] for x in l]
            terms.append(item)
        return {"dims": list(self.dims), "terms": terms}

    @classmethod
    def from_json(cls, data: Mapping, shape: GroupShape | None = None, k: int | None = None):
        """Parse the JSON schema; chart from ``dims`` or from ``shape``/``k``."""
        if "dims" in data:
            n_phi, n_psi, kk = data["dims"]
        elif shape is not None and k is not None:
            n_phi, n_psi, kk = shape.p - k, shape.q - k, k
        else:
            t0 = data["terms"][0]
            n_phi, n_psi, kk = len(t0.get("a", [])), len(t0.get("b", [])), len(t0.get("m", []))
        out = cls(n_phi, n_psi, kk)
        for item in data["terms"]:
            coeff = item.get("coeff", [1.0, 0.0])
            coeff = complex(*coeff) if isinstance(coeff, (list, tuple)) else complex(coeff)
            poly = {}
            for ek, val in item.get("poly", {"": 1.0}).items():
                e = tuple(int(x) for x in ek.split(",")) if ek else (0,) * kk
                val = complex(*val) if isinstance(val, (list, tuple)) else complex(val)
                poly[e] = coeff * val
            lams = item.get("lams")
            lams = [complex(*x) if isinstance(x, (list, tuple)) else complex(x) for x in lams] if lams else None
            for e, c in poly.items():
                out = out + cls.term(
                    None,
                    kk,
                    c,
                    item.get("a", ()),
                    item.get("b", ()),
                    item.get("m", ()),
                    e,
                    item.get("widths"),
                    lams,
                    dims=(n_phi, n_psi),
                )
        return out

    def __repr__(self) -> str:
        return f"ExpPoly(dims={self.dims}, terms={self.n_terms()})"


# -- differential operators ---------------------------------------------------


def _slot(f: ExpPoly, j: int) -> tuple:
    """Classify 1-based operator index j: ('phi'|'z'|'psi'|'zbar', index)."""
    n_phi, n_psi, k = f.dims
    n = n_phi + n_psi + 2 * k
    if not (1 <= j <= n):
        raise ShapeError(f"operator index {j} outside 1..{n}")
    j -= 1
    if j < n_phi:
        return ("phi", j)
    j -= n_phi
    if j < k:
        return ("z", j)
    j -= k
    if j < n_psi:
        return ("psi", j)
    return ("zbar", j - n_psi)


def apply_X(j: int, f: ExpPoly) -> ExpPoly:
    """Apply the j-th operator (1-based) in the order phi's, z's, psi's, -conj(z)'s."""
    kind, idx = _slot(f, j)
    out: dict = {}
    for key, poly in f.terms.items():
        a, b, m, w, l = key
        if kind == "phi":
            new = {e: c * a[idx] for e, c in poly.items()}
        elif kind == "psi":
            new = {e: c * b[idx] for e, c in poly.items()}
        else:
            sgn = 1 if kind == "z" else -1
            dt = _poly_dt(poly, idx, w[idx], l[idx])
            new = defaultdict(complex)
            for e, c in dt.items():
                new[e] += 0.5 * sgn * c
            for e, c in poly.items():
                new[e] += 0.5 * m[idx] * c
        out[key] = new
    return f._like(out)


@lru_cache(maxsize=4096)
def _vandermonde_in_derivatives(consts: tuple, k: int, n_phi: int) -> tuple:
    """Expand prod_{j<l}(X_j - X_l) where X_j = const_j + coef_j * D_{g(j)}.

    Returns a tuple of (multi-index in D_1..D_k, coefficient).
    """
    n_psi = len(consts) - n_phi - 2 * k
    forms = []  # (const, g or None, coef)
    for j in range(len(consts)):
        if j < n_phi:
            forms.append((consts[j], None, 0.0))
        elif j < n_phi + k:
            forms.append((consts[j], j - n_phi, 0.5))
        elif j < n_phi + k + n_psi:
            forms.append((consts[j], None, 0.0))
        else:
            forms.append((consts[j], j - n_phi - k - n_psi, -0.5))
    poly = {(0,) * k: 1.0 + 0j}
    for j in range(len(forms)):
        for l in range(j + 1, len(forms)):
            c0 = forms[j][0] - forms[l][0]
            lin = defaultdict(float)
            if forms[j][1] is not None:
                lin[forms[j][1]] += forms[j][2]
            if forms[l][1] is not None:
                lin[forms[l][1]] -= forms[l][2]
            new: dict = defaultdict(complex)
            for e, c in poly.items():
                if c0 != 0:
                    new[e] += c * c0
                for g, cf in lin.items():
                    if cf != 0:
                        e2 = list(e)
                        e2[g] += 1
                        new[tuple(e2)] += c * cf
            poly = {e: c for e, c in new.items() if c != 0}
    return tuple(sorted(poly.items()))


def vandermonde_symbol(f: ExpPoly, key: Key) -> tuple:
    """The operator Delta(X) on the term ``key`` as a polynomial in the D_g."""
    a, b, m, _, _ = key
    consts = (
        tuple(float(x) for x in a)
        + tuple(0.5 * x for x in m)
        + tuple(float(x) for x in b)
        + tuple(0.5 * x for x in m)
    )
    return _vandermonde_in_derivatives(consts, f.k, f.n_phi)


def apply_vandermonde_op(f: ExpPoly, shape: GroupShape | None = None, k: int | None = None) -> ExpPoly:
    """Apply Delta(X_1, ..., X_n) exactly.

    The angular operators act on a term as multiplication by its phase
    integers, so Delta(X) restricted to one term is a polynomial in the
    t-derivatives D_g, which is expanded once per phase pattern.
    """
    if shape is not None:
        k = f.k if k is None else k
        if f.dims != (shape.p - k, shape.q - k, k):
            raise ShapeError("ExpPoly chart does not match the shape")
    out: dict = {}
    for key, poly in f.terms.items():
        _, _, _, w, l = key
        sym = vandermonde_symbol(f, key)
        # cache D^alpha poly via successive single derivatives
        cache = {(0,) * f.k: dict(poly)}

        def deriv(alpha):
            if alpha in cache:
                return cache[alpha]
            g = next(i for i, x in enumerate(alpha) if x > 0)
            lower = list(alpha)
            lower[g] -= 1
            res = _poly_dt(deriv(tuple(lower)), g, w[g], l[g])
            cache[alpha] = res
            return res

        tgt = out.setdefault(key, {})
        for alpha, coef in sym:
            for e, c in deriv(alpha).items():
                tgt[e] = tgt.get(e, 0) + coef * c
    return f._like(out)


# -- one-dimensional moments --------------------------------------------------

ODD_KERNELS = frozenset({"coth_half", "tanh_half", "coth", "csch", "chain"})
SINGULAR_KERNELS = frozenset({"coth_half", "coth", "csch"})


def _kernel_fn(kind: str, rate: float):
    if kind == "coth_half":
        return lambda t: 1.0 / np.tanh(t / 2.0)
    if kind == "tanh_half":
        return lambda t: np.tanh(t / 2.0)
    if kind == "coth":
        return lambda t: 1.0 / np.tanh(t)
    if kind == "csch":
        return lambda t: 1.0 / np.sinh(t)
    if kind == "chain":
        return lambda t: np.exp(-rate * t)
    raise ValueError(f"unknown kernel {kind!r}")


def _gauss_plain(e: int, w: float, lam: complex) -> complex:
    """int_R t^e exp(-w t^2 + lam t) dt for w > 0, via the moment recurrence."""
    g_prev = 0j
    g = math.sqrt(math.pi / w) * np.exp(lam * lam / (4.0 * w))
    for j in range(1, e + 1):
        g_prev, g = g, (lam * g + (j - 1) * g_prev) / (2.0 * w)
    return complex(g)


@lru_cache(maxsize=200_000)
def _half_line(e: int, w: float, kind: str, rate: float) -> tuple:
    """int_0^inf t^e exp(-w t^2) K(t) dt for an odd kernel K, with error."""
    if w <= 0:
        raise PreconditionError("odd-kernel moments need a Gaussian factor (width > 0)")
    kern = _kernel_fn(kind, rate)
    # tail beyond T is below exp(-w T^2) * T^e * |K| ~ 1e-17
    upper = math.sqrt((40.0 + e * max(1.0, math.log1p(e))) / w) + 1.0

    def integrand(t):
        if t == 0.0:
            if kind == "coth_half" and e == 1:
                return 2.0
            if kind in ("coth", "csch") and e == 1:
                return 1.0
            if kind == "chain" and e == 0:
                return 1.0
            return 0.0
        return t**e * math.exp(-w * t * t) * kern(t)

    points = None
    if kind == "chain" and rate > 0:
        points = [min(upper / 2, 1.0 / rate)]
    val, err = integrate.quad(
        integrand, 0.0, upper, epsabs=1e-15, epsrel=1e-13, limit=400, points=points
    )
    if not np.isfinite(val):
        raise QuadratureError(f"moment e={e}, w={w}, kernel={kind} diverged")
    return val, err


def moment(e: int, w: float, lam: complex = 0j, kernel: str = "plain", rate: float = 0.0) -> tuple:
    """int_R t^e exp(-w t^2 + lam t) K(t) dt and an error estimate.

    ``kernel`` is 'plain' (K = 1), one of the odd kernels coth_half,
    tanh_half, coth, csch, or 'chain' meaning sgn(t) exp(-rate |t|).
    For odd kernels the integral is the symmetric principal value, which
    vanishes for even ``e``; ``lam`` must then be 0.
    """
    if kernel == "plain":
        if w <= 0:
            raise PreconditionError("plain moments need a Gaussian factor (width > 0)")
        if lam == 0:
            if e % 2:
                return 0j, 0.0
            return complex(math.gamma((e + 1) / 2) / w ** ((e + 1) / 2)), 0.0
        val = _gauss_plain(e, w, lam)
        return val, 1e-15 * max(1.0, abs(val))
    if kernel not in ODD_KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}")
    if lam != 0:
        raise PreconditionError("odd-kernel moments require lam = 0")
    if e % 2 == 0:
        return 0j, 0.0
    val, err = _half_line(int(e), float(w), kernel, float(rate))
    return complex(2.0 * val), 2.0 * err


def integrate_t(
    f: ExpPoly,
    weights: Sequence,
    oddness_tol: float = 1e-9,
) -> tuple:
    """Integrate the t-dependence of every term against per-coordinate weights.

    ``weights[g]`` is 'plain', an odd kernel name, or ('chain', rate). The
    angle dependence is left untouched: the result is a dict
    ``{(a, b, m): value}`` together with an accumulated error estimate.
    Singular kernels require ``f`` to be odd in that coordinate; otherwise a
    PreconditionError is raised.
    """
    if len(weights) != f.k:
        raise ShapeError("need one weight per hyperbolic coordinate")
    specs = []
    for g, wt in enumerate(weights):
        if isinstance(wt, tuple):
            specs.append((wt[0], float(wt[1])))
        else:
            specs.append((wt, 0.0))
        if specs[-1][0] in SINGULAR_KERNELS:
            even = f.parity_part(g, odd=False)
            scale = max(f.max_abs_coeff(), 1e-300)
            if even.max_abs_coeff() > oddness_tol * scale:
                raise PreconditionError(
                    f"integrand is not odd in t_{g + 1} "
                    f"(even part {even.max_abs_coeff():.3e}); singular kernel {specs[-1][0]} "
                    "needs odd test functions"
                )
    out: dict = defaultdict(complex)
    err = 0.0
    for (a, b, m, w, l), poly in f.terms.items():
        for e, c in poly.items():
            val = c
            tot_err = 0.0
            for g in range(f.k):
                mv, me = moment(e[g], w[g], l[g], specs[g][0], specs[g][1])
                tot_err = tot_err * abs(mv) + abs(val) * me
                val = val * mv
                if val == 0:
                    break
            out[(a, b, m)] += val
            err += tot_err
    return dict(out), err
