"""Shape data, Cartan subgroups H_k and their Weyl groups for U(p, q).

A point of H_k is stored in the coordinates (phi, psi, t, theta) with
``len(phi) == p - k``, ``len(psi) == q - k`` and ``len(t) == len(theta) == k``.
Its eigenvalues are listed in one fixed order, used by every sign-sensitive
routine in the package::

    e^{i phi_1}, ..., e^{i phi_{p-k}}, e^{z_1}, ..., e^{z_k},
    e^{i psi_1}, ..., e^{i psi_{q-k}}, e^{-conj(z_1)}, ..., e^{-conj(z_k)}

where ``z_j = t_j + i theta_j``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "ShapeError",
    "GroupShape",
    "CartanPoint",
    "WeylElement",
    "reduce_angle",
    "eigenvalues",
    "vandermonde",
    "vandermonde_at",
    "weyl_order",
    "weyl_weight",
    "weyl_act",
    "weyl_generators",
    "iter_weyl_group",
    "random_point",
    "hk_matrix",
    "SymmetryReport",
    "symmetry_type",
]


class ShapeError(ValueError):
    """Raised when dimensions of inputs do not match the group shape."""


def reduce_angle(x: float) -> float:
    """Representative of ``x`` modulo 2*pi in [-pi, pi)."""
    y = math.fmod(x + math.pi, 2.0 * math.pi)
    if y < 0.0:
        y += 2.0 * math.pi
    y -= math.pi
    # fmod rounding can land exactly on +pi
    if y >= math.pi:
        y -= 2.0 * math.pi
    return y


@dataclass(frozen=True)
class GroupShape:
    p: int
    q: int

    def __post_init__(self):
        if int(self.p) != self.p or int(self.q) != self.q:
            raise ShapeError("p and q must be integers")
        if not (self.p >= self.q >= 1):
            raise ShapeError(f"need p >= q >= 1, got p={self.p}, q={self.q}")

    @property
    def n(self) -> int:
        return self.p + self.q

    def check_k(self, k: int) -> None:
        if not (0 <= k <= self.q):
            raise ShapeError(f"k={k} outside [0, {self.q}]")


def _angles(xs: Iterable[float]) -> tuple:
    return tuple(reduce_angle(float(x)) for x in xs)


@dataclass(frozen=True)
class CartanPoint:
    """Point of H_k. Angles are reduced to [-pi, pi) on construction."""

    k: int
    phi: tuple = ()
    psi: tuple = ()
    t: tuple = ()
    theta: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "phi", _angles(self.phi))
        object.__setattr__(self, "psi", _angles(self.psi))
        object.__setattr__(self, "theta", _angles(self.theta))
        object.__setattr__(self, "t", tuple(float(x) for x in self.t))
        if len(self.t) != self.k or len(self.theta) != self.k:
            raise ShapeError(
                f"t and theta must have length k={self.k}, "
                f"got {len(self.t)} and {len(self.theta)}"
            )

    def check(self, shape: GroupShape) -> None:
        shape.check_k(self.k)
        if len(self.phi) != shape.p - self.k or len(self.psi) != shape.q - self.k:
            raise ShapeError(
                f"point with |phi|={len(self.phi)}, |psi|={len(self.psi)} "
                f"does not fit H_{self.k} of U({shape.p},{shape.q})"
            )

    @property
    def z(self) -> tuple:
        return tuple(complex(a, b) for a, b in zip(self.t, self.theta))

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "phi": list(self.phi),
            "psi": list(self.psi),
            "t": list(self.t),
            "theta": list(self.theta),
        }

    @classmethod
    def from_json(cls, data: dict) -> "CartanPoint":
        return cls(
            k=int(data["k"]),
            phi=data.get("phi", ()),
            psi=data.get("psi", ()),
            t=data.get("t", ()),
            theta=data.get("theta", ()),
        )


def eigenvalues(shape: GroupShape, h: CartanPoint) -> list:
    """Eigenvalues of ``h`` in the fixed order described in the module docstring."""
    h.check(shape)
    z = h.z
    out = [complex(math.cos(a), math.sin(a)) for a in h.phi]
    out += [np.exp(zz) for zz in z]
    out += [complex(math.cos(b), math.sin(b)) for b in h.psi]
    out += [np.exp(-zz.conjugate()) for zz in z]
    return [complex(v) for v in out]


def vandermonde(values: Sequence):
    """prod_{j<l} (y_j - y_l); the empty product is 1.

    Works for any ring elements supporting ``-`` and ``*`` (ints, Fractions,
    complex numbers).
    """
    out = 1
    vals = list(values)
    for j in range(len(vals)):
        for l in range(j + 1, len(vals)):
            out = out * (vals[j] - vals[l])
    return out


def vandermonde_at(shape: GroupShape, h: CartanPoint) -> complex:
    return complex(vandermonde(eigenvalues(shape, h)))


def weyl_order(shape: GroupShape, k: int) -> int:
    shape.check_k(k)
    p, q = shape.p, shape.q
    return math.factorial(p - k) * math.factorial(q - k) * math.factorial(k) * 2**k


def weyl_weight(shape: GroupShape, k: int) -> Fraction:
    """Exact reciprocal of the Weyl group order."""
    return Fraction(1, weyl_order(shape, k))


def _is_perm(perm: Sequence[int], size: int) -> bool:
    return sorted(perm) == list(range(size))


@dataclass(frozen=True)
class WeylElement:
    """Element of S_{p-k} x S_{q-k} x (S_k x| Z_2^k).

    Permutations are 0-based tuples. Acting on a point, the new coordinate
    ``i`` of a block is the old coordinate ``perm[i]``; afterwards every
    hyperbolic slot listed in ``reflections`` has its ``t`` negated.
    """

    perm_phi: tuple
    perm_psi: tuple
    perm_z: tuple
    reflections: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "perm_phi", tuple(self.perm_phi))
        object.__setattr__(self, "perm_psi", tuple(self.perm_psi))
        object.__setattr__(self, "perm_z", tuple(self.perm_z))
        object.__setattr__(self, "reflections", frozenset(self.reflections))
        for name in ("perm_phi", "perm_psi", "perm_z"):
            perm = getattr(self, name)
            if not _is_perm(perm, len(perm)):
                raise ShapeError(f"{name}={perm} is not a permutation")
        if any(not (0 <= i < len(self.perm_z)) for i in self.reflections):
            raise ShapeError("reflection index out of range")

    @classmethod
    def identity(cls, shape: GroupShape, k: int) -> "WeylElement":
        return cls(
            tuple(range(shape.p - k)), tuple(range(shape.q - k)), tuple(range(k))
        )

    def inverse(self) -> "WeylElement":
        def inv(perm):
            out = [0] * len(perm)
            for i, j in enumerate(perm):
                out[j] = i
            return tuple(out)

        # t'_i = e_i t_{pi(i)}  =>  t_j = e_{pi^-1(j)} t'_{pi^-1(j)}
        refl = frozenset(self.perm_z[i] for i in self.reflections)
        return WeylElement(inv(self.perm_phi), inv(self.perm_psi), inv(self.perm_z), refl)

    def compose(self, other: "WeylElement") -> "WeylElement":
        """``self.compose(other)`` acts as ``other`` first, then ``self``."""

        def comp(a, b):
            return tuple(b[a[i]] for i in range(len(a)))

        # (self o other).t_i = e_i * (other.t)_{pi(i)} = e_i e'_{pi(i)} t_{pi'(pi(i))}
        refl = set()
        for i in range(len(self.perm_z)):
            flips = (i in self.reflections) ^ (self.perm_z[i] in other.reflections)
            if flips:
                refl.add(i)
        return WeylElement(
            comp(self.perm_phi, other.perm_phi),
            comp(self.perm_psi, other.perm_psi),
            comp(self.perm_z, other.perm_z),
            frozenset(refl),
        )

    def parity_phi_psi(self) -> int:
        """Sign of the S_{p-k} x S_{q-k} component."""
        return _perm_sign(self.perm_phi) * _perm_sign(self.perm_psi)


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


def weyl_act(w: WeylElement, h: CartanPoint) -> CartanPoint:
    if (
        len(w.perm_phi) != len(h.phi)
        or len(w.perm_psi) != len(h.psi)
        or len(w.perm_z) != h.k
    ):
        raise ShapeError("Weyl element and point have different dimensions")
    t = [h.t[j] for j in w.perm_z]
    for i in w.reflections:
        t[i] = -t[i]
    return CartanPoint(
        k=h.k,
        phi=[h.phi[j] for j in w.perm_phi],
        psi=[h.psi[j] for j in w.perm_psi],
        t=t,
        theta=[h.theta[j] for j in w.perm_z],
    )


def _transpositions(size: int):
    for i in range(size - 1):
        perm = list(range(size))
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
        yield tuple(perm)


def weyl_generators(shape: GroupShape, k: int) -> dict:
    """Generators of W_k grouped by factor: 'phi', 'psi', 'z' and 'reflection'."""
    shape.check_k(k)
    ident = WeylElement.identity(shape, k)
    out = {"phi": [], "psi": [], "z": [], "reflection": []}
    for perm in _transpositions(shape.p - k):
        out["phi"].append(WeylElement(perm, ident.perm_psi, ident.perm_z))
    for perm in _transpositions(shape.q - k):
        out["psi"].append(WeylElement(ident.perm_phi, perm, ident.perm_z))
    for perm in _transpositions(k):
        out["z"].append(WeylElement(ident.perm_phi, ident.perm_psi, perm))
    for g in range(k):
        out["reflection"].append(
            WeylElement(ident.perm_phi, ident.perm_psi, ident.perm_z, frozenset([g]))
        )
    return out


def iter_weyl_group(shape: GroupShape, k: int):
    """All elements of W_k (small shapes only)."""
    shape.check_k(k)
    p, q = shape.p, shape.q
    for a in itertools.permutations(range(p - k)):
        for b in itertools.permutations(range(q - k)):
            for c in itertools.permutations(range(k)):
                for bits in itertools.product((False, True), repeat=k):
                    refl = frozenset(i for i, on in enumerate(bits) if on)
                    yield WeylElement(a, b, c, refl)


def random_point(
    shape: GroupShape,
    k: int,
    rng: np.random.Generator,
    t_scale: float = 1.5,
    avoid_singular: bool = True,
    margin: float = 1e-2,
) -> CartanPoint:
    """Uniform angles and normal ``t``; optionally stays off the loci
    t_j = 0 and phi_a = psi_b (and away from coincident angles)."""
    shape.check_k(k)
    while True:
        h = CartanPoint(
            k=k,
            phi=rng.uniform(-math.pi, math.pi, shape.p - k),
            psi=rng.uniform(-math.pi, math.pi, shape.q - k),
            t=rng.normal(0.0, t_scale, k),
            theta=rng.uniform(-math.pi, math.pi, k),
        )
        if not avoid_singular:
            return h
        angles = list(h.phi) + list(h.psi)
        ok = all(abs(x) > margin for x in h.t)
        for i in range(len(angles)):
            for j in range(i + 1, len(angles)):
                d = abs(reduce_angle(angles[i] - angles[j]))
                ok = ok and d > margin
        if ok:
            return h


def hk_matrix(shape: GroupShape, h: CartanPoint) -> np.ndarray:
    """Explicit n x n matrix of h in the block layout H_k^+ . H_k^-.

    Debug helper used to cross-check :func:`eigenvalues`.
    """
    h.check(shape)
    p, q, k = shape.p, shape.q, h.k
    n = p + q
    plus = np.eye(n, dtype=complex)
    diag = np.ones(n, dtype=complex)
    for a in range(p - k):
        diag[a] = np.exp(1j * h.phi[a])
    for b in range(q - k):
        diag[n - 1 - b] = np.exp(1j * h.psi[b])
    for g in range(1, k + 1):
        i, j = p - g, p + g - 1
        plus[i, i] = plus[j, j] = math.cosh(h.t[g - 1])
        plus[i, j] = plus[j, i] = math.sinh(h.t[g - 1])
        diag[i] = diag[j] = np.exp(1j * h.theta[g - 1])
    return plus @ np.diag(diag)


@dataclass
class SymmetryReport:
    epsilon_symmetric: bool
    epsilon_skew_symmetric: bool
    symmetric_violation: float
    skew_violation: float
    scale: float
    samples: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def symmetry_type(
    shape: GroupShape,
    k: int,
    f: Callable[[CartanPoint], complex],
    samples: int = 20,
    rng: np.random.Generator | None = None,
    tol: float = 1e-10,
    points: Iterable[CartanPoint] | None = None,
) -> SymmetryReport:
    """Classify ``f`` as epsilon_k-symmetric and/or epsilon_k-skew-symmetric.

    epsilon_k-symmetric: invariant under S_{p-k}, S_{q-k}, S_k and odd under
    every reflection R_j. epsilon_k-skew-symmetric: odd under transpositions
    of S_{p-k} x S_{q-k}, invariant under S_k and every R_j. Both are checked
    on the Weyl generators at sample points; violations are absolute.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    gens = weyl_generators(shape, k)
    if points is None:
        points = [random_point(shape, k, rng) for _ in range(samples)]
    points = list(points)
    sym_viol = 0.0
    skew_viol = 0.0
    scale = 0.0
    # expected factor (symmetric, skew) per generator family
    factors = {"phi": (1, -1), "psi": (1, -1), "z": (1, 1), "reflection": (-1, 1)}
    for h in points:
        base = complex(f(h))
        scale = max(scale, abs(base))
        for family, elems in gens.items():
            fs, fk = factors[family]
            for w in elems:
                val = complex(f(weyl_act(w, h)))
                sym_viol = max(sym_viol, abs(val - fs * base))
                skew_viol = max(skew_viol, abs(val - fk * base))
    return SymmetryReport(
        epsilon_symmetric=sym_viol <= tol,
        epsilon_skew_symmetric=skew_viol <= tol,
        symmetric_violation=sym_viol,
        skew_violation=skew_viol,
        scale=scale,
        samples=len(points),
    )
