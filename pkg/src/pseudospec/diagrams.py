"""Sign-carrying diagrams matching signature entries to Cartan coordinates.

Indices inside pieces are 1-based, matching the usual way of writing
c_1, ..., c_{n-2r}, d_1, ..., d_r and phi_1, ..., z_k.

Signature slots are numbered ``c_1, ..., c_{n-2r}, d_1, conj(d_1), ...,
d_r, conj(d_r)``; coordinate slots are numbered ``phi_1, ..., phi_{p-k},
psi_1, ..., psi_{q-k}, z_1, -conj(z_1), ..., z_k, -conj(z_k)``. A diagram
is a bijection between the two and its sign is the parity of that bijection.

Three families are enumerated:

* ``omega``  for a fixed split A|B of the c-indices,
* ``tilde``  where any c may go to any phi/psi and a Chain may join any two c's,
* ``circ``   where the d-entries are dropped and r z-pairs stay bare.

All enumerations are generators in a fixed lexicographic order: first the
cycle (or bare) assignment, then the chain contents, then the arcs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence, Union

from .cartan import GroupShape, ShapeError

__all__ = [
    "Signature",
    "ArcA",
    "ArcB",
    "Chain",
    "Cycle",
    "BareZ",
    "Diagram",
    "enumerate_split_diagrams",
    "enumerate_merged_diagrams",
    "enumerate_bare_diagrams",
    "iter_split_diagrams",
    "iter_merged_diagrams",
    "iter_bare_diagrams",
    "iter_splits",
    "diagram_sign",
    "slot_map",
    "permutation_sign",
    "merged_count",
    "split_count",
    "bare_count",
]


@dataclass(frozen=True)
class Signature:
    """Discrete and continuous spectral parameters (A; c, m, rho).

    ``A`` is a sorted tuple of 1-based indices into ``c``; ``B`` is its
    complement. ``strict=True`` enforces strictly decreasing ``c`` and
    ``rho``; the relaxed variant accepts arbitrary integers and reals.
    """

    shape: GroupShape
    r: int
    A: tuple = ()
    c: tuple = ()
    m: tuple = ()
    rho: tuple = ()
    strict: bool = False

    def __post_init__(self):
        p, q = self.shape.p, self.shape.q
        object.__setattr__(self, "A", tuple(sorted(int(a) for a in self.A)))
        object.__setattr__(self, "c", tuple(int(x) for x in self.c))
        object.__setattr__(self, "m", tuple(int(x) for x in self.m))
        object.__setattr__(self, "rho", tuple(float(x) for x in self.rho))
        if not (0 <= self.r <= q):
            raise ShapeError(f"r={self.r} outside [0, {q}]")
        size = self.shape.n - 2 * self.r
        if self.A and (
            len(self.A) != p - self.r
            or len(set(self.A)) != len(self.A)
            or not all(1 <= a <= size for a in self.A)
        ):
            raise ShapeError(f"A={self.A} must be a {p - self.r}-subset of 1..{size}")
        if self.c and len(self.c) != size:
            raise ShapeError(f"c must have {size} entries, got {len(self.c)}")
        if self.m and len(self.m) != self.r:
            raise ShapeError(f"m must have {self.r} entries")
        if self.rho and len(self.rho) != self.r:
            raise ShapeError(f"rho must have {self.r} entries")
        if self.strict:
            if any(x <= y for x, y in zip(self.c, self.c[1:])):
                raise ShapeError("strict signature needs c strictly decreasing")
            if any(x <= y for x, y in zip(self.rho, self.rho[1:])) or any(
                x <= 0 for x in self.rho
            ):
                raise ShapeError("strict signature needs rho positive, strictly decreasing")

    @property
    def size(self) -> int:
        """Number of c-entries, n - 2r."""
        return self.shape.n - 2 * self.r

    @property
    def B(self) -> tuple:
        if not self.A and self.shape.p - self.r > 0:
            raise ShapeError("signature has no A split")
        return tuple(j for j in range(1, self.size + 1) if j not in self.A)

    @property
    def d(self) -> tuple:
        return tuple(0.5 * (mm + 1j * rr) for mm, rr in zip(self.m, self.rho))

    def with_A(self, A: Sequence[int]) -> "Signature":
        return Signature(self.shape, self.r, tuple(A), self.c, self.m, self.rho, self.strict)


# -- pieces -----------------------------------------------------------------


@dataclass(frozen=True, order=True)
class ArcA:
    """c_j joined to phi_alpha."""

    c: int
    phi: int


@dataclass(frozen=True, order=True)
class ArcB:
    """c_j joined to psi_beta."""

    c: int
    psi: int


@dataclass(frozen=True, order=True)
class Chain:
    """c_left -- z_gamma -- (-conj z_gamma) -- c_right."""

    left: int
    z: int
    right: int


@dataclass(frozen=True, order=True)
class Cycle:
    """d_s -- z_gamma -- (-conj z_gamma) -- conj(d_s)."""

    d: int
    z: int


@dataclass(frozen=True, order=True)
class BareZ:
    """An unattached z_gamma -- (-conj z_gamma) pair."""

    z: int


Piece = Union[ArcA, ArcB, Chain, Cycle, BareZ]

_PIECE_ORDER = {ArcA: 0, ArcB: 1, Chain: 2, Cycle: 3, BareZ: 4}
_PIECE_NAMES = {ArcA: "ArcA", ArcB: "ArcB", Chain: "Chain", Cycle: "Cycle", BareZ: "BareZ"}


@dataclass(frozen=True)
class Diagram:
    pieces: tuple
    sign: int

    def of_type(self, kind) -> list:
        return [pc for pc in self.pieces if isinstance(pc, kind)]

    def key(self) -> tuple:
        """Canonical, order-independent identity of the piece set."""
        return tuple(
            sorted(
                (_PIECE_ORDER[type(pc)], tuple(pc.__dict__.values())) for pc in self.pieces
            )
        )

    def to_json(self) -> dict:
        return {
            "pieces": [
                {"type": _PIECE_NAMES[type(pc)], **pc.__dict__} for pc in self.pieces
            ],
            "sign": self.sign,
        }


# -- slot bookkeeping ---------------------------------------------------------


def slot_map(shape: GroupShape, r: int, k: int, pieces: Sequence[Piece]) -> list:
    """0-based map ``signature slot -> coordinate slot`` induced by the pieces.

    Raises ShapeError if the pieces do not form a bijection.
    """
    p, q, n = shape.p, shape.q, shape.n
    size = n - 2 * r
    n_phi, n_psi = p - k, q - k

    def z_slot(g, right):
        return n_phi + n_psi + 2 * (g - 1) + (1 if right else 0)

    out = [None] * n
    for pc in pieces:
        if isinstance(pc, ArcA):
            if not (1 <= pc.phi <= n_phi):
                raise ShapeError(f"bad phi index in {pc}")
            pairs = [(pc.c - 1, pc.phi - 1)]
        elif isinstance(pc, ArcB):
            if not (1 <= pc.psi <= n_psi):
                raise ShapeError(f"bad psi index in {pc}")
            pairs = [(pc.c - 1, n_phi + pc.psi - 1)]
        elif isinstance(pc, Chain):
            pairs = [(pc.left - 1, z_slot(pc.z, False)), (pc.right - 1, z_slot(pc.z, True))]
        elif isinstance(pc, Cycle):
            base = size + 2 * (pc.d - 1)
            pairs = [(base, z_slot(pc.z, False)), (base + 1, z_slot(pc.z, True))]
        else:
            raise ShapeError(f"{pc} does not define a slot map")
        for src, dst in pairs:
            if not (0 <= src < n) or out[src] is not None:
                raise ShapeError(f"signature slot {src + 1} covered twice or out of range")
            out[src] = dst
    if any(v is None for v in out) or sorted(out) != list(range(n)):
        raise ShapeError("pieces do not define a bijection of slots")
    return out


def permutation_sign(perm: Sequence[int]) -> int:
    """Parity via inversion count."""
    inv = 0
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                inv += 1
    return -1 if inv % 2 else 1


def diagram_sign(d: Diagram | Sequence[Piece], shape: GroupShape, r: int, k: int) -> int:
    pieces = d.pieces if isinstance(d, Diagram) else d
    return permutation_sign(slot_map(shape, r, k, pieces))


# -- enumeration ----------------------------------------------------------------


def _check_rk(shape: GroupShape, r: int, k: int) -> bool:
    """True if the family is non-empty; raises on out-of-range values."""
    shape.check_k(k)
    if not (0 <= r <= shape.q):
        raise ShapeError(f"r={r} outside [0, {shape.q}]")
    return k >= r


def _arcs(rest_a, rest_b):
    for pa in itertools.permutations(rest_a):
        for pb in itertools.permutations(rest_b):
            yield [ArcA(c, i + 1) for i, c in enumerate(pa)] + [
                ArcB(c, i + 1) for i, c in enumerate(pb)
            ]


def iter_split_diagrams(sig: Signature, k: int) -> Iterator[Diagram]:
    """Diagrams of the fixed-split family for ``sig.A``."""
    shape, r = sig.shape, sig.r
    if not _check_rk(shape, r, k):
        return
    A, B = list(sig.A), list(sig.B)
    for cyc in itertools.permutations(range(1, k + 1), r):
        cycles = [Cycle(s + 1, g) for s, g in enumerate(cyc)]
        free = [g for g in range(1, k + 1) if g not in cyc]
        for left in itertools.permutations(A, k - r):
            rest_a = [a for a in A if a not in left]
            for right in itertools.permutations(B, k - r):
                rest_b = [b for b in B if b not in right]
                chains = [Chain(a, g, b) for a, g, b in zip(left, free, right)]
                for arcs in _arcs(rest_a, rest_b):
                    pieces = tuple(arcs + chains + cycles)
                    yield Diagram(pieces, diagram_sign(pieces, shape, r, k))


def iter_merged_diagrams(shape: GroupShape, r: int, k: int) -> Iterator[Diagram]:
    """Merged-alphabet diagrams: c's fill chain ends and angle slots freely."""
    if not _check_rk(shape, r, k):
        return
    size = shape.n - 2 * r
    nch = k - r
    n_phi = shape.p - k
    for cyc in itertools.permutations(range(1, k + 1), r):
        cycles = [Cycle(s + 1, g) for s, g in enumerate(cyc)]
        free = [g for g in range(1, k + 1) if g not in cyc]
        for perm in itertools.permutations(range(1, size + 1)):
            left, right = perm[:nch], perm[nch : 2 * nch]
            rest = perm[2 * nch :]
            chains = [Chain(a, g, b) for a, g, b in zip(left, free, right)]
            arcs = [ArcA(c, i + 1) for i, c in enumerate(rest[:n_phi])]
            arcs += [ArcB(c, i + 1) for i, c in enumerate(rest[n_phi:])]
            pieces = tuple(arcs + chains + cycles)
            yield Diagram(pieces, diagram_sign(pieces, shape, r, k))


def iter_bare_diagrams(sig: Signature, k: int) -> Iterator[Diagram]:
    """Diagrams with r bare z-pairs in place of cycles; sign stored as +1."""
    shape, r = sig.shape, sig.r
    if not _check_rk(shape, r, k):
        return
    A, B = list(sig.A), list(sig.B)
    for bare in itertools.combinations(range(1, k + 1), r):
        bares = [BareZ(g) for g in bare]
        free = [g for g in range(1, k + 1) if g not in bare]
        for left in itertools.permutations(A, k - r):
            rest_a = [a for a in A if a not in left]
            for right in itertools.permutations(B, k - r):
                rest_b = [b for b in B if b not in right]
                chains = [Chain(a, g, b) for a, g, b in zip(left, free, right)]
                for arcs in _arcs(rest_a, rest_b):
                    yield Diagram(tuple(arcs + chains + bares), 1)


def enumerate_split_diagrams(sig: Signature, k: int) -> list:
    return list(iter_split_diagrams(sig, k))


def enumerate_merged_diagrams(shape: GroupShape, r: int, k: int) -> list:
    return list(iter_merged_diagrams(shape, r, k))


def enumerate_bare_diagrams(sig: Signature, k: int) -> list:
    return list(iter_bare_diagrams(sig, k))


def iter_splits(shape: GroupShape, r: int) -> Iterator[tuple]:
    """All admissible A (sorted (p-r)-subsets of 1..n-2r)."""
    size = shape.n - 2 * r
    yield from itertools.combinations(range(1, size + 1), shape.p - r)


def merged_count(shape: GroupShape, r: int, k: int) -> int:
    if k < r:
        return 0
    return math.factorial(k) * math.factorial(shape.n - 2 * r) // math.factorial(k - r)


def split_count(shape: GroupShape, r: int, k: int) -> int:
    """Size of each fixed-split family (independent of A)."""
    if k < r:
        return 0
    return (
        math.factorial(k)
        // math.factorial(k - r)
        * math.factorial(shape.p - r)
        * math.factorial(shape.q - r)
    )


def bare_count(shape: GroupShape, r: int, k: int) -> int:
    if k < r:
        return 0
    return math.comb(k, r) * math.factorial(shape.p - r) * math.factorial(shape.q - r)
