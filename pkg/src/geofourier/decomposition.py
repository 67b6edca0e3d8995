"""Commuting / anticommuting parts of multivectors.

``A_{c0(B)} = (A + B^-1 A B) / 2`` is the part of ``A`` commuting with an
invertible ``B``; ``A_{c1(B)}`` is the anticommuting rest.  Chaining the
split over a list of references yields ``A_{c^j(B_1..B_d)}`` for a bit
vector ``j``.  Against basis blades the split is a pure coefficient mask,
which is what makes exponentials of basis-blade phases fall apart into
four simple shapes.

The functions ending in ``_arrays`` work on coefficient batches (last axis)
and are what the transforms use; the rest is the ``Multivector`` API.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .algebra import (
    CliffordError,
    Multivector,
    NotImaginary,
    ScaledBasisBlade,
    Signature,
    blade_inverse,
    blade_inverse_arrays,
    exp_imaginary,
    geometric_product_arrays,
    is_imaginary_index,
    popcount,
)

MAX_REFS = 8
MAX_TRIANGULAR = 6

Bits = tuple[int, ...]


class FlagViolation(CliffordError):
    """A phase family lacks a property (linearity, separability, ...) an identity needs."""


def all_bits(d: int) -> Iterator[Bits]:
    """Every ``j`` in ``{0,1}^d`` in lexicographic order."""
    return itertools.product((0, 1), repeat=d)


def add_bits(a: Sequence[int], b: Sequence[int]) -> Bits:
    return tuple((x + y) & 1 for x, y in zip(a, b, strict=True))


# -- single-reference split -------------------------------------------------

def c_split(a: Multivector, b: Multivector) -> tuple[Multivector, Multivector]:
    """``(A_{c0(B)}, A_{c1(B)})`` for an invertible blade ``B``."""
    conj = blade_inverse(b) * a * b
    return (a + conj) * 0.5, (a - conj) * 0.5


def c_chain(a: Multivector, blades: Sequence[Multivector], j: Sequence[int],
            direction: str = "ltr") -> Multivector:
    """Apply ``c^{j_1}(B_1)``, ..., ``c^{j_d}(B_d)`` in turn.

    ``direction='ltr'`` splits against ``B_1`` first, ``'rtl'`` against
    ``B_d`` first.  Both agree when the blades are mutually coorthogonal.
    """
    if len(blades) != len(j):
        raise ValueError("need one bit per reference blade")
    if direction not in ("ltr", "rtl"):
        raise ValueError(f"unknown direction {direction!r}")
    pairs = list(zip(blades, j))
    if direction == "rtl":
        pairs.reverse()
    for b, bit in pairs:
        a = c_split(a, b)[bit]
    return a


def commutation_parity(j: int, k: int) -> int:
    """0 if ``e_j`` and ``e_k`` commute, 1 if they anticommute."""
    return (popcount(j) * popcount(k) - popcount(j & k)) & 1


def c_index_set(refs: Sequence[int], l: Sequence[int], sig: Signature) -> frozenset[int]:
    """Basis-blade indices ``j`` whose parity against ``refs[v]`` is ``l[v]`` for all ``v``."""
    return frozenset(int(i) for i in np.flatnonzero(c_mask(refs, l, sig)))


def c_mask(refs: Sequence[int], l: Sequence[int], sig: Signature) -> np.ndarray:
    if len(refs) != len(l):
        raise ValueError("need one bit per reference blade")
    if len(refs) > MAX_REFS:
        raise ValueError(f"at most {MAX_REFS} reference blades")
    idx = np.arange(sig.dim)
    grade = sig.tables.grade
    mask = np.ones(sig.dim, dtype=bool)
    for r, bit in zip(refs, l):
        both = np.array([popcount(int(i) & r) for i in idx])
        parity = (grade * popcount(r) - both) & 1
        mask &= parity == bit
    return mask


def mask_along_basis(a: Multivector, refs: Sequence[int], l: Sequence[int]) -> Multivector:
    return Multivector(a.sig, np.where(c_mask(refs, l, a.sig), a.coeffs, 0.0))


# -- batched split ----------------------------------------------------------

def single_blade_index(b: np.ndarray) -> int | None:
    """The shared basis-blade index of a batch of scaled basis blades, if any."""
    cols = np.flatnonzero(np.any(np.asarray(b) != 0, axis=tuple(range(np.ndim(b) - 1))))
    if len(cols) == 1:
        return int(cols[0])
    if len(cols) == 0:
        return 0
    return None


def c_split_arrays(sig: Signature, a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched :func:`c_split`; ``b`` broadcasts against ``a``."""
    conj = geometric_product_arrays(
        sig, geometric_product_arrays(sig, blade_inverse_arrays(sig, b), a), b)
    return 0.5 * (a + conj), 0.5 * (a - conj)


def c_chain_arrays(sig: Signature, a: np.ndarray, refs: Sequence[np.ndarray],
                   bits: Sequence[int]) -> np.ndarray:
    """Batched chain split.

    References that are (scaled) basis blades across the whole batch are
    handled by coefficient masking; anything else goes through the
    conjugation formula.
    """
    out = np.asarray(a, dtype=float)
    for ref, bit in zip(refs, bits, strict=True):
        idx = single_blade_index(ref)
        if idx is not None:
            out = np.where(c_mask([idx], [bit], sig), out, 0.0)
        else:
            out = c_split_arrays(sig, out, ref)[bit]
    return out


# -- exponential shapes -----------------------------------------------------

class ShapeKind(enum.Enum):
    FULL = "full"
    COSINE = "cosine"
    SINE = "sine"
    ZERO = "zero"


@dataclass(frozen=True)
class ExpShape:
    """One of the four forms a split exponential ``exp(-f)`` can take.

    ``f`` is kept for every kind so that the factor can still be flipped
    and used as a split reference.
    """

    kind: ShapeKind
    f: ScaledBasisBlade

    @classmethod
    def full(cls, f: ScaledBasisBlade) -> "ExpShape":
        return cls(ShapeKind.FULL, f)

    def expand(self, sig: Signature) -> Multivector:
        f = self.f
        if self.kind is ShapeKind.FULL:
            return exp_imaginary(f, sig)
        if self.kind is ShapeKind.COSINE:
            return Multivector.scalar(sig, math.cos(f.magnitude))
        if self.kind is ShapeKind.SINE:
            if f.magnitude == 0:
                return Multivector.zero(sig)
            return Multivector.blade(sig, f.index, -f.sign * math.sin(f.magnitude))
        return Multivector.zero(sig)

    def flipped(self, bit: int = 1) -> "ExpShape":
        """The same shape taken of ``exp(+f)`` (for ``bit == 1``)."""
        return ExpShape(self.kind, self.f.flipped(bit))


def exp_decompose(f: ScaledBasisBlade, refs: Sequence[int], l: Sequence[int],
                  sig: Signature) -> ExpShape:
    """Shape of ``exp(-f)_{c^l(refs)}`` for basis-blade references."""
    if f.magnitude and not is_imaginary_index(f.index, sig):
        raise NotImaginary("phase blade squares to +1")
    matches = all(commutation_parity(f.index, r) == bit for r, bit in zip(refs, l, strict=True))
    if not any(l):
        return ExpShape(ShapeKind.FULL if matches else ShapeKind.COSINE, f)
    return ExpShape(ShapeKind.SINE if matches else ShapeKind.ZERO, f)


def move_through_product(a: Multivector, factors: Sequence[ExpShape],
                         side: str = "left") -> list[tuple[Multivector, list[ExpShape]]]:
    """Commute a product of exponential shapes past ``a``.

    ``side='left'``: ``prod(factors) * a == sum(part * prod(flipped))``.
    ``side='right'``: ``a * prod(factors) == sum(prod(flipped) * part)``.
    Zero parts are dropped.
    """
    sig = a.sig
    refs = [Multivector.blade(sig, g.f.index) for g in factors]
    direction = "rtl" if side == "left" else "ltr"
    if side not in ("left", "right"):
        raise ValueError(f"unknown side {side!r}")
    terms = []
    for j in all_bits(len(factors)):
        part = c_chain(a, refs, j, direction)
        if not np.any(part.coeffs):
            continue
        terms.append((part, [g.flipped(b) for g, b in zip(factors, j)]))
    return terms


def product_of_shapes(shapes: Sequence[ExpShape], sig: Signature) -> Multivector:
    out = Multivector.scalar(sig)
    for g in shapes:
        out = out * g.expand(sig)
    return out


# -- triangular selectors ---------------------------------------------------

class Orientation(enum.Enum):
    LOWER = "lower"
    UPPER = "upper"


@dataclass(frozen=True)
class TriangularSelector:
    """A strictly triangular 0/1 matrix; row ``l`` selects the split of factor ``l``."""

    matrix: tuple[Bits, ...]
    orientation: Orientation

    @property
    def d(self) -> int:
        return len(self.matrix)

    @property
    def parity(self) -> Bits:
        """Column sums mod 2."""
        return tuple(sum(row[k] for row in self.matrix) & 1 for k in range(self.d))

    def row(self, l: int) -> Bits:
        return self.matrix[l]

    def row_window(self, l: int) -> slice:
        """Columns a row may split against: ``1..l`` (lower) or ``l..d`` (upper).

        Columns outside the window are the zero padding of the row, which
        leaves the factor untouched.
        """
        return slice(0, l + 1) if self.orientation is Orientation.LOWER else slice(l, self.d)

    def as_array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=int).reshape(self.d, self.d)


def _free_cells(d: int, orientation: Orientation) -> list[tuple[int, int]]:
    if orientation is Orientation.LOWER:
        return [(r, c) for r in range(d) for c in range(r)]
    return [(r, c) for r in range(d) for c in range(r + 1, d)]


def all_triangular(d: int, orientation: Orientation) -> list[TriangularSelector]:
    if d > MAX_TRIANGULAR:
        raise ValueError(f"d={d} exceeds {MAX_TRIANGULAR}")
    cells = _free_cells(d, orientation)
    out = []
    for values in all_bits(len(cells)):
        m = [[0] * d for _ in range(d)]
        for (r, c), v in zip(cells, values):
            m[r][c] = v
        out.append(TriangularSelector(tuple(tuple(row) for row in m), orientation))
    return out


def enumerate_triangular(d: int, parity: Sequence[int],
                         orientation: Orientation | str) -> list[TriangularSelector]:
    """All strictly triangular ``d x d`` matrices with the given column parity."""
    orientation = Orientation(orientation)
    parity = tuple(parity)
    if len(parity) != d:
        raise ValueError("parity length must equal d")
    return [t for t in all_triangular(d, orientation) if t.parity == parity]


# -- shifted products -------------------------------------------------------

def sign_flip(phases: Sequence, j: Sequence[int]) -> list:
    """``F(j)``: phase ``v`` negated when ``j_v`` is 1."""
    if len(phases) != len(j):
        raise ValueError("need one bit per phase")
    return [p.negated() if bit else p for p, bit in zip(phases, j)]


@dataclass(frozen=True)
class ShiftTerm:
    """One summand of the split of ``prod exp(-f_l(x+y, u))``.

    ``left`` multiplies ``right`` from the left.  For the lower orientation
    ``left`` holds the split factors in ``x`` and ``right`` the flipped
    exponentials in ``y``; the upper orientation swaps the roles.
    """

    selector: TriangularSelector
    left: tuple[ExpShape, ...]
    right: tuple[ExpShape, ...]

    def expand(self, sig: Signature) -> Multivector:
        return product_of_shapes(self.left, sig) * product_of_shapes(self.right, sig)


def split_shifted_product(phases: Sequence, x, y, u,
                          orientation: Orientation | str = Orientation.LOWER,
                          prune: bool = True) -> list[ShiftTerm]:
    """Separate ``prod_l exp(-f_l(x + y, u))`` into ``x`` parts and ``y`` parts.

    Requires phases that are linear in ``x`` and separable, so that
    ``f_l(x, u)`` and ``f_l(y, u)`` share the blade of ``f_l`` at ``u``.
    """
    orientation = Orientation(orientation)
    for p in phases:
        if not (p.linear_in_x and p.separable):
            raise FlagViolation(f"phase {p.name} must be linear in x and separable")
    x, y, u = (np.asarray(v, dtype=float) for v in (x, y, u))
    d = len(phases)
    refs = [p.direction_blade(u).index for p in phases]
    fx = [p(x, u) for p in phases]
    fy = [p(y, u) for p in phases]
    sig = phases[0].sig if phases else None
    terms = []
    for sel in all_triangular(d, orientation):
        j = sel.parity
        split_side = fx if orientation is Orientation.LOWER else fy
        flip_side = fy if orientation is Orientation.LOWER else fx
        split = []
        for l in range(d):
            w = sel.row_window(l)
            split.append(exp_decompose(split_side[l], refs[w], sel.row(l)[w], sig))
        flipped = [ExpShape.full(f.flipped(b)) for f, b in zip(flip_side, j)]
        if prune and any(s.kind is ShapeKind.ZERO for s in split):
            continue
        if orientation is Orientation.LOWER:
            terms.append(ShiftTerm(sel, tuple(split), tuple(flipped)))
        else:
            terms.append(ShiftTerm(sel, tuple(flipped), tuple(split)))
    return terms
