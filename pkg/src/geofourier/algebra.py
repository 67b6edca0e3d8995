"""Dense real geometric algebras G(p, q).

Basis blades are addressed by bitmask: bit ``i`` set means ``e_{i+1}`` is a
factor, the empty mask is the scalar ``1``.  Multivectors are dense
coefficient vectors of length ``2**n`` in that order.

The metric follows the usual convention ``e_j e_j = eps_j`` with
``eps_j = +1`` for the first ``p`` generators and ``-1`` for the last ``q``.

Most numerical work in the package runs on plain ``ndarray`` batches whose
last axis holds coefficients (``geometric_product_arrays`` and friends);
the :class:`Multivector` class wraps a single value for the public API.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

MAX_DIMENSION = 8

#: absolute tolerance for structural checks (is-a-blade, squares-to-scalar)
STRUCTURE_TOL = 1e-9


class CliffordError(ValueError):
    """Base class for algebraic precondition failures."""


class SignatureMismatch(CliffordError):
    pass


class NullBlade(CliffordError):
    """The blade squares to (numerically) zero and has no inverse."""


class NotABlade(CliffordError):
    """The square of the argument has a non-scalar residue."""


class NotImaginary(CliffordError):
    """The blade does not square to a negative scalar."""


def popcount(bits: int) -> int:
    return bin(bits).count("1")


def blade_name(bits: int) -> str:
    """``0 -> '1'``, ``0b101 -> 'e13'``; indices above 9 are comma separated."""
    if bits == 0:
        return "1"
    idx = [str(i + 1) for i in range(bits.bit_length()) if bits >> i & 1]
    sep = "," if any(len(s) > 1 for s in idx) else ""
    return "e" + sep.join(idx)


def parse_blade(name: str) -> int:
    """Inverse of :func:`blade_name` for single-digit indices (``'e12' -> 3``)."""
    name = name.strip()
    if name in ("1", "e0", ""):
        return 0
    if not name.startswith("e"):
        raise ValueError(f"not a blade name: {name!r}")
    body = name[1:]
    digits = body.split(",") if "," in body else list(body)
    bits = 0
    for d in digits:
        k = int(d)
        if k < 1:
            raise ValueError(f"blade indices start at 1: {name!r}")
        if bits >> (k - 1) & 1:
            raise ValueError(f"repeated index in {name!r}")
        bits |= 1 << (k - 1)
    return bits


@dataclass(frozen=True)
class Signature:
    """Algebra parameters: ``p`` generators square to +1, ``q`` to -1."""

    p: int
    q: int = 0

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise ValueError(f"negative signature ({self.p}, {self.q})")
        if not 1 <= self.p + self.q <= MAX_DIMENSION:
            raise ValueError(
                f"dimension p+q={self.p + self.q} outside 1..{MAX_DIMENSION}")

    @property
    def n(self) -> int:
        return self.p + self.q

    @property
    def dim(self) -> int:
        return 1 << self.n

    @property
    def eps(self) -> tuple[int, ...]:
        return (1,) * self.p + (-1,) * self.q

    @cached_property
    def tables(self) -> "_Tables":
        return _build_tables(self.p, self.q)

    @property
    def pseudoscalar_index(self) -> int:
        return self.dim - 1

    def to_json(self) -> list[int]:
        return [self.p, self.q]

    @classmethod
    def from_json(cls, obj: Sequence[int]) -> "Signature":
        p, q = obj
        return cls(int(p), int(q))

    def __str__(self) -> str:
        return f"G({self.p},{self.q})"


def _reorder_sign(a: int, b: int) -> int:
    """Sign from bringing ``e_a e_b`` into canonical (ascending) order."""
    a >>= 1
    swaps = 0
    while a:
        swaps += popcount(a & b)
        a >>= 1
    return -1 if swaps & 1 else 1


def basis_blade_product(j: int, k: int, sig: Signature) -> tuple[int, int]:
    """``e_j e_k = sign * e_result``; returns ``(sign, result)``."""
    sign = _reorder_sign(j, k)
    common = j & k
    for i, e in enumerate(sig.eps):
        if common >> i & 1:
            sign *= e
    return sign, j ^ k


def commutation_sign(j: int, k: int) -> int:
    """``e_j e_k = sign * e_k e_j``, independent of the metric."""
    exponent = popcount(j) * popcount(k) - popcount(j & k)
    return -1 if exponent & 1 else 1


@dataclass(frozen=True)
class _Tables:
    sign: np.ndarray          # sign[i, j] for e_i e_j = sign * e_{i^j}
    perm: np.ndarray          # perm[i, k] = i ^ k
    gather_sign: np.ndarray   # sign[i, i ^ k]
    lc_sign: np.ndarray       # gather_sign masked to left contraction terms
    outer_sign: np.ndarray    # gather_sign masked to outer product terms
    grade: np.ndarray
    square: np.ndarray        # e_i e_i as +-1
    reverse: np.ndarray       # reversion signs


@lru_cache(maxsize=None)
def _build_tables(p: int, q: int) -> _Tables:
    sig = Signature(p, q)
    dim = 1 << (p + q)
    sign = np.empty((dim, dim), dtype=np.int8)
    for i in range(dim):
        for j in range(dim):
            sign[i, j] = basis_blade_product(i, j, sig)[0]
    idx = np.arange(dim)
    perm = idx[:, None] ^ idx[None, :]
    gather = sign[idx[:, None], perm].astype(float)
    # e_i | e_j is the product when i is a subset of j; e_i ^ e_j when disjoint
    j_of = perm
    lc = np.where((idx[:, None] & j_of) == idx[:, None], gather, 0.0)
    outer = np.where((idx[:, None] & j_of) == 0, gather, 0.0)
    grade = np.array([popcount(i) for i in range(dim)])
    square = sign[idx, idx].astype(float)
    reverse = np.where((grade * (grade - 1) // 2) % 2 == 1, -1.0, 1.0)
    for arr in (sign, perm, gather, lc, outer, grade, square, reverse):
        arr.flags.writeable = False
    return _Tables(sign, perm, gather, lc, outer, grade, square, reverse)


# -- batched kernels --------------------------------------------------------

def _bilinear(sig: Signature, a: np.ndarray, b: np.ndarray,
              weights: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    t = sig.tables
    shape = np.broadcast_shapes(a.shape, b.shape)
    out = np.zeros(shape)
    lead = tuple(range(a.ndim - 1))
    active = np.flatnonzero(np.any(a != 0, axis=lead)) if lead else np.flatnonzero(a)
    for i in active:
        w = weights[i]
        out += a[..., i:i + 1] * (b[..., t.perm[i]] * w)
    return out


def geometric_product_arrays(sig: Signature, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Geometric product over the last axis, broadcasting the leading axes."""
    return _bilinear(sig, a, b, sig.tables.gather_sign)


def left_contraction_arrays(sig: Signature, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _bilinear(sig, a, b, sig.tables.lc_sign)


def outer_product_arrays(sig: Signature, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _bilinear(sig, a, b, sig.tables.outer_sign)


def product_chain_arrays(sig: Signature, factors: Iterable[np.ndarray]) -> np.ndarray:
    it = iter(factors)
    out = next(it)
    for f in it:
        out = geometric_product_arrays(sig, out, f)
    return out


def scalar_square_arrays(sig: Signature, a: np.ndarray) -> np.ndarray:
    """Scalar part of ``a a``."""
    return np.asarray(a, float) ** 2 @ sig.tables.square


def blade_inverse_arrays(sig: Signature, b: np.ndarray,
                         tol: float = STRUCTURE_TOL) -> np.ndarray:
    """``B^-1 = B / B^2`` for a batch of blades (checked)."""
    b = np.asarray(b, dtype=float)
    sq = geometric_product_arrays(sig, b, b)
    s = sq[..., 0]
    residue = np.abs(sq[..., 1:]).max(axis=-1) if sig.dim > 1 else np.zeros_like(s)
    if np.any(residue >= tol):
        raise NotABlade(f"square has non-scalar residue {residue.max():.3g}")
    if np.any(np.abs(s) < tol):
        raise NullBlade("blade squares to zero")
    return b / s[..., None]


def unit_exp_arrays(sig: Signature, f: np.ndarray) -> np.ndarray:
    """``exp(-f)`` for a batch of imaginary blades ``f`` (``f*f <= 0``)."""
    f = np.asarray(f, dtype=float)
    sq = scalar_square_arrays(sig, f)
    if np.any(sq > STRUCTURE_TOL * np.maximum(1.0, np.abs(f).max(axis=-1) ** 2)):
        raise NotImaginary("phase value squares to a positive scalar")
    mag = np.sqrt(np.maximum(-sq, 0.0))
    safe = np.where(mag > 0, mag, 1.0)
    out = -f * (np.sin(mag) / safe)[..., None]
    out[..., 0] += np.cos(mag)
    return out


# -- single values ----------------------------------------------------------

class Multivector:
    """Immutable element of G(p, q) stored as ``2**n`` dense coefficients."""

    __slots__ = ("sig", "coeffs")
    __array_priority__ = 100

    def __init__(self, sig: Signature, coeffs: Sequence[float] | np.ndarray):
        arr = np.array(coeffs, dtype=float)
        if arr.shape != (sig.dim,):
            raise ValueError(f"expected {sig.dim} coefficients, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("non-finite coefficient")
        arr.flags.writeable = False
        object.__setattr__(self, "sig", sig)
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Multivector is immutable")

    # constructors
    @classmethod
    def zero(cls, sig: Signature) -> "Multivector":
        return cls(sig, np.zeros(sig.dim))

    @classmethod
    def scalar(cls, sig: Signature, value: float = 1.0) -> "Multivector":
        c = np.zeros(sig.dim)
        c[0] = value
        return cls(sig, c)

    @classmethod
    def blade(cls, sig: Signature, index: int | str, value: float = 1.0) -> "Multivector":
        if isinstance(index, str):
            index = parse_blade(index)
        if not 0 <= index < sig.dim:
            raise ValueError(f"blade index {index} out of range for {sig}")
        c = np.zeros(sig.dim)
        c[index] = value
        return cls(sig, c)

    @classmethod
    def vector(cls, sig: Signature, coords: Sequence[float]) -> "Multivector":
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (sig.n,):
            raise ValueError(f"expected {sig.n} vector coordinates")
        c = np.zeros(sig.dim)
        c[[1 << i for i in range(sig.n)]] = coords
        return cls(sig, c)

    # arithmetic
    def _check(self, other: "Multivector") -> None:
        if other.sig != self.sig:
            raise SignatureMismatch(f"{self.sig} vs {other.sig}")

    def __add__(self, other):
        if isinstance(other, Multivector):
            self._check(other)
            return Multivector(self.sig, self.coeffs + other.coeffs)
        if np.isscalar(other):
            return self + Multivector.scalar(self.sig, float(other))
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Multivector(self.sig, -self.coeffs)

    def __sub__(self, other):
        if isinstance(other, Multivector) or np.isscalar(other):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Multivector):
            self._check(other)
            return Multivector(self.sig, geometric_product_arrays(self.sig, self.coeffs, other.coeffs))
        if np.isscalar(other):
            return Multivector(self.sig, self.coeffs * float(other))
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return Multivector(self.sig, self.coeffs * float(other))
        return NotImplemented

    def __truediv__(self, other):
        if np.isscalar(other):
            return Multivector(self.sig, self.coeffs / float(other))
        return NotImplemented

    def __xor__(self, other: "Multivector") -> "Multivector":
        """Outer product."""
        self._check(other)
        return Multivector(self.sig, outer_product_arrays(self.sig, self.coeffs, other.coeffs))

    def lc(self, other: "Multivector") -> "Multivector":
        """Left contraction ``self | other``."""
        self._check(other)
        return Multivector(self.sig, left_contraction_arrays(self.sig, self.coeffs, other.coeffs))

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return self.sig == other.sig and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None

    # structure
    def grade(self, k: int) -> "Multivector":
        return grade_project(self, k)

    @property
    def scalar_part(self) -> float:
        return float(self.coeffs[0])

    def grades(self, tol: float = 0.0) -> set[int]:
        g = self.sig.tables.grade
        return {int(g[i]) for i in np.flatnonzero(np.abs(self.coeffs) > tol)}

    def reverse(self) -> "Multivector":
        return Multivector(self.sig, self.coeffs * self.sig.tables.reverse)

    def inverse(self) -> "Multivector":
        return blade_inverse(self)

    def norm_inf(self) -> float:
        return float(np.abs(self.coeffs).max())

    def isclose(self, other: "Multivector", tol: float = 1e-12) -> bool:
        self._check(other)
        return bool(np.abs(self.coeffs - other.coeffs).max() <= tol)

    def to_json(self) -> dict:
        return {"sig": self.sig.to_json(), "coeffs": [float(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, obj: dict) -> "Multivector":
        return cls(Signature.from_json(obj["sig"]), obj["coeffs"])

    def __repr__(self) -> str:
        terms = []
        for i in np.flatnonzero(self.coeffs):
            c = self.coeffs[i]
            name = blade_name(int(i))
            terms.append(f"{c:g}" if i == 0 else f"{c:g}*{name}")
        body = " + ".join(terms) if terms else "0"
        return f"Multivector({self.sig}, {body})"


def geometric_product(a: Multivector, b: Multivector) -> Multivector:
    return a * b


def grade_project(a: Multivector, k: int) -> Multivector:
    if not 0 <= k <= a.sig.n:
        raise ValueError(f"grade {k} outside 0..{a.sig.n}")
    mask = a.sig.tables.grade == k
    return Multivector(a.sig, np.where(mask, a.coeffs, 0.0))


def left_contraction(a: Multivector, b: Multivector) -> Multivector:
    return a.lc(b)


def outer_product(a: Multivector, b: Multivector) -> Multivector:
    return a ^ b


def blade_inverse(b: Multivector, tol: float = STRUCTURE_TOL) -> Multivector:
    return Multivector(b.sig, blade_inverse_arrays(b.sig, b.coeffs, tol))


@dataclass(frozen=True)
class ScaledBasisBlade:
    """A real multiple ``sign * magnitude * e_index`` of one basis blade.

    A zero magnitude is canonicalised to sign +1 on the scalar blade so
    that equal samples compare equal.
    """

    magnitude: float
    sign: int = 1
    index: int = 0

    def __post_init__(self):
        if not self.magnitude >= 0 or not math.isfinite(self.magnitude):
            raise ValueError(f"magnitude must be finite and >= 0, got {self.magnitude}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.magnitude == 0:
            object.__setattr__(self, "sign", 1)
            object.__setattr__(self, "index", 0)

    @classmethod
    def from_real(cls, value: float, index: int) -> "ScaledBasisBlade":
        return cls(abs(float(value)), -1 if value < 0 else 1, index)

    @property
    def value(self) -> float:
        """Signed real coefficient."""
        return self.sign * self.magnitude

    def __neg__(self) -> "ScaledBasisBlade":
        return ScaledBasisBlade(self.magnitude, -self.sign, self.index)

    def flipped(self, bit: int) -> "ScaledBasisBlade":
        return -self if bit & 1 else self

    def to_multivector(self, sig: Signature) -> Multivector:
        return Multivector.blade(sig, self.index, self.value)


def is_imaginary_index(index: int, sig: Signature) -> bool:
    return sig.tables.square[index] < 0


def exp_imaginary(f: ScaledBasisBlade, sig: Signature) -> Multivector:
    """``exp(-f) = cos|f| - sgn(f) sin|f| e_index`` for imaginary ``f``."""
    c = np.zeros(sig.dim)
    if f.magnitude == 0:
        c[0] = 1.0
        return Multivector(sig, c)
    if not is_imaginary_index(f.index, sig):
        raise NotImaginary(f"{blade_name(f.index)} squares to +1 in {sig}")
    c[0] = math.cos(f.magnitude)
    c[f.index] = -f.sign * math.sin(f.magnitude)
    return Multivector(sig, c)


def basis_blade_of(a: Multivector, tol: float = 0.0) -> ScaledBasisBlade:
    """Read ``a`` as a single scaled basis blade (raises if it has several terms)."""
    nz = np.flatnonzero(np.abs(a.coeffs) > tol)
    if len(nz) == 0:
        return ScaledBasisBlade(0.0)
    if len(nz) > 1:
        raise NotABlade(f"{a!r} is not a multiple of a single basis blade")
    i = int(nz[0])
    return ScaledBasisBlade.from_real(a.coeffs[i], i)
