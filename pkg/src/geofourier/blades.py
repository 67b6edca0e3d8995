"""Coorthogonal blades and the construction of a shared orthonormal basis.

Two blades are coorthogonal when they commute or anticommute.  A finite set
of mutually coorthogonal blades can always be written as real multiples of
basis blades of one orthonormal basis; :func:`coorthogonal_basis` builds
that basis by repeatedly peeling a vector off the smallest nonzero
intersection of blade spans and contracting it out of every blade that
contains it.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .algebra import (
    STRUCTURE_TOL,
    CliffordError,
    Multivector,
    NotABlade,
    Signature,
    blade_inverse,
    popcount,
)

MAX_BLADES = 8
RANK_TOL = 1e-9


class NotCoorthogonal(CliffordError):
    def __init__(self, pair: tuple[int, int]):
        self.pair = pair
        super().__init__(f"blades {pair[0]} and {pair[1]} are not coorthogonal")


class NullVector(CliffordError):
    """A candidate basis vector is null (``c*c == 0``) in a mixed signature."""


class NotRepresentable(CliffordError):
    pass


class Coorthogonality(enum.Enum):
    COMMUTE = "commute"
    ANTICOMMUTE = "anticommute"
    NEITHER = "neither"


def _vector_coords(v: Multivector) -> np.ndarray:
    sig = v.sig
    idx = [1 << i for i in range(sig.n)]
    rest = np.delete(v.coeffs, idx)
    if np.abs(rest).max(initial=0.0) > STRUCTURE_TOL:
        raise NotABlade("expected a grade-1 multivector")
    return v.coeffs[idx]


def metric_dot(sig: Signature, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Inner product of coordinate vectors under the signature."""
    return np.asarray(a, float) * np.asarray(sig.eps, float) @ np.asarray(b, float).T


@dataclass(frozen=True)
class FactoredBlade:
    """A blade kept as its generating vectors ``a_1 ^ ... ^ a_k``.

    ``vectors`` is a ``(k, n)`` array of coordinates.  An empty array is the
    scalar blade ``scale``.
    """

    sig: Signature
    vectors: np.ndarray
    scale: float = 1.0
    _expanded: Multivector | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        vecs = np.array(self.vectors, dtype=float).reshape(-1, self.sig.n)
        vecs.flags.writeable = False
        object.__setattr__(self, "vectors", vecs)

    @classmethod
    def from_vectors(cls, sig: Signature, vectors: Sequence[Sequence[float]]) -> "FactoredBlade":
        return cls(sig, np.asarray(vectors, dtype=float).reshape(-1, sig.n))

    @classmethod
    def basis(cls, sig: Signature, index: int, scale: float = 1.0) -> "FactoredBlade":
        rows = [np.eye(sig.n)[i] for i in range(sig.n) if index >> i & 1]
        return cls(sig, np.array(rows).reshape(-1, sig.n), scale)

    @property
    def grade(self) -> int:
        return self.vectors.shape[0]

    def expand(self) -> Multivector:
        if self._expanded is None:
            out = Multivector.scalar(self.sig, self.scale)
            for v in self.vectors:
                out = out ^ Multivector.vector(self.sig, v)
            object.__setattr__(self, "_expanded", out)
        return self._expanded

    def rank(self) -> int:
        if self.grade == 0:
            return 0
        return int(np.linalg.matrix_rank(self.vectors, tol=RANK_TOL))

    def is_zero(self) -> bool:
        return self.scale == 0 or self.rank() < self.grade

    def span(self) -> np.ndarray:
        """Orthonormal (Euclidean) rows spanning the blade's subspace."""
        return _orth_rows(self.vectors)


def as_multivector(b: FactoredBlade | Multivector) -> Multivector:
    return b.expand() if isinstance(b, FactoredBlade) else b


def _orth_rows(rows: np.ndarray) -> np.ndarray:
    rows = np.asarray(rows, float)
    if rows.size == 0:
        return rows.reshape(0, rows.shape[-1] if rows.ndim == 2 else 0)
    u, s, vt = np.linalg.svd(rows, full_matrices=False)
    r = int(np.sum(s > RANK_TOL * max(1.0, s[0])))
    return vt[:r]


def _complement_rows(span: np.ndarray, n: int) -> np.ndarray:
    """Euclidean orthogonal complement of the row space."""
    if span.shape[0] == 0:
        return np.eye(n)
    return scipy.linalg.null_space(span, rcond=RANK_TOL).T


def intersect_spans(spans: Sequence[np.ndarray], n: int) -> np.ndarray:
    """Orthonormal rows spanning the intersection of the given subspaces."""
    comps = [_complement_rows(s, n) for s in spans]
    stacked = np.vstack(comps) if comps else np.zeros((0, n))
    if stacked.shape[0] == 0:
        return np.eye(n)
    return scipy.linalg.null_space(stacked, rcond=RANK_TOL).T


def is_orthogonal(v: Multivector, w: Multivector, tol: float = STRUCTURE_TOL) -> bool:
    a, b = _vector_coords(v), _vector_coords(w)
    return abs(float(metric_dot(v.sig, a, b))) < tol


def _check_blade(a: Multivector, tol: float) -> None:
    sq = a * a
    if np.abs(sq.coeffs[1:]).max(initial=0.0) >= tol * max(1.0, a.norm_inf() ** 2):
        raise NotABlade(f"{a!r} does not square to a scalar")


def is_coorthogonal(a: FactoredBlade | Multivector, b: FactoredBlade | Multivector,
                    tol: float = STRUCTURE_TOL) -> Coorthogonality:
    """Classify the pair as commuting, anticommuting or neither."""
    a, b = as_multivector(a), as_multivector(b)
    _check_blade(a, tol)
    _check_blade(b, tol)
    ab, ba = (a * b).coeffs, (b * a).coeffs
    scale = max(1.0, a.norm_inf() * b.norm_inf())
    if np.abs(ab - ba).max() < tol * scale:
        return Coorthogonality.COMMUTE
    if np.abs(ab + ba).max() < tol * scale:
        return Coorthogonality.ANTICOMMUTE
    return Coorthogonality.NEITHER


def meet_dim(a: FactoredBlade, b: FactoredBlade) -> int:
    """``beta(A, B) = dim(span A  cap  span B)``."""
    if a.is_zero() or b.is_zero():
        raise NullVector("meet of a zero blade")
    return a.grade + b.grade - join_dim(a, b)


def join_dim(a: FactoredBlade, b: FactoredBlade) -> int:
    """``alpha(A, B) = dim(span A + span B)``."""
    if a.is_zero() or b.is_zero():
        raise NullVector("join of a zero blade")
    stacked = np.vstack([a.vectors, b.vectors])
    return int(np.linalg.matrix_rank(stacked, tol=RANK_TOL)) if stacked.size else 0


@dataclass(frozen=True)
class CoorthogonalBasisResult:
    """Orthonormal basis plus, per input blade, ``B_k = scale_k * v_{index_k}``.

    ``indices[k]`` lists 0-based positions into ``basis`` in increasing
    order; ``scales[k]`` is the signed magnitude.
    """

    sig: Signature
    basis: np.ndarray
    indices: tuple[tuple[int, ...], ...]
    scales: tuple[float, ...]

    def basis_vectors(self) -> list[Multivector]:
        return [Multivector.vector(self.sig, v) for v in self.basis]

    def basis_blade(self, positions: Sequence[int]) -> Multivector:
        out = Multivector.scalar(self.sig)
        for i in positions:
            out = out * Multivector.vector(self.sig, self.basis[i])
        return out

    def reconstruct(self, k: int) -> Multivector:
        return self.scales[k] * self.basis_blade(self.indices[k])

    def gram(self) -> np.ndarray:
        return metric_dot(self.sig, self.basis, self.basis)

    def to_json(self) -> dict:
        return {
            "sig": self.sig.to_json(),
            "basis": [[float(c) for c in v] for v in self.basis],
            "blades": [
                {"index": [i + 1 for i in idx], "scale": float(s)}
                for idx, s in zip(self.indices, self.scales)
            ],
        }


def _pivot_key(span: np.ndarray) -> tuple[int, ...]:
    _, _, piv = scipy.linalg.qr(span, pivoting=True, mode="economic")
    return tuple(sorted(int(p) for p in piv[: span.shape[0]]))


def coorthogonal_basis(blades: Sequence[FactoredBlade],
                       tol: float = STRUCTURE_TOL) -> CoorthogonalBasisResult:
    """Shared orthonormal basis for mutually coorthogonal blades.

    Each round collects the nonzero intersections of the remaining blade
    spans, takes one of minimal dimension, picks a vector ``c`` in it and
    replaces every blade ``C_k`` whose span contains ``c`` by ``c^-1 . C_k``.
    The scalar left in each blade at the end is its signed magnitude.
    """
    if not blades:
        raise ValueError("need at least one blade")
    if len(blades) > MAX_BLADES:
        raise ValueError(f"at most {MAX_BLADES} blades supported")
    sig = blades[0].sig
    n = sig.n
    for k, b in enumerate(blades):
        if b.sig != sig:
            raise ValueError("blades must share one signature")
        if b.is_zero():
            raise NullVector(f"blade {k} is zero")
    for i, j in itertools.combinations(range(len(blades)), 2):
        if is_coorthogonal(blades[i], blades[j], tol) is Coorthogonality.NEITHER:
            raise NotCoorthogonal((i, j))
    for b in blades:
        blade_inverse(b.expand(), tol)

    current = [b.expand() for b in blades]
    spans = [b.span() for b in blades]
    indices: list[list[int]] = [[] for _ in blades]
    basis: list[np.ndarray] = []
    eps = np.asarray(sig.eps, float)

    while any(s.shape[0] for s in spans):
        live = [k for k, s in enumerate(spans) if s.shape[0]]
        best = None
        for r in range(1, len(live) + 1):
            for subset in itertools.combinations(live, r):
                inter = intersect_spans([spans[k] for k in subset], n)
                if inter.shape[0] == 0:
                    continue
                key = (inter.shape[0], _pivot_key(inter))
                if best is None or key < best[0]:
                    best = (key, inter)
        inter = best[1]
        # c = projection of the first pivot axis onto the chosen span
        axis = np.zeros(n)
        axis[best[0][1][0]] = 1.0
        c = inter.T @ (inter @ axis)
        c_sq = float(metric_dot(sig, c, c))
        if abs(c_sq) < tol * max(1.0, float(c @ c)):
            raise NullVector("candidate basis vector is null in this signature")
        c = c / np.sqrt(abs(c_sq))
        basis.append(c)
        pos = len(basis) - 1
        c_mv = Multivector.vector(sig, c)
        c_inv = blade_inverse(c_mv, tol)
        for k in live:
            span = spans[k]
            inside = np.linalg.norm(c - span.T @ (span @ c)) < RANK_TOL * 10
            if inside:
                current[k] = c_inv.lc(current[k])
                indices[k].append(pos)
                # metric complement of c inside span(C_k)
                coeff = span @ (eps * c)
                spans[k] = _orth_rows(scipy.linalg.null_space(coeff[None, :]).T @ span) \
                    if span.shape[0] > 1 else np.zeros((0, n))
            elif np.abs(metric_dot(sig, c, span)).max() > 1e3 * tol:
                # outside the span yet not orthogonal to it
                raise NotRepresentable(f"blade {k} is neither containing nor orthogonal to c")

    scales = []
    for k, mv in enumerate(current):
        if np.abs(mv.coeffs[1:]).max(initial=0.0) > 1e3 * tol:
            raise NotRepresentable(f"blade {k} did not reduce to a scalar")
        scales.append(float(mv.coeffs[0]))
    return CoorthogonalBasisResult(
        sig=sig,
        basis=np.array(basis).reshape(-1, n),
        indices=tuple(tuple(ix) for ix in indices),
        scales=tuple(scales),
    )


def express_in_basis(a: FactoredBlade | Multivector, basis: Sequence[Multivector] | np.ndarray,
                     tol: float = STRUCTURE_TOL) -> tuple[float, int]:
    """Write ``a`` as ``scale * v_index`` over an orthonormal ``basis``.

    ``index`` is a bitmask over positions in ``basis`` (bit 0 is the first
    vector), mirroring the standard blade indexing.
    """
    mv = as_multivector(a)
    sig = mv.sig
    if isinstance(basis, np.ndarray):
        vecs = [Multivector.vector(sig, v) for v in basis]
    else:
        vecs = list(basis)
    grade = max(mv.grades(tol), default=0)
    best = None
    for positions in itertools.combinations(range(len(vecs)), grade):
        blade = Multivector.scalar(sig)
        for i in positions:
            blade = blade * vecs[i]
        sq = (blade * blade).scalar_part
        if abs(sq) < tol:
            continue
        scale = (mv * blade).scalar_part / sq
        if np.abs(mv.coeffs - scale * blade.coeffs).max() <= tol * max(1.0, mv.norm_inf()):
            if best is None or abs(scale) > abs(best[0]):
                best = (scale, sum(1 << i for i in positions))
    if best is None or (best[0] == 0 and mv.norm_inf() > tol):
        raise NotRepresentable("blade is not a multiple of a basis blade")
    return float(best[0]), best[1]


def grade_of_index(index: int) -> int:
    return popcount(index)
