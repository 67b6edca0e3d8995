"""Geometric Fourier and trigonometric transforms of sampled fields.

Integrals become unit-weight sums over the support of the field, so every
frequency ``u`` is just a real test vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import (
    Multivector,
    Signature,
    SignatureMismatch,
    geometric_product_arrays,
    product_chain_arrays,
    unit_exp_arrays,
)
from .decomposition import ShapeKind, TriangularSelector, c_chain_arrays
from .fields import FrequencySet, SampledField
from .phases import GFTSpec, PhaseFunction

Reference = PhaseFunction | Multivector


@dataclass(frozen=True, eq=False)
class GTTFactor:
    """One kernel factor ``g(-f)``.

    With ``refs`` empty the factor is the fixed ``shape`` of ``exp(-f)``.
    Otherwise it is ``exp(-f)`` split by ``bits`` against ``refs``, which
    lands on one of the same four shapes pointwise.
    """

    phase: PhaseFunction
    shape: ShapeKind = ShapeKind.FULL
    refs: tuple[Reference, ...] = ()
    bits: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "refs", tuple(self.refs))
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
        if len(self.refs) != len(self.bits):
            raise ValueError("need one bit per reference")
        if self.refs and self.shape is not ShapeKind.FULL:
            raise ValueError("a split factor starts from the full exponential")


@dataclass(frozen=True, eq=False)
class GTTSpec:
    name: str
    sig: Signature
    m: int
    G1: tuple[GTTFactor, ...] = ()
    G2: tuple[GTTFactor, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "G1", tuple(self.G1))
        object.__setattr__(self, "G2", tuple(self.G2))
        for g in self.G1 + self.G2:
            if g.phase.sig != self.sig or g.phase.m != self.m:
                raise ValueError(f"factor {g.phase.name} does not match the transform definition")

    @classmethod
    def from_gft(cls, spec: GFTSpec, shapes1: Sequence[ShapeKind] | None = None,
                 shapes2: Sequence[ShapeKind] | None = None) -> "GTTSpec":
        shapes1 = shapes1 or [ShapeKind.FULL] * spec.mu
        shapes2 = shapes2 or [ShapeKind.FULL] * (spec.nu - spec.mu)
        if len(shapes1) != spec.mu or len(shapes2) != spec.nu - spec.mu:
            raise ValueError("one shape per phase")
        return cls(spec.name, spec.sig, spec.m,
                   tuple(GTTFactor(p, s) for p, s in zip(spec.F1, shapes1)),
                   tuple(GTTFactor(p, s) for p, s in zip(spec.F2, shapes2)))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Transform values, one multivector per frequency."""

    sig: Signature
    freqs: np.ndarray
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.freqs)

    def __getitem__(self, i: int) -> Multivector:
        return Multivector(self.sig, self.values[i])

    def __add__(self, other: "Spectrum") -> "Spectrum":
        return Spectrum(self.sig, self.freqs, self.values + other.values)

    def __sub__(self, other: "Spectrum") -> "Spectrum":
        return Spectrum(self.sig, self.freqs, self.values - other.values)

    def __mul__(self, other: "Spectrum") -> "Spectrum":
        """Pointwise geometric product."""
        return Spectrum(self.sig, self.freqs,
                        geometric_product_arrays(self.sig, self.values, other.values))

    def scaled(self, factor: float) -> "Spectrum":
        return Spectrum(self.sig, self.freqs, self.values * factor)

    def deviation(self, other: "Spectrum") -> np.ndarray:
        """Max-abs coefficient difference per frequency."""
        return np.abs(self.values - other.values).max(axis=-1)

    def to_json(self) -> dict:
        return {
            "sig": self.sig.to_json(),
            "values": [{"u": [float(c) for c in u], "coeffs": [float(c) for c in v]}
                       for u, v in zip(self.freqs, self.values)],
        }


def _grid(field: SampledField, freqs: FrequencySet | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    u = freqs.freqs if isinstance(freqs, FrequencySet) else np.asarray(freqs, dtype=float)
    if u.ndim != 2 or u.shape[1] != field.m:
        raise ValueError(f"frequencies must be (k, {field.m})")
    return field.points[None, :, :].astype(float), u[:, None, :]


def reference_arrays(refs: Sequence[Reference], u: np.ndarray) -> list[np.ndarray]:
    """Coefficient arrays of the reference blades, shaped to broadcast against ``u``."""
    out = []
    for r in refs:
        if isinstance(r, PhaseFunction):
            out.append(r.direction(u))
        else:
            out.append(np.asarray(r.coeffs))
    return out


def factor_arrays(factor: GTTFactor, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Values of ``g(-f(x, u))`` over broadcast ``x`` and ``u`` batches."""
    sig = factor.phase.sig
    full = unit_exp_arrays(sig, factor.phase.values(x, u))
    if factor.refs:
        return c_chain_arrays(sig, full, reference_arrays(factor.refs, u), factor.bits)
    kind = factor.shape
    if kind is ShapeKind.FULL:
        return full
    if kind is ShapeKind.COSINE:
        out = np.zeros_like(full)
        out[..., 0] = full[..., 0]
        return out
    if kind is ShapeKind.SINE:
        out = full.copy()
        out[..., 0] = 0.0
        return out
    return np.zeros_like(full)


def kernel_sum(sig: Signature, values: np.ndarray, left: Sequence[np.ndarray],
               right: Sequence[np.ndarray]) -> np.ndarray:
    """``sum_x prod(left) * values * prod(right)`` over the point axis (-2)."""
    out = np.asarray(values, dtype=float)
    if left:
        out = geometric_product_arrays(sig, product_chain_arrays(sig, left), out)
    if right:
        out = geometric_product_arrays(sig, out, product_chain_arrays(sig, right))
    return out.sum(axis=-2)


def _check(field: SampledField, sig: Signature, m: int) -> None:
    if field.sig != sig:
        raise SignatureMismatch(f"field in {field.sig}, transform in {sig}")
    if field.m != m:
        raise ValueError(f"field has m={field.m}, transform expects m={m}")


def gtt_forward(field: SampledField, spec: GTTSpec,
                freqs: FrequencySet | np.ndarray) -> Spectrum:
    _check(field, spec.sig, spec.m)
    x, u = _grid(field, freqs)
    if len(field) == 0:
        return Spectrum(spec.sig, u[:, 0, :], np.zeros((len(u), spec.sig.dim)))
    left = [factor_arrays(g, x, u) for g in spec.G1]
    right = [factor_arrays(g, x, u) for g in spec.G2]
    values = kernel_sum(spec.sig, field.values[None], left, right)
    return Spectrum(spec.sig, u[:, 0, :], values)


def gft_forward(field: SampledField, spec: GFTSpec,
                freqs: FrequencySet | np.ndarray) -> Spectrum:
    """``sum_x prod_{F1} exp(-f) A(x) prod_{F2} exp(-f)`` at each frequency."""
    return gtt_forward(field, GTTSpec.from_gft(spec), freqs)


def _rows(sel, d: int, nrefs: int) -> list[tuple[slice, tuple[int, ...]]]:
    if isinstance(sel, TriangularSelector):
        if sel.d != d:
            raise ValueError(f"selector is {sel.d}x{sel.d}, expected {d}")
        return [(sel.row_window(l), sel.row(l)) for l in range(d)]
    rows = [tuple(r) for r in sel]
    if len(rows) != d or any(len(r) != nrefs for r in rows):
        raise ValueError("selector rows do not match the factor and reference counts")
    return [(slice(0, nrefs), r) for r in rows]


def gtt_from_decomposition(spec: GFTSpec, refs1: Sequence[Reference], refs2: Sequence[Reference],
                           rows1, rows2) -> GTTSpec:
    """Factor ``l`` of each side becomes ``exp(-f_l)`` split by row ``l`` of its selector.

    Triangular selectors only split against the references inside each
    row's window; plain row lists use every reference.
    """
    refs1, refs2 = tuple(refs1), tuple(refs2)
    g1 = tuple(GTTFactor(p, refs=refs1[w], bits=row[w])
               for p, (w, row) in zip(spec.F1, _rows(rows1, spec.mu, len(refs1))))
    g2 = tuple(GTTFactor(p, refs=refs2[w], bits=row[w])
               for p, (w, row) in zip(spec.F2, _rows(rows2, spec.nu - spec.mu, len(refs2))))
    return GTTSpec(spec.name, spec.sig, spec.m, g1, g2)
