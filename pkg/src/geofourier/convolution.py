"""Linear convolution and the right-hand sides of the convolution theorem.

Every variant writes ``F(C * B)(u)`` as a sum over sign patterns and
strictly triangular selectors of products ``T_C(u) T_B(u)``, where each
``T`` is a trigonometric transform of ``C`` or ``B`` (possibly split into
commuting parts before or after transforming).  The variants differ in
which of ``C`` and ``B`` carries the triangular splits and in the
orientation of the selectors.
"""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .algebra import Signature, SignatureMismatch, geometric_product_arrays, unit_exp_arrays
from .decomposition import FlagViolation, Orientation, add_bits, all_bits, all_triangular, c_chain_arrays
from .fields import FrequencySet, SampledField
from .phases import GFTSpec
from .transforms import Spectrum, gft_forward, kernel_sum


def convolve(c: SampledField, b: SampledField) -> SampledField:
    """``(C * B)(x) = sum_y C(y) B(x - y)`` with ``C`` multiplying from the left."""
    if c.sig != b.sig:
        raise SignatureMismatch(f"{c.sig} vs {b.sig}")
    if c.m != b.m:
        raise ValueError("fields differ in argument dimension")
    sig, m = c.sig, c.m
    offset = tuple(np.add(c.offset, b.offset))
    extent = c.extent + b.extent - 1
    if len(c) == 0 or len(b) == 0:
        return SampledField(sig, m, extent, offset, np.zeros((0, m), int), np.zeros((0, sig.dim)))
    prods = geometric_product_arrays(sig, c.values[:, None, :], b.values[None, :, :])
    pts = (c.points[:, None, :] + b.points[None, :, :]).reshape(-1, m)
    uniq, inverse = np.unique(pts, axis=0, return_inverse=True)
    vals = np.zeros((len(uniq), sig.dim))
    np.add.at(vals, inverse.ravel(), prods.reshape(-1, sig.dim))
    return SampledField(sig, m, extent, offset, uniq, vals)


class Variant(enum.Enum):
    V1 = 1
    V2 = 2
    V3 = 3
    V4 = 4
    V5 = 5
    V6 = 6
    V7 = 7
    V8 = 8

    @classmethod
    def parse(cls, text: str | int | "Variant") -> "Variant":
        if isinstance(text, Variant):
            return text
        if isinstance(text, int):
            return cls(text)
        return cls[text.upper()] if text.upper().startswith("V") else cls(int(text))

    @property
    def splits_c_first(self) -> bool:
        """V5-V8 split ``C`` before transforming and ``B`` after."""
        return self.value > 4

    @property
    def left_rows_on_b(self) -> bool:
        return self.value in (1, 3, 5, 7)

    @property
    def right_rows_on_b(self) -> bool:
        return self.value in (1, 4, 5, 8)

    @property
    def orientations(self) -> tuple[Orientation, Orientation]:
        """Orientations of the left selector ``J`` and right selector ``K``."""
        lower_j = self.left_rows_on_b != self.splits_c_first
        upper_k = self.right_rows_on_b != self.splits_c_first
        return (Orientation.LOWER if lower_j else Orientation.UPPER,
                Orientation.UPPER if upper_k else Orientation.LOWER)


# A side factor: flip bit plus, if split, (window start, window stop, bits).
SideFactor = tuple[int, tuple[int, int, tuple[int, ...]] | None]


@dataclass(frozen=True)
class TransformKey:
    """Which field, which splits and which kernel factors make up one ``T``."""

    field: str
    pre_split: tuple[int, ...] | None
    left: tuple[SideFactor, ...]
    right: tuple[SideFactor, ...]
    post_split: tuple[int, ...] | None


def _plain(bits: Sequence[int]) -> tuple[SideFactor, ...]:
    return tuple((int(b), None) for b in bits)


def _rowed(flips: Sequence[int], sel) -> tuple[SideFactor, ...]:
    out = []
    for l, flip in enumerate(flips):
        w = sel.row_window(l)
        out.append((int(flip), (w.start, w.stop, sel.row(l)[w])))
    return tuple(out)


class _Evaluator:
    """Caches kernel factors and transforms for one ``(C, B, spec, freqs)``."""

    def __init__(self, c: SampledField, b: SampledField, spec: GFTSpec, u: np.ndarray):
        self.sig: Signature = spec.sig
        self.spec = spec
        self.u = u
        self.fields = {"C": c, "B": b}
        self.refs1 = [p.direction(u[:, None, :]) for p in spec.F1]
        self.refs2 = [p.direction(u[:, None, :]) for p in spec.F2]
        self._exp: dict = {}
        self._factor: dict = {}
        self._transform: dict = {}

    def _exp_arrays(self, name: str, side: int, l: int, flip: int) -> np.ndarray:
        key = (name, side, l, flip)
        if key not in self._exp:
            phase = (self.spec.F1 if side == 1 else self.spec.F2)[l]
            x = self.fields[name].points[None, :, :].astype(float)
            f = phase.values(x, self.u[:, None, :])
            self._exp[key] = unit_exp_arrays(self.sig, -f if flip else f)
        return self._exp[key]

    def _factor_arrays(self, name: str, side: int, l: int, sf: SideFactor) -> np.ndarray:
        key = (name, side, l, sf)
        if key not in self._factor:
            flip, split = sf
            arr = self._exp_arrays(name, side, l, flip)
            if split is not None:
                start, stop, bits = split
                refs = (self.refs1 if side == 1 else self.refs2)[start:stop]
                arr = c_chain_arrays(self.sig, arr, refs, bits)
            self._factor[key] = arr
        return self._factor[key]

    def transform(self, key: TransformKey) -> np.ndarray:
        if key not in self._transform:
            fld = self.fields[key.field]
            if len(fld) == 0:
                self._transform[key] = np.zeros((len(self.u), self.sig.dim))
                return self._transform[key]
            values = fld.values[None]
            split_refs = self.refs1 if key.field == "C" else self.refs2
            if key.pre_split is not None:
                values = c_chain_arrays(self.sig, np.broadcast_to(values, (len(self.u),) + values.shape[1:]),
                                        split_refs, key.pre_split)
            left = [self._factor_arrays(key.field, 1, l, sf) for l, sf in enumerate(key.left)]
            right = [self._factor_arrays(key.field, 2, l, sf) for l, sf in enumerate(key.right)]
            out = kernel_sum(self.sig, values, left, right)
            if key.post_split is not None:
                out = c_chain_arrays(self.sig, out, [r[:, 0, :] for r in split_refs], key.post_split)
            self._transform[key] = out
        return self._transform[key]


def theorem_terms(spec: GFTSpec, variant: Variant) -> Iterable[tuple[TransformKey, TransformKey]]:
    """The ``(T_C, T_B)`` pairs whose products sum to the variant's right-hand side."""
    mu, rho = spec.mu, spec.nu - spec.mu
    j_orient, k_orient = variant.orientations
    c_first = variant.splits_c_first
    for big_j in all_triangular(mu, j_orient):
        j = big_j.parity
        for big_k in all_triangular(rho, k_orient):
            k = big_k.parity
            for jp in all_bits(mu):
                for kp in all_bits(rho):
                    if variant.left_rows_on_b:
                        c_left, b_left = _plain(j), _rowed(jp, big_j)
                    else:
                        c_left, b_left = _rowed((0,) * mu, big_j), _plain(add_bits(j, jp))
                    if variant.right_rows_on_b:
                        c_right, b_right = _plain(add_bits(k, kp)), _rowed((0,) * rho, big_k)
                    else:
                        c_right, b_right = _rowed(kp, big_k), _plain(k)
                    if c_first:
                        tc = TransformKey("C", jp, c_left, c_right, None)
                        tb = TransformKey("B", None, b_left, b_right, kp)
                    else:
                        tc = TransformKey("C", None, c_left, c_right, jp)
                        tb = TransformKey("B", kp, b_left, b_right, None)
                    yield tc, tb


def corollary_terms(spec: GFTSpec, side: str) -> Iterable[tuple[TransformKey, TransformKey]]:
    mu, rho = spec.mu, spec.nu - spec.mu
    if side not in ("around-C", "around-B"):
        raise ValueError(f"unknown side {side!r}")
    for jp in all_bits(mu):
        for kp in all_bits(rho):
            c_left, c_right = _plain((0,) * mu), _plain(kp)
            b_left, b_right = _plain(jp), _plain((0,) * rho)
            if side == "around-C":
                yield (TransformKey("C", None, c_left, c_right, jp),
                       TransformKey("B", kp, b_left, b_right, None))
            else:
                yield (TransformKey("C", jp, c_left, c_right, None),
                       TransformKey("B", None, b_left, b_right, kp))


@dataclass
class TermStats:
    total: int = 0
    kept: int = 0


def _sum_terms(ev: _Evaluator, pairs, mutate: int | str | None, stats: TermStats) -> np.ndarray:
    products = []
    for tc, tb in pairs:
        stats.total += 1
        a, b = ev.transform(tc), ev.transform(tb)
        if not (np.any(a) and np.any(b)):
            continue
        stats.kept += 1
        products.append(geometric_product_arrays(ev.sig, a, b))
    if not products:
        return np.zeros((len(ev.u), ev.sig.dim))
    stack = np.array(products)
    if mutate is not None:
        idx = int(np.argmax(np.abs(stack).max(axis=(1, 2)))) if mutate == "largest" else int(mutate)
        stack[idx] *= -1.0
    return stack.sum(axis=0)


def _freq_array(freqs: FrequencySet | np.ndarray) -> np.ndarray:
    return freqs.freqs if isinstance(freqs, FrequencySet) else np.asarray(freqs, dtype=float)


def theorem_rhs(c: SampledField, b: SampledField, spec: GFTSpec, variant: Variant | str | int,
                freqs: FrequencySet | np.ndarray, mutate: int | str | None = None,
                stats: TermStats | None = None, _ev: _Evaluator | None = None) -> Spectrum:
    """Right-hand side of the convolution theorem in the requested variant.

    ``mutate`` negates one summand (an index, or ``'largest'``) and exists
    for sensitivity checks.
    """
    spec.require_theorem_flags()
    variant = Variant.parse(variant)
    u = _freq_array(freqs)
    ev = _ev or _Evaluator(c, b, spec, u)
    out = _sum_terms(ev, theorem_terms(spec, variant), mutate, stats or TermStats())
    return Spectrum(spec.sig, u, out)


def corollary_rhs(c: SampledField, b: SampledField, spec: GFTSpec, side: str,
                  freqs: FrequencySet | np.ndarray, stats: TermStats | None = None,
                  _ev: _Evaluator | None = None) -> Spectrum:
    """Two-index form valid when phases commute inside ``F1`` and inside ``F2``."""
    spec.require_theorem_flags()
    u = _freq_array(freqs)
    if not spec.within_sets_commute(u):
        raise FlagViolation(f"{spec.name}: phases inside a set do not commute")
    ev = _ev or _Evaluator(c, b, spec, u)
    out = _sum_terms(ev, corollary_terms(spec, side), None, stats or TermStats())
    return Spectrum(spec.sig, u, out)


def product_formula(c: SampledField, b: SampledField, spec: GFTSpec,
                    freqs: FrequencySet | np.ndarray) -> Spectrum:
    """``F(C) F(B)``, the collapsed form for central phases."""
    return gft_forward(c, spec, freqs) * gft_forward(b, spec, freqs)


@dataclass
class VariantResult:
    variant: str
    per_u: list[tuple[list[float], float]]
    terms_total: int
    terms_kept: int
    tol: float

    @property
    def max_dev(self) -> float:
        return max(d for _, d in self.per_u)

    @property
    def passed(self) -> bool:
        return self.max_dev < self.tol


@dataclass
class ConvolutionReport:
    spec: str
    tol: float
    results: list[VariantResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def max_dev(self) -> float:
        return max((r.max_dev for r in self.results), default=0.0)

    def to_json(self) -> dict:
        return {
            "spec": self.spec,
            "tol": self.tol,
            "pass": self.passed,
            "results": [
                {
                    "spec": self.spec,
                    "variant": r.variant,
                    "per_u": [{"u": u, "max_dev": d} for u, d in r.per_u],
                    "pass": r.passed,
                    "tol": r.tol,
                    "terms": {"total": r.terms_total, "kept": r.terms_kept},
                }
                for r in self.results
            ],
        }

    def dumps(self, fmt: str = "json") -> str:
        if fmt == "json":
            return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"
        if fmt == "csv":
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(["spec", "variant", "u", "max_dev", "pass"])
            for r in self.results:
                for u, d in r.per_u:
                    writer.writerow([self.spec, r.variant, " ".join(repr(c) for c in u),
                                     repr(d), d < r.tol])
            return buf.getvalue()
        raise ValueError(f"unknown format {fmt!r}")


def verify(c: SampledField, b: SampledField, spec: GFTSpec,
           variants: Sequence[Variant | str | int], freqs: FrequencySet | np.ndarray,
           tol: float = 1e-9, mutate: int | str | None = None) -> ConvolutionReport:
    """Compare ``F(C * B)`` with each requested right-hand side.

    ``'around-C'`` and ``'around-B'`` in ``variants`` select the corollary
    forms; anything else is a theorem variant.
    """
    u = _freq_array(freqs)
    spec.require_theorem_flags()
    lhs = gft_forward(convolve(c, b), spec, u)
    ev = _Evaluator(c, b, spec, u)
    report = ConvolutionReport(spec.name, tol)
    for v in variants:
        stats = TermStats()
        if v in ("around-C", "around-B"):
            rhs = corollary_rhs(c, b, spec, v, u, stats=stats, _ev=ev)
            label = v
        else:
            v = Variant.parse(v)
            rhs = theorem_rhs(c, b, spec, v, u, mutate=mutate, stats=stats, _ev=ev)
            label = v.name
        dev = lhs.deviation(rhs)
        per_u = [([float(x) for x in uu], float(d)) for uu, d in zip(u, dev)]
        report.results.append(VariantResult(label, per_u, stats.total, stats.kept, tol))
    return report


ALL_VARIANTS = tuple(Variant)
