"""Finitely supported multivector fields on the integer lattice, and frequency sets."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .algebra import Multivector, Signature, SignatureMismatch


class SchemaError(ValueError):
    """A JSON document does not match the expected layout."""


@dataclass(frozen=True, eq=False)
class SampledField:
    """Values at integer points inside the box ``offset + [0, extent)^m``.

    ``points`` is ``(k, m)`` integers and ``values`` is ``(k, 2**n)``.  Points
    absent from ``points`` are zero.
    """

    sig: Signature
    m: int
    extent: int
    offset: tuple[int, ...]
    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.int64).reshape(-1, self.m)
        vals = np.asarray(self.values, dtype=float).reshape(-1, self.sig.dim)
        if len(pts) != len(vals):
            raise ValueError("points and values differ in length")
        off = tuple(int(o) for o in self.offset)
        if len(off) != self.m:
            raise ValueError("offset must have m entries")
        if self.extent < 1:
            raise ValueError("extent must be positive")
        rel = pts - np.asarray(off)
        if len(pts) and (rel.min() < 0 or rel.max() >= self.extent):
            raise ValueError("support leaves the declared box")
        if len({tuple(p) for p in pts}) != len(pts):
            raise ValueError("duplicate lattice points")
        pts.flags.writeable = False
        vals.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "offset", off)

    # construction
    @classmethod
    def from_mapping(cls, sig: Signature, m: int, values: Mapping[Sequence[int], Multivector],
                     extent: int | None = None, offset: Sequence[int] | None = None) -> "SampledField":
        pts = np.array([tuple(p) for p in values], dtype=np.int64).reshape(-1, m)
        vals = []
        for mv in values.values():
            if mv.sig != sig:
                raise SignatureMismatch(f"{mv.sig} vs {sig}")
            vals.append(mv.coeffs)
        if offset is None:
            offset = pts.min(axis=0) if len(pts) else np.zeros(m, int)
        if extent is None:
            extent = int((pts - np.asarray(offset)).max()) + 1 if len(pts) else 1
        return cls(sig, m, extent, tuple(offset), pts, np.array(vals).reshape(-1, sig.dim))

    @classmethod
    def delta(cls, sig: Signature, m: int, x: Sequence[int], value: Multivector) -> "SampledField":
        return cls.from_mapping(sig, m, {tuple(x): value})

    @classmethod
    def random(cls, sig: Signature, m: int, extent: int, rng: np.random.Generator,
               offset: Sequence[int] | None = None) -> "SampledField":
        """Every point of the box filled with coefficients uniform in ``[-1, 1]``."""
        offset = tuple(offset) if offset is not None else (0,) * m
        pts = np.array(list(itertools.product(range(extent), repeat=m)), dtype=np.int64)
        pts = pts.reshape(-1, m) + np.asarray(offset)
        vals = rng.uniform(-1.0, 1.0, size=(len(pts), sig.dim))
        return cls(sig, m, extent, offset, pts, vals)

    @classmethod
    def zeros(cls, sig: Signature, m: int, extent: int = 1) -> "SampledField":
        return cls(sig, m, extent, (0,) * m, np.zeros((0, m), int), np.zeros((0, sig.dim)))

    # access
    def __len__(self) -> int:
        return len(self.points)

    def value_at(self, x: Sequence[int]) -> Multivector:
        hit = np.flatnonzero(np.all(self.points == np.asarray(x), axis=1))
        if len(hit) == 0:
            return Multivector.zero(self.sig)
        return Multivector(self.sig, self.values[hit[0]])

    def with_values(self, values: np.ndarray) -> "SampledField":
        return SampledField(self.sig, self.m, self.extent, self.offset, self.points, values)

    def __add__(self, other: "SampledField") -> "SampledField":
        return _combine(self, other, 1.0)

    def __sub__(self, other: "SampledField") -> "SampledField":
        return _combine(self, other, -1.0)

    def scaled(self, factor: float) -> "SampledField":
        return self.with_values(self.values * factor)

    def as_dict(self) -> dict[tuple[int, ...], np.ndarray]:
        return {tuple(int(c) for c in p): v for p, v in zip(self.points, self.values)}

    # JSON
    def to_json(self) -> dict:
        return {
            "sig": self.sig.to_json(),
            "m": self.m,
            "extent": self.extent,
            "offset": list(self.offset),
            "values": [{"x": [int(c) for c in p], "coeffs": [float(c) for c in v]}
                       for p, v in zip(self.points, self.values)],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SampledField":
        try:
            sig = Signature.from_json(obj["sig"])
            m = int(obj["m"])
            entries = obj["values"]
            pts = np.array([e["x"] for e in entries], dtype=np.int64).reshape(-1, m)
            vals = np.array([e["coeffs"] for e in entries], dtype=float).reshape(-1, sig.dim)
            return cls(sig, m, int(obj["extent"]), tuple(obj["offset"]), pts, vals)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad field JSON: {exc}") from exc


def _combine(a: SampledField, b: SampledField, sb: float) -> SampledField:
    if a.sig != b.sig or a.m != b.m:
        raise SignatureMismatch("fields differ in algebra or dimension")
    acc = dict(a.as_dict())
    for p, v in b.as_dict().items():
        acc[p] = acc.get(p, 0.0) + sb * v
    lo = np.minimum(a.offset, b.offset)
    hi = np.maximum(np.asarray(a.offset) + a.extent, np.asarray(b.offset) + b.extent)
    pts = np.array(sorted(acc), dtype=np.int64).reshape(-1, a.m)
    vals = np.array([acc[tuple(p)] for p in pts]).reshape(-1, a.sig.dim)
    return SampledField(a.sig, a.m, int((hi - lo).max()), tuple(lo), pts, vals)


@dataclass(frozen=True, eq=False)
class FrequencySet:
    """Real test frequencies ``u``, one per row."""

    freqs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.freqs, dtype=float)
        if arr.ndim != 2 or len(arr) == 0:
            raise ValueError("need a nonempty (k, m) array of frequencies")
        arr.flags.writeable = False
        object.__setattr__(self, "freqs", arr)

    @property
    def m(self) -> int:
        return self.freqs.shape[1]

    def __len__(self) -> int:
        return len(self.freqs)

    @classmethod
    def random(cls, m: int, count: int, rng: np.random.Generator) -> "FrequencySet":
        return cls(rng.random((count, m)))

    @classmethod
    def lattice(cls, m: int, extent: int) -> "FrequencySet":
        """The points ``2 pi k / N`` for ``k`` in ``[0, N)^m``."""
        ks = np.array(list(itertools.product(range(extent), repeat=m)), dtype=float)
        return cls(2.0 * np.pi * ks / extent)

    def to_json(self) -> dict:
        return {"freqs": [[float(c) for c in u] for u in self.freqs]}

    @classmethod
    def from_json(cls, obj: dict) -> "FrequencySet":
        try:
            return cls(np.array(obj["freqs"], dtype=float))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad frequency JSON: {exc}") from exc


def load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: {exc}") from exc
