"""Phase functions and the named transform catalogue.

A phase maps ``(x, u)`` to an imaginary blade.  Separable phases are stored
as ``coefficient(x, u) * unit(u)`` so that the blade direction at a given
frequency can be read off without evaluating at any particular ``x``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebra import (
    CliffordError,
    Multivector,
    NotABlade,
    NotImaginary,
    ScaledBasisBlade,
    Signature,
    STRUCTURE_TOL,
    basis_blade_of,
    scalar_square_arrays,
)
from .blades import FactoredBlade, coorthogonal_basis, express_in_basis
from .decomposition import FlagViolation

TWO_PI = 2.0 * math.pi


class UnsupportedSignature(CliffordError):
    """A catalogue transform was requested in an algebra it is not defined for."""


Coefficient = Callable[[np.ndarray, np.ndarray], np.ndarray]
UnitField = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class PhaseFunction:
    """``f(x, u)`` with values in the imaginary blades of ``sig``.

    Either ``coefficient`` and ``unit`` are given (separable form) or
    ``general`` maps coordinate batches straight to coefficient arrays.
    ``unit`` is a fixed coefficient vector or a function of ``u``.
    """

    name: str
    sig: Signature
    m: int
    coefficient: Coefficient | None = None
    unit: np.ndarray | UnitField | None = None
    general: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    sign: int = 1
    coorthogonal_family: bool = True
    separable: bool = True
    linear_in_x: bool = True
    basis_hint: np.ndarray | None = None

    def __post_init__(self):
        if (self.coefficient is None) == (self.general is None):
            raise ValueError("give either coefficient+unit or a general evaluator")
        if self.coefficient is not None and self.unit is None:
            raise ValueError("separable form needs a unit blade")
        if self.general is not None and self.separable:
            raise ValueError("a general evaluator cannot be flagged separable")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    def _unit_at(self, u: np.ndarray) -> np.ndarray:
        if callable(self.unit):
            return np.asarray(self.unit(u), dtype=float)
        return np.broadcast_to(np.asarray(self.unit, dtype=float),
                               u.shape[:-1] + (self.sig.dim,))

    def values(self, x, u) -> np.ndarray:
        """Coefficient arrays of ``f(x, u)`` for broadcast batches ``(..., m)``."""
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        if x.shape[-1] != self.m or u.shape[-1] != self.m:
            raise ValueError(f"{self.name}: arguments must have last axis {self.m}")
        if self.general is not None:
            return self.sign * np.asarray(self.general(x, u), dtype=float)
        coeff = np.asarray(self.coefficient(x, u), dtype=float)
        return self.sign * coeff[..., None] * self._unit_at(u)

    def direction(self, u) -> np.ndarray:
        """The x-independent blade ``i(u)`` of a separable phase, sign included."""
        if not self.separable:
            raise FlagViolation(f"phase {self.name} is not separable")
        u = np.asarray(u, dtype=float)
        return self.sign * self._unit_at(u)

    def _read_blade(self, coeffs: np.ndarray) -> ScaledBasisBlade:
        mv = Multivector(self.sig, coeffs)
        try:
            return basis_blade_of(mv)
        except NotABlade:
            if self.basis_hint is None:
                raise
        # index is relative to the hint frame
        scale, index = express_in_basis(mv, self.basis_hint)
        return ScaledBasisBlade.from_real(scale, index)

    def __call__(self, x, u) -> ScaledBasisBlade:
        value = self.values(np.asarray(x, float)[None], np.asarray(u, float)[None])[0]
        if scalar_square_arrays(self.sig, value) > STRUCTURE_TOL * max(1.0, float(value @ value)):
            raise NotImaginary(f"{self.name} evaluates to a blade squaring to +1")
        return self._read_blade(value)

    def direction_blade(self, u) -> ScaledBasisBlade:
        return self._read_blade(self.direction(np.asarray(u, float)[None])[0])

    def negated(self) -> "PhaseFunction":
        name = self.name[1:] if self.name.startswith("-") else "-" + self.name
        return dataclasses.replace(self, name=name, sign=-self.sign)


def _dot(x: np.ndarray, u: np.ndarray) -> np.ndarray:
    return np.sum(x * u, axis=-1)


def _component(l: int) -> Coefficient:
    return lambda x, u: x[..., l] * u[..., l]


def _blade_vector(sig: Signature, index: int, value: float = 1.0) -> np.ndarray:
    return Multivector.blade(sig, index, value).coeffs.copy()


@dataclass(frozen=True, eq=False)
class GFTSpec:
    """Left phases ``F1`` and right phases ``F2`` of a geometric Fourier transform."""

    name: str
    sig: Signature
    m: int
    F1: tuple[PhaseFunction, ...] = ()
    F2: tuple[PhaseFunction, ...] = ()
    skip_reason: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "F1", tuple(self.F1))
        object.__setattr__(self, "F2", tuple(self.F2))
        for p in self.F1 + self.F2:
            if p.sig != self.sig or p.m != self.m:
                raise ValueError(f"phase {p.name} does not match {self.sig}, m={self.m}")

    @property
    def mu(self) -> int:
        return len(self.F1)

    @property
    def nu(self) -> int:
        return len(self.F1) + len(self.F2)

    @property
    def phases(self) -> tuple[PhaseFunction, ...]:
        return self.F1 + self.F2

    def require_theorem_flags(self) -> None:
        """Raise unless every phase is coorthogonal, separable and linear in x."""
        if self.skip_reason:
            raise FlagViolation(self.skip_reason)
        for p in self.phases:
            missing = [flag for flag in ("coorthogonal_family", "separable", "linear_in_x")
                       if not getattr(p, flag)]
            if missing:
                raise FlagViolation(f"phase {p.name} lacks {', '.join(missing)}")

    def within_sets_commute(self, freqs: np.ndarray, tol: float = 1e-12) -> bool:
        """Whether the phases inside F1, and inside F2, commute at every frequency."""
        from .algebra import geometric_product_arrays

        freqs = np.asarray(freqs, dtype=float)
        for group in (self.F1, self.F2):
            dirs = [p.direction(freqs) for p in group]
            for a in range(len(dirs)):
                for b in range(a + 1, len(dirs)):
                    ab = geometric_product_arrays(self.sig, dirs[a], dirs[b])
                    ba = geometric_product_arrays(self.sig, dirs[b], dirs[a])
                    if np.abs(ab - ba).max() > tol:
                        return False
        return True

    def flipped(self, j: Sequence[int] = (), k: Sequence[int] = ()) -> "GFTSpec":
        from .decomposition import sign_flip

        j = tuple(j) or (0,) * self.mu
        k = tuple(k) or (0,) * (self.nu - self.mu)
        return dataclasses.replace(self, F1=tuple(sign_flip(self.F1, j)),
                                   F2=tuple(sign_flip(self.F2, k)))


# -- catalogue --------------------------------------------------------------

def clifford_ft(n: int) -> GFTSpec:
    """Right-sided kernel ``exp(-2 pi i_n x.u)`` in G(n, 0), ``n = 2, 3 mod 4``."""
    if not 2 <= n <= 8 or n % 4 not in (2, 3):
        raise UnsupportedSignature(f"clifford_ft needs n = 2 or 3 mod 4, got n={n}")
    sig = Signature(n, 0)
    phase = PhaseFunction("2pi*I*x.u", sig, n,
                          coefficient=lambda x, u: TWO_PI * _dot(x, u),
                          unit=_blade_vector(sig, sig.pseudoscalar_index))
    return GFTSpec(f"clifford_ft({n})", sig, n, F2=(phase,))


def sommen_bulow(n: int) -> GFTSpec:
    """Product of ``exp(-2 pi e_l x_l u_l)`` on the right, in G(0, n)."""
    if not 1 <= n <= 8:
        raise UnsupportedSignature(f"sommen_bulow needs 1 <= n <= 8, got n={n}")
    sig = Signature(0, n)
    phases = tuple(
        PhaseFunction(f"2pi*e{l + 1}*x{l + 1}u{l + 1}", sig, n,
                      coefficient=lambda x, u, l=l: TWO_PI * x[..., l] * u[..., l],
                      unit=_blade_vector(sig, 1 << l))
        for l in range(n))
    return GFTSpec(f"sommen_bulow({n})", sig, n, F2=phases)


def quaternionic() -> GFTSpec:
    """Two-sided quaternion kernel with ``i = e1``, ``j = e2`` in G(0, 2)."""
    sig = Signature(0, 2)
    left = PhaseFunction("2pi*i*x1u1", sig, 2,
                         coefficient=lambda x, u: TWO_PI * x[..., 0] * u[..., 0],
                         unit=_blade_vector(sig, 0b01))
    right = PhaseFunction("2pi*j*x2u2", sig, 2,
                          coefficient=lambda x, u: TWO_PI * x[..., 1] * u[..., 1],
                          unit=_blade_vector(sig, 0b10))
    return GFTSpec("quaternionic", sig, 2, F1=(left,), F2=(right,))


def spacetime() -> GFTSpec:
    """Left time phase ``e4 x4 u4``, right space phase along ``eps4 e4 I4`` in G(3, 1)."""
    sig = Signature(3, 1)
    e4 = Multivector.blade(sig, 0b1000)
    space_unit = sig.eps[3] * (e4 * Multivector.blade(sig, sig.pseudoscalar_index))
    left = PhaseFunction("e4*x4u4", sig, 4, coefficient=_component(3), unit=e4.coeffs.copy())
    right = PhaseFunction("eps4*e4*I4*(x1u1+x2u2+x3u3)", sig, 4,
                          coefficient=lambda x, u: _dot(x[..., :3], u[..., :3]),
                          unit=space_unit.coeffs.copy())
    return GFTSpec("spacetime", sig, 4, F1=(left,), F2=(right,))


def color_image(b: FactoredBlade | Multivector | None = None) -> GFTSpec:
    """Colour-image kernel built from a unit bivector ``B`` and its dual ``I B`` in G(4, 0)."""
    sig = Signature(4, 0)
    if b is None:
        b = FactoredBlade.basis(sig, 0b0011)
    if isinstance(b, Multivector):
        raise UnsupportedSignature("color_image needs B as a factored blade")
    if b.sig != sig or b.grade != 2:
        raise UnsupportedSignature("color_image needs a bivector blade of G(4,0)")
    bmv = b.expand()
    if abs((bmv * bmv).scalar_part + 1.0) > 1e-9:
        raise UnsupportedSignature("color_image needs a unit bivector (B*B = -1)")
    dual = Multivector.blade(sig, sig.pseudoscalar_index) * bmv
    hint = coorthogonal_basis([b, FactoredBlade.from_vectors(sig, _dual_vectors(b))]).basis

    def half_dot(x, u):
        return 0.5 * _dot(x, u)

    f1 = PhaseFunction("B*(x.u)/2", sig, 2, coefficient=half_dot, unit=bmv.coeffs.copy(),
                       basis_hint=hint)
    f2 = PhaseFunction("IB*(x.u)/2", sig, 2, coefficient=half_dot, unit=dual.coeffs.copy(),
                       basis_hint=hint)
    return GFTSpec("color_image", sig, 2, F1=(f1, f2), F2=(f1.negated(), f2.negated()))


def _dual_vectors(b: FactoredBlade) -> np.ndarray:
    """Two vectors spanning the Euclidean orthogonal complement of ``b``."""
    import scipy.linalg

    return scipy.linalg.null_space(b.span()).T


def cylindrical(n: int) -> GFTSpec:
    """Left kernel ``exp(x ^ u)`` in G(0, n); separable only for ``n = 2``."""
    if not 2 <= n <= 8:
        raise UnsupportedSignature(f"cylindrical needs 2 <= n <= 8, got n={n}")
    sig = Signature(0, n)
    if n == 2:
        phase = PhaseFunction("-x^u", sig, 2,
                              coefficient=lambda x, u: -(x[..., 0] * u[..., 1] - x[..., 1] * u[..., 0]),
                              unit=_blade_vector(sig, 0b11))
        return GFTSpec("cylindrical(2)", sig, 2, F1=(phase,))
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]

    def wedge(x, u):
        x, u = np.broadcast_arrays(x, u)
        out = np.zeros(x.shape[:-1] + (sig.dim,))
        for a, b in pairs:
            out[..., (1 << a) | (1 << b)] = -(x[..., a] * u[..., b] - x[..., b] * u[..., a])
        return out

    phase = PhaseFunction("-x^u", sig, n, general=wedge, separable=False, coorthogonal_family=False)
    return GFTSpec(f"cylindrical({n})", sig, n, F1=(phase,),
                   skip_reason=f"cylindrical({n}) is not separable for n > 2")


CATALOGUE = {
    "clifford": clifford_ft,
    "sommen_bulow": sommen_bulow,
    "quaternionic": quaternionic,
    "spacetime": spacetime,
    "color_image": color_image,
    "cylindrical": cylindrical,
}


def build(name: str, n: int | None = None) -> GFTSpec:
    """Look up a catalogue transform by CLI name; ``n`` is required where it matters."""
    try:
        factory = CATALOGUE[name]
    except KeyError:
        raise UnsupportedSignature(f"unknown transform {name!r}") from None
    if name in ("clifford", "sommen_bulow", "cylindrical"):
        if n is None:
            raise UnsupportedSignature(f"{name} needs an algebra dimension")
        return factory(n)
    return factory()
