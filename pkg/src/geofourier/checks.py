"""Seeded property suites shared by ``selftest`` and the acceptance tests.

Each check returns a :class:`CheckResult` carrying the worst deviation it
saw; a check passes when that deviation is below its tolerance.  Exact
checks report a deviation of 0 and use a tolerance of 1e-300 (so a
tolerance override of 0 fails them, as it should).
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .algebra import Multivector, ScaledBasisBlade, Signature, exp_imaginary, is_imaginary_index
from .blades import FactoredBlade, NotCoorthogonal, coorthogonal_basis
from .convolution import Variant, convolve, product_formula, verify
from .decomposition import (
    ExpShape,
    ShapeKind,
    all_bits,
    c_chain,
    c_index_set,
    c_split,
    exp_decompose,
    mask_along_basis,
    move_through_product,
    product_of_shapes,
    split_shifted_product,
)
from .fields import FrequencySet, SampledField
from .phases import (
    GFTSpec,
    PhaseFunction,
    clifford_ft,
    color_image,
    cylindrical,
    quaternionic,
    sommen_bulow,
    spacetime,
)
from .transforms import gft_forward

EXACT = 1e-300
LEMMA_ALGEBRAS = ((2, 0), (0, 2), (3, 0), (3, 1), (4, 0))


@dataclass
class CheckResult:
    name: str
    max_dev: float
    tol: float
    instances: int = 1
    detail: str = ""
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.max_dev < self.tol

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return (f"{status} {self.name}: max_dev={self.max_dev:.3e} tol={self.tol:.0e} "
                f"n={self.instances} {self.seconds:.2f}s{extra}")


@dataclass
class _Worst:
    value: float = 0.0
    count: int = 0

    def add(self, dev: float) -> None:
        self.value = max(self.value, float(dev))
        self.count += 1


def _timed(fn: Callable[[], CheckResult]) -> CheckResult:
    start = time.perf_counter()
    res = fn()
    res.seconds = time.perf_counter() - start
    return res


# -- random objects -----------------------------------------------------------

def random_multivector(sig: Signature, rng: np.random.Generator) -> Multivector:
    return Multivector(sig, rng.uniform(-1.0, 1.0, sig.dim))


def random_blade(sig: Signature, rng: np.random.Generator, min_square: float = 0.05) -> Multivector:
    """Wedge of random vectors, redrawn until comfortably invertible."""
    while True:
        k = int(rng.integers(1, sig.n + 1))
        blade = FactoredBlade.from_vectors(sig, rng.normal(size=(k, sig.n))).expand()
        if abs((blade * blade).scalar_part) > min_square:
            return blade


def random_scaled_basis(sig: Signature, rng: np.random.Generator) -> Multivector:
    index = int(rng.integers(1, sig.dim))
    return Multivector.blade(sig, index, float(rng.choice([-2.0, -1.0, -0.5, 0.5, 1.0, 2.0])))


def imaginary_indices(sig: Signature) -> list[int]:
    return [i for i in range(1, sig.dim) if is_imaginary_index(i, sig)]


def random_phase_family(sig: Signature, m: int, d: int,
                        rng: np.random.Generator) -> list[PhaseFunction]:
    """``d`` separable linear phases ``(sum_i a_i x_i u_i) e_k`` on random imaginary basis blades."""
    choices = imaginary_indices(sig)
    out = []
    for l in range(d):
        weights = rng.normal(size=m)
        index = int(rng.choice(choices))
        out.append(PhaseFunction(f"phase{l}", sig, m,
                                 coefficient=lambda x, u, w=weights: np.sum(w * x * u, axis=-1),
                                 unit=Multivector.blade(sig, index).coeffs.copy()))
    return out


# -- acceptance 1: worked examples ----------------------------------------------

def worked_examples() -> list[CheckResult]:
    g2 = Signature(2, 0)
    e1, e2 = Multivector.blade(g2, 1), Multivector.blade(g2, 2)
    a = Multivector(g2, [3.0, 5.0, 7.0, 11.0])
    results = []

    def exact(name, ok, detail=""):
        results.append(CheckResult(name, 0.0 if ok else 1.0, EXACT, detail=detail))

    exact("split of a general G(2,0) element against e1",
          c_split(a, e1)[0] == Multivector(g2, [3.0, 5.0, 0.0, 0.0]))
    exact("split of e1 against e1+e2",
          c_split(e1, e1 + e2)[0] == Multivector(g2, [0.0, 0.5, 0.5, 0.0]))
    exact("index set commuting with e1",
          c_index_set([1], [0], g2) == {0, 1})
    exact("index set anticommuting with e1",
          c_index_set([1], [1], g2) == {2, 3})
    exact("index set commuting with e1 and e2",
          c_index_set([1, 2], [0, 0], g2) == {0})
    exact("anticommuting with e1, e2 and e12 is empty",
          c_index_set([1, 2, 3], [1, 1, 1], g2) == frozenset())
    exact("chain (0,0) over (e1,e2) keeps the scalar",
          c_chain(a, [e1, e2], (0, 0)) == Multivector(g2, [3.0, 0, 0, 0]))
    exact("chain (1,1) over (e1,e2) keeps e12",
          c_chain(a, [e1, e2], (1, 1)) == Multivector(g2, [0, 0, 0, 11.0]))
    return results


# -- acceptance 2: lemma suite --------------------------------------------------

def _lemma_checks(sig: Signature, rng: np.random.Generator, instances: int) -> list[CheckResult]:
    tag = f"G({sig.p},{sig.q})"
    complete, swap, mirror = _Worst(), _Worst(), _Worst()
    order, along, cover, shapes = _Worst(), _Worst(), _Worst(), _Worst()
    move_exp, move_trig, shift = _Worst(), _Worst(), _Worst()
    imag = imaginary_indices(sig)

    for _ in range(instances):
        a = random_multivector(sig, rng)
        d = int(rng.integers(1, 4))
        blades = [random_blade(sig, rng) for _ in range(d)]
        prod = Multivector.scalar(sig)
        for b in blades:
            prod = prod * b
        total = Multivector.zero(sig)
        signed_ltr = Multivector.zero(sig)
        signed_rtl = Multivector.zero(sig)
        for j in all_bits(d):
            part = c_chain(a, blades, j, "ltr")
            total = total + part
            signed_ltr = signed_ltr + (-1) ** sum(j) * part
            signed_rtl = signed_rtl + (-1) ** sum(j) * c_chain(a, blades, j, "rtl")
        scale = max(1.0, prod.norm_inf())
        complete.add((total - a).norm_inf())
        swap.add((a * prod - prod * signed_ltr).norm_inf() / scale)
        mirror.add((prod * a - signed_rtl * prod).norm_inf() / scale)

        # scaled basis references: both directions and any order agree exactly
        refs = [random_scaled_basis(sig, rng) for _ in range(d)]
        j = tuple(int(b) for b in rng.integers(0, 2, d))
        base = c_chain(a, refs, j, "ltr")
        perm = rng.permutation(d)
        same = (base == c_chain(a, refs, j, "rtl")
                and base == c_chain(a, [refs[p] for p in perm], [j[p] for p in perm]))
        order.add(0.0 if same else np.inf)

        # unit basis references: chain equals coefficient masking
        indices = [int(i) for i in rng.integers(1, sig.dim, d)]
        units = [Multivector.blade(sig, i) for i in indices]
        along.add(0.0 if c_chain(a, units, j) == mask_along_basis(a, indices, j) else np.inf)
        sets = [c_index_set(indices, l, sig) for l in all_bits(d)]
        disjoint = all(not (s & t) for s, t in itertools.combinations(sets, 2))
        covers = set().union(*sets) == set(range(sig.dim))
        cover.add(0.0 if disjoint and covers else np.inf)

        # exponential shapes
        f = ScaledBasisBlade(float(rng.uniform(0, 2 * np.pi)), int(rng.choice([-1, 1])),
                             int(rng.choice(imag)))
        l = tuple(int(b) for b in rng.integers(0, 2, d))
        shape = exp_decompose(f, indices, l, sig)
        shapes.add((shape.expand(sig) - c_chain(exp_imaginary(f, sig), units, l)).norm_inf())

        # moving A through exponential and trigonometric factors
        fs = [ScaledBasisBlade(float(rng.uniform(0, 2 * np.pi)), int(rng.choice([-1, 1])),
                               int(rng.choice(imag))) for _ in range(d)]
        full = [ExpShape.full(x) for x in fs]
        trig = [ExpShape(ShapeKind(rng.choice([k.value for k in ShapeKind])), x) for x in fs]
        for factors, acc in ((full, move_exp), (trig, move_trig)):
            pf = product_of_shapes(factors, sig)
            left = sum((p * product_of_shapes(fl, sig) for p, fl in move_through_product(a, factors, "left")),
                       Multivector.zero(sig))
            right = sum((product_of_shapes(fl, sig) * p for p, fl in move_through_product(a, factors, "right")),
                        Multivector.zero(sig))
            acc.add(max((left - pf * a).norm_inf(), (right - a * pf).norm_inf()))

        # splitting a product of shifted exponentials
        phases = random_phase_family(sig, 2, d, rng)
        x, y, u = rng.normal(size=(3, 2))
        direct = Multivector.scalar(sig)
        for p in phases:
            direct = direct * exp_imaginary(p(x + y, u), sig)
        for orientation in ("lower", "upper"):
            terms = split_shifted_product(phases, x, y, u, orientation)
            summed = sum((t.expand(sig) for t in terms), Multivector.zero(sig))
            shift.add((summed - direct).norm_inf())

    def res(name, w, tol=1e-12):
        return CheckResult(f"{tag} {name}", w.value, tol, w.count)

    return [
        res("completeness of chained splits", complete),
        res("A*B1..Bd swap identity", swap),
        res("B1..Bd*A mirrored swap identity", mirror),
        res("order independence for basis references", order, EXACT),
        res("chain equals masking by index set", along, EXACT),
        res("index sets partition the basis", cover, EXACT),
        res("exponential shape fidelity", shapes),
        res("moving through exponentials", move_exp),
        res("moving through trigonometric shapes", move_trig),
        res("shifted product split (both orientations)", shift),
    ]


def lemma_suite(seed: int = 0, instances: int = 100,
                algebras: Sequence[tuple[int, int]] = LEMMA_ALGEBRAS) -> list[CheckResult]:
    out = []
    for p, q in algebras:
        rng = np.random.default_rng([seed, p, q])
        start = time.perf_counter()
        batch = _lemma_checks(Signature(p, q), rng, instances)
        per = (time.perf_counter() - start) / len(batch)
        for r in batch:
            r.seconds = per
        out.extend(batch)
    return out


# -- acceptance 3 / 4: convolution ---------------------------------------------

def theorem_specs(quick: bool = False) -> list[GFTSpec]:
    specs = [clifford_ft(2), clifford_ft(3), sommen_bulow(2), sommen_bulow(3),
             quaternionic(), spacetime(), color_image(), cylindrical(2)]
    if quick:
        specs = [s for s in specs if s.sig.n <= 3]
    return specs


def random_pair(spec: GFTSpec, rng: np.random.Generator, extent: int = 4):
    c = SampledField.random(spec.sig, spec.m, extent, rng)
    b = SampledField.random(spec.sig, spec.m, extent, rng)
    return c, b


def convolution_suite(seeds: Sequence[int] = range(5), specs: Sequence[GFTSpec] | None = None,
                      tol: float = 1e-9, extent: int = 4, nfreq: int = 16) -> list[CheckResult]:
    out = []
    for spec in specs if specs is not None else theorem_specs():
        def run(spec=spec):
            worst, corollary, count = 0.0, 0.0, 0
            for seed in seeds:
                rng = np.random.default_rng([seed, 31])
                c, b = random_pair(spec, rng, extent)
                freqs = FrequencySet.random(spec.m, nfreq, rng)
                names = list(Variant)
                if spec.within_sets_commute(freqs.freqs):
                    names += ["around-C", "around-B"]
                report = verify(c, b, spec, names, freqs, tol)
                for r in report.results:
                    if r.variant.startswith("around"):
                        corollary = max(corollary, r.max_dev)
                    else:
                        worst = max(worst, r.max_dev)
                count += len(report.results)
            detail = "V1-V8" + (f", corollary {corollary:.1e}" if corollary else "")
            return CheckResult(f"convolution theorem {spec.name}", max(worst, corollary), tol,
                               count, detail)
        out.append(_timed(run))
    return out


def central_collapse(seed: int = 0, tol: float = 1e-9) -> CheckResult:
    def run():
        spec = clifford_ft(3)
        rng = np.random.default_rng([seed, 47])
        c, b = random_pair(spec, rng)
        freqs = FrequencySet.random(3, 16, rng)
        lhs = gft_forward(convolve(c, b), spec, freqs)
        dev = lhs.deviation(product_formula(c, b, spec, freqs)).max()
        return CheckResult("product formula for clifford_ft(3)", float(dev), tol, len(freqs))
    return _timed(run)


def negative_controls(seed: int = 0, threshold: float = 1e-3,
                      specs: Sequence[GFTSpec] | None = None) -> list[CheckResult]:
    """Negating the largest summand must move the right-hand side by more than ``threshold``.

    Reported as a pass when the smallest such deviation exceeds the
    threshold; ``max_dev`` holds ``threshold / smallest`` so that the usual
    "below tolerance 1" rule applies.
    """
    out = []
    for spec in specs if specs is not None else theorem_specs():
        def run(spec=spec):
            rng = np.random.default_rng([seed, 59])
            c, b = random_pair(spec, rng)
            freqs = FrequencySet.random(spec.m, 16, rng)
            smallest = np.inf
            for v in Variant:
                rep = verify(c, b, spec, [v], freqs, mutate="largest")
                smallest = min(smallest, rep.max_dev)
            return CheckResult(f"sign mutation detected for {spec.name}", threshold / smallest, 1.0,
                               len(Variant), f"smallest mutated deviation {smallest:.2e}")
        out.append(_timed(run))
    return out


# -- acceptance 5: coorthogonal basis ------------------------------------------

def random_coorthogonal_set(rng: np.random.Generator) -> tuple[Signature, list[FactoredBlade]]:
    n = int(rng.integers(2, 6))
    sig = Signature(n, 0) if rng.random() < 0.5 else Signature(0, n)
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    count = int(rng.integers(1, min(4, 2 ** n - 1) + 1))
    indices = rng.choice(np.arange(1, 2 ** n), size=count, replace=False)
    blades = []
    for idx in indices:
        rows = [q[i] for i in range(n) if idx >> i & 1]
        blades.append(FactoredBlade(sig, np.array(rows), float(rng.uniform(0.5, 2.0))))
    return sig, blades


def algorithm1_suite(seed: int = 0, sets: int = 50, tol: float = 1e-9) -> list[CheckResult]:
    def positive():
        rng = np.random.default_rng([seed, 71])
        worst = _Worst()
        for _ in range(sets):
            sig, blades = random_coorthogonal_set(rng)
            res = coorthogonal_basis(blades)
            gram = res.gram()
            worst.add(np.abs(np.abs(gram) - np.eye(len(gram))).max())
            for k, b in enumerate(blades):
                worst.add((res.reconstruct(k) - b.expand()).norm_inf())
        return CheckResult("coorthogonal basis round trip and Gram", worst.value, tol, worst.count)

    def negative():
        rng = np.random.default_rng([seed, 73])
        rejected = 0
        for _ in range(sets):
            n = int(rng.integers(2, 6))
            sig = Signature(n, 0)
            v = rng.normal(size=n)
            w = rng.normal(size=n)
            try:
                coorthogonal_basis([FactoredBlade.from_vectors(sig, [v]),
                                    FactoredBlade.from_vectors(sig, [w])])
            except NotCoorthogonal:
                rejected += 1
        return CheckResult("non-coorthogonal sets rejected", float(sets - rejected), 0.5, sets)

    return [_timed(positive), _timed(negative)]


# -- selftest ---------------------------------------------------------------------

def all_checks(seed: int = 0, quick: bool = False) -> list[CheckResult]:
    algebras = [a for a in LEMMA_ALGEBRAS if sum(a) <= 3] if quick else LEMMA_ALGEBRAS
    instances = 20 if quick else 100
    specs = theorem_specs(quick)
    seeds = [seed] if quick else [seed + i for i in range(5)]
    results = worked_examples()
    results += lemma_suite(seed, instances, algebras)
    results += convolution_suite(seeds, specs)
    results.append(central_collapse(seed))
    results += algorithm1_suite(seed, 10 if quick else 50)
    results += negative_controls(seed, specs=specs)
    return results
