import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geofourier.algebra import Multivector, NotImaginary, NullBlade, ScaledBasisBlade, Signature, exp_imaginary
from geofourier.decomposition import (
    ExpShape,
    FlagViolation,
    Orientation,
    ShapeKind,
    TriangularSelector,
    all_bits,
    c_chain,
    c_chain_arrays,
    c_index_set,
    c_split,
    commutation_parity,
    enumerate_triangular,
    exp_decompose,
    move_through_product,
    product_of_shapes,
    sign_flip,
    split_shifted_product,
)
from geofourier.phases import cylindrical, quaternionic

G2 = Signature(2, 0)
E1, E2, E12 = (Multivector.blade(G2, i) for i in (1, 2, 3))


def brute_force_triangular(d, lower):
    """Every 0/1 matrix, filtered to strictly triangular ones, grouped by column parity."""
    mask = np.tril(np.ones((d, d)), -1) if lower else np.triu(np.ones((d, d)), 1)
    groups = {}
    for cells in itertools.product((0, 1), repeat=d * d):
        m = np.array(cells).reshape(d, d)
        if np.any(m * (1 - mask)):
            continue
        groups.setdefault(tuple(m.sum(axis=0) % 2), []).append(m)
    return groups


def test_c_split_examples():
    a = Multivector(G2, [2.0, 3.0, 5.0, 7.0])
    c0, c1 = c_split(a, E1)
    assert c0 == Multivector(G2, [2.0, 3.0, 0, 0])
    assert c0 + c1 == a
    assert c_split(E1, E1 + E2)[0] == Multivector(G2, [0, 0.5, 0.5, 0])
    one = Multivector.scalar(G2)
    assert c_split(a, one) == (a, Multivector.zero(G2))


def test_c_split_null_reference():
    sig = Signature(1, 1)
    with pytest.raises(NullBlade):
        c_split(Multivector.scalar(sig), Multivector.vector(sig, [1, 1]))


def test_c_split_conjugation_signs():
    rng = np.random.default_rng(3)
    sig = Signature(3, 1)
    for _ in range(20):
        a = Multivector(sig, rng.normal(size=16))
        b = Multivector.vector(sig, rng.normal(size=4)) ^ Multivector.vector(sig, rng.normal(size=4))
        binv = b.inverse()
        c0, c1 = c_split(a, b)
        assert (binv * c0 * b).isclose(c0, 1e-10)
        assert (binv * c1 * b).isclose(-c1, 1e-10)


def test_c_chain_examples():
    a = Multivector(G2, [2.0, 3.0, 5.0, 7.0])
    assert c_chain(a, [E1, E2], (0, 0)) == Multivector.scalar(G2, 2.0)
    assert c_chain(a, [E1, E2], (1, 1)) == Multivector.blade(G2, 3, 7.0)
    assert c_chain(a, [], ()) == a
    with pytest.raises(ValueError):
        c_chain(a, [E1], (0, 1))


def test_commutation_parity():
    assert commutation_parity(1, 1) == 0
    assert commutation_parity(2, 1) == 1
    assert commutation_parity(3, 3) == 0
    # e12 commutes with the perpendicular e3
    assert commutation_parity(3, 4) == 0


def test_index_set_examples():
    assert c_index_set([1], [0], G2) == {0, 1}
    assert c_index_set([1], [1], G2) == {2, 3}
    assert c_index_set([1, 2], [0, 0], G2) == {0}
    assert c_index_set([1, 2, 3], [1, 1, 1], G2) == frozenset()


def test_exp_decompose_examples():
    f = ScaledBasisBlade(0.9, 1, 3)
    assert exp_decompose(f, [3], [0], G2).kind is ShapeKind.FULL
    cos = exp_decompose(f, [1], [0], G2)
    assert cos.kind is ShapeKind.COSINE
    assert cos.expand(G2) == Multivector.scalar(G2, math.cos(0.9))
    sine = exp_decompose(f, [1], [1], G2)
    assert sine.kind is ShapeKind.SINE
    assert sine.expand(G2) == Multivector.blade(G2, 3, -math.sin(0.9))
    assert exp_decompose(f, [3], [1], G2).kind is ShapeKind.ZERO
    with pytest.raises(NotImaginary):
        exp_decompose(ScaledBasisBlade(1.0, 1, 1), [1], [0], G2)


def test_sine_shape_at_zero_magnitude():
    shape = ExpShape(ShapeKind.SINE, ScaledBasisBlade(0.0))
    assert shape.expand(G2) == Multivector.zero(G2)


def test_move_through_single_factor():
    theta = 0.4
    factor = ExpShape.full(ScaledBasisBlade(theta, 1, 3))
    terms = move_through_product(E1, [factor], "left")
    assert len(terms) == 1
    part, flipped = terms[0]
    assert part == E1
    assert flipped[0].f == ScaledBasisBlade(theta, -1, 3)
    assert (exp_imaginary(factor.f, G2) * E1).isclose(E1 * exp_imaginary(flipped[0].f, G2))
    assert move_through_product(E1, [], "left") == [(E1, [])]


def test_move_through_cosine():
    a = Multivector(G2, [1.0, 2.0, 3.0, 4.0])
    cos = ExpShape(ShapeKind.COSINE, ScaledBasisBlade(0.3, 1, 3))
    total = sum((p * product_of_shapes(fl, G2) for p, fl in move_through_product(a, [cos])),
                Multivector.zero(G2))
    assert total.isclose(cos.expand(G2) * a)


def test_enumerate_triangular_examples():
    assert [t.matrix for t in enumerate_triangular(1, (0,), "lower")] == [((0,),)]
    assert enumerate_triangular(1, (1,), "lower") == []
    assert [t.matrix for t in enumerate_triangular(2, (0, 0), "lower")] == [((0, 0), (0, 0))]
    assert [t.matrix for t in enumerate_triangular(2, (1, 0), "lower")] == [((0, 0), (1, 0))]
    assert [t.matrix for t in enumerate_triangular(2, (0, 1), "upper")] == [((0, 1), (0, 0))]
    total = sum(len(enumerate_triangular(3, p, "lower")) for p in all_bits(3))
    assert total == 8


@pytest.mark.parametrize("d", [1, 2, 3, 4])
@pytest.mark.parametrize("lower", [True, False])
def test_enumerate_triangular_matches_brute_force(d, lower):
    orient = Orientation.LOWER if lower else Orientation.UPPER
    groups = brute_force_triangular(d, lower)
    for parity in all_bits(d):
        got = sorted(t.as_array().tobytes() for t in enumerate_triangular(d, parity, orient))
        want = sorted(m.astype(int).tobytes() for m in groups.get(parity, []))
        assert got == want


def test_enumerate_triangular_limits():
    with pytest.raises(ValueError):
        enumerate_triangular(7, (0,) * 7, "lower")
    assert sum(len(enumerate_triangular(5, p, "upper")) for p in all_bits(5)) == 2 ** 10


def test_selector_windows():
    sel = TriangularSelector(((0, 0, 0), (1, 0, 0), (1, 1, 0)), Orientation.LOWER)
    assert sel.parity == (0, 1, 0)
    assert sel.row_window(1) == slice(0, 2)
    up = TriangularSelector(((0, 1, 1), (0, 0, 1), (0, 0, 0)), Orientation.UPPER)
    assert up.row_window(1) == slice(1, 3)


def test_sign_flip():
    spec = quaternionic()
    pair = list(spec.F1 + spec.F2)
    assert sign_flip(pair, (0, 0)) == pair
    flipped = sign_flip(pair, (1, 1))
    assert [p.sign for p in flipped] == [-1, -1]
    assert [p.sign for p in sign_flip(flipped, (1, 1))] == [1, 1]
    with pytest.raises(ValueError):
        sign_flip(pair, (1,))


@pytest.mark.parametrize("orientation", ["lower", "upper"])
def test_split_shifted_product_quaternionic(orientation):
    spec = quaternionic()
    phases = list(spec.F1 + spec.F2)
    rng = np.random.default_rng(8)
    for _ in range(10):
        x, y, u = rng.normal(size=(3, 2))
        direct = exp_imaginary(phases[0](x + y, u), spec.sig) * exp_imaginary(phases[1](x + y, u), spec.sig)
        terms = split_shifted_product(phases, x, y, u, orientation, prune=False)
        assert len(terms) == 2
        total = sum((t.expand(spec.sig) for t in terms), Multivector.zero(spec.sig))
        assert total.isclose(direct)


def test_split_shifted_product_single_phase():
    spec = cylindrical(2)
    x, y, u = np.array([1.0, 2.0]), np.array([-0.5, 0.25]), np.array([0.3, 0.7])
    terms = split_shifted_product(list(spec.F1), x, y, u)
    assert len(terms) == 1
    direct = exp_imaginary(spec.F1[0](x + y, u), spec.sig)
    assert terms[0].expand(spec.sig).isclose(direct)


def test_split_shifted_product_zero_phase():
    spec = quaternionic()
    zero = np.zeros(2)
    terms = split_shifted_product(list(spec.F1 + spec.F2), zero, zero, zero)
    assert all(s.kind is ShapeKind.FULL and s.f.magnitude == 0 for t in terms for s in t.left + t.right)
    assert sum((t.expand(spec.sig) for t in terms), Multivector.zero(spec.sig)) == Multivector.scalar(spec.sig)


def test_split_shifted_product_needs_flags():
    spec = cylindrical(3)
    with pytest.raises(FlagViolation):
        split_shifted_product(list(spec.F1), np.zeros(3), np.zeros(3), np.zeros(3))


def test_batched_chain_matches_scalar_chain():
    rng = np.random.default_rng(4)
    sig = Signature(3, 0)
    a = rng.normal(size=(5, 8))
    refs = [Multivector.vector(sig, rng.normal(size=3)), Multivector.blade(sig, 0b110, 2.0)]
    for bits in all_bits(2):
        got = c_chain_arrays(sig, a, [r.coeffs for r in refs], bits)
        for row, want in zip(got, a):
            assert Multivector(sig, row).isclose(c_chain(Multivector(sig, want), refs, bits))


sig_strategy = st.sampled_from([Signature(2, 0), Signature(0, 2), Signature(3, 0), Signature(3, 1), Signature(4, 0)])


@settings(max_examples=50, deadline=None)
@given(sig_strategy, st.integers(0, 2 ** 32 - 1), st.integers(1, 3))
def test_completeness_and_swap(sig, seed, d):
    rng = np.random.default_rng(seed)
    a = Multivector(sig, rng.uniform(-1, 1, sig.dim))
    blades = []
    while len(blades) < d:
        b = Multivector.vector(sig, rng.normal(size=sig.n))
        if abs((b * b).scalar_part) > 0.1:
            blades.append(b)
    prod = blades[0]
    for b in blades[1:]:
        prod = prod * b
    parts = {j: c_chain(a, blades, j) for j in all_bits(d)}
    assert sum(parts.values(), Multivector.zero(sig)).isclose(a, 1e-12)
    signed = sum(((-1) ** sum(j) * p for j, p in parts.items()), Multivector.zero(sig))
    assert (a * prod).isclose(prod * signed, 1e-10 * max(1.0, prod.norm_inf()))


@settings(max_examples=50, deadline=None)
@given(sig_strategy, st.integers(0, 2 ** 32 - 1), st.integers(1, 4))
def test_index_sets_partition_and_order_independence(sig, seed, d):
    rng = np.random.default_rng(seed)
    refs = [int(i) for i in rng.integers(1, sig.dim, d)]
    sets = [c_index_set(refs, l, sig) for l in all_bits(d)]
    assert sum(len(s) for s in sets) == sig.dim
    assert set().union(*sets) == set(range(sig.dim))
    a = Multivector(sig, rng.uniform(-1, 1, sig.dim))
    blades = [Multivector.blade(sig, r, float(rng.choice([-2.0, 0.5, 1.0]))) for r in refs]
    bits = tuple(int(b) for b in rng.integers(0, 2, d))
    forward = c_chain(a, blades, bits, "ltr")
    assert forward == c_chain(a, blades, bits, "rtl")
    perm = rng.permutation(d)
    assert forward == c_chain(a, [blades[p] for p in perm], [bits[p] for p in perm])
    masked = np.where([i in c_index_set(refs, bits, sig) for i in range(sig.dim)], a.coeffs, 0.0)
    assert forward == Multivector(sig, masked)


@settings(max_examples=50, deadline=None)
@given(sig_strategy, st.integers(0, 2 ** 32 - 1), st.integers(1, 3))
def test_shape_fidelity(sig, seed, d):
    rng = np.random.default_rng(seed)
    imag = [i for i in range(1, sig.dim) if sig.tables.square[i] < 0]
    f = ScaledBasisBlade(float(rng.uniform(0, 7)), int(rng.choice([-1, 1])), int(rng.choice(imag)))
    refs = [int(i) for i in rng.integers(1, sig.dim, d)]
    bits = tuple(int(b) for b in rng.integers(0, 2, d))
    shape = exp_decompose(f, refs, bits, sig)
    want = c_chain(exp_imaginary(f, sig), [Multivector.blade(sig, r) for r in refs], bits)
    assert shape.expand(sig).isclose(want, 1e-12)
