import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geofourier.algebra import (
    Multivector,
    NotABlade,
    NotImaginary,
    NullBlade,
    ScaledBasisBlade,
    Signature,
    SignatureMismatch,
    basis_blade_of,
    basis_blade_product,
    blade_inverse,
    commutation_sign,
    exp_imaginary,
    grade_project,
    parse_blade,
    unit_exp_arrays,
)


def naive_product(j, k, eps):
    """Multiply basis blades by concatenating generator lists and bubble sorting."""
    word = [i for i in range(len(eps)) if j >> i & 1] + [i for i in range(len(eps)) if k >> i & 1]
    sign = 1
    changed = True
    while changed:
        changed = False
        for a in range(len(word) - 1):
            if word[a] > word[a + 1]:
                word[a], word[a + 1] = word[a + 1], word[a]
                sign = -sign
                changed = True
    out = []
    for g in word:
        if out and out[-1] == g:
            out.pop()
            sign *= eps[g]
        else:
            out.append(g)
    return sign, sum(1 << g for g in out)


def series_exp_minus(sig, f_coeffs, terms=60):
    """exp(-F) by truncated power series."""
    f = Multivector(sig, f_coeffs)
    out = Multivector.scalar(sig)
    term = Multivector.scalar(sig)
    for k in range(1, terms):
        term = term * (-f) / k
        out = out + term
    return out


SIGS = [Signature(2, 0), Signature(0, 2), Signature(3, 0), Signature(3, 1), Signature(1, 3), Signature(2, 2)]


@pytest.mark.parametrize("sig", SIGS, ids=str)
def test_product_table_matches_naive_oracle(sig):
    for j in range(sig.dim):
        for k in range(sig.dim):
            assert basis_blade_product(j, k, sig) == naive_product(j, k, sig.eps)


def test_small_products():
    g2 = Signature(2, 0)
    e1, e2, e12 = (Multivector.blade(g2, n) for n in ("e1", "e2", "e12"))
    assert e1 * e2 == e12
    assert e2 * e1 == -e12
    assert e12 * e12 == Multivector.scalar(g2, -1.0)
    assert e1.lc(e12) == e2
    assert (e1 + e2) ^ e2 == e12


def test_metric_signs():
    sig = Signature(1, 1)
    e1, e2 = Multivector.blade(sig, 1), Multivector.blade(sig, 2)
    assert e1 * e1 == Multivector.scalar(sig, 1.0)
    assert e2 * e2 == Multivector.scalar(sig, -1.0)
    # anticommutator of distinct generators vanishes
    assert e1 * e2 + e2 * e1 == Multivector.zero(sig)


def test_commutation_sign_agrees_with_products():
    sig = Signature(3, 1)
    for j in range(sig.dim):
        for k in range(sig.dim):
            s1, _ = basis_blade_product(j, k, sig)
            s2, _ = basis_blade_product(k, j, sig)
            if s1 == 0:
                continue
            assert commutation_sign(j, k) == s1 * s2


def test_parse_blade_and_errors():
    assert parse_blade("e12") == 3
    assert parse_blade("e4") == 8
    with pytest.raises(ValueError):
        Signature(5, 4)
    with pytest.raises(SignatureMismatch):
        Multivector.scalar(Signature(2, 0)) + Multivector.scalar(Signature(0, 2))


def test_multivector_is_immutable():
    mv = Multivector.scalar(Signature(2, 0))
    with pytest.raises(AttributeError):
        mv.coeffs = np.zeros(4)
    with pytest.raises(ValueError):
        mv.coeffs[0] = 5.0


def test_grade_projection():
    sig = Signature(3, 0)
    a = Multivector(sig, np.arange(1.0, 9.0))
    assert grade_project(a, 2) == Multivector(sig, [0, 0, 0, 4, 0, 6, 7, 0])
    assert a.grades() == {0, 1, 2, 3}


def test_blade_inverse():
    sig = Signature(2, 0)
    v = Multivector.vector(sig, [1.0, 1.0])
    assert blade_inverse(v).isclose(v * 0.5)
    with pytest.raises(NullBlade):
        blade_inverse(Multivector.vector(Signature(1, 1), [1.0, 1.0]))
    with pytest.raises(NotABlade):
        blade_inverse(Multivector(sig, [1.0, 1.0, 0, 0]))


def test_exp_imaginary_quarter_turn():
    sig = Signature(2, 0)
    got = exp_imaginary(ScaledBasisBlade(math.pi / 2, 1, 3), sig)
    assert got.isclose(Multivector.blade(sig, 3, -1.0))


def test_exp_imaginary_rejects_real_square():
    with pytest.raises(NotImaginary):
        exp_imaginary(ScaledBasisBlade(1.0, 1, 1), Signature(2, 0))


def test_zero_magnitude_canonical():
    z = ScaledBasisBlade(0.0, -1, 5)
    assert (z.sign, z.index) == (1, 0)
    assert exp_imaginary(z, Signature(3, 0)) == Multivector.scalar(Signature(3, 0))
    assert basis_blade_of(Multivector.zero(Signature(2, 0))) == ScaledBasisBlade(0.0)


def test_exp_frozen_value():
    # exp(-0.7 e12) in G(2,0), series oracle: cos 0.7 - sin 0.7 e12
    got = exp_imaginary(ScaledBasisBlade(0.7, 1, 3), Signature(2, 0))
    np.testing.assert_allclose(got.coeffs, [0.7648421872844885, 0, 0, -0.644217687237691], atol=1e-15)


@pytest.mark.parametrize("sig", [Signature(3, 0), Signature(3, 1), Signature(0, 3)], ids=str)
def test_unit_exp_matches_power_series(sig):
    rng = np.random.default_rng(5)
    for index in range(1, sig.dim):
        if sig.tables.square[index] >= 0:
            continue
        coeffs = np.zeros(sig.dim)
        coeffs[index] = rng.uniform(-3, 3)
        np.testing.assert_allclose(unit_exp_arrays(sig, coeffs), series_exp_minus(sig, coeffs).coeffs,
                                   atol=1e-12)
    # a general 2-blade, not a basis blade
    blade = Multivector.vector(sig, rng.normal(size=sig.n)) ^ Multivector.vector(sig, rng.normal(size=sig.n))
    if (blade * blade).scalar_part < 0:
        np.testing.assert_allclose(unit_exp_arrays(sig, blade.coeffs),
                                   series_exp_minus(sig, blade.coeffs).coeffs, atol=1e-10)


def test_json_round_trip():
    sig = Signature(3, 1)
    a = Multivector(sig, np.linspace(-1, 1, 16))
    assert Multivector.from_json(a.to_json()) == a
    assert Signature.from_json(sig.to_json()) == sig


coeff = st.floats(-2, 2, allow_nan=False)


@st.composite
def triples(draw):
    p = draw(st.integers(0, 3))
    q = draw(st.integers(0 if p else 1, 3 - p if p < 3 else 1))
    sig = Signature(p, q)
    vec = st.lists(coeff, min_size=sig.dim, max_size=sig.dim)
    return sig, [Multivector(sig, draw(vec)) for _ in range(3)]


@settings(max_examples=60, deadline=None)
@given(triples())
def test_associative_and_distributive(data):
    sig, (a, b, c) = data
    assert ((a * b) * c).isclose(a * (b * c), 1e-11)
    assert (a * (b + c)).isclose(a * b + a * c, 1e-11)


@settings(max_examples=60, deadline=None)
@given(triples())
def test_reverse_is_anti_automorphism(data):
    _, (a, b, _) = data
    assert (a * b).reverse().isclose(b.reverse() * a.reverse(), 1e-11)
