import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geofourier.algebra import Multivector, NullBlade, Signature
from geofourier.blades import (
    Coorthogonality,
    FactoredBlade,
    NotCoorthogonal,
    NotRepresentable,
    coorthogonal_basis,
    express_in_basis,
    is_coorthogonal,
    is_orthogonal,
    join_dim,
    meet_dim,
)
from geofourier.checks import random_coorthogonal_set

G2, G3, G4 = Signature(2, 0), Signature(3, 0), Signature(4, 0)


def basis_blade(sig, index, scale=1.0):
    return FactoredBlade.basis(sig, index, scale)


def check_result(res, blades, tol=1e-9):
    gram = res.gram()
    assert np.abs(np.abs(gram) - np.eye(len(gram))).max() < tol
    for k, b in enumerate(blades):
        assert (res.reconstruct(k) - b.expand()).norm_inf() < tol


def test_is_orthogonal():
    e1, e2 = Multivector.vector(G2, [1, 0]), Multivector.vector(G2, [0, 1])
    assert is_orthogonal(e1, e2)
    assert not is_orthogonal(e1, e1)
    assert is_orthogonal(Multivector.vector(G2, [1, 1]), Multivector.vector(G2, [1, -1]))


def test_is_coorthogonal_examples():
    assert is_coorthogonal(basis_blade(G2, 0b01), basis_blade(G2, 0b11)) is Coorthogonality.ANTICOMMUTE
    assert is_coorthogonal(basis_blade(G4, 0b0011), basis_blade(G4, 0b1100)) is Coorthogonality.COMMUTE
    mixed = FactoredBlade.from_vectors(G3, [[1, 1, 0], [0, 0, 1]])
    assert is_coorthogonal(basis_blade(G3, 0b001), mixed) is Coorthogonality.NEITHER


def test_meet_and_join():
    assert (meet_dim(basis_blade(G3, 0b011), basis_blade(G3, 0b110)),
            join_dim(basis_blade(G3, 0b011), basis_blade(G3, 0b110))) == (1, 3)
    assert (meet_dim(basis_blade(G3, 1), basis_blade(G3, 1)), join_dim(basis_blade(G3, 1), basis_blade(G3, 1))) == (1, 1)
    assert (meet_dim(basis_blade(G4, 3), basis_blade(G4, 12)), join_dim(basis_blade(G4, 3), basis_blade(G4, 12))) == (0, 4)


def test_basis_of_two_bivectors():
    blades = [basis_blade(G3, 0b011), basis_blade(G3, 0b101)]
    res = coorthogonal_basis(blades)
    check_result(res, blades)
    assert res.indices == ((0, 1), (0, 2))
    assert res.scales == (1.0, 1.0)


def test_single_vector_is_its_own_basis():
    v = FactoredBlade.from_vectors(G2, [[1 / math.sqrt(2), 1 / math.sqrt(2)]])
    res = coorthogonal_basis([v])
    assert res.indices == ((0,),)
    assert res.scales[0] == pytest.approx(1.0)
    np.testing.assert_allclose(np.abs(res.basis[0]), [1 / math.sqrt(2)] * 2, atol=1e-12)


def test_colour_pair_dual_reconstructs():
    b = basis_blade(G4, 0b0011)
    dual = Multivector.blade(G4, 0b1111) * b.expand()
    assert dual == Multivector.blade(G4, 0b1100, -1.0)
    blades = [b, FactoredBlade.basis(G4, 0b1100, -1.0)]
    res = coorthogonal_basis(blades)
    check_result(res, blades)
    assert len(res.basis) == 4


def test_rotated_coorthogonal_sets():
    rng = np.random.default_rng(11)
    for _ in range(20):
        sig, blades = random_coorthogonal_set(rng)
        check_result(coorthogonal_basis(blades), blades)


def test_non_coorthogonal_pair_named():
    with pytest.raises(NotCoorthogonal) as info:
        coorthogonal_basis([basis_blade(G3, 1), basis_blade(G3, 2),
                            FactoredBlade.from_vectors(G3, [[1, 1, 0]])])
    assert info.value.pair == (0, 2)


def test_null_inputs_rejected():
    sig = Signature(1, 1)
    with pytest.raises(NullBlade):
        coorthogonal_basis([FactoredBlade.from_vectors(sig, [[1, 1]])])
    # invertible planes meeting in a null line are never coorthogonal
    lorentz = Signature(2, 1)
    a = FactoredBlade.from_vectors(lorentz, [[1, 0, 0], [0, 0, 1]])
    b = FactoredBlade.from_vectors(lorentz, [[1, 0, 1], [1, 1, 0]])
    with pytest.raises(NotCoorthogonal):
        coorthogonal_basis([a, b])


def test_express_in_basis():
    assert express_in_basis(basis_blade(G3, 0b011), np.eye(3)) == (1.0, 0b011)
    b21 = FactoredBlade.from_vectors(G3, [[0, 1, 0], [1, 0, 0]])
    assert express_in_basis(FactoredBlade(G3, b21.vectors, 3.0), np.eye(3)) == (-3.0, 0b011)
    s = 1 / math.sqrt(2)
    frame = np.array([[s, s, 0], [s, -s, 0], [0, 0, 1]])
    tilted = FactoredBlade.from_vectors(G3, [[s, s, 0], [0, 0, 1]])
    scale, index = express_in_basis(tilted, frame)
    assert index == 0b101
    assert scale == pytest.approx(1.0)
    with pytest.raises(NotRepresentable):
        express_in_basis(FactoredBlade.from_vectors(G3, [[1, 2, 0]]), np.eye(3))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4), st.data())
def test_standard_blades_always_coorthogonal(n, data):
    sig = Signature(n, 0)
    indices = data.draw(st.lists(st.integers(1, 2 ** n - 1), min_size=2, max_size=4, unique=True))
    scales = data.draw(st.lists(st.sampled_from([-2.0, -0.5, 0.5, 3.0]), min_size=len(indices),
                                max_size=len(indices)))
    blades = [FactoredBlade.basis(sig, i, s) for i, s in zip(indices, scales)]
    for a, b in itertools.combinations(blades, 2):
        assert is_coorthogonal(a, b) is not Coorthogonality.NEITHER
    check_result(coorthogonal_basis(blades), blades)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(0.1, 10), st.floats(0.1, 10))
def test_coorthogonality_symmetric_and_scale_invariant(seed, s1, s2):
    rng = np.random.default_rng(seed)
    a = FactoredBlade.from_vectors(G3, rng.normal(size=(int(rng.integers(1, 3)), 3)))
    b = FactoredBlade.from_vectors(G3, rng.normal(size=(int(rng.integers(1, 3)), 3)))
    base = is_coorthogonal(a, b)
    assert is_coorthogonal(b, a) is base
    assert is_coorthogonal(FactoredBlade(G3, a.vectors, s1), FactoredBlade(G3, b.vectors, -s2)) is base
