import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groupfb.errors import StructureError
from groupfb.groups import (
    AbelianGroup,
    Automorphism,
    FiniteGroupH,
    GroupSpec,
    convolve_N,
    dihedral,
    direct_product,
    fourier_N,
    g_inv,
    g_mul,
    inverse_fourier_N,
)

from conftest import crandn
from oracles import BruteGroup, brute_convolve_N, brute_dft

MODULI = [(4,), (6,), (3, 2), (2, 2, 3), (5, 4)]


@pytest.mark.parametrize("moduli", MODULI)
def test_fourier_matches_loop_dft(moduli, rng):
    N = AbelianGroup(moduli)
    x = crandn(rng, N.order)
    assert np.allclose(fourier_N(N, x), brute_dft(moduli, x), atol=1e-12)


@pytest.mark.parametrize("moduli", MODULI)
def test_fourier_matches_fftn(moduli, rng):
    N = AbelianGroup(moduli)
    x = crandn(rng, N.order)
    ref = np.fft.fftn(x.reshape(moduli)).reshape(-1)
    assert np.allclose(fourier_N(N, x), ref, atol=1e-12)


@pytest.mark.parametrize("moduli", MODULI)
def test_fourier_roundtrip_plancherel_and_double_forward(moduli, rng):
    N = AbelianGroup(moduli)
    x = crandn(rng, N.order)
    X = fourier_N(N, x)
    assert np.allclose(inverse_fourier_N(N, X), x, atol=1e-12)
    assert np.isclose(np.vdot(X, X).real, N.order * np.vdot(x, x).real)
    assert np.allclose(fourier_N(N, X), N.order * x[N.neg], atol=1e-10)


@pytest.mark.parametrize("moduli", MODULI)
def test_convolution_oracle_and_theorem(moduli, rng):
    N = AbelianGroup(moduli)
    a, b = crandn(rng, N.order), crandn(rng, N.order)
    c = convolve_N(N, a, b)
    assert np.allclose(c, brute_convolve_N(moduli, a, b), atol=1e-12)
    assert np.allclose(fourier_N(N, c), fourier_N(N, a) * fourier_N(N, b), atol=1e-11)


def test_fourier_operates_along_first_axis(rng):
    N = AbelianGroup((3, 2))
    x = crandn(rng, N.order, 4)
    X = fourier_N(N, x)
    for j in range(4):
        assert np.allclose(X[:, j], fourier_N(N, x[:, j]))


def test_element_indexing_is_row_major():
    N = AbelianGroup((3, 4))
    assert [tuple(e) for e in N.elements] == list(itertools.product(range(3), range(4)))
    assert N.index((2, 1)) == 9
    assert N.index((-1, 5)) == N.index((2, 1))


@pytest.mark.parametrize("moduli", MODULI)
def test_tables(moduli):
    N = AbelianGroup(moduli)
    els = [tuple(e) for e in N.elements]
    for i, a in enumerate(els):
        for j, b in enumerate(els):
            s = tuple((x + y) % m for x, y, m in zip(a, b, moduli))
            d = tuple((x - y) % m for x, y, m in zip(a, b, moduli))
            assert els[N.add_table[i, j]] == s
            assert els[N.sub_table[i, j]] == d


@pytest.mark.parametrize("moduli", [(), (0,), (3, -1)])
def test_bad_moduli(moduli):
    with pytest.raises(StructureError):
        AbelianGroup(moduli)


def test_h_table_validation():
    FiniteGroupH.cyclic(5)
    with pytest.raises(StructureError):
        FiniteGroupH([[0, 1], [1, 1]])  # not a Latin square
    with pytest.raises(StructureError):
        FiniteGroupH([[0, 1, 2], [1, 0, 2], [2, 2, 0]])


def test_automorphism_validation():
    N = AbelianGroup((4,))
    Automorphism.from_matrix(N, [[3]])
    with pytest.raises(StructureError):
        Automorphism.from_matrix(N, [[2]])  # not bijective
    with pytest.raises(StructureError):
        Automorphism.from_permutation(N, [0, 2, 1, 3])  # not additive


def test_action_must_be_a_homomorphism():
    N = AbelianGroup((7,))
    H = FiniteGroupH.cyclic(2)
    with pytest.raises(StructureError):
        # 2 has order 3 mod 7, so n -> 2n cannot represent an element of order 2
        GroupSpec(N, H, (Automorphism.identity(N), Automorphism.from_matrix(N, [[2]])))


def test_semidirect_axioms_against_oracle(any_group):
    G = any_group
    bg = BruteGroup(G)
    els = list(G.elements())
    for g1 in els:
        b1 = (tuple(np.atleast_1d(g1.n)), g1.h)
        gi = g_inv(g1)
        assert G.flat_index(g_mul(g1, gi)) == G.flat_index(G.identity)
        assert G.flat_index(gi) == bg.flat(bg.inverse(b1))
        for g2 in els:
            b2 = (tuple(np.atleast_1d(g2.n)), g2.h)
            assert G.flat_index(g_mul(g1, g2)) == bg.flat(bg.mul(b1, b2))


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_associativity(data):
    G = dihedral(6)
    pick = st.tuples(st.integers(0, 5), st.integers(0, 1))
    a, b, c = (G.element(*data.draw(pick)) for _ in range(3))
    assert G.flat_index(g_mul(g_mul(a, b), c)) == G.flat_index(g_mul(a, g_mul(b, c)))


def test_dict_roundtrip():
    G = dihedral(4)
    d = G.to_dict()
    assert GroupSpec.from_dict(d) == G
    d.pop("action")
    assert GroupSpec.from_dict(d) == direct_product(G.N, G.H)


def test_direct_product_is_abelian_when_h_is():
    G = direct_product(AbelianGroup((3,)), FiniteGroupH.cyclic(2))
    for a in G.elements():
        for b in G.elements():
            assert G.flat_index(g_mul(a, b)) == G.flat_index(g_mul(b, a))
