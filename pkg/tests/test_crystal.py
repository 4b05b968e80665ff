import time

import numpy as np
import pytest

from groupfb.crystal import (
    CrystalSpec,
    build_crystal_group,
    coset_ordered_points,
    default_generator,
    default_points,
    default_probes,
    demo_average,
    demo_pointwise,
    dihedral_crystal,
    square_crystal,
)
from groupfb.errors import SingularPolyphaseError, StructureError
from groupfb.sampling import SamplingProblem, build_reconstruction, compute_samples, synthesize_element
from groupfb.signals import GSignal

from conftest import crandn


@pytest.fixture(scope="module")
def d1():
    return build_crystal_group(dihedral_crystal(8, 2))


def test_dihedral_model_shape(d1):
    G = d1.group
    assert G.N.moduli == (4,) and G.L == 2
    assert sorted(map(tuple, d1.lattice_points)) == [(0,), (2,), (4,), (6,)]
    assert d1.rep.dim == 8


def test_square_model_shape():
    m = build_crystal_group(square_crystal(8, 2))
    assert m.group.N.order == 16 and m.group.L == 4
    assert m.rep.dim == 64


def test_action_is_matrix_multiplication_mod_q():
    m = build_crystal_group(square_crystal(8, 2))
    G, q = m.group, m.spec.q
    for h, A in enumerate(m.spec.gamma):
        for i, p in enumerate(m.lattice_points):
            j = G.phi[h, i]
            assert np.array_equal(m.lattice_points[j], (A @ p) % q)


def test_rep_matrices_are_permutations(d1):
    U = d1.rep.matrices
    assert set(np.unique(U.real)) <= {0.0, 1.0} and np.all(U.imag == 0)
    assert np.all(U.sum(axis=1) == 1) and np.all(U.sum(axis=2) == 1)


def test_rep_property_exhaustive(d1):
    G, U = d1.group, d1.rep.matrices
    from groupfb.groups import g_mul

    els = list(G.elements())
    assert len(els) ** 2 == 64
    for g1 in els:
        for g2 in els:
            prod = U[G.flat_index(g1)] @ U[G.flat_index(g2)]
            assert np.array_equal(prod, U[G.flat_index(g_mul(g1, g2))])


def test_quasi_regular_formula(d1):
    """U(n, A) f(t) = f(A^T (t - n)) with t = j + 1/2."""
    q = 8
    f = np.arange(q, dtype=float)
    for ni, n in enumerate(d1.lattice_points):
        for h, A in enumerate(d1.spec.gamma):
            g = d1.rep.matrices[ni * 2 + h] @ f
            for j in range(q):
                t = j + 0.5
                src = A[0, 0] * (t - n[0]) - 0.5
                assert g[j] == f[int(round(src)) % q]


def test_integer_grid_option():
    m = build_crystal_group(CrystalSpec(1, 8, [[2]], ([[1]], [[-1]]), offset=(0.0,)))
    U = m.rep.matrices
    # reflection fixes t = 0 on the integer grid
    assert U[1][0, 0] == 1.0


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(d=1, q=8, M=[[3]], gamma=([[1]], [[-1]])),  # 3Z does not contain 8Z
        dict(d=1, q=8, M=[[2]], gamma=([[1]], [[1]])),  # repeated Gamma element
        dict(d=2, q=8, M=[[2, 0], [0, 4]], gamma=([[1, 0], [0, 1]], [[0, -1], [1, 0]])),  # not closed
        dict(d=2, q=8, M=[[2, 0], [0, 4]], gamma=([[1, 0], [0, 1]], [[0, 1], [1, 0]])),  # breaks the lattice
        dict(d=1, q=8, M=[[0]], gamma=([[1]],)),
    ],
)
def test_invalid_specs_rejected(kwargs):
    with pytest.raises(StructureError):
        build_crystal_group(CrystalSpec(**kwargs))


def test_coset_violation_message():
    spec = CrystalSpec(2, 8, [[2, 0], [0, 4]], ([[1, 0], [0, 1]], [[0, 1], [1, 0]]))
    with pytest.raises(StructureError, match="outside the coset"):
        build_crystal_group(spec)


def test_offset_must_be_preserved():
    with pytest.raises(StructureError):
        build_crystal_group(CrystalSpec(1, 8, [[2]], ([[1]], [[-1]]), offset=(0.25,)))


def test_non_diagonal_lattice_uses_smith_form():
    # hexagonal-like lattice generated by (2,0) and (1,2) in Z_8^2
    spec = CrystalSpec(2, 8, [[2, 1], [0, 2]], ([[1, 0], [0, 1]], [[-1, 0], [0, -1]]))
    m = build_crystal_group(spec)
    assert m.group.N.order == 16
    pts = {tuple(p) for p in m.lattice_points}
    span = {tuple((a * np.array([2, 0]) + b * np.array([1, 2])) % 8) for a in range(8) for b in range(8)}
    assert pts == span


def test_coset_ordered_points_cover_cosets(d1):
    pts = coset_ordered_points(d1)
    assert sorted(pts) == list(range(8))
    assert {p % 2 for p in pts[:2]} == {0, 1}


def test_pointwise_samples_read_off_grid(d1, rng):
    a = default_generator(d1.spec)
    p = SamplingProblem(d1.rep, a, "pointwise", points=(1, 4))
    x = crandn(rng, 8)
    s = compute_samples(x, p)
    for k, t in enumerate(p.points):
        for i, n in enumerate(d1.lattice_points):
            assert s[k, i] == x[(t + n[0]) % 8]


def test_pointwise_samples_read_off_grid_2d(rng):
    m = build_crystal_group(square_crystal(8, 2))
    p = SamplingProblem(m.rep, default_generator(m.spec), "pointwise", points=(9, 20))
    x = crandn(rng, 64)
    s = compute_samples(x, p)
    for k, t in enumerate(p.points):
        tt = np.unravel_index(t, (8, 8))
        for i, n in enumerate(m.lattice_points):
            assert s[k, i] == x[m.grid_index(np.add(tt, n))]


def test_delta_generator_samples_are_coefficients(d1, rng):
    """With a = e_j the orbit is orthonormal and pointwise samples read the coefficients."""
    j = 1
    a = np.eye(8)[j]
    refl = d1.rep.matrices[1] @ a  # U(0, -1) a
    t2 = int(np.argmax(refl))
    p = SamplingProblem(d1.rep, a, "pointwise", points=(j, t2))
    alpha = GSignal(d1.group, crandn(rng, 4, 2))
    x = synthesize_element(alpha, d1.rep, a)
    s = compute_samples(x, p)
    assert np.allclose(s[0], alpha.values[:, 0])
    assert np.allclose(s[1], alpha.values[:, 1])
    kit = build_reconstruction(p)
    assert kit.frame_lower == pytest.approx(1.0) and kit.frame_upper == pytest.approx(1.0)


def test_delta_probes_at_distinct_cosets(d1, rng):
    a = default_generator(d1.spec)
    p = SamplingProblem(d1.rep, a, "average", probes=np.eye(8)[[0, 1]])
    kit = build_reconstruction(p)
    for _ in range(10):
        x = synthesize_element(GSignal(d1.group, crandn(rng, 4, 2)), d1.rep, a)
        assert np.linalg.norm(kit.reconstruct(compute_samples(x, p)) - x) <= 1e-10 * np.linalg.norm(x)


def test_demo_average_reconstructs():
    r = demo_average(dihedral_crystal(8, 2), trials=50)
    assert r["max_error"] <= 1e-9
    assert r["interpolation_deviation"] <= 1e-10
    assert r["K"] == r["L"] == 2
    assert len(r["psi"]) == 2 and len(r["trial_errors"]) == 50


def test_demo_pointwise_q16():
    r = demo_pointwise(dihedral_crystal(16, 2), K=2, trials=100)
    assert r["max_error"] <= 1e-9


@pytest.mark.parametrize("mode", ["average", "pointwise"])
def test_demo_oversampled_square(mode):
    fn = demo_average if mode == "average" else demo_pointwise
    r = fn(square_crystal(8, 2), K=5, trials=10)
    assert r["max_error"] <= 1e-9 and "interpolation_deviation" not in r


def test_demo_k_below_l_rejected():
    with pytest.raises(SingularPolyphaseError, match="samples insufficient"):
        demo_average(dihedral_crystal(8, 2), K=1, trials=1)


def test_equal_points_rejected():
    with pytest.raises(SingularPolyphaseError):
        demo_pointwise(dihedral_crystal(8, 2), points=[3, 3], trials=1)


def test_explicit_points_and_probes():
    spec = dihedral_crystal(8, 2)
    m = build_crystal_group(spec)
    r = demo_pointwise(spec, points=[0, 3], trials=5)
    assert r["max_error"] <= 1e-9
    r = demo_average(spec, probes=default_probes(m, 3), trials=5)
    assert r["K"] == 3 and r["max_error"] <= 1e-9
    assert default_points(m, 2) == coset_ordered_points(m)[:2]


def test_workers_do_not_change_results():
    spec = dihedral_crystal(16, 4)
    r1 = demo_average(spec, trials=20, workers=1)
    r2 = demo_average(spec, trials=20, workers=4)
    assert r1["trial_errors"] == r2["trial_errors"]


def test_build_time():
    t = time.perf_counter()
    build_crystal_group(dihedral_crystal(8, 2))
    assert time.perf_counter() - t < 1.0
