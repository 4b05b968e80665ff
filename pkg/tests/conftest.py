import numpy as np
import pytest

from groupfb.groups import AbelianGroup, Automorphism, FiniteGroupH, GroupSpec, dihedral, g_mul
from groupfb.sampling import UnitaryRep
from groupfb.signals import GSignal


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_signal(rng, group, unit=True):
    v = crandn(rng, group.N.order, group.L)
    if unit:
        v /= np.linalg.norm(v)
    return GSignal(group, v)


def regular_rep(G):
    """Left-regular representation on l2(G): U(g) e_y = e_{g y}."""
    els = list(G.elements())
    mats = np.zeros((G.order, G.order, G.order))
    for g in els:
        for y in els:
            mats[G.flat_index(g), G.flat_index(g_mul(g, y)), G.flat_index(y)] = 1.0
    return UnitaryRep(G, mats)


def z3z2_s3():
    """(Z_3 x Z_2) x| Z_2 with phi_1 = negation on the Z_3 factor; a non-cyclic N."""
    N = AbelianGroup((3, 2))
    H = FiniteGroupH.cyclic(2)
    return GroupSpec(N, H, (Automorphism.identity(N), Automorphism.from_matrix(N, [[-1, 0], [0, 1]])))


def z7_z3():
    """Z_7 x| Z_3 with phi_1(n) = 2n (2 has order 3 mod 7): an H whose elements are not involutions."""
    N = AbelianGroup((7,))
    H = FiniteGroupH.cyclic(3)
    return GroupSpec(N, H, tuple(Automorphism.from_matrix(N, [[pow(2, k, 7)]]) for k in range(3)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def d8():
    return dihedral(4)


GROUPS = {
    "D8": lambda: dihedral(4),
    "Z6xZ2": lambda: dihedral(6),
    "Z3xZ2xZ2": z3z2_s3,
    "Z7xZ3": z7_z3,
}


@pytest.fixture(params=sorted(GROUPS))
def any_group(request):
    return GROUPS[request.param]()


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call" or "test_acceptance.py::" not in rep.nodeid:
                continue
            props = dict(rep.user_properties)
            name = props.get("criterion", rep.nodeid.split("::")[-1])
            lines.append((rep.nodeid, f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}  {props.get('detail', '')}".rstrip()))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
