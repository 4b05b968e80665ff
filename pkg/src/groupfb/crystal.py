"""Crystallographic groups on a periodic grid and their sampling demos.

The continuum ``L^2(R^d)`` is replaced by ``l^2(Z_q^d)``.  The lattice
``M Z^d`` becomes its image ``N`` in ``Z_q^d`` (this needs ``q M^-1`` to be
an integer matrix), the point group ``Gamma`` acts on grid points by
``t -> A t mod q`` and the quasi-regular representation is
``U(n, A) f(t) = f(A^T (t - n))``, a permutation of grid points.

Grid index ``j`` stands for the point ``t = j + c``.  The default offset
``c = (1/2, ..., 1/2)`` (cell centres) keeps every grid point off the
mirror and rotation centres of the usual point groups; on the plain
integer grid (``c = 0``) the dihedral model with ``M = 2`` has no point with
a trivial stabiliser and no generator can have a Riesz orbit.  With offset
``c`` the representation reads ``j -> A^T (j - n) + (A^T c - c)``, which
requires ``A^T c - c`` to be integral for every ``A`` in ``Gamma``.

``N`` is put in the cyclic form ``Z_{d_1} x ... x Z_{d_r}`` through the
Smith normal form of ``q M^-1``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_decomp

from .errors import StructureError
from .groups import AbelianGroup, Automorphism, FiniteGroupH, GroupSpec
from .polyphase import FRAME_TOL, PR_TOL
from .sampling import (
    SamplingProblem,
    UnitaryRep,
    build_reconstruction,
    compute_samples,
    synthesize_element,
)
from .signals import GSignal


@dataclass(frozen=True, eq=False)
class CrystalSpec:
    d: int
    q: int
    M: np.ndarray
    gamma: tuple  # point group matrices, identity included
    generator: Optional[np.ndarray] = None  # grid function, flattened row-major
    offset: Optional[tuple] = None  # grid index j represents t = j + offset; default cell centres

    def __post_init__(self):
        off = (0.5,) * self.d if self.offset is None else tuple(float(c) for c in self.offset)
        if len(off) != self.d:
            raise StructureError(f"offset must have {self.d} entries")
        object.__setattr__(self, "offset", off)
        M = np.array(self.M, dtype=np.int64).reshape(self.d, self.d)
        object.__setattr__(self, "M", M)
        mats = tuple(np.array(A, dtype=np.int64).reshape(self.d, self.d) for A in self.gamma)
        if not mats:
            raise StructureError("Gamma must contain at least the identity")
        object.__setattr__(self, "gamma", mats)
        if self.generator is not None:
            g = np.array(self.generator, dtype=complex).reshape(-1)
            if g.size != self.q**self.d:
                raise StructureError(f"generator must have q^d = {self.q ** self.d} grid values")
            object.__setattr__(self, "generator", g)

    @property
    def grid_size(self) -> int:
        return self.q**self.d

    @classmethod
    def from_dict(cls, doc: dict) -> "CrystalSpec":
        gen = doc.get("generator")
        if gen is not None:
            gen = [complex(*v) if isinstance(v, (list, tuple)) else complex(v) for v in gen]
        return cls(int(doc["d"]), int(doc["q"]), doc["M"], tuple(doc["Gamma"]), gen, doc.get("offset"))


def dihedral_crystal(q: int, M: int = 2) -> CrystalSpec:
    """Finite model of the infinite dihedral group: lattice ``M Z`` in ``Z_q``, ``Gamma = {+1, -1}``."""
    return CrystalSpec(1, q, [[M]], ([[1]], [[-1]]))


def square_crystal(q: int = 8, m: int = 2) -> CrystalSpec:
    """Lattice ``m Z^2`` with the four rotations by multiples of 90 degrees."""
    r = np.array([[0, -1], [1, 0]])
    rots = [np.linalg.matrix_power(r, k) for k in range(4)]
    return CrystalSpec(2, q, m * np.eye(2, dtype=int), tuple(rots))


@dataclass(frozen=True, eq=False)
class CrystalModel:
    spec: CrystalSpec
    group: GroupSpec
    rep: UnitaryRep
    lattice_points: np.ndarray  # (|N|, d) grid coordinates of each element of N

    def grid_index(self, t) -> int:
        t = np.atleast_1d(np.asarray(t, dtype=np.int64)) % self.spec.q
        return int(np.ravel_multi_index(tuple(t), (self.spec.q,) * self.spec.d))


def _lattice_group(spec: CrystalSpec) -> tuple[AbelianGroup, np.ndarray]:
    d, q, M = spec.d, spec.q, spec.M
    det = round(np.linalg.det(M))
    if det == 0:
        raise StructureError("lattice matrix M is singular")
    adj = np.rint(np.linalg.inv(M) * det).astype(np.int64)
    if np.any((q * adj) % det):
        raise StructureError(f"q Z^d is not contained in M Z^d: q M^-1 is not an integer matrix (q={q})")
    Q = (q * adj) // det
    D, U, _ = smith_normal_decomp(Matrix(Q.tolist()), domain=ZZ)
    diag = [abs(int(D[i, i])) for i in range(d)]
    Uinv = np.array(U.inv().tolist(), dtype=np.int64)
    keep = [i for i in range(d) if diag[i] > 1] or [0]
    N = AbelianGroup(tuple(diag[i] for i in keep))
    # element e of N -> k = U^-1 e (zero outside kept axes) -> grid point M k mod q
    full = np.zeros((N.order, d), dtype=np.int64)
    full[:, keep] = N.elements
    points = ((full @ Uinv.T) @ M.T) % q
    if len({tuple(p) for p in points}) != N.order:
        raise StructureError("lattice residues are not distinct; check M and q")
    return N, points


def build_crystal_group(spec: CrystalSpec, validate: bool = True) -> CrystalModel:
    """Group ``N x| Gamma`` and its quasi-regular representation on ``l^2(Z_q^d)``."""
    d, q = spec.d, spec.q
    N, points = _lattice_group(spec)
    lookup = {tuple(p): i for i, p in enumerate(points)}

    mats = spec.gamma
    L = len(mats)
    keys = [tuple((A % q).reshape(-1)) for A in mats]
    if len(set(keys)) != L:
        raise StructureError("Gamma contains repeated matrices")
    where = {k: i for i, k in enumerate(keys)}
    table = np.empty((L, L), dtype=np.int64)
    for i, A in enumerate(mats):
        for j, B in enumerate(mats):
            k = tuple(((A @ B) % q).reshape(-1))
            if k not in where:
                raise StructureError(f"Gamma is not closed: product of elements {i} and {j} is missing")
            table[i, j] = where[k]
    H = FiniteGroupH(table)

    action = []
    for i, A in enumerate(mats):
        img = (points @ A.T) % q
        perm = []
        for p, t in zip(points, img):
            if tuple(t) not in lookup:
                raise StructureError(
                    f"Gamma element {i} maps lattice point {tuple(int(v) for v in p)} to "
                    f"{tuple(int(v) for v in t)}, outside the coset M Z^d mod {q}"
                )
            perm.append(lookup[tuple(t)])
        action.append(Automorphism.from_permutation(N, perm))
    G = GroupSpec(N, H, tuple(action))

    c = np.array(spec.offset)
    shifts = []
    for i, A in enumerate(mats):
        s = A.T @ c - c
        if not np.allclose(s, np.rint(s)):
            raise StructureError(f"grid offset {spec.offset} is not preserved by Gamma element {i}")
        shifts.append(np.rint(s).astype(np.int64))

    shape = (q,) * d
    grid = np.indices(shape).reshape(d, -1).T  # (q^d, d)
    D = grid.shape[0]
    mats_out = np.zeros((G.order, D, D))
    rows = np.arange(D)
    for ni, n in enumerate(points):
        for h, A in enumerate(mats):
            src = ((grid - n) @ A + shifts[h]) % q  # A^T (t - n) as row vectors, t = j + c
            cols = np.ravel_multi_index(tuple(src.T), shape)
            mats_out[ni * L + h, rows, cols] = 1.0
    rep = UnitaryRep(G, mats_out)
    if validate:
        rep.validate()
    return CrystalModel(spec, G, rep, points)


def default_generator(spec: CrystalSpec, seed: int = 7) -> np.ndarray:
    """Off-centre cubic B-spline bump plus a small seeded perturbation.

    The perturbation breaks the symmetries that would make the orbit
    linearly dependent.
    """
    q, d = spec.q, spec.d
    rng = np.random.default_rng(seed)

    def bspline(x):
        x = np.abs(x)
        return np.where(x < 1, 2 / 3 - x**2 + x**3 / 2, np.where(x < 2, (2 - x) ** 3 / 6, 0.0))

    grid = np.indices((q,) * d).reshape(d, -1).T
    width = max(q / 8.0, 1.0)
    centre = q / 2 + 0.37
    bump = np.ones(grid.shape[0])
    for axis in range(d):
        bump *= bspline((grid[:, axis] - centre - 0.21 * axis) / width)
    return bump + 0.5 * rng.standard_normal(grid.shape[0])


def coset_ordered_points(model: CrystalModel) -> list[int]:
    """Grid indices ordered so that each coset of the lattice appears once before any repeats.

    Within each pass points keep their row-major order.  Samples anchored at
    the same coset give identical rows of ``H(0)``, so defaults draw from
    distinct cosets first.
    """
    q, d = model.spec.q, model.spec.d
    shape = (q,) * d
    grid = np.indices(shape).reshape(d, -1).T
    first, rest, seen = [], [], set()
    for j, t in enumerate(grid):
        coset = min(np.ravel_multi_index(tuple((t - p) % q), shape) for p in model.lattice_points)
        (rest if coset in seen else first).append(j)
        seen.add(coset)
    return first + rest


def default_probes(model: CrystalModel, K: int) -> np.ndarray:
    """``K`` normalised box averages over ``[o_k, o_k + 3)^d`` in grid indices.

    The anchors ``o_k`` come from :func:`coset_ordered_points`.  An odd width
    keeps each box off the mirror centres of the lattice; symmetric boxes
    give identical columns in ``H(0)``.
    """
    q, d = model.spec.q, model.spec.d
    grid = np.indices((q,) * d).reshape(d, -1).T
    anchors = coset_ordered_points(model)
    probes = []
    for k in range(K):
        inside = np.all(((grid - grid[anchors[k % len(anchors)]]) % q) < 3, axis=1)
        probes.append(inside / np.sqrt(inside.sum()))
    return np.array(probes, dtype=complex)


def default_points(model: CrystalModel, K: int) -> list[int]:
    """First ``K`` entries of :func:`coset_ordered_points`."""
    return coset_ordered_points(model)[:K]


def _trial_errors(kit, problem, rng, trials: int, workers: int = 1) -> np.ndarray:
    """Relative reconstruction errors for ``trials`` random unit-norm coefficient vectors.

    Coefficients are drawn up front so the result does not depend on ``workers``.
    """
    G = problem.group
    coeffs = rng.standard_normal((trials, G.order)) + 1j * rng.standard_normal((trials, G.order))
    coeffs /= np.linalg.norm(coeffs, axis=1, keepdims=True)

    def one(a):
        x = synthesize_element(GSignal.from_flat(G, a), problem.rep, problem.generator, check=False)
        xr = kit.reconstruct(compute_samples(x, problem))
        return np.linalg.norm(x - xr) / np.linalg.norm(x)

    if workers > 1 and trials > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return np.array(list(pool.map(one, coeffs)))
    return np.array([one(a) for a in coeffs])


def interpolation_deviation(kit) -> float:
    """``max |L_k c_k'(n) - delta_kk' delta_n0|`` over all ``k, k', n``."""
    problem = kit.problem
    N = problem.group.N
    zero = N.index(0 if N.rank == 1 else (0,) * N.rank)
    worst = 0.0
    for kp, c in enumerate(kit.vectors):
        s = compute_samples(c, problem)
        target = np.zeros_like(s)
        target[kp, zero] = 1.0
        worst = max(worst, float(np.abs(s - target).max()))
    return worst


def run_demo(
    model: CrystalModel,
    problem: SamplingProblem,
    trials: int = 100,
    seed: int = 7,
    tol_pr: float = PR_TOL,
    tol_frame: float = FRAME_TOL,
    workers: int = 1,
) -> dict:
    kit = build_reconstruction(problem, tol_frame=tol_frame, tol_pr=tol_pr)
    errs = _trial_errors(kit, problem, np.random.default_rng(seed), trials, workers)
    report = {
        "mode": problem.mode,
        "d": model.spec.d,
        "q": model.spec.q,
        "N_moduli": list(model.group.N.moduli),
        "L": model.group.L,
        "K": problem.K,
        "A_H": kit.A_H,
        "B_H": kit.B_H,
        "pr_deviation": kit.pr_deviation,
        "frame_bounds_in_A_a": [kit.frame_lower, kit.frame_upper],
        "trials": trials,
        "max_error": float(errs.max()) if trials else 0.0,
        "mean_error": float(errs.mean()) if trials else 0.0,
        "trial_errors": errs.tolist(),
        "psi": [c for c in kit.vectors],
        "synthesis_filters": [g.flat for g in kit.synthesis],
    }
    if problem.K == model.group.L:
        report["interpolation_deviation"] = interpolation_deviation(kit)
    return report


def demo_average(
    spec: CrystalSpec,
    probes=None,
    K: Optional[int] = None,
    trials: int = 100,
    seed: int = 7,
    tol_pr: float = PR_TOL,
    tol_frame: float = FRAME_TOL,
    workers: int = 1,
) -> dict:
    """Average sampling ``<f, b_k(. - n)>`` on the grid model and reconstruction statistics."""
    model = build_crystal_group(spec)
    if probes is None:
        probes = default_probes(model, K if K is not None else model.group.L)
    a = spec.generator if spec.generator is not None else default_generator(spec, seed)
    problem = SamplingProblem(model.rep, a, "average", probes=np.asarray(probes))
    return run_demo(model, problem, trials, seed, tol_pr, tol_frame, workers)


def demo_pointwise(
    spec: CrystalSpec,
    points: Optional[Sequence] = None,
    K: Optional[int] = None,
    trials: int = 100,
    seed: int = 7,
    tol_pr: float = PR_TOL,
    tol_frame: float = FRAME_TOL,
    workers: int = 1,
) -> dict:
    """Pointwise sampling ``f(t_k + n)`` on the grid model and reconstruction statistics.

    ``points`` are grid coordinates (ints for ``d = 1``, tuples otherwise).
    """
    model = build_crystal_group(spec)
    if points is None:
        idx = default_points(model, K if K is not None else model.group.L)
    else:
        idx = [model.grid_index(t) for t in points]
    a = spec.generator if spec.generator is not None else default_generator(spec, seed)
    problem = SamplingProblem(model.rep, a, "pointwise", points=idx)
    return run_demo(model, problem, trials, seed, tol_pr, tol_frame, workers)
