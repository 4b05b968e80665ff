"""Sampling in the shift-invariant space of a unitary representation.

The Hilbert space is ``C^D``; a representation assigns a unitary ``D x D``
matrix to every ``(n, h)``.  For a generator ``a`` the space ``A_a`` is the
span of the orbit ``U(n, h) a`` and ``T_{U,a}`` sends coefficients
``alpha`` to ``sum alpha(n, h) U(n, h) a``.

Two kinds of samples are supported:

* average: ``L_k x(m) = <x, U(m, 1_H) b_k>``, filter ``h_k(n, h) = <a, U(n, h) b_k>``;
* pointwise: ``L_k x(n) = [U(-n, 1_H) x](t_k)``, filter
  ``h_k(m, h) = conj([U(m, h) a](t_k))``.

Average samples equal ``dec(alpha * h_k)`` while pointwise samples equal
``<alpha, T_n h_k>``, so the analysis filters of the pointwise bank are the
involutions of its ``h_k``.  :attr:`SamplingProblem.analysis_filters`
always returns the filters that enter the convolution.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateGeneratorError, StructureError
from .groups import GroupSpec
from .polyphase import (
    FRAME_TOL,
    FrameReport,
    PR_TOL,
    analysis_matrix,
    design_dual_pseudoinverse,
    dual_family,
    frame_bounds,
    frame_constants,
    verify_pr,
)
from .signals import GSignal, involution, translate

RIESZ_TOL = 1e-9
UNITARY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class UnitaryRep:
    """``matrices[n * L + h]`` is ``U(n, h)``."""

    group: GroupSpec
    matrices: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrices, dtype=complex)
        G = self.group
        if m.ndim != 3 or m.shape[0] != G.order or m.shape[1] != m.shape[2]:
            raise StructureError(f"need {G.order} square matrices, got array of shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrices", m)

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    def __call__(self, n, h: int) -> np.ndarray:
        return self.matrices[self.group.N.index(n) * self.group.L + h]

    def validate(self, tol: float = UNITARY_TOL) -> None:
        """Exhaustive unitarity and homomorphism check."""
        G, U = self.group, self.matrices
        eye = np.eye(self.dim)
        dev = np.abs(np.conj(np.swapaxes(U, 1, 2)) @ U - eye[None]).max()
        if dev > tol:
            raise StructureError(f"representation is not unitary (deviation {dev:.3e})")
        N, L = G.N, G.L
        for n1, h1 in itertools.product(range(N.order), range(L)):
            # U(n1,h1) U(n2,h2) = U(n1 + phi_h1(n2), h1 h2) for all (n2, h2) at once
            n = N.add_table[n1, G.phi[h1]]  # [n2]
            h = G.H.table[h1]  # [h2]
            target = U[(n[:, None] * L + h[None, :]).reshape(-1)]
            got = U[n1 * L + h1][None] @ U
            dev = np.abs(got - target).max()
            if dev > tol:
                raise StructureError(f"U is not a homomorphism at g1=({N.element(n1)}, {h1}) (deviation {dev:.3e})")

    def orbit(self, a) -> np.ndarray:
        """``(D, |G|)`` matrix whose columns are ``U(g) a`` in flat order."""
        return np.einsum("gij,j->ig", self.matrices, np.asarray(a, dtype=complex))


def gram_bounds(vectors: np.ndarray) -> tuple[float, float]:
    """Extreme eigenvalues of the Gram matrix of the columns of ``vectors``."""
    w = np.linalg.eigvalsh(np.conj(vectors.T) @ vectors)
    return float(max(w[0], 0.0)), float(w[-1])


def check_riesz(rep: UnitaryRep, a, tol: float = RIESZ_TOL) -> tuple[float, float]:
    lo, hi = gram_bounds(rep.orbit(a))
    if not lo > tol * hi:
        raise DegenerateGeneratorError(
            f"orbit of the generator is not a Riesz sequence: Gram lambda_min={lo:.3e}, lambda_max={hi:.3e}"
        )
    return lo, hi


def synthesize_element(alpha: GSignal, rep: UnitaryRep, a, check: bool = True) -> np.ndarray:
    """``T_{U,a} alpha = sum_(n,h) alpha(n, h) U(n, h) a``."""
    if check:
        check_riesz(rep, a)
    return rep.orbit(a) @ alpha.flat


def shifting_check(rep: UnitaryRep, a, f: GSignal, m) -> float:
    """``|| T_{U,a}(T_m f) - U(m, 1_H) T_{U,a} f ||``."""
    lhs = synthesize_element(translate(f, m), rep, a, check=False)
    rhs = rep(m, rep.group.H.identity) @ synthesize_element(f, rep, a, check=False)
    return float(np.linalg.norm(lhs - rhs))


@dataclass(frozen=True, eq=False)
class SamplingProblem:
    rep: UnitaryRep
    generator: np.ndarray
    mode: str  # "average" or "pointwise"
    probes: Optional[np.ndarray] = None  # (K, D) for average mode
    points: Optional[tuple[int, ...]] = None  # K state coordinates for pointwise mode

    def __post_init__(self):
        a = np.array(self.generator, dtype=complex)
        if a.shape != (self.rep.dim,):
            raise StructureError(f"generator must have length {self.rep.dim}")
        a.setflags(write=False)
        object.__setattr__(self, "generator", a)
        if self.mode == "average":
            b = np.array(self.probes, dtype=complex)
            if b.ndim != 2 or b.shape[1] != self.rep.dim or b.shape[0] < 1:
                raise StructureError(f"average mode needs a (K, {self.rep.dim}) probe array")
            b.setflags(write=False)
            object.__setattr__(self, "probes", b)
        elif self.mode == "pointwise":
            pts = tuple(int(t) for t in self.points)
            if not pts or any(not 0 <= t < self.rep.dim for t in pts):
                raise StructureError(f"pointwise mode needs state indices in [0, {self.rep.dim})")
            object.__setattr__(self, "points", pts)
        else:
            raise StructureError(f"unknown sampling mode {self.mode!r}")

    @property
    def group(self) -> GroupSpec:
        return self.rep.group

    @property
    def K(self) -> int:
        return len(self.probes) if self.mode == "average" else len(self.points)

    @cached_property
    def filters(self) -> list[GSignal]:
        """The ``h_k`` attached to the samples, as written for each mode."""
        G = self.group
        orbit = self.rep.orbit(self.generator)  # (D, |G|)
        if self.mode == "average":
            # <a, U(g) b_k> = sum_i a_i conj((U(g) b_k)_i)
            vals = np.einsum("gij,kj,i->kg", np.conj(self.rep.matrices), np.conj(self.probes), self.generator)
        else:
            vals = np.conj(orbit[list(self.points), :])
        return [GSignal.from_flat(G, v) for v in vals]

    @cached_property
    def analysis_filters(self) -> list[GSignal]:
        """Filters ``h`` with ``L_k x(m) = dec(alpha * h)(m)`` for ``x = T_{U,a} alpha``."""
        if self.mode == "average":
            return self.filters
        return [involution(h) for h in self.filters]


def compute_samples(x, problem: SamplingProblem) -> np.ndarray:
    """``(K, |N|)`` array of generalized samples of the state ``x``."""
    x = np.asarray(x, dtype=complex)
    G, rep = problem.group, problem.rep
    e = G.H.identity
    shifts = rep.matrices[np.arange(G.N.order) * G.L + e]  # U(m, 1_H)
    if problem.mode == "average":
        # <x, U(m,1) b_k> = conj(U(m,1) b_k) . x
        return np.einsum("mij,kj,i->km", np.conj(shifts), np.conj(problem.probes), x)
    back = rep.matrices[G.N.neg * G.L + e]  # U(-m, 1_H)
    moved = back @ x  # (|N|, D)
    return moved[:, list(problem.points)].T


def fixed_probe_samples(rep: UnitaryRep, generator, b) -> SamplingProblem:
    """Average problem for ``L_k x(m) = <x, U(m, h_k) b>``, i.e. ``b_k = U(0, h_k) b``, ``K = L``."""
    G = rep.group
    b = np.asarray(b, dtype=complex)
    zero = 0 if G.N.rank == 1 else (0,) * G.N.rank
    probes = np.stack([rep(zero, h) @ b for h in range(G.L)])
    return SamplingProblem(rep, generator, "average", probes=probes)


@dataclass(frozen=True, eq=False)
class ReconstructionKit:
    problem: SamplingProblem
    synthesis: list[GSignal]
    vectors: np.ndarray  # (K, D): c_k = T_{U,a} g_k
    A_H: float
    B_H: float
    frame_lower: float  # frame bounds of {U(n,1) c_k} inside A_a
    frame_upper: float
    pr_deviation: float

    def reconstruct(self, samples) -> np.ndarray:
        """``x = sum_k sum_n L_k x(n) U(n, 1_H) c_k``."""
        samples = np.asarray(samples, dtype=complex)
        return np.einsum("km,mij,kj->i", samples, self.shifts, self.vectors)

    @cached_property
    def shifts(self) -> np.ndarray:
        G = self.problem.group
        return self.problem.rep.matrices[np.arange(G.N.order) * G.L + G.H.identity]

    def to_dict(self) -> dict:
        return {
            "mode": self.problem.mode,
            "K": self.problem.K,
            "L": self.problem.group.L,
            "A_H": self.A_H,
            "B_H": self.B_H,
            "frame_bounds_in_A_a": [self.frame_lower, self.frame_upper],
            "pr_deviation": self.pr_deviation,
            "synthesis_filters": [g.flat for g in self.synthesis],
            "reconstruction_vectors": list(self.vectors),
        }


def subspace_frame_bounds(vectors: np.ndarray, basis: np.ndarray) -> tuple[float, float]:
    """Frame bounds of the columns of ``vectors`` inside the span of ``basis``.

    ``basis`` must have orthonormal columns spanning a space that contains
    every column of ``vectors``.
    """
    coords = np.conj(basis.T) @ vectors
    w = np.linalg.eigvalsh(coords @ np.conj(coords.T))
    return float(max(w[0], 0.0)), float(w[-1])


def build_reconstruction(
    problem: SamplingProblem,
    U=None,
    tol_frame: float = FRAME_TOL,
    tol_pr: float = PR_TOL,
) -> ReconstructionKit:
    """Design synthesis filters and reconstruction vectors for ``problem``.

    With ``U=None`` the pseudo-inverse dual is used; otherwise the member
    ``H^+ + U (I - H H^+)`` of the dual family.  Raises
    :class:`~groupfb.errors.SingularPolyphaseError` when the samples do not
    determine the input.
    """
    rep, a = problem.rep, problem.generator
    orbit = rep.orbit(a)
    check_riesz(rep, a)
    h = problem.analysis_filters
    fc = frame_constants(analysis_matrix(h))
    g = design_dual_pseudoinverse(h, tol_frame) if U is None else dual_family(h, U, tol_frame)
    verdict = verify_pr(h, g, tol_pr)
    vectors = np.stack([orbit @ gk.flat for gk in g])
    G = problem.group
    shifts = rep.matrices[np.arange(G.N.order) * G.L + G.H.identity]
    system = np.einsum("mij,kj->imk", shifts, vectors).reshape(rep.dim, -1)
    basis, _ = np.linalg.qr(orbit)
    lo, hi = subspace_frame_bounds(system, basis)
    return ReconstructionKit(problem, g, vectors, fc.lower, fc.upper, lo, hi, verdict.max_dev)


def frame_report_for(problem: SamplingProblem, tol_pr: float = PR_TOL, tol_frame: float = FRAME_TOL) -> FrameReport:
    """Frame structure of the translates of ``involution(h_k)``; same ``H(gamma)`` as the sampling bank."""
    return frame_bounds([involution(h) for h in problem.analysis_filters], tol_pr, tol_frame)
