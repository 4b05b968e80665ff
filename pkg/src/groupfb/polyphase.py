"""Polyphase matrices, filter banks, frame constants and dual design.

For analysis filters ``h_1..h_K`` the analysis polyphase matrix is the
``K x L`` field ``H(gamma)[k, i] = FT(h_{k, h_i})(gamma)`` with
``h_{k, h}(n) = h_k[(-n, h)^-1]``.  For synthesis filters ``g_1..g_K`` the
synthesis matrix is ``G(gamma)[i, k] = FT(g_k(., h_i))(gamma)``.  Fields are
stored as arrays of shape ``(|N|, rows, cols)`` indexed by the character.

When a bank is described by generators ``f_k`` of the translates
``T_n f_k`` (analysis filters ``involution(f_k)``), the analysis matrix is
``conj(FT(f_k(., h_i)))``; :func:`generator_matrix` builds it that way.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import SingularPolyphaseError, StructureError
from .groups import GroupSpec, fourier_N, inverse_fourier_N
from .signals import (
    GSignal,
    NSignal,
    analysis_component_array,
    convolve_G,
    decimate_H,
    expand_H,
)

PR_TOL = 1e-10
FRAME_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class PolyphaseField:
    group: GroupSpec
    kind: str  # "analysis" (K x L) or "synthesis" (L x K)
    matrices: np.ndarray

    def __post_init__(self):
        if self.kind not in ("analysis", "synthesis"):
            raise StructureError(f"unknown polyphase kind {self.kind!r}")
        m = np.array(self.matrices, dtype=complex)
        if m.ndim != 3 or m.shape[0] != self.group.N.order:
            raise StructureError(f"polyphase field needs shape (|N|, r, c), got {m.shape}")
        L = self.group.L
        if (self.kind == "analysis" and m.shape[2] != L) or (self.kind == "synthesis" and m.shape[1] != L):
            raise StructureError(f"{self.kind} matrices of shape {m.shape[1:]} do not match L={L}")
        m.setflags(write=False)
        object.__setattr__(self, "matrices", m)

    @property
    def K(self) -> int:
        return self.matrices.shape[1] if self.kind == "analysis" else self.matrices.shape[2]

    @property
    def L(self) -> int:
        return self.group.L

    def at(self, gamma) -> np.ndarray:
        return self.matrices[self.group.N.index(gamma)]

    def __matmul__(self, other: "PolyphaseField") -> np.ndarray:
        return self.matrices @ other.matrices


def _check_bank(filters: Sequence[GSignal]) -> GroupSpec:
    if len(filters) < 1:
        raise StructureError("a filter bank needs at least one filter")
    G = filters[0].group
    for f in filters[1:]:
        if f.group is not G and f.group != G:
            raise StructureError("filters live on different groups")
    return G


def analysis_matrix(filters: Sequence[GSignal]) -> PolyphaseField:
    """``H(gamma)[k, i] = FT(h_{k, h_i})(gamma)`` for analysis filters ``h_k``."""
    G = _check_bank(filters)
    comps = np.stack([analysis_component_array(f) for f in filters])  # (K, L, |N|)
    spec = fourier_N(G.N, np.moveaxis(comps, 2, 0))  # (|N|, K, L)
    return PolyphaseField(G, "analysis", spec)


def generator_matrix(generators: Sequence[GSignal]) -> PolyphaseField:
    """Analysis matrix of the bank whose analysis filters are ``involution(f_k)``.

    Entry ``(k, i)`` is ``conj(FT(f_k(., h_i))(gamma))``.
    """
    G = _check_bank(generators)
    slices = np.stack([f.values for f in generators], axis=1)  # (|N|, K, L)
    return PolyphaseField(G, "analysis", np.conj(fourier_N(G.N, slices)))


def synthesis_matrix(filters: Sequence[GSignal]) -> PolyphaseField:
    """``G(gamma)[i, k] = FT(g_k(., h_i))(gamma)``."""
    G = _check_bank(filters)
    slices = np.stack([g.values for g in filters], axis=2)  # (|N|, L, K)
    return PolyphaseField(G, "synthesis", fourier_N(G.N, slices))


def synthesis_filters(field: PolyphaseField) -> list[GSignal]:
    """Invert :func:`synthesis_matrix`: inverse N-Fourier transform of each entry."""
    if field.kind != "synthesis":
        raise StructureError("expected a synthesis (L x K) field")
    G = field.group
    vals = inverse_fourier_N(G.N, field.matrices)  # (|N|, L, K)
    return [GSignal(G, vals[:, :, k]) for k in range(field.K)]


def generators_from_matrix(field: PolyphaseField) -> list[GSignal]:
    """Invert :func:`generator_matrix`; handy for building banks with a prescribed ``H(gamma)``."""
    if field.kind != "analysis":
        raise StructureError("expected an analysis (K x L) field")
    G = field.group
    vals = inverse_fourier_N(G.N, np.conj(field.matrices))  # (|N|, K, L)
    return [GSignal(G, vals[:, k, :]) for k in range(field.K)]


def delta_bank(group: GroupSpec) -> tuple[list[GSignal], list[GSignal]]:
    """The trivial perfect-reconstruction bank.

    Generators ``delta_(0, h_k)`` form an orthonormal basis of translates;
    the analysis filters are their involutions ``delta_(0, h_k^-1)`` and the
    synthesis filters are the generators themselves.
    """
    synth = [GSignal.delta(group, 0 if group.N.rank == 1 else (0,) * group.N.rank, h) for h in range(group.L)]
    analysis = [
        GSignal.delta(group, 0 if group.N.rank == 1 else (0,) * group.N.rank, int(group.H.inverse[h]))
        for h in range(group.L)
    ]
    return analysis, synth


@dataclass(frozen=True, eq=False)
class FilterBankOutput:
    output: GSignal
    coefficients: list[NSignal]


def run_filterbank(
    alpha: GSignal,
    analysis: Sequence[GSignal],
    synthesis: Sequence[GSignal],
    method: str = "direct",
) -> FilterBankOutput:
    """Run the K-channel bank ``c_k = dec(alpha * h_k)``, ``beta = sum_k exp(c_k) * g_k``.

    ``method="direct"`` evaluates group convolutions; ``method="polyphase"``
    evaluates ``B = G H A`` character by character.  Both must agree.
    """
    if len(analysis) != len(synthesis):
        raise StructureError(f"{len(analysis)} analysis filters but {len(synthesis)} synthesis filters")
    G = _check_bank([alpha, *analysis, *synthesis])
    if method == "direct":
        coeffs = [decimate_H(convolve_G(alpha, h)) for h in analysis]
        beta = GSignal.zeros(G)
        for c, g in zip(coeffs, synthesis):
            beta = beta + convolve_G(expand_H(c, G), g)
        return FilterBankOutput(beta, coeffs)
    if method == "polyphase":
        A = fourier_N(G.N, alpha.values)  # (|N|, L)
        C = np.einsum("gkl,gl->gk", analysis_matrix(analysis).matrices, A)
        B = np.einsum("glk,gk->gl", synthesis_matrix(synthesis).matrices, C)
        coeffs = inverse_fourier_N(G.N, C)
        return FilterBankOutput(
            GSignal(G, inverse_fourier_N(G.N, B)),
            [NSignal(G.N, coeffs[:, k]) for k in range(len(analysis))],
        )
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class PRVerdict:
    pr: bool
    max_dev: float
    worst_gamma: tuple
    worst_entry: tuple[int, int]
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "pr": self.pr,
            "max_dev": self.max_dev,
            "worst_gamma": list(self.worst_gamma),
            "worst_entry": list(self.worst_entry),
            "tolerance": self.tolerance,
        }


def _identity_deviation(prod: np.ndarray) -> tuple[float, int, tuple[int, int]]:
    dev = np.abs(prod - np.eye(prod.shape[1])[None])
    flat = int(np.argmax(dev))
    g, i, j = np.unravel_index(flat, dev.shape)
    return float(dev.reshape(-1)[flat]), int(g), (int(i), int(j))


def verify_pr(analysis: Sequence[GSignal], synthesis: Sequence[GSignal], tol: float = PR_TOL) -> PRVerdict:
    """Perfect reconstruction holds iff ``G(gamma) H(gamma) = I_L`` at every character."""
    if len(analysis) != len(synthesis):
        raise StructureError(f"{len(analysis)} analysis filters but {len(synthesis)} synthesis filters")
    return verify_pr_fields(analysis_matrix(analysis), synthesis_matrix(synthesis), tol)


def verify_pr_fields(H: PolyphaseField, Gf: PolyphaseField, tol: float = PR_TOL) -> PRVerdict:
    dev, g, entry = _identity_deviation(Gf.matrices @ H.matrices)
    return PRVerdict(dev <= tol, dev, H.group.N.element(g), entry, tol)


@dataclass(frozen=True)
class FrameConstants:
    lower: float
    upper: float
    argmin: int  # character index of the smallest eigenvalue
    eigenvalues: np.ndarray  # (|N|, L), ascending per character
    eigenvectors: np.ndarray  # (|N|, L, L)


def frame_constants(H: PolyphaseField) -> FrameConstants:
    """``A_H = min_gamma lambda_min[H*H]`` and ``B_H = max_gamma lambda_max[H*H]``."""
    if H.kind != "analysis":
        raise StructureError("frame constants are defined for analysis fields")
    m = H.matrices
    S = np.conj(np.swapaxes(m, 1, 2)) @ m
    w, v = np.linalg.eigh(S)
    w = np.clip(w, 0.0, None)  # Hermitian PSD; clip roundoff
    g = int(np.argmin(w[:, 0]))
    return FrameConstants(float(w[g, 0]), float(w[:, -1].max()), g, w, v)


def _is_frame(fc: FrameConstants, tol_frame: float) -> bool:
    return fc.lower > tol_frame * fc.upper and fc.upper > 0


@dataclass
class FrameReport:
    A_H: float
    B_H: float
    K: int
    L: int
    bessel: bool
    frame: bool
    tight: Optional[float]
    riesz: bool
    onb: bool
    worst_gamma: tuple
    dual_frames: Optional[bool] = None
    biorthogonal: Optional[bool] = None
    riesz_dual: Optional[bool] = None
    partner: Optional[list] = field(default=None, repr=False)

    def __post_init__(self):
        assert 0 <= self.A_H <= self.B_H + 1e-12 * max(1.0, self.B_H)

    def to_dict(self) -> dict:
        d = {
            "A_H": self.A_H,
            "B_H": self.B_H,
            "K": self.K,
            "L": self.L,
            "bessel": self.bessel,
            "frame": self.frame,
            "tight": self.tight,
            "riesz": self.riesz,
            "onb": self.onb,
            "worst_gamma": list(self.worst_gamma),
        }
        if self.dual_frames is not None:
            d["classification"] = {
                "dual_frames": self.dual_frames,
                "biorthogonal": self.biorthogonal,
                "riesz_dual": self.riesz_dual,
                "onb": self.onb,
            }
        return d


def _report(H: PolyphaseField, tol_pr: float, tol_frame: float) -> FrameReport:
    fc = frame_constants(H)
    m = H.matrices
    S = np.conj(np.swapaxes(m, 1, 2)) @ m
    L, K = H.L, H.K
    A = float(np.real(np.trace(S, axis1=1, axis2=2)).mean() / L)
    scale = max(1.0, fc.upper)
    tight_dev = float(np.abs(S - A * np.eye(L)[None]).max())
    tight = A if (tight_dev <= tol_pr * scale and A > 0) else None
    frame = _is_frame(fc, tol_frame)
    onb = K == L and float(np.abs(S - np.eye(L)[None]).max()) <= tol_pr
    return FrameReport(
        A_H=fc.lower,
        B_H=fc.upper,
        K=K,
        L=L,
        bessel=bool(np.isfinite(fc.upper)),
        frame=frame,
        tight=tight,
        riesz=frame and K == L,
        onb=onb,
        worst_gamma=H.group.N.element(fc.argmin),
    )


def frame_bounds(
    generators: Sequence[GSignal], tol_pr: float = PR_TOL, tol_frame: float = FRAME_TOL
) -> FrameReport:
    """Frame constants and structure of the translates ``{T_n f_k}``."""
    if len(generators) < 1:
        raise StructureError("frame_bounds needs K >= 1 generators")
    return _report(generator_matrix(generators), tol_pr, tol_frame)


def classify_pair(
    f: Sequence[GSignal], g: Sequence[GSignal], tol_pr: float = PR_TOL, tol_frame: float = FRAME_TOL
) -> FrameReport:
    """Relations between the translate systems of ``f_k`` and ``g_k``.

    dual frames iff ``G H = I_L``; biorthogonal iff ``H G = I_K``; dual Riesz
    bases iff ``K = L`` and ``G = H^-1``; tightness and orthonormality refer
    to ``f`` alone.
    """
    if len(f) != len(g):
        raise StructureError(f"{len(f)} generators but {len(g)} partners")
    H = generator_matrix(f)
    Gf = synthesis_matrix(g)
    rep = _report(H, tol_pr, tol_frame)
    GH = Gf.matrices @ H.matrices
    HG = H.matrices @ Gf.matrices
    rep.dual_frames = _identity_deviation(GH)[0] <= tol_pr
    rep.biorthogonal = _identity_deviation(HG)[0] <= tol_pr
    if rep.K == rep.L and rep.frame:
        rep.riesz_dual = float(np.abs(Gf.matrices - np.linalg.inv(H.matrices)).max()) <= tol_pr
    else:
        rep.riesz_dual = False
    rep.partner = list(g)
    return rep


def pseudo_inverse_field(H: PolyphaseField, tol_frame: float = FRAME_TOL) -> PolyphaseField:
    """``H^+(gamma) = [H* H]^-1 H*`` via the Hermitian eigendecomposition of ``H* H``.

    Raises :class:`SingularPolyphaseError` when ``A_H <= tol_frame * B_H``.
    """
    fc = frame_constants(H)
    threshold = tol_frame * fc.upper
    if not fc.lower > threshold:
        raise SingularPolyphaseError(H.group.N.element(fc.argmin), fc.lower, threshold)
    v, w = fc.eigenvectors, fc.eigenvalues
    inv = (v / w[:, None, :]) @ np.conj(np.swapaxes(v, 1, 2))
    Hstar = np.conj(np.swapaxes(H.matrices, 1, 2))
    return PolyphaseField(H.group, "synthesis", inv @ Hstar)


def design_dual_pseudoinverse(analysis: Sequence[GSignal], tol_frame: float = FRAME_TOL) -> list[GSignal]:
    """Synthesis filters from the Moore-Penrose pseudo-inverse of the analysis matrix."""
    return synthesis_filters(pseudo_inverse_field(analysis_matrix(analysis), tol_frame))


def dual_family(analysis: Sequence[GSignal], U, tol_frame: float = FRAME_TOL) -> list[GSignal]:
    """``G = H^+ + U (I_K - H H^+)`` for an arbitrary ``L x K`` field ``U``.

    ``U`` may be a synthesis :class:`PolyphaseField` or an ``(|N|, L, K)`` array.
    """
    H = analysis_matrix(analysis)
    P = pseudo_inverse_field(H, tol_frame)
    u = U.matrices if isinstance(U, PolyphaseField) else np.asarray(U, dtype=complex)
    if u.shape != P.matrices.shape:
        raise StructureError(f"U must have shape {P.matrices.shape}, got {u.shape}")
    proj = np.eye(H.K)[None] - H.matrices @ P.matrices
    return synthesis_filters(PolyphaseField(H.group, "synthesis", P.matrices + u @ proj))
