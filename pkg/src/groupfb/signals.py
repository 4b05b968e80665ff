"""Signals on ``G`` and on ``N`` and the structural operators between them.

A :class:`GSignal` is stored as an ``(|N|, L)`` complex array, so
``values[n, h] = alpha(n, h)``; flattening it row-major gives the
serialisation order (n-major, h-minor).

Filter convention: the analysis side of a filter bank uses filters ``h_k``
in the convolution ``alpha * h_k``.  When a filter bank is built from the
translates ``T_n f_k`` of generators ``f_k``, the analysis filters are the
involutions ``h_k = involution(f_k)``; the two descriptions differ exactly by
that involution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StructureError
from .groups import AbelianGroup, GroupElement, GroupSpec, convolve_N


def _as_values(values, shape) -> np.ndarray:
    v = np.array(values, dtype=complex)
    if v.shape != shape:
        raise StructureError(f"expected values of shape {shape}, got {v.shape}")
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class NSignal:
    group: AbelianGroup
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_values(self.values, (self.group.order,)))

    @classmethod
    def delta(cls, group: AbelianGroup, n=0) -> "NSignal":
        v = np.zeros(group.order, dtype=complex)
        v[group.index(n)] = 1.0
        return cls(group, v)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def inner(self, other: "NSignal") -> complex:
        return complex(np.vdot(other.values, self.values))


@dataclass(frozen=True, eq=False)
class GSignal:
    group: GroupSpec
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_values(self.values, (self.group.N.order, self.group.L)))

    @classmethod
    def zeros(cls, group: GroupSpec) -> "GSignal":
        return cls(group, np.zeros((group.N.order, group.L), dtype=complex))

    @classmethod
    def delta(cls, group: GroupSpec, n=0, h: int = None) -> "GSignal":
        """``delta_(n, h)``; ``h`` defaults to the identity of ``H``."""
        v = np.zeros((group.N.order, group.L), dtype=complex)
        v[group.N.index(n), group.H.identity if h is None else h] = 1.0
        return cls(group, v)

    @classmethod
    def from_flat(cls, group: GroupSpec, flat) -> "GSignal":
        return cls(group, np.asarray(flat, dtype=complex).reshape(group.N.order, group.L))

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def __call__(self, g: GroupElement) -> complex:
        return complex(self.values[self.group.N.index(g.n), g.h])

    def __add__(self, other: "GSignal") -> "GSignal":
        _same(self, other)
        return GSignal(self.group, self.values + other.values)

    def __sub__(self, other: "GSignal") -> "GSignal":
        _same(self, other)
        return GSignal(self.group, self.values - other.values)

    def __mul__(self, c) -> "GSignal":
        return GSignal(self.group, self.values * complex(c))

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def inner(self, other: "GSignal") -> complex:
        """``<self, other> = sum self * conj(other)``."""
        _same(self, other)
        return complex(np.vdot(other.values, self.values))


def _same(a, b):
    if a.group is not b.group and a.group != b.group:
        raise StructureError("signals live on different groups")


def convolve_G(alpha: GSignal, filt: GSignal) -> GSignal:
    """``(alpha * f)(m, l) = sum_(n,h) alpha(n, h) f(phi_{h^-1}(m - n), h^-1 l)``."""
    _same(alpha, filt)
    G = alpha.group
    N = G.N
    sub = N.sub_table  # [m, n] -> m - n
    out = np.zeros((N.order, G.L), dtype=complex)
    for h in range(G.L):
        hi = G.H.inverse[h]
        rows = G.phi[hi][sub]  # [m, n] -> phi_{h^-1}(m - n)
        cols = G.H.table[hi]  # [l] -> h^-1 l
        # gathered[m, n, l] = f(phi_{h^-1}(m - n), h^-1 l)
        gathered = filt.values[rows[:, :, None], cols[None, None, :]]
        out += np.einsum("n,mnl->ml", alpha.values[:, h], gathered)
    return GSignal(G, out)


def decimate_H(alpha: GSignal) -> NSignal:
    """Restriction to the ``h = 1_H`` slice."""
    return NSignal(alpha.group.N, alpha.values[:, alpha.group.H.identity])


def expand_H(c: NSignal, group: GroupSpec) -> GSignal:
    """Zero-padding adjoint of :func:`decimate_H`."""
    if c.group != group.N:
        raise StructureError("signal is not defined on the normal subgroup of this group")
    v = np.zeros((group.N.order, group.L), dtype=complex)
    v[:, group.H.identity] = c.values
    return GSignal(group, v)


def translate(alpha: GSignal, m) -> GSignal:
    """``(T_m alpha)(n, h) = alpha(n - m, h)``."""
    N = alpha.group.N
    return GSignal(alpha.group, alpha.values[N.sub_table[:, N.index(m)]])


def involution(alpha: GSignal) -> GSignal:
    """``alpha~(n, h) = conj(alpha((n, h)^-1))``."""
    G = alpha.group
    hinv = G.H.inverse  # [h]
    rows = G.phi[hinv[None, :], G.N.neg[:, None]]  # [n, h] -> phi_{h^-1}(-n)
    return GSignal(G, np.conj(alpha.values[rows, hinv[None, :]]))


def polyphase_signal(alpha: GSignal, h: int) -> NSignal:
    """``alpha_h(n) = alpha(n, h)``."""
    return NSignal(alpha.group.N, alpha.values[:, h])


def recompose(group: GroupSpec, slices) -> GSignal:
    """Inverse of taking all :func:`polyphase_signal` slices, in ``H`` order."""
    return GSignal(group, np.stack([s.values for s in slices], axis=1))


def analysis_component_array(filt: GSignal) -> np.ndarray:
    """All analysis polyphase components at once, shape ``(L, |N|)``.

    Row ``h`` is ``n -> filt[(-n, h)^-1] = filt(phi_{h^-1}(n), h^-1)``.
    """
    G = filt.group
    hinv = G.H.inverse
    rows = G.phi[hinv]  # [h, n] -> phi_{h^-1}(n)
    return filt.values[rows, hinv[:, None]]


def analysis_polyphase_component(filt: GSignal, h: int) -> NSignal:
    return NSignal(filt.group.N, analysis_component_array(filt)[h])


def decimated_convolution_polyphase(alpha: GSignal, filt: GSignal) -> NSignal:
    """``sum_h alpha_h *_N filt_h``: the polyphase route to ``decimate_H(alpha * filt)``."""
    _same(alpha, filt)
    N = alpha.group.N
    comps = analysis_component_array(filt)
    total = sum(convolve_N(N, alpha.values[:, h], comps[h]) for h in range(alpha.group.L))
    return NSignal(N, total)
