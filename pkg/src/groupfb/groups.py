"""Finite abelian groups, their Fourier analysis, and semi-direct products.

Conventions
-----------
``N = Z_{s_1} x ... x Z_{s_d}`` is written additively.  Its elements are
integer vectors, enumerated in row-major order over the moduli; that flat
position is the *index* used by every array in the package.  The dual group
is identified with ``N`` itself through the product character

    <n, xi> = prod_i exp(2 pi i n_i xi_i / s_i),

so characters share the element indices.  The Fourier transform is
``X(xi) = sum_n x(n) conj(<n, xi>)`` and its inverse carries the factor
``1/|N|`` (Haar measure of total mass one on the dual).

``G = N x| H`` has elements ``(n, h)`` with ``h`` an index into the
multiplication table of ``H``; the flat index of ``(n, h)`` is ``n * L + h``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence, Union

import numpy as np

from .errors import StructureError

ElementN = tuple[int, ...]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AbelianGroup:
    """``Z_{s_1} x ... x Z_{s_d}``."""

    moduli: tuple[int, ...]

    def __post_init__(self):
        moduli = tuple(int(s) for s in self.moduli)
        if not moduli or any(s < 1 for s in moduli):
            raise StructureError(f"moduli must be a non-empty list of positive integers, got {self.moduli!r}")
        object.__setattr__(self, "moduli", moduli)

    @property
    def rank(self) -> int:
        return len(self.moduli)

    @property
    def order(self) -> int:
        return int(np.prod(self.moduli))

    @cached_property
    def elements(self) -> np.ndarray:
        """All elements as an ``(|N|, d)`` integer array, row-major order."""
        grids = np.indices(self.moduli).reshape(self.rank, -1).T
        return _frozen(np.ascontiguousarray(grids, dtype=np.int64))

    def index(self, n: Union[int, Sequence[int]]) -> int:
        """Flat index of ``n``; components are reduced modulo the moduli."""
        if np.isscalar(n):
            if self.rank != 1:
                raise StructureError(f"scalar element given for a rank-{self.rank} group")
            n = (n,)
        n = tuple(int(v) for v in n)
        if len(n) != self.rank:
            raise StructureError(f"element {n} has wrong length for moduli {self.moduli}")
        return int(np.ravel_multi_index(tuple(v % s for v, s in zip(n, self.moduli)), self.moduli))

    def element(self, i: int) -> ElementN:
        return tuple(int(v) for v in self.elements[i])

    def indices_of(self, vectors: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`index` for an ``(m, d)`` integer array."""
        vectors = np.asarray(vectors, dtype=np.int64) % np.array(self.moduli)
        return np.ravel_multi_index(tuple(vectors.T), self.moduli)

    @cached_property
    def add_table(self) -> np.ndarray:
        e = self.elements
        s = e[:, None, :] + e[None, :, :]
        return _frozen(self.indices_of(s.reshape(-1, self.rank)).reshape(self.order, self.order))

    @cached_property
    def sub_table(self) -> np.ndarray:
        """``sub_table[m, n]`` is the index of ``m - n``."""
        e = self.elements
        s = e[:, None, :] - e[None, :, :]
        return _frozen(self.indices_of(s.reshape(-1, self.rank)).reshape(self.order, self.order))

    @cached_property
    def neg(self) -> np.ndarray:
        return _frozen(self.indices_of(-self.elements))

    @cached_property
    def characters(self) -> np.ndarray:
        """``characters[n, xi] = <n, xi>``."""
        e = self.elements.astype(float)
        phase = (e / np.array(self.moduli, dtype=float)) @ e.T
        return _frozen(np.exp(2j * np.pi * phase))

    def __iter__(self) -> Iterator[ElementN]:
        return (self.element(i) for i in range(self.order))


def fourier_N(group: AbelianGroup, x) -> np.ndarray:
    """Fourier transform on ``N`` along axis 0: ``X(xi) = sum_n x(n) conj(<n, xi>)``.

    Computed as an explicit sum against the character table.
    """
    x = np.asarray(x, dtype=complex)
    if x.shape[0] != group.order:
        raise StructureError(f"signal of length {x.shape[0]} on a group of order {group.order}")
    return np.tensordot(group.characters.conj().T, x, axes=(1, 0))


def inverse_fourier_N(group: AbelianGroup, X) -> np.ndarray:
    """Inverse of :func:`fourier_N`: ``x(n) = (1/|N|) sum_xi X(xi) <n, xi>``."""
    X = np.asarray(X, dtype=complex)
    if X.shape[0] != group.order:
        raise StructureError(f"spectrum of length {X.shape[0]} on a group of order {group.order}")
    return np.tensordot(group.characters, X, axes=(1, 0)) / group.order


def convolve_N(group: AbelianGroup, a, b) -> np.ndarray:
    """``(a * b)(m) = sum_n a(n) b(m - n)`` by direct summation."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != (group.order,) or b.shape != (group.order,):
        raise StructureError("convolve_N expects two signals on the same group")
    return b[group.sub_table] @ a


@dataclass(frozen=True, eq=False)
class FiniteGroupH:
    """A finite group given by its multiplication table ``table[a, b] = a.b``."""

    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=np.int64)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
            raise StructureError("H_table must be a non-empty square table")
        L = t.shape[0]
        if t.min() < 0 or t.max() >= L:
            raise StructureError(f"H_table entries must lie in [0, {L})")
        assoc = t[t, :] == t[:, t]  # (ab)c vs a(bc) with axes (a, b, c)
        if not assoc.all():
            a, b, c = np.argwhere(~assoc)[0]
            raise StructureError(f"H_table is not associative at ({a}, {b}, {c})")
        ident = [e for e in range(L) if (t[e] == np.arange(L)).all() and (t[:, e] == np.arange(L)).all()]
        if not ident:
            raise StructureError("H_table has no identity element")
        e = ident[0]
        inv = np.full(L, -1, dtype=np.int64)
        for a in range(L):
            hits = np.flatnonzero((t[a] == e) & (t[:, a] == e))
            if hits.size == 0:
                raise StructureError(f"element {a} of H has no inverse")
            inv[a] = hits[0]
        object.__setattr__(self, "table", _frozen(t))
        object.__setattr__(self, "_identity", e)
        object.__setattr__(self, "_inverse", _frozen(inv))

    @property
    def order(self) -> int:
        return self.table.shape[0]

    @property
    def identity(self) -> int:
        return self._identity

    @property
    def inverse(self) -> np.ndarray:
        return self._inverse

    def __eq__(self, other):
        return isinstance(other, FiniteGroupH) and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash(self.table.tobytes())

    @classmethod
    def cyclic(cls, L: int) -> "FiniteGroupH":
        r = np.arange(L)
        return cls((r[:, None] + r[None, :]) % L)


@dataclass(frozen=True, eq=False)
class Automorphism:
    """An automorphism of ``N`` stored as a permutation of element indices."""

    group: AbelianGroup
    perm: np.ndarray

    def __post_init__(self):
        p = np.array(self.perm, dtype=np.int64).reshape(-1)
        N = self.group
        if p.shape != (N.order,):
            raise StructureError(f"permutation of length {p.size} on a group of order {N.order}")
        if sorted(p.tolist()) != list(range(N.order)):
            raise StructureError("automorphism is not a bijection of N")
        add = N.add_table
        bad = p[add] != add[p[:, None], p[None, :]]
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise StructureError(f"automorphism is not additive at n={N.element(i)}, m={N.element(j)}")
        object.__setattr__(self, "perm", _frozen(p))

    @classmethod
    def from_matrix(cls, group: AbelianGroup, matrix) -> "Automorphism":
        """``n -> A n`` reduced componentwise modulo the moduli."""
        A = np.array(matrix, dtype=np.int64)
        if A.shape != (group.rank, group.rank):
            raise StructureError(f"action matrix must be {group.rank}x{group.rank}, got shape {A.shape}")
        return cls(group, group.indices_of(group.elements @ A.T))

    @classmethod
    def from_permutation(cls, group: AbelianGroup, perm) -> "Automorphism":
        return cls(group, perm)

    @classmethod
    def identity(cls, group: AbelianGroup) -> "Automorphism":
        return cls(group, np.arange(group.order))

    def __call__(self, n) -> ElementN:
        return self.group.element(int(self.perm[self.group.index(n)]))

    def __eq__(self, other):
        return isinstance(other, Automorphism) and self.group == other.group and np.array_equal(self.perm, other.perm)

    def __hash__(self):
        return hash((self.group, self.perm.tobytes()))


@dataclass(frozen=True)
class GroupElement:
    group: "GroupSpec"
    n: ElementN
    h: int

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return g_mul(self, other)


@dataclass(frozen=True, eq=False)
class GroupSpec:
    """The semi-direct product ``N x|_phi H``.

    ``action[h]`` is the automorphism ``phi_h``.  The constructor checks that
    ``phi`` is a homomorphism ``H -> Aut(N)`` exhaustively.
    """

    N: AbelianGroup
    H: FiniteGroupH
    action: tuple[Automorphism, ...]

    def __post_init__(self):
        action = tuple(self.action)
        if len(action) != self.H.order:
            raise StructureError(f"need one automorphism per element of H ({self.H.order}), got {len(action)}")
        for a in action:
            if a.group != self.N:
                raise StructureError("automorphism defined on a different group N")
        object.__setattr__(self, "action", action)
        P = self.phi
        if not np.array_equal(P[self.H.identity], np.arange(self.N.order)):
            raise StructureError("phi of the identity of H is not the identity map")
        t = self.H.table
        for h1, h2 in itertools.product(range(self.H.order), repeat=2):
            if not np.array_equal(P[t[h1, h2]], P[h1][P[h2]]):
                raise StructureError(f"phi is not a homomorphism: phi_({h1}.{h2}) != phi_{h1} o phi_{h2}")

    @cached_property
    def phi(self) -> np.ndarray:
        """``phi[h, n]`` is the index of ``phi_h(n)``."""
        return _frozen(np.stack([a.perm for a in self.action]))

    @property
    def L(self) -> int:
        return self.H.order

    @property
    def order(self) -> int:
        return self.N.order * self.H.order

    @property
    def identity(self) -> GroupElement:
        return self.element(0 if self.N.rank == 1 else (0,) * self.N.rank, self.H.identity)

    def element(self, n, h: int) -> GroupElement:
        h = int(h)
        if not 0 <= h < self.L:
            raise StructureError(f"h={h} outside H of order {self.L}")
        return GroupElement(self, self.N.element(self.N.index(n)), h)

    def elements(self) -> Iterator[GroupElement]:
        for i in range(self.N.order):
            for h in range(self.L):
                yield GroupElement(self, self.N.element(i), h)

    def flat_index(self, g: GroupElement) -> int:
        return self.N.index(g.n) * self.L + g.h

    def __eq__(self, other):
        return (
            isinstance(other, GroupSpec)
            and self.N == other.N
            and self.H == other.H
            and np.array_equal(self.phi, other.phi)
        )

    def __hash__(self):
        return hash((self.N, self.H, self.phi.tobytes()))

    # -- JSON -------------------------------------------------------------
    @classmethod
    def from_dict(cls, doc: dict) -> "GroupSpec":
        """Build from ``{"moduli": [...], "H_table": [[...]], "action": {"h": matrix-or-permutation}}``.

        Missing action entries default to the identity map; the homomorphism
        check then decides whether that is consistent.
        """
        N = AbelianGroup(tuple(doc["moduli"]))
        H = FiniteGroupH(np.asarray(doc["H_table"]))
        raw = doc.get("action", {}) or {}
        action = []
        for h in range(H.order):
            spec = raw.get(str(h), raw.get(h))
            if spec is None:
                action.append(Automorphism.identity(N))
            elif len(spec) and isinstance(spec[0], (list, tuple)):
                action.append(Automorphism.from_matrix(N, spec))
            else:
                action.append(Automorphism.from_permutation(N, spec))
        unknown = set(map(str, raw)) - {str(h) for h in range(H.order)}
        if unknown:
            raise StructureError(f"action given for unknown H indices {sorted(unknown)}")
        return cls(N, H, tuple(action))

    def to_dict(self) -> dict:
        return {
            "moduli": list(self.N.moduli),
            "H_table": self.H.table.tolist(),
            "action": {str(h): self.phi[h].tolist() for h in range(self.L)},
        }


def g_mul(g1: GroupElement, g2: GroupElement) -> GroupElement:
    """``(n1, h1).(n2, h2) = (n1 + phi_h1(n2), h1 h2)``."""
    G = g1.group
    if g2.group is not G and g2.group != G:
        raise StructureError("cannot multiply elements of different groups")
    N = G.N
    n = N.add_table[N.index(g1.n), G.phi[g1.h, N.index(g2.n)]]
    return GroupElement(G, N.element(int(n)), int(G.H.table[g1.h, g2.h]))


def g_inv(g: GroupElement) -> GroupElement:
    """``(n, h)^-1 = (phi_{h^-1}(-n), h^-1)``."""
    G = g.group
    N = G.N
    hi = int(G.H.inverse[g.h])
    n = G.phi[hi, N.neg[N.index(g.n)]]
    return GroupElement(G, N.element(int(n)), hi)


def dihedral(s: int) -> GroupSpec:
    """``D_{2s} = Z_s x| Z_2`` with ``phi_1(n) = -n``."""
    N = AbelianGroup((s,))
    H = FiniteGroupH.cyclic(2)
    return GroupSpec(N, H, (Automorphism.identity(N), Automorphism.from_matrix(N, [[-1]])))


def direct_product(N: AbelianGroup, H: FiniteGroupH) -> GroupSpec:
    """Trivial action; mostly useful in tests."""
    return GroupSpec(N, H, tuple(Automorphism.identity(N) for _ in range(H.order)))
