"""Products of simplices S_{l_0,…,l_k}: the state spaces of multi-input
multi-outcome box devices.

Ambient coordinates concatenate the (l_i+1)-dimensional simplex blocks,
so the coordinate projections m^i_j are literally coordinate reads; the
canonical dual bases provide the minimal chart.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from . import linalg as la
from .exact import R0, R1, rat
from .spaces import StateSpace


@dataclass(frozen=True)
class DualBases:
    """Biorthogonal bases of A(S) and V(S) anchored at a vertex: the
    effect basis is (1_S, m^i_j for j ≠ base_i), the vector basis is
    (s_base, e^i_j for j ≠ base_i), with ⟨f_p, x_q⟩ = δ_pq."""
    base: tuple
    effects: tuple
    vectors: tuple
    labels: tuple


class PolySimplex:
    def __init__(self, shape):
        shape = tuple(int(l) for l in shape)
        if not shape or any(l < 1 for l in shape):
            raise ValueError("shape must be a nonempty list of positive integers")
        self.shape = shape
        self.k = len(shape) - 1
        self.dim = sum(shape)
        self.ambient_dim = sum(l + 1 for l in shape)
        self._offset = []
        off = 0
        for l in shape:
            self._offset.append(off)
            off += l + 1
        self.top = shape  # the anchor vertex s_{l_0,…,l_k}

    def __repr__(self):
        return f"PolySimplex{self.shape}"

    def __eq__(self, other):
        return isinstance(other, PolySimplex) and self.shape == other.shape

    def __hash__(self):
        return hash(self.shape)

    def outcomes(self):
        return itertools.product(*[range(l + 1) for l in self.shape])

    def outcome_list(self):
        return list(self.outcomes())

    def n_vertices(self):
        out = 1
        for l in self.shape:
            out *= l + 1
        return out

    def _check_index(self, i, j, allow_top=True):
        if not 0 <= i <= self.k:
            raise IndexError(f"input index {i} out of range")
        hi = self.shape[i] if allow_top else self.shape[i] - 1
        if not 0 <= j <= hi:
            raise IndexError(f"outcome index {j} out of range for input {i}")

    def vertex(self, n):
        n = tuple(n)
        if len(n) != self.k + 1:
            raise IndexError("vertex index length mismatch")
        v = [R0] * self.ambient_dim
        for i, (ni, l) in enumerate(zip(n, self.shape)):
            if not 0 <= ni <= l:
                raise IndexError(f"vertex index {ni} out of range for input {i}")
            v[self._offset[i] + ni] = R1
        return tuple(v)

    def m(self, i, j):
        """The coordinate projection effect m^i_j."""
        self._check_index(i, j)
        v = [R0] * self.ambient_dim
        v[self._offset[i] + j] = R1
        return tuple(v)

    def unit(self):
        v = [R0] * self.ambient_dim
        for j in range(self.shape[0] + 1):
            v[j] = R1
        return tuple(v)

    def edge(self, i, j):
        """e^i_j = s_{l_0,…,j,…,l_k} − s_{l_0,…,l_k}; zero when j = l_i."""
        self._check_index(i, j)
        idx = list(self.top)
        idx[i] = j
        return la.vec_sub(self.vertex(idx), self.vertex(self.top))

    def barycenter(self):
        v = []
        for l in self.shape:
            v += [rat(1, l + 1)] * (l + 1)
        return tuple(v)

    def coords(self, s, i, j):
        """m^i_j(s) read off the ambient coordinates."""
        return rat(s[self._offset[i] + j])

    def interior(self, s) -> bool:
        return all(self.coords(s, i, j) > 0
                   for i, l in enumerate(self.shape) for j in range(l + 1))

    def as_state_space(self, label=None) -> StateSpace:
        if label is None:
            label = _default_label(self.shape)
        verts = [self.vertex(n) for n in self.outcomes()]
        facets = [self.m(i, j) for i, l in enumerate(self.shape)
                  for j in range(l + 1)]
        return StateSpace(label, verts, self.unit(), facets)

    def dual_bases(self, base=None) -> DualBases:
        if base is None:
            base = self.top
        base = tuple(base)
        effects = [self.unit()]
        vectors = [self.vertex(base)]
        labels = [("unit", None, None)]
        for i, l in enumerate(self.shape):
            for j in range(l + 1):
                if j == base[i]:
                    continue
                idx = list(base)
                idx[i] = j
                effects.append(self.m(i, j))
                vectors.append(la.vec_sub(self.vertex(idx), self.vertex(base)))
                labels.append(("pair", i, j))
        return DualBases(base, tuple(effects), tuple(vectors), tuple(labels))

    def j_map(self):
        """The affine surjection J: Δ_L → S, δ_{n_0,…,n_k} ↦ s_{n_0,…,n_k}.
        Returns (matrix, outcome order); column t is the vertex for
        outcome order[t]."""
        order = self.outcome_list()
        cols = [self.vertex(n) for n in order]
        matrix = la.transpose(la.mat(cols))
        return matrix, order

    def flip_automorphism(self):
        """U(s_{n_0,…,n_k}) = s_{1−n_0,…,1−n_k} on hypercubes, as an
        ambient matrix (per-block coordinate swap)."""
        if any(l != 1 for l in self.shape):
            raise ValueError("flip automorphism is defined on hypercubes only")
        d = self.ambient_dim
        u = [[R0] * d for _ in range(d)]
        for i in range(self.k + 1):
            o = self._offset[i]
            u[o][o + 1] = R1
            u[o + 1][o] = R1
        return la.mat(u)


def _default_label(shape):
    if all(l == 1 for l in shape):
        return "square" if len(shape) == 2 else f"cube:{len(shape)}"
    if len(shape) == 1:
        return f"delta:{shape[0]}"
    return "poly:" + ",".join(str(l) for l in shape)


@lru_cache(maxsize=None)
def _cached_space(shape):
    return PolySimplex(shape).as_state_space()


def polysimplex_space(shape) -> StateSpace:
    return _cached_space(tuple(int(l) for l in shape))


def square_space() -> StateSpace:
    return polysimplex_space((1, 1))


def hypercube_space(m) -> StateSpace:
    """□_m, the state space of m binary inputs."""
    if m < 1:
        raise ValueError("hypercube needs at least one input")
    return polysimplex_space((1,) * m)


def map_trace(matrix, shape: PolySimplex):
    """Trace of a linear map V(S) → V(S) restricted to span V(S),
    Tr T = Σ_i ⟨f_i, T x_i⟩ over any dual basis pair."""
    db = shape.dual_bases()
    total = R0
    for f, x in zip(db.effects, db.vectors):
        total += la.dot(f, la.mat_vec(matrix, x))
    return total
