"""Polytopic state spaces with both V- and H-representations.

A StateSpace carries the vertices of K (V-rep), the facet effects
generating A(K)+ (H-rep) and the unit functional. Both representations
are required; the built-in constructors (simplex, and the polysimplex
family in polysimplex.py) supply them analytically.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from . import linalg as la
from .exact import R0, R1, rat
from .lp import OPTIMAL, LpBuilder


class StateSpace:
    def __init__(self, label, vertices, unit, facets):
        self.label = str(label)
        self.vertices = la.mat(vertices)
        self.unit = la.vec(unit)
        self.facets = la.mat(facets)
        if not self.vertices:
            raise ValueError("state space needs at least one vertex")
        self.dim = len(self.vertices[0])
        for v in self.vertices:
            if len(v) != self.dim:
                raise ValueError("vertex dimension mismatch")
            if la.dot(self.unit, v) != 1:
                raise ValueError("unit functional must be 1 on every vertex")
        for g in self.facets:
            if len(g) != self.dim:
                raise ValueError("facet dimension mismatch")
            for v in self.vertices:
                if la.dot(g, v) < 0:
                    raise ValueError("facet effect negative on a vertex")

    def __repr__(self):
        return f"StateSpace({self.label!r}, {len(self.vertices)} vertices)"

    # ----- linear structure -----

    @cached_property
    def basis_idx(self):
        """Indices of vertices forming a basis of span V(K)."""
        return tuple(la.independent_rows(self.vertices))

    @cached_property
    def basis(self):
        return tuple(self.vertices[i] for i in self.basis_idx)

    @cached_property
    def rank(self):
        return len(self.basis_idx)

    @cached_property
    def _coord_idx(self):
        cols = [[v[i] for v in self.basis] for i in range(self.dim)]
        return tuple(la.independent_rows(cols))

    @cached_property
    def _coord_inv(self):
        m = tuple(tuple(v[r] for v in self.basis) for r in self._coord_idx)
        return la.invert(m)

    @cached_property
    def _gram_inv(self):
        g = tuple(tuple(la.dot(a, b) for b in self.basis) for a in self.basis)
        return la.invert(g)

    def expand(self, psi):
        """Coefficients of psi over the vertex basis, or None if psi is
        outside span V(K)."""
        psi = la.vec(psi)
        sub = tuple(psi[r] for r in self._coord_idx)
        c = la.mat_vec(self._coord_inv, sub)
        acc = la.zeros(self.dim)
        for cf, b in zip(c, self.basis):
            acc = la.vec_add(acc, la.vec_scale(cf, b))
        return c if acc == psi else None

    def in_span(self, psi) -> bool:
        return self.expand(psi) is not None

    def in_cone(self, psi) -> bool:
        """psi ∈ V(K)+ (span membership plus all facet pairings ≥ 0)."""
        if self.expand(psi) is None:
            return False
        return all(la.dot(g, psi) >= 0 for g in self.facets)

    def is_state(self, psi) -> bool:
        return self.in_cone(psi) and la.dot(self.unit, psi) == 1

    def interior_point(self):
        acc = la.zeros(self.dim)
        for v in self.vertices:
            acc = la.vec_add(acc, v)
        return la.vec_scale(rat(1, len(self.vertices)), acc)

    def functional_values(self, f):
        return tuple(la.dot(la.vec(f), v) for v in self.vertices)

    def is_effect(self, f) -> bool:
        return all(R0 <= t <= R1 for t in self.functional_values(f))

    def canonical_functional(self, values):
        """Ambient representative in span V(K) of the functional taking
        the given values on the vertices; None if no functional does."""
        values = la.vec(values)
        if len(values) != len(self.vertices):
            raise ValueError("one value per vertex required")
        y = tuple(values[i] for i in self.basis_idx)
        a = la.mat_vec(self._gram_inv, y)
        r = la.zeros(self.dim)
        for cf, b in zip(a, self.basis):
            r = la.vec_add(r, la.vec_scale(cf, b))
        for v, t in zip(self.vertices, values):
            if la.dot(r, v) != t:
                return None
        return r

    @cached_property
    def span_projector(self):
        """Matrix of the projection onto span V(K) that is the identity
        there and kills the orthogonal complement; this is also the
        ambient matrix of χ_K."""
        dual = self.dual_basis
        acc = [[R0] * self.dim for _ in range(self.dim)]
        for x, e in zip(self.basis, dual):
            for p in range(self.dim):
                if x[p] == 0:
                    continue
                for q in range(self.dim):
                    acc[p][q] += x[p] * e[q]
        return la.mat(acc)

    @cached_property
    def dual_basis(self):
        """Canonical representatives of the basis dual to the vertex
        basis (rows of gram_inv recombined)."""
        out = []
        for row in self._gram_inv:
            r = la.zeros(self.dim)
            for cf, b in zip(row, self.basis):
                r = la.vec_add(r, la.vec_scale(cf, b))
            out.append(r)
        return tuple(out)


def linear_map_from_vertex_images(space, images, codomain_dim=None):
    """d'×d matrix M with M·vertex == image for every vertex, or None if
    the images are not affinely consistent. M vanishes on the orthogonal
    complement of span V(K), which makes it canonical."""
    images = [la.vec(im) for im in images]
    if len(images) != len(space.vertices):
        raise ValueError("one image per vertex required")
    if codomain_dim is None:
        codomain_dim = len(images[0])
    rows = []
    for p in range(codomain_dim):
        vals = [im[p] for im in images]
        r = space.canonical_functional(vals)
        if r is None:
            return None
        rows.append(r)
    return la.mat(rows)


def span_inverse(m, space):
    """Inverse of a map span V(K) → span V(K) given by a canonical
    matrix (one that kills the orthogonal complement): returns m⁻ with
    m⁻m = mm⁻ = span_projector. Raises when m is singular on the span."""
    D = space.rank
    coords = [[la.dot(e, la.mat_vec(m, b)) for b in space.basis]
              for e in space.dual_basis]
    try:
        cinv = la.invert(coords)
    except ValueError:
        raise ValueError("map is singular on span V(K)") from None
    out = [[R0] * space.dim for _ in range(space.dim)]
    for a in range(D):
        for b in range(D):
            c = cinv[a][b]
            if c:
                for p in range(space.dim):
                    if space.basis[a][p]:
                        for q in range(space.dim):
                            if space.dual_basis[b][q]:
                                out[p][q] += c * space.basis[a][p] * space.dual_basis[b][q]
    return la.mat(out)


# ----- cone membership and norms -----

def membership(space, psi) -> bool:
    """psi ∈ K, decided by LP over convex combinations of vertices."""
    psi = la.vec(psi)
    if len(psi) != space.dim:
        raise ValueError("dimension mismatch")
    b = LpBuilder()
    w = b.vars(len(space.vertices))
    for p in range(space.dim):
        b.add_eq({w[i]: v[p] for i, v in enumerate(space.vertices)
                  if v[p] != 0}, psi[p])
    b.add_eq({wi: R1 for wi in w}, R1)
    return b.minimize({}).status == OPTIMAL


def base_norm(space, psi, with_decomposition=False):
    """inf{a+b : psi = a·x − b·y, x,y ∈ K} via the vertex LP."""
    psi = la.vec(psi)
    if len(psi) != space.dim:
        raise ValueError("dimension mismatch")
    if la.is_zero(psi):
        if with_decomposition:
            return R0, la.zeros(space.dim), la.zeros(space.dim)
        return R0
    if not space.in_span(psi):
        raise ValueError("psi outside span V(K)")
    b = LpBuilder()
    n = len(space.vertices)
    c = b.vars(n)
    d = b.vars(n)
    for p in range(space.dim):
        coeffs = {}
        for i, v in enumerate(space.vertices):
            if v[p] != 0:
                coeffs[c[i]] = v[p]
                coeffs[d[i]] = -v[p]
        b.add_eq(coeffs, psi[p])
    res = b.minimize({i: R1 for i in c + d})
    if res.status != OPTIMAL:
        raise ValueError("psi outside span V(K)")
    if not with_decomposition:
        return res.objective
    pos = la.zeros(space.dim)
    neg = la.zeros(space.dim)
    for i, v in enumerate(space.vertices):
        pos = la.vec_add(pos, la.vec_scale(res[c[i]], v))
        neg = la.vec_add(neg, la.vec_scale(res[d[i]], v))
    return res.objective, pos, neg


def max_effect_value(space, psi):
    """max_{f ∈ E(K)} ⟨f, psi⟩ (used for base-norm duality)."""
    psi = la.vec(psi)
    coeffs = space.expand(psi)
    if coeffs is None:
        raise ValueError("psi outside span V(K)")
    b = LpBuilder()
    t = b.vars(space.rank, nonneg=False)
    for v in space.vertices:
        expn = space.expand(v)
        row = {t[a]: cf for a, cf in enumerate(expn) if cf != 0}
        b.add_ge(row, R0)
        b.add_le(row, R1)
    res = b.maximize({t[a]: cf for a, cf in enumerate(coeffs) if cf != 0})
    return res.objective


@dataclass(frozen=True)
class ChiElement:
    """χ_K = Σ_i x_i ⊗ e_i, stored as the ambient matrix Σ x_i ẽ_iᵀ with
    canonical dual representatives; literally basis-independent."""
    space: StateSpace
    tensor: tuple

    def pair(self, f, y):
        """⟨χ_K, f⊗y⟩ = f(y) for y ∈ span V(K)."""
        return la.dot(la.vec(f), la.mat_vec(self.tensor, la.vec(y)))

    def push_left(self, m):
        """(T⊗id)(χ_K) for the map with ambient matrix m; the result
        pairs as ⟨g⊗f, ·⟩ = gᵀ · result · f."""
        return la.mat_mul(m, self.tensor)


def chi(space) -> ChiElement:
    return ChiElement(space, space.span_projector)


def dual_pairing_positivity(t_images, space, space2) -> bool:
    """Tr(T·S) ≥ 0 for S over the separable generators f'⊗φ, i.e. every
    facet effect of space2 is nonnegative on every vertex image."""
    m = linear_map_from_vertex_images(space, t_images, space2.dim)
    if m is None:
        raise ValueError("vertex images are not affinely consistent")
    for g in space2.facets:
        for v in space.vertices:
            if la.dot(g, la.mat_vec(m, v)) < 0:
                return False
    return True


def separable_decomposition(tensor, gens_left, gens_right):
    """Nonnegative weights λ with tensor == Σ_ab λ_ab · outer(l_a, r_b),
    or None. tensor is a (dim left)×(dim right) matrix."""
    gl = [la.vec(g) for g in gens_left]
    gr = [la.vec(g) for g in gens_right]
    dl, dr = len(gl[0]), len(gr[0])
    b = LpBuilder()
    lam = {}
    for a in range(len(gl)):
        for c in range(len(gr)):
            lam[(a, c)] = b.var()
    for p in range(dl):
        for q in range(dr):
            coeffs = {}
            for (a, c), var in lam.items():
                cf = gl[a][p] * gr[c][q]
                if cf != 0:
                    coeffs[var] = cf
            b.add_eq(coeffs, rat(tensor[p][q]))
    res = b.minimize({})
    if res.status != OPTIMAL:
        return None
    return {(a, c): res[v] for (a, c), v in lam.items()}


def max_tensor_member(tensor, space_a, space_b, normalized=True) -> bool:
    """tensor ∈ K_A ⊗̂ K_B: lies in span⊗span, pairs nonnegatively with
    all facet⊗facet generators, and (optionally) has unit pairing 1."""
    m = la.mat(tensor)
    pa = space_a.span_projector
    pb = space_b.span_projector
    if la.mat_mul(pa, la.mat_mul(m, la.transpose(pb))) != m:
        return False
    for g in space_a.facets:
        gm = la.mat_vec(la.transpose(m), g)
        for h in space_b.facets:
            if la.dot(gm, h) < 0:
                return False
    if normalized:
        if la.dot(space_a.unit, la.mat_vec(m, space_b.unit)) != 1:
            return False
    return True


def simplex_space(m) -> StateSpace:
    """Δ_m with the m+1 point distributions as vertices."""
    if m < 0:
        raise ValueError("simplex order must be nonnegative")
    n = m + 1
    verts = la.identity(n)
    return StateSpace(f"delta:{m}", verts, (R1,) * n, verts)
