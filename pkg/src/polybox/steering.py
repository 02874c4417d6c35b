"""Assemblages over a polysimplex and a polytopic state space:
extraction from a bipartite state, separability (local-hidden-state
models), steering degrees, and self-dual bipartite states.

Bipartite elements are ambient matrices Y with ⟨f⊗g, y⟩ = fᵀ Y g.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import linalg as la
from .exact import R0, R1, rat
from .lp import OPTIMAL, LpBuilder
from .measurements import MeasurementCollection
from .polysimplex import PolySimplex
from .spaces import StateSpace, max_tensor_member


class Assemblage:
    """Conditional family {p(j|i), x_{j|i}} with a common average x."""

    def __init__(self, shape: PolySimplex, space: StateSpace, x, p, sub_states):
        self.shape = shape
        self.space = space
        self.x = tuple(rat(c) for c in x)
        self.p = {k: rat(v) for k, v in p.items()}
        self.sub_states = {k: tuple(rat(c) for c in v)
                           for k, v in sub_states.items()}
        self._validate()

    def _validate(self):
        space = self.space
        if not space.is_state(self.x):
            raise ValueError("assemblage average is not a state")
        for i, l in enumerate(self.shape.shape):
            tot = R0
            avg = la.zeros(space.dim)
            for j in range(l + 1):
                pij = self.p[(i, j)]
                if pij < 0:
                    raise ValueError(f"p({j}|{i}) negative")
                xij = self.sub_states[(i, j)]
                if not space.is_state(xij):
                    raise ValueError(f"sub-state ({i},{j}) is not a state")
                tot += pij
                avg = la.vec_add(avg, la.vec_scale(pij, xij))
            if tot != R1:
                raise ValueError(f"p(·|{i}) does not normalize")
            if tuple(avg) != self.x:
                raise ValueError(f"input {i} does not average to the barycenter")

    def to_tensor(self):
        """β = s_top ⊗ x + Σ_{i,j<l_i} e^i_j ⊗ p(j|i)x_{j|i}."""
        shape = self.shape
        t = la.outer(shape.vertex(shape.top), self.x)
        for i, l in enumerate(shape.shape):
            for j in range(l):
                w = la.vec_scale(self.p[(i, j)], self.sub_states[(i, j)])
                e = shape.edge(i, j)
                t = [[a + e[r] * w[c] for c, a in enumerate(row)]
                     for r, row in enumerate(t)]
        return la.mat(t)

    def mix_with_trivial(self, s, lam):
        """(1−λ)β + λ s⊗x as a new assemblage."""
        lam = rat(lam)
        shape = self.shape
        p = {}
        subs = {}
        for i, l in enumerate(shape.shape):
            for j in range(l + 1):
                pij = (R1 - lam) * self.p[(i, j)] + lam * shape.coords(s, i, j)
                vec = la.vec_add(
                    la.vec_scale((R1 - lam) * self.p[(i, j)], self.sub_states[(i, j)]),
                    la.vec_scale(lam * shape.coords(s, i, j), self.x))
                p[(i, j)] = pij
                subs[(i, j)] = tuple(la.vec_scale(1 / pij, vec)) if pij else self.x
        return Assemblage(shape, self.space, self.x, p, subs)

    def __repr__(self):
        return f"Assemblage({self.shape.shape} ⊗ {self.space.label})"


def assemblage_from(F: MeasurementCollection, y, space_b: StateSpace) -> Assemblage:
    """β = (F ⊗ id)(y): sub-states by conditioning on Alice's outcomes.

    y is an ambient matrix over V(K_A)⊗V(K_B); it must lie in the
    maximal tensor product of the two spaces.
    """
    space_a = F.space
    if not max_tensor_member(y, space_a, space_b):
        raise ValueError("y is not a state of the maximal tensor product")
    shape = F.shape
    yt = la.transpose(y)
    x = la.mat_vec(yt, space_a.unit)
    p = {}
    subs = {}
    for i, l in enumerate(shape.shape):
        for j in range(l + 1):
            phi = la.mat_vec(yt, F.effect(i, j))
            pij = la.dot(space_b.unit, phi)
            p[(i, j)] = pij
            if pij:
                subs[(i, j)] = tuple(la.vec_scale(1 / pij, phi))
            else:
                subs[(i, j)] = tuple(x)
    return Assemblage(shape, space_b, tuple(x), p, subs)


def assemblage_from_tensor(shape: PolySimplex, space: StateSpace, beta) -> Assemblage:
    """Read {p, x_{j|i}} off a tensor in S ⊗̂ K: pairing with m^i_j ⊗ ·."""
    # pairing with 1_S ⊗ · gives the barycenter; with m^i_j ⊗ · the parts
    x = la.mat_vec(la.transpose(beta), shape.unit())
    p = {}
    subs = {}
    for i, l in enumerate(shape.shape):
        for j in range(l + 1):
            phi = la.mat_vec(la.transpose(beta), shape.m(i, j))
            pij = la.dot(space.unit, phi)
            p[(i, j)] = pij
            subs[(i, j)] = tuple(la.vec_scale(1 / pij, phi)) if pij else tuple(x)
    return Assemblage(shape, space, tuple(x), p, subs)


@dataclass
class LhsModel:
    """Hidden-state model: weights q(λ) over deterministic responses
    q(j|i,λ) = [λ_i = j] with states x_λ."""
    weights: dict
    states: dict

    def check(self, beta: Assemblage):
        shape = beta.shape
        for i, l in enumerate(shape.shape):
            for j in range(l + 1):
                acc = la.zeros(beta.space.dim)
                for lam, q in self.weights.items():
                    if lam[i] == j and q:
                        acc = la.vec_add(acc, la.vec_scale(q, self.states[lam]))
                want = la.vec_scale(beta.p[(i, j)], beta.sub_states[(i, j)])
                if tuple(acc) != tuple(want):
                    raise AssertionError(f"LHS model misses component ({i},{j})")
        return True


def is_separable(beta: Assemblage):
    """β separable ⟺ β = Σ_n s_n ⊗ α_n with α_n ∈ V(K)+ (LP).
    Returns (bool, LhsModel | None)."""
    shape = beta.shape
    space = beta.space
    tensor = beta.to_tensor()
    outcomes = shape.outcome_list()
    nvert = len(space.vertices)

    lp = LpBuilder()
    avar = {n: lp.vars(nvert, nonneg=True) for n in outcomes}
    verts = [shape.vertex(n) for n in outcomes]
    for r in range(shape.ambient_dim):
        for c in range(space.dim):
            row = {}
            for n, sv in zip(outcomes, verts):
                if sv[r]:
                    for t, kv in enumerate(space.vertices):
                        if kv[c]:
                            col = avar[n][t]
                            row[col] = row.get(col, R0) + sv[r] * kv[c]
            lp.add_eq(row, tensor[r][c])
    res = lp.minimize({})
    if res.status != OPTIMAL:
        return False, None
    weights = {}
    states = {}
    for n in outcomes:
        vec = la.zeros(space.dim)
        for t, kv in enumerate(space.vertices):
            c = res[avar[n][t]]
            if c:
                vec = la.vec_add(vec, la.vec_scale(c, kv))
        q = la.dot(space.unit, vec)
        weights[n] = q
        states[n] = tuple(la.vec_scale(1 / q, vec)) if q else beta.x
    model = LhsModel(weights, states)
    model.check(beta)
    return True, model


def steering_degree_at(beta: Assemblage, s):
    """SD_s(β) = min λ with (1−λ)β + λ s⊗x separable; a single LP since
    the mixing is linear in λ."""
    shape = beta.shape
    space = beta.space
    if not shape.as_state_space().is_state(s):
        raise ValueError("mixing target must be a state of the polysimplex")
    tensor = beta.to_tensor()
    trivial = la.outer(s, beta.x)
    outcomes = shape.outcome_list()
    nvert = len(space.vertices)

    lp = LpBuilder()
    lam = lp.var(nonneg=True)
    lp.add_le({lam: R1}, R1)
    avar = {n: lp.vars(nvert, nonneg=True) for n in outcomes}
    verts = [shape.vertex(n) for n in outcomes]
    for r in range(shape.ambient_dim):
        for c in range(space.dim):
            row = {}
            for n, sv in zip(outcomes, verts):
                if sv[r]:
                    for t, kv in enumerate(space.vertices):
                        if kv[c]:
                            col = avar[n][t]
                            row[col] = row.get(col, R0) + sv[r] * kv[c]
            diff = tensor[r][c] - trivial[r][c]
            if diff:
                row[lam] = diff
            lp.add_eq(row, tensor[r][c])
    res = lp.minimize({lam: R1})
    if res.status != OPTIMAL:
        raise AssertionError("steering LP infeasible at λ=1: s⊗x is separable")
    return res.objective


@dataclass
class SdSearchReport:
    value: object
    s: tuple
    upper_bound_only: bool
    evaluations: int


def steering_degree(beta: Assemblage, tol=rat(1, 10**9), max_rounds=200):
    """SD(β) approached by coordinate descent over s from the barycenter;
    an upper bound on the infimum, like the ID search."""
    shape = beta.shape
    s = list(shape.barycenter())
    best = steering_degree_at(beta, tuple(s))
    evals = 1
    if best == 0:
        return SdSearchReport(R0, tuple(s), False, evals)
    step = rat(1, 4)
    for _ in range(max_rounds):
        improved = False
        for i, l in enumerate(shape.shape):
            off = shape._offset[i]
            for j in range(l + 1):
                for sign in (1, -1):
                    t = step if sign > 0 else -step
                    cand = list(s)
                    blk = [cand[off + jj] for jj in range(l + 1)]
                    newblk = [(R1 - t) * b for b in blk]
                    newblk[j] += t
                    if any(b <= 0 for b in newblk):
                        continue
                    for jj in range(l + 1):
                        cand[off + jj] = newblk[jj]
                    val = steering_degree_at(beta, tuple(cand))
                    evals += 1
                    if val < best - tol:
                        best = val
                        s = cand
                        improved = True
        if not improved:
            step = step / 2
            if step < tol:
                break
    return SdSearchReport(best, tuple(s), True, evals)


def self_dual_state(space: StateSpace, iso):
    """y = (id ⊗ Ψ)(χ_K), normalized to unit pairing with 1⊗1.

    `iso` maps facet index → (vertex index, positive scale); it must be
    a bijection onto the vertex set and extend to a linear cone
    isomorphism A(K)+ → V(K)+. Returns the ambient matrix of y.
    """
    X = space.span_projector
    targets = {}
    seen = set()
    for r, (t, c) in iso.items():
        c = rat(c)
        if c <= 0:
            raise ValueError("iso scales must be positive")
        if t in seen:
            raise ValueError("iso must map facets onto distinct vertices")
        seen.add(t)
        targets[r] = la.vec_scale(c, space.vertices[t])
    if len(targets) != len(space.facets) or len(seen) != len(space.vertices):
        raise ValueError("iso must pair every facet with a distinct vertex")
    # canonical matrix Q of Ψ: defined on the canonical facet reps
    dom = [la.mat_vec(X, f) for f in space.facets]
    Q = map_from_spanning_pairs(dom, [targets[r] for r in range(len(space.facets))],
                                space.dim)
    y0 = la.mat_mul(X, la.transpose(Q))
    norm = la.dot(space.unit, la.mat_vec(y0, space.unit))
    if norm <= 0:
        raise ValueError("iso gives a degenerate bipartite element")
    y = [[v / norm for v in row] for row in y0]
    if not max_tensor_member(y, space, space):
        raise ValueError("iso image is not positive: y leaves the maximal "
                         "tensor product")
    return la.mat(y)


def square_self_dual_iso():
    """The effect↔vertex matching of the square: m^0_0↦s00, m^0_1↦s11,
    m^1_0↦s01, m^1_1↦s10 (vertex order 00,01,10,11; facet order
    m00,m01,m10,m11)."""
    return {0: (0, 1), 1: (3, 1), 2: (1, 1), 3: (2, 1)}


def map_from_spanning_pairs(domain_vecs, images, codomain_dim):
    """Matrix of the linear map sending each domain vector to its image,
    zero on the orthogonal complement of their span; raises if the
    assignment is not linear."""
    idx = []
    rows = []
    for i, v in enumerate(domain_vecs):
        if la.rank(rows + [list(v)]) > len(rows):
            rows.append(list(v))
            idx.append(i)
    # Q = Σ images[i] ⊗ dual_i over an independent subset, then verify all
    gram = [[la.dot(rows[a], rows[b]) for b in range(len(rows))]
            for a in range(len(rows))]
    ginv = la.invert(gram)
    d = len(domain_vecs[0])
    q = [[R0] * d for _ in range(codomain_dim)]
    for a, ia in enumerate(idx):
        dual = la.zeros(d)
        for b in range(len(rows)):
            dual = la.vec_add(dual, la.vec_scale(ginv[a][b], rows[b]))
        img = images[ia]
        for r in range(codomain_dim):
            if img[r]:
                for c in range(d):
                    if dual[c]:
                        q[r][c] += img[r] * dual[c]
    qm = la.mat(q)
    for v, img in zip(domain_vecs, images):
        if tuple(la.mat_vec(qm, v)) != tuple(img):
            raise ValueError("assignment does not extend to a linear map")
    return qm
