"""Incompatibility witnesses: positive maps W from a polysimplex into
the state cone V(K)+, their ETB decompositions, the trace pairing with
measurement collections, and the dual degree q_s.

A map W is stored redundantly by all vertex images; the exchange
equations w_n + w_n' = w_(n_i↔n'_i) are what makes an arbitrary image
table the vertex set of a linear map, so they are enforced on
construction.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import linalg as la
from .exact import R0, R1, rat
from .lp import OPTIMAL, LpBuilder
from .measurements import MeasurementCollection, make_collection
from .polysimplex import PolySimplex, map_trace
from .spaces import StateSpace, base_norm, linear_map_from_vertex_images


class WitnessValidationError(ValueError):
    """Raised by make_witness_map; .code is CONSISTENCY_VIOLATION or
    NOT_POSITIVE, .detail names the offending equation or image."""

    def __init__(self, code, detail):
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail


class WitnessMap:
    def __init__(self, shape: PolySimplex, space: StateSpace, vertex_images):
        self.shape = shape
        self.space = space
        self.vertex_images = {tuple(n): tuple(rat(c) for c in img)
                              for n, img in vertex_images.items()}

    def image(self, n):
        return self.vertex_images[tuple(n)]

    @property
    def top_image(self):
        return self.vertex_images[self.shape.top]

    def edge_image(self, i, j):
        """W(e^i_j) = w_(top with j at i) − w_top."""
        idx = list(self.shape.top)
        idx[i] = j
        return la.vec_sub(self.vertex_images[tuple(idx)], self.top_image)

    def apply(self, s):
        """W(s) for any s in span V(S), via the dual-basis chart."""
        shape = self.shape
        unit_s = sum(shape.coords(s, 0, j) for j in range(shape.shape[0] + 1))
        out = la.vec_scale(unit_s, self.top_image)
        for i, l in enumerate(shape.shape):
            for j in range(l):
                c = shape.coords(s, i, j)
                if c:
                    out = la.vec_add(out, la.vec_scale(c, self.edge_image(i, j)))
        return out

    def bar_image(self):
        """w̄ = W(s̄), the image of the barycenter."""
        return self.apply(self.shape.barycenter())

    def as_map_matrix(self):
        sspace = self.shape.as_state_space()
        images = [self.vertex_images[n] for n in self.shape.outcomes()]
        return linear_map_from_vertex_images(sspace, images, self.space.dim)

    def translate(self, v):
        """W + L_v with L_v = 1_S(·)v: every vertex image shifts by v."""
        return WitnessMap(self.shape, self.space,
                          {n: la.vec_add(img, v)
                           for n, img in self.vertex_images.items()})

    def scale(self, c):
        c = rat(c)
        return WitnessMap(self.shape, self.space,
                          {n: la.vec_scale(c, img)
                           for n, img in self.vertex_images.items()})

    def __repr__(self):
        return f"WitnessMap({self.shape.shape} -> {self.space.label})"


def make_witness_map(shape: PolySimplex, space: StateSpace, vertex_images) -> WitnessMap:
    """Validate the exchange equations and cone positivity; raises
    WitnessValidationError naming the first violation found."""
    W = WitnessMap(shape, space, vertex_images)
    outs = shape.outcome_list()
    have = set(W.vertex_images)
    if have != set(outs):
        raise ValueError("vertex images must be supplied for every outcome tuple")
    for n, np in itertools.combinations(outs, 2):
        for i in range(shape.k + 1):
            if n[i] == np[i]:
                continue
            a = list(n)
            a[i] = np[i]
            b = list(np)
            b[i] = n[i]
            lhs = la.vec_add(W.vertex_images[n], W.vertex_images[np])
            rhs = la.vec_add(W.vertex_images[tuple(a)], W.vertex_images[tuple(b)])
            if lhs != rhs:
                raise WitnessValidationError(
                    "CONSISTENCY_VIOLATION",
                    f"w{n} + w{np} != w{tuple(a)} + w{tuple(b)} (input {i})")
    for n in outs:
        if not space.in_cone(W.vertex_images[n]):
            raise WitnessValidationError("NOT_POSITIVE",
                                         f"image w{n} is not in the state cone")
    return W


@dataclass
class EtbDecomposition:
    """ψ^i_j ∈ V(K)+ with w_n = Σ_i ψ^i_{n_i}: the map factors through
    a classical simplex (measure-and-prepare form)."""
    psi: dict

    def check(self, W: WitnessMap):
        for n in W.shape.outcomes():
            tot = la.zeros(W.space.dim)
            for i, ni in enumerate(n):
                tot = la.vec_add(tot, self.psi[(i, ni)])
            if tuple(tot) != W.vertex_images[n]:
                raise AssertionError(f"decomposition misses vertex {n}")
        return True


def is_etb(W: WitnessMap):
    """LP feasibility for the vertex-sum factorization; returns
    (bool, EtbDecomposition | None)."""
    space = W.space
    shape = W.shape
    nvert = len(space.vertices)
    lp = LpBuilder()
    beta = {}
    for i, l in enumerate(shape.shape):
        for j in range(l + 1):
            beta[(i, j)] = lp.vars(nvert, nonneg=True)
    for n in shape.outcomes():
        target = W.vertex_images[n]
        for c in range(space.dim):
            row = {}
            for i, ni in enumerate(n):
                for t, v in enumerate(space.vertices):
                    if v[c]:
                        key = beta[(i, ni)][t]
                        row[key] = row.get(key, R0) + v[c]
            lp.add_eq(row, target[c])
    res = lp.minimize({})
    if res.status != OPTIMAL:
        return False, None
    psi = {}
    for (i, j), cols in beta.items():
        coeffs = [res[c] for c in cols]
        vec = la.zeros(space.dim)
        for t, v in enumerate(space.vertices):
            if coeffs[t]:
                vec = la.vec_add(vec, la.vec_scale(coeffs[t], v))
        psi[(i, j)] = tuple(vec)
    dec = EtbDecomposition(psi)
    dec.check(W)
    return True, dec


def trace_pairing(F: MeasurementCollection, W: WitnessMap):
    """Tr FW = Σ_i Σ_j ⟨f^i_j, w^i_j⟩ − k⟨1_K, w_top⟩ where w^i_j is the
    image at the top index with entry i replaced by j."""
    shape = W.shape
    if F.shape != shape:
        raise ValueError("collection and witness have different shapes")
    k = shape.k
    total = R0
    for i, l in enumerate(shape.shape):
        for j in range(l + 1):
            idx = list(shape.top)
            idx[i] = j
            w_ij = W.vertex_images[tuple(idx)]
            total += F.effect_value(i, j, w_ij)
    total -= k * la.dot(F.space.unit, W.top_image)
    return total


def trace_pairing_rebased(F: MeasurementCollection, W: WitnessMap, base):
    """Same trace through the dual bases anchored at an arbitrary vertex;
    equals trace_pairing for every base (basis independence)."""
    shape = W.shape
    base = tuple(base)
    k = shape.k
    total = R0
    for i, l in enumerate(shape.shape):
        for j in range(l + 1):
            idx = list(base)
            idx[i] = j
            total += F.effect_value(i, j, W.vertex_images[tuple(idx)])
    total -= k * la.dot(F.space.unit, W.vertex_images[base])
    return total


def map_trace_pairing(F: MeasurementCollection, W: WitnessMap):
    """Tr(F∘W) summed over an explicit dual-basis pair of V(S)."""
    m = la.mat_mul(F.as_map_matrix(), W.as_map_matrix())
    return map_trace(m, W.shape)


@dataclass
class WitnessDecision:
    is_witness: bool
    min_value: object
    minimizer: MeasurementCollection
    translation: tuple | None
    translated_etb: EtbDecomposition | None


def _collection_lp_vars(lp, space: StateSpace, shape: PolySimplex):
    """Free variables f^i_j(b_a) at basis vertices with effect-validity
    rows; returns the variable table."""
    D = space.rank
    exp_rows = [space.expand(v) for v in space.vertices]
    phi = {}
    for i, l in enumerate(shape.shape):
        for j in range(l + 1):
            phi[(i, j)] = lp.vars(D, nonneg=False)
    for i, l in enumerate(shape.shape):
        for j in range(l + 1):
            for row in exp_rows:
                lp.add_ge({phi[(i, j)][a]: row[a] for a in range(D) if row[a]}, R0)
        for a in range(D):
            lp.add_eq({phi[(i, j)][a]: R1 for j in range(l + 1)}, R1)
    return phi


def _collection_from_lp(space, shape, phi, res):
    exp_rows = [space.expand(v) for v in space.vertices]
    D = space.rank
    eff = {}
    for key, cols in phi.items():
        basis_vals = [res[c] for c in cols]
        eff[key] = tuple(sum(row[a] * basis_vals[a] for a in range(D))
                         for row in exp_rows)
    return make_collection(space, shape, eff)


def is_witness(W: WitnessMap) -> WitnessDecision:
    """W detects incompatibility iff min over collections of Tr FW is
    negative. Both sides of the duality run: the minimizing-F LP and the
    ETB-translation feasibility; their verdicts must be complementary.
    """
    space = W.space
    shape = W.shape
    D = space.rank

    lp = LpBuilder()
    phi = _collection_lp_vars(lp, space, shape)
    objective = {}
    for i, l in enumerate(shape.shape):
        for j in range(l + 1):
            idx = list(shape.top)
            idx[i] = j
            coeffs = space.expand(W.vertex_images[tuple(idx)])
            for a in range(D):
                if coeffs[a]:
                    key = phi[(i, j)][a]
                    objective[key] = objective.get(key, R0) + coeffs[a]
    res = lp.minimize(objective)
    if res.status != OPTIMAL:
        raise AssertionError("minimizing-F LP must be bounded and feasible")
    k = shape.k
    min_value = res.objective - k * la.dot(space.unit, W.top_image)
    minimizer = _collection_from_lp(space, shape, phi, res)

    translation, etb = _etb_translation(W)

    witness = min_value < 0
    if witness == (translation is not None):
        raise AssertionError("duality violated: witness test and translation "
                             "test must be complementary")
    return WitnessDecision(witness, min_value, minimizer, translation, etb)


def _etb_translation(W: WitnessMap):
    """Find v with ⟨1_K, v⟩ = 0 such that W + L_v is ETB, or None."""
    space = W.space
    shape = W.shape
    D = space.rank
    nvert = len(space.vertices)
    lp = LpBuilder()
    cvar = lp.vars(D, nonneg=False)
    beta = {}
    for i, l in enumerate(shape.shape):
        for j in range(l + 1):
            beta[(i, j)] = lp.vars(nvert, nonneg=True)
    lp.add_eq({c: R1 for c in cvar}, R0)  # ⟨1_K, v⟩ = Σ_a c_a
    basis = space.basis
    for n in shape.outcomes():
        target = W.vertex_images[n]
        for c in range(space.dim):
            row = {}
            for i, ni in enumerate(n):
                for t, v in enumerate(space.vertices):
                    if v[c]:
                        key = beta[(i, ni)][t]
                        row[key] = row.get(key, R0) + v[c]
            for a in range(D):
                if basis[a][c]:
                    row[cvar[a]] = row.get(cvar[a], R0) - basis[a][c]
            lp.add_eq(row, target[c])
    res = lp.minimize({})
    if res.status != OPTIMAL:
        return None, None
    v = la.zeros(space.dim)
    for a in range(D):
        if res[cvar[a]]:
            v = la.vec_add(v, la.vec_scale(res[cvar[a]], basis[a]))
    shifted = W.translate(v)
    ok, dec = is_etb(shifted)
    if not ok:
        raise AssertionError("translation LP produced a non-ETB shift")
    return tuple(v), dec


def q_value(F: MeasurementCollection, s):
    """q_s(F) = min Tr FW over W ∈ A(S,V(K)+) with W(s) ∈ K, and the
    incompatibility degree ID_s = −q/(1−q) for q ≤ 0 (else 0). Returns
    (q, minimizing WitnessMap, ID_s)."""
    shape = F.shape
    space = F.space
    if not shape.interior(s):
        raise ValueError("q_value needs a strictly interior s")
    lp, ctop, evars = _witness_lp_core(F, constrain="cone")
    # W(s) ∈ K: facet rows plus normalization
    s_coeffs = {(i, j): shape.coords(s, i, j)
                for i, l in enumerate(shape.shape) for j in range(l)}
    _add_point_rows(lp, F, ctop, evars, s_coeffs, normalize=True)
    objective = _trace_objective(F, ctop, evars)
    res = lp.minimize(objective)
    if res.status != OPTIMAL:
        raise AssertionError("q LP must be bounded for a polytopic space")
    q = res.objective
    W = _witness_from_lp(F, ctop, evars, res)
    lam = (-q) / (R1 - q) if q <= 0 else R0
    return q, W, lam


def _witness_lp_core(F, constrain):
    """Variables: basis coordinates of w_top and of each edge image;
    rows: every vertex image in V(K)+ (facets), or in K when
    constrain == 'state'."""
    shape = F.shape
    space = F.space
    D = space.rank
    lp = LpBuilder()
    ctop = lp.vars(D, nonneg=False)
    evars = {}
    for i, l in enumerate(shape.shape):
        for j in range(l):
            evars[(i, j)] = lp.vars(D, nonneg=False)
    fb = [[la.dot(f, b) for b in space.basis] for f in space.facets]
    for n in shape.outcome_list():
        terms = [evars[(i, ni)] for i, ni in enumerate(n)
                 if ni < shape.shape[i]]
        for frow in fb:
            row = {}
            for a in range(D):
                if frow[a]:
                    row[ctop[a]] = row.get(ctop[a], R0) + frow[a]
                    for cols in terms:
                        row[cols[a]] = row.get(cols[a], R0) + frow[a]
            lp.add_ge(row, R0)
        if constrain == "state":
            row = {ctop[a]: R1 for a in range(D)}
            for cols in terms:
                for a in range(D):
                    row[cols[a]] = row.get(cols[a], R0) + R1
            lp.add_eq(row, R1)
    return lp, ctop, evars


def _add_point_rows(lp, F, ctop, evars, s_coeffs, normalize):
    """Constrain W(s) ∈ K for s given by its dual-basis coefficients."""
    space = F.space
    D = space.rank
    fb = [[la.dot(f, b) for b in space.basis] for f in space.facets]
    for frow in fb:
        row = {}
        for a in range(D):
            if frow[a]:
                row[ctop[a]] = row.get(ctop[a], R0) + frow[a]
                for key, c in s_coeffs.items():
                    if c:
                        col = evars[key][a]
                        row[col] = row.get(col, R0) + c * frow[a]
        lp.add_ge(row, R0)
    if normalize:
        row = {ctop[a]: R1 for a in range(D)}
        for key, c in s_coeffs.items():
            if c:
                for a in range(D):
                    col = evars[key][a]
                    row[col] = row.get(col, R0) + c
        lp.add_eq(row, R1)


def _trace_objective(F, ctop, evars):
    """Tr FW = ⟨1_K, w_top⟩ + Σ_{i,j<l_i} ⟨f^i_j, W(e^i_j)⟩ in the basis
    coordinates (uses Σ_j f^i_j = 1_K)."""
    space = F.space
    D = space.rank
    objective = {ctop[a]: R1 for a in range(D)}
    for (i, j), cols in evars.items():
        for a in range(D):
            val = F.effects[(i, j)][space.basis_idx[a]]
            if val:
                objective[cols[a]] = objective.get(cols[a], R0) + val
    return objective


def _witness_from_lp(F, ctop, evars, res):
    space = F.space
    shape = F.shape
    D = space.rank

    def vec_of(cols):
        v = la.zeros(space.dim)
        for a in range(D):
            c = res[cols[a]]
            if c:
                v = la.vec_add(v, la.vec_scale(c, space.basis[a]))
        return tuple(v)

    w_top = vec_of(ctop)
    eimg = {key: vec_of(cols) for key, cols in evars.items()}
    images = {}
    for n in shape.outcomes():
        img = w_top
        for i, ni in enumerate(n):
            if ni < shape.shape[i]:
                img = la.vec_add(img, eimg[(i, ni)])
        images[n] = tuple(img)
    return make_witness_map(shape, space, images)


def two_outcome_witness_criterion(W: WitnessMap) -> bool:
    """Hypercube witness test: Σ_i ‖W(e^i_0)‖_K > 2⟨1_K, w̄⟩."""
    shape = W.shape
    if any(l != 1 for l in shape.shape):
        raise ValueError("the norm criterion applies to hypercube shapes only")
    total = R0
    for i in range(shape.k + 1):
        total += base_norm(W.space, W.edge_image(i, 0))
    wbar = W.bar_image()
    return total > 2 * la.dot(W.space.unit, wbar)


def _face_span(space: StateSpace, w):
    """Generators of the minimal face of V(K)+ containing w: the
    vertices tight on every facet active at w."""
    active = [f for f in space.facets if la.dot(f, w) == 0]
    gens = [v for v in space.vertices
            if all(la.dot(f, v) == 0 for f in active)]
    return gens


def square_extremality(W: WitnessMap) -> bool:
    """Extremality of W ∈ A(□₂, V(K)+) by the face-span conditions:
    L_00 ∩ L_11 = L_01 ∩ L_10 = {0} and the two plane sums meet exactly
    in the line through w̄."""
    if W.shape.shape != (1, 1):
        raise ValueError("extremality test implemented for the square shape only")
    space = W.space
    L = {n: _face_span(space, W.vertex_images[n]) for n in W.shape.outcomes()}

    def dim(rows):
        return la.rank(rows) if rows else 0

    d00, d11 = dim(L[(0, 0)]), dim(L[(1, 1)])
    d01, d10 = dim(L[(0, 1)]), dim(L[(1, 0)])
    if dim(L[(0, 0)] + L[(1, 1)]) != d00 + d11:
        return False
    if dim(L[(0, 1)] + L[(1, 0)]) != d01 + d10:
        return False
    u = L[(0, 0)] + L[(1, 1)]
    v = L[(0, 1)] + L[(1, 0)]
    inter = dim(u) + dim(v) - dim(u + v)
    if inter != 1:
        return False
    return not la.is_zero(W.bar_image())


@dataclass
class MaximalReport:
    maximal: bool
    value: object
    witness: WitnessMap | None
    orthogonal: bool | None


def maximal_incompatibility_certificate(F: MeasurementCollection) -> MaximalReport:
    """Search W ∈ A(S,K) (all vertex images states) minimizing Tr FW;
    F is maximally incompatible iff the optimum is −k. On success the
    orthogonality relations ⟨f^i_j, w_(n_i=j)⟩ = 0 are verified too."""
    shape = F.shape
    lp, ctop, evars = _witness_lp_core(F, constrain="state")
    objective = _trace_objective(F, ctop, evars)
    res = lp.minimize(objective)
    if res.status != OPTIMAL:
        raise AssertionError("state-image LP must be bounded")
    value = res.objective
    k = shape.k
    W = _witness_from_lp(F, ctop, evars, res)
    if value != -k:
        return MaximalReport(False, value, None, None)
    ortho = True
    for i, l in enumerate(shape.shape):
        for j in range(l + 1):
            for n in shape.outcomes():
                if n[i] != j:
                    continue
                if F.effect_value(i, j, W.vertex_images[n]) != 0:
                    ortho = False
    return MaximalReport(True, value, W, ortho)


@dataclass
class RetractionReport:
    is_retraction: bool
    section_images: dict | None
    section_matrix: tuple | None
    projection: tuple | None


def retraction_check(F: MeasurementCollection) -> RetractionReport:
    """Look for a section S' ∈ A(□_{k+1}, K) with F∘S' = id: an LP on the
    images of the cube vertices. On success also returns P = S'∘F, an
    affine projection of K onto a hypercube slice."""
    shape = F.shape
    space = F.space
    if any(l != 1 for l in shape.shape):
        raise ValueError("retraction test applies to hypercube shapes only")
    D = space.rank
    lp = LpBuilder()
    ctop = lp.vars(D, nonneg=False)
    evars = {i: lp.vars(D, nonneg=False) for i in range(shape.k + 1)}
    fb = [[la.dot(f, b) for b in space.basis] for f in space.facets]

    def image_cols(n):
        return [evars[i] for i, ni in enumerate(n) if ni == 0]

    for n in shape.outcome_list():
        terms = image_cols(n)
        for frow in fb:
            row = {}
            for a in range(D):
                if frow[a]:
                    row[ctop[a]] = row.get(ctop[a], R0) + frow[a]
                    for cols in terms:
                        row[cols[a]] = row.get(cols[a], R0) + frow[a]
            lp.add_ge(row, R0)
        row = {ctop[a]: R1 for a in range(D)}
        for cols in terms:
            for a in range(D):
                row[cols[a]] = row.get(cols[a], R0) + R1
        lp.add_eq(row, R1)
        # F(σ_n) = s_n: effect i hits outcome n_i with certainty
        for i in range(shape.k + 1):
            vals = F.effects[(i, 0)]
            brow = {}
            for a in range(D):
                v = vals[space.basis_idx[a]]
                if v:
                    brow[ctop[a]] = brow.get(ctop[a], R0) + v
                    for cols in terms:
                        brow[cols[a]] = brow.get(cols[a], R0) + v
            lp.add_eq(brow, R1 if n[i] == 0 else R0)
    res = lp.minimize({})
    if res.status != OPTIMAL:
        return RetractionReport(False, None, None, None)

    def vec_of(cols):
        v = la.zeros(space.dim)
        for a in range(D):
            c = res[cols[a]]
            if c:
                v = la.vec_add(v, la.vec_scale(c, space.basis[a]))
        return tuple(v)

    w_top = vec_of(ctop)
    eimg = {i: vec_of(evars[i]) for i in evars}
    images = {}
    for n in shape.outcomes():
        img = w_top
        for i, ni in enumerate(n):
            if ni == 0:
                img = la.vec_add(img, eimg[i])
        images[n] = tuple(img)
    sspace = shape.as_state_space()
    smat = linear_map_from_vertex_images(
        sspace, [images[n] for n in shape.outcomes()], space.dim)
    proj = la.mat_mul(smat, F.as_map_matrix())
    return RetractionReport(True, images, smat, proj)


def random_witness_map(shape: PolySimplex, space: StateSpace, rng,
                       slack_choices=(0, 0, 1, 4)) -> WitnessMap:
    """Random valid witness map: random chart images shifted into the
    cone along an interior direction. Small slack tends to produce
    witnesses, large slack ETB maps."""
    D = space.rank
    xbar = space.interior_point()

    def rand_vec():
        v = la.zeros(space.dim)
        for b in space.basis:
            c = rat(rng.randrange(-8, 9), 4)
            if c:
                v = la.vec_add(v, la.vec_scale(c, b))
        return v

    w_top = rand_vec()
    eimg = {(i, j): rand_vec()
            for i, l in enumerate(shape.shape) for j in range(l)}
    images = {}
    for n in shape.outcomes():
        img = w_top
        for i, ni in enumerate(n):
            if ni < shape.shape[i]:
                img = la.vec_add(img, eimg[(i, ni)])
        images[n] = tuple(img)
    need = R0
    for img in images.values():
        for f in space.facets:
            val = la.dot(f, img)
            if val < 0:
                bound = -val / la.dot(f, xbar)
                if bound > need:
                    need = bound
    extra = rat(rng.choice(slack_choices), 2)
    shift = la.vec_scale(need + extra, xbar)
    images = {n: tuple(la.vec_add(img, shift)) for n, img in images.items()}
    return make_witness_map(shape, space, images)
