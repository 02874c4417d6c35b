"""No-signalling boxes, locality, CHSH witnesses and the
witness-factorization bound linking Bell violations to incompatibility.

Box probability tables are literally the ambient tensor coordinates of
the corresponding bipartite polysimplex element, so locality questions
reduce to separability of that tensor.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import linalg as la
from .exact import R0, R1, TOL, approx_eq, is_rational, rat
from .lp import OPTIMAL, LpBuilder
from .measurements import MeasurementCollection, identity_collection
from .polysimplex import PolySimplex, square_space
from .spaces import max_tensor_member, span_inverse
from .witnesses import q_value


class Box:
    """Bipartite conditional probability table p(j_a, j_b | i_a, i_b).

    Exact (rational) or float mode, detected from the values. Keys run
    over (i_a, i_b, j_a, j_b) with per-input outcome counts taken from
    the polysimplex shapes.
    """

    def __init__(self, shape_a: PolySimplex, shape_b: PolySimplex, probs, tol=TOL):
        self.shape_a = shape_a
        self.shape_b = shape_b
        exact = all(is_rational(v) for v in probs.values())
        self.mode = "exact" if exact else "float"
        if exact:
            self.probs = {k: rat(v) for k, v in probs.items()}
        else:
            self.probs = {k: float(v) for k, v in probs.items()}
        self.tol = tol
        self._validate()

    def _keys(self):
        for ia, la_ in enumerate(self.shape_a.shape):
            for ib, lb in enumerate(self.shape_b.shape):
                for ja in range(la_ + 1):
                    for jb in range(lb + 1):
                        yield (ia, ib, ja, jb)

    def _eq(self, a, b):
        if self.mode == "exact":
            return a == b
        return approx_eq(a, b, self.tol)

    def _validate(self):
        want = set(self._keys())
        if set(self.probs) != want:
            raise ValueError("probability table does not match the shapes")
        zero = R0 if self.mode == "exact" else -self.tol
        for k, v in self.probs.items():
            if v < zero:
                raise ValueError(f"negative probability at {k}")
        one = R1 if self.mode == "exact" else 1.0
        for ia, la_ in enumerate(self.shape_a.shape):
            for ib, lb in enumerate(self.shape_b.shape):
                tot = sum(self.probs[(ia, ib, ja, jb)]
                          for ja in range(la_ + 1) for jb in range(lb + 1))
                if not self._eq(tot, one):
                    raise ValueError(f"setting ({ia},{ib}) does not normalize")
        # no-signalling in both directions
        for ia, la_ in enumerate(self.shape_a.shape):
            for ja in range(la_ + 1):
                ref = None
                for ib, lb in enumerate(self.shape_b.shape):
                    marg = sum(self.probs[(ia, ib, ja, jb)] for jb in range(lb + 1))
                    if ref is None:
                        ref = marg
                    elif not self._eq(ref, marg):
                        raise ValueError(f"signalling to A at input {ia}, outcome {ja}")
        for ib, lb in enumerate(self.shape_b.shape):
            for jb in range(lb + 1):
                ref = None
                for ia, la_ in enumerate(self.shape_a.shape):
                    marg = sum(self.probs[(ia, ib, ja, jb)] for ja in range(la_ + 1))
                    if ref is None:
                        ref = marg
                    elif not self._eq(ref, marg):
                        raise ValueError(f"signalling to B at input {ib}, outcome {jb}")

    def marginal_a(self, ia, ja):
        lb = self.shape_b.shape[0]
        return sum(self.probs[(ia, 0, ja, jb)] for jb in range(lb + 1))

    def marginal_b(self, ib, jb):
        la_ = self.shape_a.shape[0]
        return sum(self.probs[(0, ib, ja, jb)] for ja in range(la_ + 1))

    def tensor(self):
        """γ as an ambient matrix over V(S_A) ⊗ V(S_B): the coordinate at
        (m^{i_a}_{j_a}, m^{i_b}_{j_b}) is the probability itself."""
        rows = self.shape_a.ambient_dim
        cols = self.shape_b.ambient_dim
        t = [[None] * cols for _ in range(rows)]
        for (ia, ib, ja, jb), v in self.probs.items():
            t[self.shape_a._offset[ia] + ja][self.shape_b._offset[ib] + jb] = v
        return la.mat(t) if self.mode == "exact" else tuple(tuple(r) for r in t)

    @classmethod
    def from_tensor(cls, shape_a: PolySimplex, shape_b: PolySimplex, tensor, tol=TOL):
        probs = {}
        for ia, la_ in enumerate(shape_a.shape):
            for ib, lb in enumerate(shape_b.shape):
                for ja in range(la_ + 1):
                    for jb in range(lb + 1):
                        probs[(ia, ib, ja, jb)] = \
                            tensor[shape_a._offset[ia] + ja][shape_b._offset[ib] + jb]
        return cls(shape_a, shape_b, probs, tol)

    def __repr__(self):
        return f"Box({self.shape_a.shape}|{self.shape_b.shape}, {self.mode})"


def box_from(F_A: MeasurementCollection, F_B: MeasurementCollection, y) -> Box:
    """p(j_a,j_b|i_a,i_b) = ⟨f^{i_a}_{j_a} ⊗ f^{i_b}_{j_b}, y⟩. The Box
    validation doubles as the check that y behaves like a composite
    state with respect to the two collections."""
    probs = {}
    for ia, la_ in enumerate(F_A.shape.shape):
        for ja in range(la_ + 1):
            fa = F_A.effect(ia, ja)
            row = la.mat_vec(la.transpose(y), fa)
            for ib, lb in enumerate(F_B.shape.shape):
                for jb in range(lb + 1):
                    fb = F_B.effect(ib, jb)
                    probs[(ia, ib, ja, jb)] = la.dot(row, fb)
    return Box(F_A.shape, F_B.shape, probs)


@dataclass
class LhvModel:
    """weights over pairs of deterministic strategies (outcome tuples)."""
    weights: dict

    def check(self, box: Box):
        for key in box._keys():
            ia, ib, ja, jb = key
            tot = sum(w for (na, nb), w in self.weights.items()
                      if na[ia] == ja and nb[ib] == jb)
            if tot != box.probs[key]:
                raise AssertionError(f"LHV model misses {key}")
        return True


def is_local(box: Box):
    """LP over products of deterministic strategies; exact boxes only.
    Returns (bool, LhvModel | None)."""
    if box.mode != "exact":
        raise ValueError("locality decision needs exact probabilities")
    outs_a = box.shape_a.outcome_list()
    outs_b = box.shape_b.outcome_list()
    lp = LpBuilder()
    w = {(na, nb): lp.var(nonneg=True) for na in outs_a for nb in outs_b}
    for key in box._keys():
        ia, ib, ja, jb = key
        row = {w[(na, nb)]: R1 for na in outs_a for nb in outs_b
               if na[ia] == ja and nb[ib] == jb}
        lp.add_eq(row, box.probs[key])
    lp.add_eq({v: R1 for v in w.values()}, R1)
    res = lp.minimize({})
    if res.status != OPTIMAL:
        return False, None
    model = LhvModel({k: res[v] for k, v in w.items() if res[v]})
    model.check(box)
    return True, model


@dataclass
class BellWitness:
    """Element μ ∈ A(S_A)⊗A(S_B), nonnegative on product states, stored
    as the coefficient matrix against the coordinate effects."""
    idx: tuple
    tensor: tuple
    shape_a: PolySimplex
    shape_b: PolySimplex
    norm_max: object = field(default=None)

    def __post_init__(self):
        if self.norm_max is None:
            best = None
            for va in self.shape_a.outcomes():
                sa = self.shape_a.vertex(va)
                for vb in self.shape_b.outcomes():
                    sb = self.shape_b.vertex(vb)
                    val = la.dot(sa, la.mat_vec(self.tensor, sb))
                    if val < 0:
                        raise ValueError("not a Bell witness: negative on a "
                                         "product vertex")
                    if best is None or val > best:
                        best = val
            self.norm_max = best

    def value(self, box: Box):
        """⟨μ, γ⟩ summed coordinate-wise against the box tensor."""
        if (box.shape_a.shape, box.shape_b.shape) != \
                (self.shape_a.shape, self.shape_b.shape):
            raise ValueError("box scenario does not match the witness")
        t = box.tensor()
        return sum(self.tensor[r][c] * t[r][c]
                   for r in range(len(self.tensor))
                   for c in range(len(self.tensor[0]))
                   if self.tensor[r][c])

    def pair_tensor(self, gamma):
        return sum(self.tensor[r][c] * gamma[r][c]
                   for r in range(len(self.tensor))
                   for c in range(len(self.tensor[0]))
                   if self.tensor[r][c])


def chsh_witness(i, j, k) -> BellWitness:
    """μ_{i,j,k} = m^i_{1−j}⊗1 + (m^{1−i}_k − m^i_{1−j})⊗m^0_0
    + (m^{1−i}_{1−k} − m^i_{1−j})⊗m^1_0 on the square pair."""
    if not all(v in (0, 1) for v in (i, j, k)):
        raise ValueError("indices must be 0 or 1")
    P = PolySimplex((1, 1))
    a1 = P.m(i, 1 - j)
    a2 = la.vec_sub(P.m(1 - i, k), a1)
    a3 = la.vec_sub(P.m(1 - i, 1 - k), a1)
    t = la.mat([[R0] * 4 for _ in range(4)])
    t = _acc(t, a1, P.unit())
    t = _acc(t, a2, P.m(0, 0))
    t = _acc(t, a3, P.m(1, 0))
    return BellWitness((i, j, k), t, P, P)


def _acc(t, left, right):
    return la.mat([[t[r][c] + left[r] * right[c] for c in range(len(right))]
                   for r in range(len(left))])


def all_chsh_witnesses():
    return [chsh_witness(i, j, k) for i in (0, 1) for j in (0, 1) for k in (0, 1)]


def correlator(box: Box, x, yb):
    """E(x,y) = Σ (−1)^{j_a+j_b} p(j_a,j_b|x,y) for binary outcomes."""
    tot = box.probs[(x, yb, 0, 0)] + box.probs[(x, yb, 1, 1)]
    return tot - box.probs[(x, yb, 0, 1)] - box.probs[(x, yb, 1, 0)]


def bell_value(box: Box):
    """𝔹 = E(0,0) + E(0,1) + E(1,1) − E(1,0); the identity
    𝔹 = 2 − 4⟨μ_{0,1,0}, γ⟩ is asserted before returning."""
    if box.shape_a.shape != (1, 1) or box.shape_b.shape != (1, 1):
        raise ValueError("Bell value is defined for the 2-input binary scenario")
    b = (correlator(box, 0, 0) + correlator(box, 0, 1)
         + correlator(box, 1, 1) - correlator(box, 1, 0))
    mu = chsh_witness(0, 1, 0)
    ident = 2 - 4 * mu.value(box)
    if box.mode == "exact":
        if b != ident:
            raise AssertionError("Bell identity violated")
    elif not approx_eq(float(b), float(ident), box.tol):
        raise AssertionError("Bell identity violated")
    return b


def pr_box() -> Box:
    """The no-signalling box with a⊕b = xy⊕x: perfectly correlated
    except anti-correlated at setting (1,0); attains 𝔹 = 4."""
    P = PolySimplex((1, 1))
    half = rat(1, 2)
    probs = {}
    for ia, ib, ja, jb in itertools.product((0, 1), repeat=4):
        hit = (ja ^ jb) == ((ia & ib) ^ ia)
        probs[(ia, ib, ja, jb)] = half if hit else R0
    return Box(P, P, probs)


def deterministic_box(shape_a: PolySimplex, shape_b: PolySimplex, na, nb) -> Box:
    na = tuple(na)
    nb = tuple(nb)
    probs = {}
    for ia, la_ in enumerate(shape_a.shape):
        for ib, lb in enumerate(shape_b.shape):
            for ja in range(la_ + 1):
                for jb in range(lb + 1):
                    probs[(ia, ib, ja, jb)] = R1 if (na[ia] == ja and nb[ib] == jb) else R0
    return Box(shape_a, shape_b, probs)


def _pr_variant_probs(alpha, beta, gamma):
    """a⊕b = xy ⊕ αx ⊕ βy ⊕ γ on the square pair."""
    probs = {}
    half = rat(1, 2)
    for ia, ib, ja, jb in itertools.product((0, 1), repeat=4):
        hit = (ja ^ jb) == ((ia & ib) ^ (alpha & ia) ^ (beta & ib) ^ gamma)
        probs[(ia, ib, ja, jb)] = half if hit else R0
    return probs


def _embedded_pr_probs(shape_a, shape_b, ia_pair, ib_pair, variant):
    """A PR variant on a chosen pair of binary inputs per side, uniform
    against non-selected partner inputs, outcome 0 elsewhere."""
    base = _pr_variant_probs(*variant)
    probs = {}
    half = rat(1, 2)
    for ia, la_ in enumerate(shape_a.shape):
        for ib, lb in enumerate(shape_b.shape):
            in_a = ia in ia_pair
            in_b = ib in ib_pair
            for ja in range(la_ + 1):
                for jb in range(lb + 1):
                    if in_a and in_b:
                        x = ia_pair.index(ia)
                        yb = ib_pair.index(ib)
                        probs[(ia, ib, ja, jb)] = base[(x, yb, ja, jb)]
                    elif in_a:
                        probs[(ia, ib, ja, jb)] = half if jb == 0 else R0
                    elif in_b:
                        probs[(ia, ib, ja, jb)] = half if ja == 0 else R0
                    else:
                        probs[(ia, ib, ja, jb)] = R1 if (ja == 0 and jb == 0) else R0
    return probs


def random_ns_box(shape_a: PolySimplex, shape_b: PolySimplex, rng,
                  pr_weight=True) -> Box:
    """Random no-signalling box: a rational mixture of deterministic
    product boxes, optionally with embedded PR-type components."""
    parts = []
    for _ in range(rng.randrange(2, 6)):
        na = tuple(rng.randrange(0, l + 1) for l in shape_a.shape)
        nb = tuple(rng.randrange(0, l + 1) for l in shape_b.shape)
        parts.append(deterministic_box(shape_a, shape_b, na, nb).probs)
    if pr_weight and all(l == 1 for l in shape_a.shape) and \
            all(l == 1 for l in shape_b.shape):
        for _ in range(rng.randrange(0, 3)):
            ia_pair = tuple(sorted(rng.sample(range(shape_a.k + 1), 2)))
            ib_pair = tuple(sorted(rng.sample(range(shape_b.k + 1), 2)))
            variant = (rng.randrange(2), rng.randrange(2), rng.randrange(2))
            parts.append(_embedded_pr_probs(shape_a, shape_b, ia_pair, ib_pair,
                                            variant))
    weights = [rat(rng.randrange(1, 10)) for _ in parts]
    tot = sum(weights)
    probs = {}
    for w, part in zip(weights, parts):
        for k, v in part.items():
            probs[k] = probs.get(k, R0) + (w / tot) * v
    return Box(shape_a, shape_b, probs)


@dataclass
class BellBoundReport:
    lhs: object
    q: object
    norm_max: object
    rhs: object
    holds: bool
    equality_value: object | None
    equality_holds: bool | None


def bell_id_bound_check(mu: BellWitness, F_A: MeasurementCollection,
                        F_B: MeasurementCollection, y, s) -> BellBoundReport:
    """⟨μ, (F_A⊗F_B)(y)⟩ ≥ ‖μ‖_max · q_s(F_A): both sides evaluated; the
    report also carries the square equality target ½q_{s}(F_A). Needs
    q_s(F_A) ≤ 0 (the bound is false otherwise)."""
    if not max_tensor_member(y, F_A.space, F_B.space):
        raise ValueError("y is not a composite state of the two spaces")
    box = box_from(F_A, F_B, y)
    lhs = mu.value(box)
    gamma = la.mat_mul(F_A.as_map_matrix(),
                       la.mat_mul(y, la.transpose(F_B.as_map_matrix())))
    if mu.pair_tensor(gamma) != lhs:
        raise AssertionError("box tensor disagrees with the mapped state")
    q, _w, _lam = q_value(F_A, s)
    if q > 0:
        raise ValueError("F_A is compatible with positive margin; the bound "
                         "needs q_s(F_A) <= 0")
    rhs = mu.norm_max * q
    if lhs < rhs:
        raise AssertionError("incompatibility bound violated")
    eq_val = None
    eq_holds = None
    if F_A.shape.shape == (1, 1):
        eq_val = q / 2
        eq_holds = lhs == eq_val
    return BellBoundReport(lhs, q, mu.norm_max, rhs, True, eq_val, eq_holds)


@dataclass
class EqualityConstruction:
    y: tuple
    f_b: MeasurementCollection
    witness: object
    q: object
    lhs: object
    holds: bool
    self_dual_route: bool


def square_equality_construction(F_A: MeasurementCollection,
                                 idx=(0, 1, 0)) -> EqualityConstruction:
    """Realize the Bell-bound equality case on the square: from a
    minimizer W of the q LP at s̄ build y = ½·(W∘Ψ⁻¹ ⊗ id)(χ) (Ψ the
    vertex↔effect matching behind μ_idx), so that with F_B = id,
    ⟨μ, (F_A⊗F_B)(y)⟩ = ½ q_{s̄}(F_A) exactly. When possible the same
    box is re-expressed with y = the self-dual composite state and the
    correction moved into F_B."""
    if F_A.shape.shape != (1, 1):
        raise ValueError("equality construction lives on the square scenario")
    sq = square_space()
    if F_A.space.vertices != sq.vertices:
        raise ValueError("equality construction needs K_A = the square")
    from .steering import self_dual_state, square_self_dual_iso
    s = F_A.shape.barycenter()
    q, W, _lam = q_value(F_A, s)
    mu = chsh_witness(*idx)
    X = sq.span_projector
    # Ψ: V(S_A) → A(S_B) with ⟨Ψ(s), s'⟩ = ⟨μ, s⊗s'⟩, canonically X μᵀ X
    Qpsi = la.mat_mul(X, la.mat_mul(la.transpose(mu.tensor), X))
    Qinv = span_inverse(Qpsi, sq)
    half = rat(1, 2)
    Y = la.mat_mul(W.as_map_matrix(), la.mat_mul(Qinv, X))
    Y = la.mat([[half * v for v in row] for row in Y])
    f_b = identity_collection(F_A.shape)
    y_out, fb_out, sd_route = Y, f_b, False
    y_sd = self_dual_state(sq, square_self_dual_iso())
    solved = _solve_partner_collection(sq, F_A.shape, y_sd, Y)
    if solved is not None:
        y_out, fb_out, sd_route = y_sd, solved, True
    rep = bell_id_bound_check(mu, F_A, fb_out, y_out, s)
    if not rep.equality_holds:
        raise AssertionError("equality construction missed ½q")
    return EqualityConstruction(y_out, fb_out, W, q, rep.lhs, True, sd_route)


def _solve_partner_collection(space, shape, y_from, y_to):
    """F_B with (id ⊗ F_B)(y_from) = y_to, if one exists as a valid
    collection: M_Bᵀ solves y_from · M_Bᵀ = y_to over the span."""
    try:
        z = la.mat_mul(span_inverse(y_from, space), y_to)
    except ValueError:
        return None
    mb = la.transpose(z)
    effs = {}
    r = 0
    for i, l in enumerate(shape.shape):
        for j in range(l + 1):
            effs[(i, j)] = tuple(la.dot(mb[r], v) for v in space.vertices)
            r += 1
    try:
        return MeasurementCollection(space, shape, effs)
    except ValueError:
        return None
