"""Measurement collections F = (f^0,…,f^k) on a polytopic state space,
the joint-measurement LP, coin tosses, and incompatibility degrees.

A collection is an affine map K → S into a polysimplex, stored by the
effect values f^i_j(x) on the vertices x of K. Values at the basis
vertices determine the rest; validation checks the stored table is the
linear extension.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import linalg as la
from .exact import R0, R1, rat
from .lp import OPTIMAL, LpBuilder
from .polysimplex import PolySimplex
from .spaces import StateSpace


class MeasurementCollection:
    """Affine map F: K → S given by effect values on K's vertices.

    effects[(i, j)] is the tuple (f^i_j(x_0), …, f^i_j(x_{N-1})) over the
    vertices of `space` in their stored order.
    """

    def __init__(self, space: StateSpace, shape: PolySimplex, effects):
        self.space = space
        self.shape = shape
        self.effects = {k: tuple(rat(v) for v in vals) for k, vals in effects.items()}
        self._validate()

    def _validate(self):
        n = len(self.space.vertices)
        want = {(i, j) for i, l in enumerate(self.shape.shape) for j in range(l + 1)}
        if set(self.effects) != want:
            raise ValueError("effect table does not match the outcome shape")
        for key, vals in self.effects.items():
            if len(vals) != n:
                raise ValueError(f"effect {key} has {len(vals)} values, expected {n}")
            if any(v < 0 for v in vals):
                raise ValueError(f"effect {key} is negative on a vertex")
            if self.space.canonical_functional(vals) is None:
                raise ValueError(f"effect {key} values are not affinely consistent")
        for i, l in enumerate(self.shape.shape):
            for t in range(n):
                tot = sum(self.effects[(i, j)][t] for j in range(l + 1))
                if tot != R1:
                    raise ValueError(f"input {i} does not sum to the unit at vertex {t}")

    def effect(self, i, j):
        """Canonical ambient functional of f^i_j (vanishes off span V(K))."""
        return self.space.canonical_functional(self.effects[(i, j)])

    def effect_value(self, i, j, x):
        """f^i_j(x) for any x in span V(K)."""
        coeffs = self.space.expand(x)
        vals = self.effects[(i, j)]
        return sum(c * vals[t] for c, t in zip(coeffs, self.space.basis_idx))

    def apply(self, x):
        """F(x) as an ambient vector of the polysimplex."""
        out = []
        for i, l in enumerate(self.shape.shape):
            for j in range(l + 1):
                out.append(self.effect_value(i, j, x))
        return tuple(out)

    def as_map_matrix(self):
        """Ambient matrix of F: V(K) → V(S), rows = canonical effects."""
        return la.mat([self.effect(i, j)
                       for i, l in enumerate(self.shape.shape)
                       for j in range(l + 1)])

    def mix(self, other: "MeasurementCollection", lam):
        """(1−λ)·self + λ·other, same space and shape."""
        if other.space is not self.space and other.space.vertices != self.space.vertices:
            raise ValueError("collections live on different spaces")
        if other.shape != self.shape:
            raise ValueError("collections have different outcome shapes")
        lam = rat(lam)
        eff = {k: tuple((R1 - lam) * a + lam * b for a, b in zip(vals, other.effects[k]))
               for k, vals in self.effects.items()}
        return MeasurementCollection(self.space, self.shape, eff)

    def __repr__(self):
        return f"MeasurementCollection({self.space.label}, {self.shape.shape})"


def make_collection(space: StateSpace, shape, effects) -> MeasurementCollection:
    if not isinstance(shape, PolySimplex):
        shape = PolySimplex(shape)
    return MeasurementCollection(space, shape, effects)


def from_functionals(space: StateSpace, shape, functionals) -> MeasurementCollection:
    """Build from ambient functionals {(i,j): vector}; values are taken
    on the vertices."""
    if not isinstance(shape, PolySimplex):
        shape = PolySimplex(shape)
    eff = {key: tuple(la.dot(f, v) for v in space.vertices)
           for key, f in functionals.items()}
    return MeasurementCollection(space, shape, eff)


def identity_collection(shape: PolySimplex) -> MeasurementCollection:
    """F = (m^0,…,m^k) on K = S itself: the identity map."""
    space = shape.as_state_space()
    return from_functionals(space, shape,
                            {(i, j): shape.m(i, j)
                             for i, l in enumerate(shape.shape) for j in range(l + 1)})


def coin_toss(shape: PolySimplex, s) -> MeasurementCollection:
    """The constant collection F_s(x) ≡ s."""
    space = shape.as_state_space()
    if not space.is_state(s):
        raise ValueError("coin_toss target is not a state of the polysimplex")
    eff = {}
    for i, l in enumerate(shape.shape):
        for j in range(l + 1):
            c = shape.coords(s, i, j)
            eff[(i, j)] = (c,) * len(space.vertices)
    # caller's space may be a different instance with identical data
    return MeasurementCollection(space, shape, eff)


def coin_toss_on(space: StateSpace, shape: PolySimplex, s) -> MeasurementCollection:
    """Constant collection F_s on an arbitrary domain space."""
    sspace = shape.as_state_space()
    if not sspace.is_state(s):
        raise ValueError("coin_toss target is not a state of the polysimplex")
    eff = {}
    for i, l in enumerate(shape.shape):
        for j in range(l + 1):
            c = shape.coords(s, i, j)
            eff[(i, j)] = (c,) * len(space.vertices)
    return MeasurementCollection(space, shape, eff)


@dataclass
class JointMeasurement:
    """Joint observable with outcomes indexed by tuples (n_0,…,n_k);
    table maps each tuple to the effect's values on K's vertices."""
    space: StateSpace
    shape: PolySimplex
    table: dict

    def check(self, F: MeasurementCollection, strict=True):
        """Verify positivity, normalization and the marginal identities
        against F. Returns True or raises."""
        n = len(self.space.vertices)
        for key, vals in self.table.items():
            if any(v < 0 for v in vals):
                raise AssertionError(f"joint effect {key} negative")
        for t in range(n):
            if sum(vals[t] for vals in self.table.values()) != R1:
                raise AssertionError(f"joint does not normalize at vertex {t}")
        for i, l in enumerate(self.shape.shape):
            for j in range(l + 1):
                for t in range(n):
                    marg = sum(vals[t] for key, vals in self.table.items()
                               if key[i] == j)
                    if marg != F.effects[(i, j)][t]:
                        raise AssertionError(f"marginal ({i},{j}) off at vertex {t}")
        return True


def is_compatible(F: MeasurementCollection, want_joint=True):
    """Joint-measurement LP: F is compatible iff there are effects
    g_{n_0,…,n_k} ≥ 0 on K with Σ_n g_n = 1_K whose marginals reproduce
    every f^i_j. Returns (bool, JointMeasurement | None).

    Variables are the g values at the basis vertices of K, so linearity
    is built in; positivity at the remaining vertices becomes inequality
    rows through the basis expansion.
    """
    space = F.space
    shape = F.shape
    outcomes = shape.outcome_list()
    D = space.rank
    exp_rows = [space.expand(v) for v in space.vertices]

    lp = LpBuilder()
    var = {}
    for n in outcomes:
        for a in range(D):
            var[(n, a)] = lp.var(nonneg=False)
    # positivity of each g_n at each vertex
    for n in outcomes:
        for t, row in enumerate(exp_rows):
            lp.add_ge({var[(n, a)]: row[a] for a in range(D) if row[a] != 0}, R0)
    # marginals at basis vertices (hence everywhere): drop last outcome per input
    for i, l in enumerate(shape.shape):
        for j in range(l):
            vals = F.effects[(i, j)]
            for a, t in enumerate(space.basis_idx):
                lp.add_eq({var[(n, a)]: R1 for n in outcomes if n[i] == j}, vals[t])
    # total normalization at basis vertices
    for a, t in enumerate(space.basis_idx):
        lp.add_eq({var[(n, a)]: R1 for n in outcomes}, R1)

    res = lp.minimize({})
    if res.status != OPTIMAL:
        return False, None
    if not want_joint:
        return True, None
    table = {}
    for n in outcomes:
        basis_vals = [res[var[(n, a)]] for a in range(D)]
        table[n] = tuple(sum(row[a] * basis_vals[a] for a in range(D))
                         for row in exp_rows)
    joint = JointMeasurement(space, shape, table)
    joint.check(F)
    return True, joint


def id_degree_at(F: MeasurementCollection, s, cross_check=False):
    """ID_s(F) for s strictly inside S: the least λ making
    (1−λ)F + λF_s compatible. Computed from the witness dual q_s via
    ID_s = −q_s/(1−q_s) when q_s ≤ 0 (0 otherwise); `cross_check` also
    solves the primal minimum-λ LP and asserts agreement.
    """
    shape = F.shape
    if not shape.interior(s):
        raise ValueError("id_degree_at needs a strictly interior s; "
                         "use the boundary-segment bound instead")
    from .witnesses import q_value

    q, _w, lam = q_value(F, s)
    if cross_check:
        lam2 = _primal_id_lp(F, s)
        if lam2 != lam:
            raise AssertionError(f"primal {lam2} != dual {lam}")
    return lam


def _primal_id_lp(F: MeasurementCollection, s):
    """min λ ∈ [0,1] s.t. (1−λ)F + λF_s admits a joint measurement;
    the mixing is linear in λ so this is a single LP."""
    space = F.space
    shape = F.shape
    outcomes = shape.outcome_list()
    D = space.rank
    exp_rows = [space.expand(v) for v in space.vertices]

    lp = LpBuilder()
    lam = lp.var(nonneg=True)
    var = {}
    for n in outcomes:
        for a in range(D):
            var[(n, a)] = lp.var(nonneg=False)
    lp.add_le({lam: R1}, R1)
    for n in outcomes:
        for t, row in enumerate(exp_rows):
            lp.add_ge({var[(n, a)]: row[a] for a in range(D) if row[a] != 0}, R0)
    for i, l in enumerate(shape.shape):
        for j in range(l):
            vals = F.effects[(i, j)]
            c = shape.coords(s, i, j)
            for a, t in enumerate(space.basis_idx):
                # marginal row: Σ_{n_i=j} g_n(x_t) + λ(f^i_j(x_t) − c) = f^i_j(x_t)
                row = {var[(n, a)]: R1 for n in outcomes if n[i] == j}
                if vals[t] != c:
                    row[lam] = vals[t] - c
                lp.add_eq(row, vals[t])
    for a, t in enumerate(space.basis_idx):
        lp.add_eq({var[(n, a)]: R1 for n in outcomes}, R1)

    res = lp.minimize({lam: R1})
    if res.status != OPTIMAL:
        raise AssertionError("mixing LP infeasible at λ=1; coin toss must be compatible")
    return res.objective


@dataclass
class IdSearchReport:
    value: object
    s: tuple
    upper_bound_only: bool
    evaluations: int


def id_degree(F: MeasurementCollection, tol=rat(1, 10**9), max_rounds=200):
    """ID(F) = inf over interior s of ID_s(F), approached by coordinate
    descent from the barycenter with shrinking steps. The result is an
    upper bound on the infimum; the report says so explicitly.
    """
    shape = F.shape
    if shape.k == 0:
        return IdSearchReport(R0, shape.barycenter(), False, 0)
    compat, _ = is_compatible(F, want_joint=False)
    if compat:
        return IdSearchReport(R0, shape.barycenter(), False, 0)

    s = list(shape.barycenter())
    best = id_degree_at(F, tuple(s))
    evals = 1
    step = rat(1, 4)
    for _ in range(max_rounds):
        improved = False
        for i, l in enumerate(shape.shape):
            off = shape._offset[i]
            for j in range(l + 1):
                for sign in (1, -1):
                    t = step if sign > 0 else -step
                    cand = list(s)
                    # move block i towards (or away from) corner j, renormalized
                    blk = [cand[off + jj] for jj in range(l + 1)]
                    newblk = [(R1 - t) * b for b in blk]
                    newblk[j] += t
                    if any(b <= 0 for b in newblk):
                        continue
                    for jj in range(l + 1):
                        cand[off + jj] = newblk[jj]
                    val = id_degree_at(F, tuple(cand))
                    evals += 1
                    if val < best - tol:
                        best = val
                        s = cand
                        improved = True
        if not improved:
            step = step / 2
            if step < tol:
                break
    return IdSearchReport(best, tuple(s), True, evals)


def random_collection(space: StateSpace, shape, rng, bias=None):
    """Random valid collection. Effects are nonnegative facet mixtures
    renormalized against the unit; `bias` ∈ [0,1) pulls towards the
    identity collection when space and shape match (useful to sample
    incompatible instances)."""
    if not isinstance(shape, PolySimplex):
        shape = PolySimplex(shape)
    nverts = len(space.vertices)
    eff = {}
    for i, l in enumerate(shape.shape):
        hs = []
        for j in range(l + 1):
            f = [R0] * space.dim
            for row in space.facets:
                c = rat(rng.randrange(0, 5), 1)
                f = [a + c * b for a, b in zip(f, row)]
            hs.append(tuple(f))
        vals = [[la.dot(h, v) for v in space.vertices] for h in hs]
        tot = [sum(vals[j][t] for j in range(l + 1)) for t in range(nverts)]
        m = max(tot)
        if m == 0:
            scale = R0
        else:
            scale = rat(rng.randrange(1, 5), 4) / m
        for j in range(l + 1):
            u = rat(1, l + 1)
            eff[(i, j)] = tuple(scale * vals[j][t] + (R1 - scale * tot[t]) * u
                                for t in range(nverts))
    F = MeasurementCollection(space, shape, eff)
    if bias:
        ident = identity_collection(shape)
        if len(ident.space.vertices) == nverts and ident.space.vertices == space.vertices:
            F = ident.mix(F, R1 - rat(bias))
    return F
