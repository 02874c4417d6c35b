"""Qubit backend: pairs of two-outcome measurements on the quantum
state space of C², joint-POVM feasibility by cyclic projections, the
incompatibility degree via bisection, and the extremal witness family
whose optimum certifies the 1−1/√2 maximum.

Everything here is float mode. Two-outcome measurements are stored by
their first effect; Hermitian 2×2 matrices are handled in the Pauli
parametrization (t, x, y, z) ↦ t·I + x·σx + y·σy + z·σz, where the PSD
projection is closed-form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SQRT2 = math.sqrt(2.0)
QUBIT_MAX_ID = 1.0 - 1.0 / SQRT2

_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)
_I2 = np.eye(2, dtype=complex)
_PAULI = (_SX, _SY, _SZ)


class QubitEffect:
    """αI + a·σ with 0 ≤ effect ≤ I, i.e. ‖a‖ ≤ min(α, 1−α)."""

    def __init__(self, alpha, bloch, tol=1e-9):
        self.alpha = float(alpha)
        self.bloch = np.asarray(bloch, dtype=float)
        if self.bloch.shape != (3,):
            raise ValueError("bloch part must be a 3-vector")
        r = float(np.linalg.norm(self.bloch))
        if r > min(self.alpha, 1.0 - self.alpha) + tol:
            raise ValueError("not an effect: need ‖a‖ ≤ min(α, 1−α)")

    @classmethod
    def sharp(cls, direction):
        """Rank-1 projector ½(I + n̂·σ)."""
        n = np.asarray(direction, dtype=float)
        n = n / np.linalg.norm(n)
        return cls(0.5, n / 2.0)

    @classmethod
    def sharp_angle(cls, theta):
        """Projector in the x–z plane at angle θ from the z axis."""
        return cls.sharp((math.sin(theta), 0.0, math.cos(theta)))

    def matrix(self):
        m = self.alpha * _I2
        for c, s in zip(self.bloch, _PAULI):
            m = m + c * s
        return m

    def complement(self) -> "QubitEffect":
        return QubitEffect(1.0 - self.alpha, -self.bloch)

    def smear(self, lam, c) -> "QubitEffect":
        """(1−λ)·effect + λ·c·I."""
        return QubitEffect((1.0 - lam) * self.alpha + lam * c,
                           (1.0 - lam) * self.bloch)

    def __repr__(self):
        return f"QubitEffect(α={self.alpha:.6g}, a={tuple(self.bloch)})"


def _pvec(m):
    """Pauli components (t, x, y, z) of a Hermitian 2×2 matrix."""
    t = 0.5 * (m[0, 0] + m[1, 1]).real
    x = 0.5 * (m[0, 1] + m[1, 0]).real
    y = 0.5 * (m[1, 0] - m[0, 1]).imag
    z = 0.5 * (m[0, 0] - m[1, 1]).real
    return np.array([t, x, y, z])


def _pmat(p):
    t, x, y, z = p
    return np.array([[t + z, x - 1j * y], [x + 1j * y, t - z]], dtype=complex)


def _psd_clip(p):
    """Projection onto the PSD cone in Frobenius metric: eigenvalues
    t ± r clipped at 0, where r = ‖(x,y,z)‖."""
    t = p[0]
    r = math.sqrt(p[1] * p[1] + p[2] * p[2] + p[3] * p[3])
    if t >= r:
        return p
    lam = t + r
    if lam <= 0.0:
        return np.zeros(4)
    half = 0.5 * lam
    if r == 0.0:
        return np.array([half, 0.0, 0.0, 0.0])
    scale = half / r
    return np.array([half, p[1] * scale, p[2] * scale, p[3] * scale])


def _psd_dist(p):
    """Frobenius distance to the PSD cone: ‖clipped negative part‖, via
    the eigenvalues t ± ‖(x,y,z)‖."""
    t = p[0]
    r = math.sqrt(p[1] * p[1] + p[2] * p[2] + p[3] * p[3])
    lo = t - r
    if lo >= 0.0:
        return 0.0
    hi = t + r
    d2 = lo * lo + (hi * hi if hi < 0.0 else 0.0)
    return math.sqrt(d2)


def joint_povm_feasible(A: QubitEffect, B: QubitEffect, tol=1e-10,
                        plateau=1e-7, max_sweeps=100000):
    """Feasibility of 0 ⪯ G, G ⪯ A, G ⪯ B, A+B−I ⪯ G by Dykstra's
    cyclic projections in the Pauli parametrization. Returns
    (bool, G matrix | None). Feasible when the worst constraint
    violation drops below tol; infeasible when the residual plateaus
    above the infeasibility threshold."""
    a = _pvec(A.matrix())
    b = _pvec(B.matrix())
    iden = np.array([1.0, 0.0, 0.0, 0.0])
    # G ⪰ lo_k and G ⪯ up_k, each projected by shifting into the cone
    lows = (np.zeros(4), a + b - iden)
    ups = (a, b)

    def residual(g):
        worst = 0.0
        for lo in lows:
            worst = max(worst, _psd_dist(g - lo))
        for up in ups:
            worst = max(worst, _psd_dist(up - g))
        return worst

    g = _psd_clip(0.5 * (a + b - iden) + 0.25 * iden)
    corr = [np.zeros(4) for _ in range(4)]
    best = math.inf
    best_sweep = 0
    window = 250
    for sweep in range(1, max_sweeps + 1):
        for k in range(4):
            y = g + corr[k]
            if k < 2:
                proj = lows[k] + _psd_clip(y - lows[k])
            else:
                up = ups[k - 2]
                proj = up - _psd_clip(up - y)
            corr[k] = y - proj
            g = proj
        res = residual(g)
        if res < tol:
            _witness_cross_check(A, B, expect_feasible=True)
            return True, _pmat(g)
        if res < best - 1e-15:
            best = res
            best_sweep = sweep
        elif sweep - best_sweep > window:
            break
    if best > plateau:
        return False, None
    # plateaued in the gray zone: a strictly positive floor after a long
    # stall still certifies an empty intersection
    if best > 10.0 * tol:
        return False, None
    _witness_cross_check(A, B, expect_feasible=True)
    return True, _pmat(g)


def _witness_cross_check(A, B, expect_feasible):
    """A coarse scan of the witness family must not certify
    incompatibility for a pair declared feasible."""
    q = _witness_scan(A, B, n_r=5, n_dir=6)
    if expect_feasible and q < -1e-6:
        raise AssertionError("joint POVM found for a pair with a negative "
                             "witness value")


def _sqrt_rho(r, direction):
    """ρ^{1/2} for ρ = ½(I + r n̂·σ), in Pauli components."""
    hi = math.sqrt((1.0 + r) / 2.0)
    lo = math.sqrt((1.0 - r) / 2.0)
    c = 0.5 * (hi + lo)
    d = 0.5 * (hi - lo)
    return c * _I2 + d * (direction[0] * _SX + direction[1] * _SY
                          + direction[2] * _SZ)


def _h_vector(sq, e_mat):
    """h(E)_a = Tr[E ρ^{1/2} σ_a ρ^{1/2}] as a real 3-vector."""
    s = sq @ e_mat @ sq
    return 2.0 * _pvec(s)[1:]


def _value_at_rho(a_mat, b_mat, r, direction):
    """min over orthonormal-basis angles of Tr FW for fixed ρ, with the
    two optimal Bloch axes: Tr FW = 1 + h(A+B−I)·u + h(A−B)·v."""
    sq = _sqrt_rho(r, direction)
    h1 = _h_vector(sq, a_mat + b_mat - _I2)
    h2 = _h_vector(sq, a_mat - b_mat)
    n1 = float(np.linalg.norm(h1))
    n2 = float(np.linalg.norm(h2))
    u = -h1 / n1 if n1 > 1e-15 else np.array([0.0, 0.0, 1.0])
    v = -h2 / n2 if n2 > 1e-15 else np.array([1.0, 0.0, 0.0])
    return 1.0 - n1 - n2, u, v


_DIRS = None


def _direction_grid(n_dir):
    dirs = []
    for i in range(n_dir):
        th = math.pi * (i + 0.5) / n_dir
        for k in range(n_dir):
            ph = 2.0 * math.pi * k / n_dir
            dirs.append(np.array([math.sin(th) * math.cos(ph),
                                  math.sin(th) * math.sin(ph),
                                  math.cos(th)]))
    dirs.append(np.array([0.0, 0.0, 1.0]))
    dirs.append(np.array([0.0, 0.0, -1.0]))
    return dirs


def _witness_scan(A, B, n_r, n_dir):
    a_mat, b_mat = A.matrix(), B.matrix()
    best = math.inf
    r_max = 1.0 - 2e-8
    for direction in _direction_grid(n_dir):
        for ir in range(n_r):
            r = r_max * ir / (n_r - 1) if n_r > 1 else 0.0
            val, _, _ = _value_at_rho(a_mat, b_mat, r, direction)
            if val < best:
                best = val
    return best


@dataclass
class QubitWitnessParams:
    """ρ and the two orthonormal bases, given by their Bloch axes u, v:
    x_{0,0}/x_{1,1} sit at ±u and x_{0,1}/x_{1,0} at ±v. Vertex images
    are w_n = 2 ρ^{1/2} |x_n⟩⟨x_n| ρ^{1/2}."""
    r: float
    direction: tuple
    u: tuple
    v: tuple

    def rho(self):
        d = np.asarray(self.direction)
        return 0.5 * (_I2 + self.r * (d[0] * _SX + d[1] * _SY + d[2] * _SZ))

    def vertex_images(self):
        sq = _sqrt_rho(self.r, self.direction)

        def sandwich(axis, sign):
            n = sign * np.asarray(axis)
            proj = 0.5 * (_I2 + n[0] * _SX + n[1] * _SY + n[2] * _SZ)
            return 2.0 * (sq @ proj @ sq)

        return {(0, 0): sandwich(self.u, +1.0), (1, 1): sandwich(self.u, -1.0),
                (0, 1): sandwich(self.v, +1.0), (1, 0): sandwich(self.v, -1.0)}

    def check(self, tol=1e-9):
        w = self.vertex_images()
        rho2 = 2.0 * self.rho()
        for pair in (((0, 0), (1, 1)), ((0, 1), (1, 0))):
            s = w[pair[0]] + w[pair[1]]
            if np.max(np.abs(s - rho2)) > tol:
                raise AssertionError("vertex images do not sum to 2ρ")
        return True


def _trace_pairing_mats(a, b, w):
    val = np.trace(a @ w[(0, 1)]) + np.trace((_I2 - a) @ w[(1, 1)])
    val = val + np.trace(b @ w[(1, 0)]) + np.trace((_I2 - b) @ w[(1, 1)])
    val = val - np.trace(w[(1, 1)])
    return float(val.real)


def trace_pairing_qubit(A: QubitEffect, B: QubitEffect,
                        params: QubitWitnessParams):
    """Tr FW over the square: Σ_{i,j} ⟨f^i_j, W(top with n_i=j)⟩ −
    ⟨I, w_top⟩ with top = (1,1)."""
    return _trace_pairing_mats(A.matrix(), B.matrix(), params.vertex_images())


@dataclass
class QubitWitnessReport:
    q_hat: float
    params: QubitWitnessParams
    id_lower_bound: float


def witness_q(A: QubitEffect, B: QubitEffect, s=(0.5, 0.5), n_grid=16,
              refine_rounds=40) -> QubitWitnessReport:
    """Minimize Tr FW over the extremal family (ρ, basis axes) with
    W(s) a state: coarse grid of ≥ n_grid³ parameter points, then local
    refinement in ρ. Returns q̂ ≥ q_s(F), an upper bound on the true
    minimum, hence −q̂/(1−q̂) lower-bounds the incompatibility degree."""
    a_mat, b_mat = A.matrix(), B.matrix()
    p_s, q_s = float(s[0]), float(s[1])
    if not (0.0 < p_s < 1.0 and 0.0 < q_s < 1.0):
        raise ValueError("s must be interior: coordinates in (0,1)")
    at_bar = abs(p_s - 0.5) < 1e-15 and abs(q_s - 0.5) < 1e-15
    r_max = 1.0 - 2e-8

    def evaluate(r, direction):
        val, u, v = _value_at_rho(a_mat, b_mat, r, direction)
        if at_bar:
            return val, u, v
        params = QubitWitnessParams(r, tuple(direction), tuple(u), tuple(v))
        scaled = _normalized_value(a_mat, b_mat, params, p_s, q_s)
        return scaled, u, v

    best = (math.inf, None, None, None, None)
    for direction in _direction_grid(n_grid):
        for ir in range(n_grid):
            r = r_max * ir / (n_grid - 1)
            val, u, v = evaluate(r, direction)
            if val < best[0]:
                best = (val, r, direction, u, v)
    val, r, direction, u, v = best
    step = r_max / n_grid
    for _ in range(refine_rounds):
        improved = False
        for dr in (-step, step):
            rr = min(max(r + dr, 0.0), r_max)
            cand, cu, cv = evaluate(rr, direction)
            if cand < val - 1e-15:
                val, r, u, v = cand, rr, cu, cv
                improved = True
        for axis in range(3):
            for dd in (-step, step):
                nd = np.asarray(direction, dtype=float).copy()
                nd[axis] += dd
                nd = nd / np.linalg.norm(nd)
                cand, cu, cv = evaluate(r, nd)
                if cand < val - 1e-15:
                    val, direction, u, v = cand, nd, cu, cv
                    improved = True
        if not improved:
            step *= 0.5
            if step < 1e-12:
                break
    params = QubitWitnessParams(float(r), tuple(np.asarray(direction)),
                                tuple(u), tuple(v))
    params.check()
    bound = -val / (1.0 - val) if val < 0.0 else 0.0
    return QubitWitnessReport(float(val), params, float(bound))


def _normalized_value(a_mat, b_mat, params: QubitWitnessParams, p, q):
    """Tr FW with W rescaled so that W(s) is a state; +inf when W(s)
    leaves the cone. W(s) = ρ + (p+q−1)Q(u) + (p−q)Q(v)."""
    w = params.vertex_images()
    ws = (p * q * w[(0, 0)] + p * (1 - q) * w[(0, 1)]
          + (1 - p) * q * w[(1, 0)] + (1 - p) * (1 - q) * w[(1, 1)])
    pv = _pvec(ws)
    tau = 2.0 * pv[0]
    if tau <= 1e-12 or _psd_dist(pv) > 1e-12:
        return math.inf
    return _trace_pairing_mats(a_mat, b_mat, w) / tau


def holder_check(A: QubitEffect, B: QubitEffect, params: QubitWitnessParams,
                 tol=1e-9):
    """½‖W(e⁰₀)‖₁ ≤ c and ½‖W(e¹₀)‖₁ ≤ d with c = √(1−|⟨x₀₁|x₁₁⟩|²),
    d = √(1−|⟨x₁₀|x₁₁⟩|²) and c² + d² = 1."""
    w = params.vertex_images()
    u = np.asarray(params.u)
    v = np.asarray(params.v)
    # overlap of Bloch-axis pure states: |⟨m|n⟩|² = (1 + m̂·n̂)/2
    c = math.sqrt(1.0 - (1.0 + float(np.dot(v, -u))) / 2.0)
    d = math.sqrt(1.0 - (1.0 + float(np.dot(-v, -u))) / 2.0)
    if abs(c * c + d * d - 1.0) > tol:
        raise AssertionError("c² + d² must equal 1")

    def tnorm(m):
        p = _pvec(m)
        rr = math.sqrt(p[1] ** 2 + p[2] ** 2 + p[3] ** 2)
        return abs(p[0] + rr) + abs(p[0] - rr)

    e00 = w[(0, 1)] - w[(1, 1)]
    e10 = w[(1, 0)] - w[(1, 1)]
    if 0.5 * tnorm(e00) > c + tol or 0.5 * tnorm(e10) > d + tol:
        raise AssertionError("Hölder step violated")
    return c, d


@dataclass
class QubitIdReport:
    value: float
    q_hat: float
    dual_bound: float
    params: QubitWitnessParams
    iterations: int


def qubit_id(A: QubitEffect, B: QubitEffect, s=(0.5, 0.5), xtol=1e-8,
             max_iter=60) -> QubitIdReport:
    """ID_s by bisection over λ of joint feasibility for the smeared
    pair ((1−λ)A + λ·s₀·I, (1−λ)B + λ·s₁·I), together with the witness
    dual lower bound."""
    p, q = float(s[0]), float(s[1])
    if not (0.0 < p < 1.0 and 0.0 < q < 1.0):
        raise ValueError("s must be interior: coordinates in (0,1)")

    def feasible(lam):
        ok, _ = joint_povm_feasible(A.smear(lam, p), B.smear(lam, q))
        return ok

    wit = witness_q(A, B, (p, q))
    if feasible(0.0):
        return QubitIdReport(0.0, wit.q_hat, wit.id_lower_bound, wit.params, 0)
    lo, hi = 0.0, 1.0
    iters = 0
    while hi - lo > xtol and iters < max_iter:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
        iters += 1
    value = 0.5 * (lo + hi)
    if wit.id_lower_bound > value + 1e-6:
        raise AssertionError("dual bound exceeds the primal bisection value")
    return QubitIdReport(value, wit.q_hat, wit.id_lower_bound, wit.params, iters)


def mub_pair():
    """Sharp σz and σx measurements: the maximally incompatible qubit
    pair."""
    return QubitEffect.sharp((0, 0, 1)), QubitEffect.sharp((1, 0, 0))


def random_effect(rng, sharp=False) -> QubitEffect:
    th = math.acos(rng.uniform(-1.0, 1.0))
    ph = rng.uniform(0.0, 2.0 * math.pi)
    n = (math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th))
    if sharp:
        return QubitEffect.sharp(n)
    alpha = rng.uniform(0.15, 0.85)
    rad = rng.uniform(0.0, 1.0) * min(alpha, 1.0 - alpha)
    return QubitEffect(alpha, tuple(rad * c for c in n))


def born_box(effects_a, effects_b, rho4):
    """Box from a two-qubit state: p(j_a,j_b|i_a,i_b) =
    Tr[ρ (E^{i_a}_{j_a} ⊗ E^{i_b}_{j_b})]."""
    from .bell import Box
    from .polysimplex import PolySimplex
    rho4 = np.asarray(rho4, dtype=complex)
    probs = {}
    for ia, ea in enumerate(effects_a):
        mats_a = (ea.matrix(), _I2 - ea.matrix())
        for ib, eb in enumerate(effects_b):
            mats_b = (eb.matrix(), _I2 - eb.matrix())
            for ja in (0, 1):
                for jb in (0, 1):
                    m = np.kron(mats_a[ja], mats_b[jb])
                    probs[(ia, ib, ja, jb)] = float(np.trace(rho4 @ m).real)
    shape = PolySimplex((1,) * len(effects_a))
    shape_b = PolySimplex((1,) * len(effects_b))
    return Box(shape, shape_b, probs)


def max_entangled_state():
    """|Φ⁺⟩⟨Φ⁺| with |Φ⁺⟩ = (|00⟩ + |11⟩)/√2."""
    psi = np.zeros(4, dtype=complex)
    psi[0] = psi[3] = 1.0 / SQRT2
    return np.outer(psi, psi.conj())


def tsirelson_box(effects_a=None, effects_b=None):
    """Born box of the maximally entangled state; the default angles
    (0, π/2 | −π/4, π/4) attain 𝔹 = 2√2."""
    if effects_a is None:
        effects_a = (QubitEffect.sharp_angle(0.0),
                     QubitEffect.sharp_angle(math.pi / 2.0))
    if effects_b is None:
        effects_b = (QubitEffect.sharp_angle(-math.pi / 4.0),
                     QubitEffect.sharp_angle(math.pi / 4.0))
    return born_box(effects_a, effects_b, max_entangled_state())


@dataclass
class QubitBoundReport:
    lhs: float
    q_hat: float
    rhs: float
    holds: bool
    equality_gap: float


def qubit_bound_report(tol=1e-6) -> QubitBoundReport:
    """The incompatibility bound at the Tsirelson box: LHS =
    ⟨μ_{0,1,0}, γ⟩ = ½(1−√2) meets the equality value ½q̂ of the sharp
    MUB pair."""
    from .bell import chsh_witness
    box = tsirelson_box()
    mu = chsh_witness(0, 1, 0)
    lhs = float(mu.value(box))
    a, b = mub_pair()
    wit = witness_q(a, b)
    rhs = 1.0 * wit.q_hat
    gap = abs(lhs - 0.5 * wit.q_hat)
    if lhs < rhs - tol:
        raise AssertionError("incompatibility bound violated at the "
                             "Tsirelson box")
    return QubitBoundReport(lhs, wit.q_hat, rhs, True, gap)
