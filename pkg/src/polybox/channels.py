"""Classical channels as polysimplex points, Choi-matrix calculus for
small quantum channels, the retraction/section pair between channels
and polysimplices, and the causal-channel realization of no-signalling
boxes.

Exact (rational) arithmetic is kept wherever the Choi matrix is
diagonal, which covers every classical-to-classical construction here;
dense complex matrices are float-mode only.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import linalg as la
from .exact import R0, R1, TOL, approx_eq, is_rational, rat
from .measurements import MeasurementCollection, make_collection
from .polysimplex import PolySimplex, polysimplex_space
from .witnesses import maximal_incompatibility_certificate, retraction_check


class StochasticMatrix:
    """Rows T(·|i): conditional distributions over outputs; the
    identification with polysimplex points is literal row-wise."""

    def __init__(self, rows, tol=TOL):
        rows = tuple(tuple(v for v in r) for r in rows)
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("rows must be non-empty and rectangular")
        self.exact = all(is_rational(v) for r in rows for v in r)
        if self.exact:
            rows = tuple(tuple(rat(v) for v in r) for r in rows)
        else:
            rows = tuple(tuple(float(v) for v in r) for r in rows)
        self.rows = rows
        self.tol = tol
        zero = R0 if self.exact else -tol
        one = R1 if self.exact else 1.0
        for i, r in enumerate(rows):
            if any(v < zero for v in r):
                raise ValueError(f"negative entry in row {i}")
            tot = sum(r)
            ok = tot == one if self.exact else approx_eq(tot, 1.0, tol)
            if not ok:
                raise ValueError(f"row {i} does not sum to 1")

    @property
    def n_inputs(self):
        return len(self.rows)

    @property
    def n_outputs(self):
        return len(self.rows[0])

    def __call__(self, j, i):
        return self.rows[i][j]

    @classmethod
    def deterministic(cls, n_inputs, n_outputs, outcomes):
        outcomes = tuple(outcomes)
        if len(outcomes) != n_inputs or any(not 0 <= o < n_outputs for o in outcomes):
            raise ValueError("one outcome per input, within range")
        return cls(tuple(tuple(R1 if j == outcomes[i] else R0
                               for j in range(n_outputs))
                         for i in range(n_inputs)))

    def tensor(self, other: "StochasticMatrix") -> "StochasticMatrix":
        """Joint device: input (i, i') and output (j, j') flattened
        row-major."""
        rows = []
        for ra in self.rows:
            for rb in other.rows:
                rows.append(tuple(va * vb for va in ra for vb in rb))
        return StochasticMatrix(rows)

    def __eq__(self, other):
        return isinstance(other, StochasticMatrix) and self.rows == other.rows

    def __repr__(self):
        return f"StochasticMatrix({self.n_inputs}x{self.n_outputs})"


class ChoiMatrix:
    """Choi matrix of a channel A → A', indices ordered A'⊗A: the basis
    vector |j⟩_{A'}|i⟩_A sits at position j·d_a + i. Diagonal matrices
    are stored exactly by their diagonal; anything else is a dense
    complex matrix in float mode."""

    def __init__(self, d_a, d_ap, diagonal=None, dense=None, tol=1e-9):
        if (diagonal is None) == (dense is None):
            raise ValueError("exactly one of diagonal/dense must be given")
        self.d_a = d_a
        self.d_ap = d_ap
        self.tol = tol
        n = d_a * d_ap
        if diagonal is not None:
            diagonal = tuple(diagonal)
            if len(diagonal) != n:
                raise ValueError("diagonal has wrong length")
            self.exact = all(is_rational(v) for v in diagonal)
            if self.exact:
                diagonal = tuple(rat(v) for v in diagonal)
            else:
                diagonal = tuple(float(v) for v in diagonal)
            self.diagonal = diagonal
            self.dense = None
        else:
            import numpy as np
            m = np.asarray(dense, dtype=complex)
            if m.shape != (n, n):
                raise ValueError(f"dense Choi must be {n}x{n}")
            if np.max(np.abs(m - m.conj().T)) > tol * (1.0 + np.max(np.abs(m))):
                raise ValueError("Choi matrix must be Hermitian")
            self.exact = False
            self.diagonal = None
            self.dense = m

    def index(self, j, i):
        return j * self.d_a + i

    def diag_entry(self, j, i):
        k = self.index(j, i)
        if self.diagonal is not None:
            return self.diagonal[k]
        return self.dense[k, k].real

    def is_psd(self):
        if self.diagonal is not None:
            if self.exact:
                return all(v >= 0 for v in self.diagonal)
            return all(v >= -self.tol for v in self.diagonal)
        import numpy as np
        w = np.linalg.eigvalsh(self.dense)
        scale = max(1.0, float(np.max(np.abs(self.dense))))
        return bool(w.min() >= -self.tol * scale)

    def trace_out_output(self):
        """Tr_{A'} X as a d_a×d_a matrix; equals I_A iff trace-preserving."""
        if self.diagonal is not None:
            out = [[R0 if self.exact else 0.0] * self.d_a for _ in range(self.d_a)]
            for i in range(self.d_a):
                out[i][i] = sum(self.diagonal[self.index(j, i)]
                                for j in range(self.d_ap))
            return tuple(tuple(r) for r in out)
        import numpy as np
        m = self.dense.reshape(self.d_ap, self.d_a, self.d_ap, self.d_a)
        return np.einsum("jajb->ab", m)

    def is_trace_preserving(self):
        t = self.trace_out_output()
        if self.exact:
            return all(t[a][b] == (R1 if a == b else R0)
                       for a in range(self.d_a) for b in range(self.d_a))
        import numpy as np
        return bool(np.max(np.abs(np.asarray(t, dtype=complex)
                                  - np.eye(self.d_a))) <= self.tol)

    def as_dense(self):
        import numpy as np
        if self.dense is not None:
            return self.dense
        return np.diag(np.array([float(v) for v in self.diagonal], dtype=complex))

    def __repr__(self):
        kind = "diag" if self.diagonal is not None else "dense"
        return f"ChoiMatrix({self.d_a}->{self.d_ap}, {kind})"


def cc_channel(T: StochasticMatrix) -> ChoiMatrix:
    """Classical-to-classical channel σ ↦ Σ ⟨i|σ|i⟩ T(j|i) |j⟩⟨j|: its
    Choi matrix is diagonal with entries T(j|i)."""
    d_a, d_ap = T.n_inputs, T.n_outputs
    diag = [None] * (d_a * d_ap)
    for i in range(d_a):
        for j in range(d_ap):
            diag[j * d_a + i] = T(j, i)
    return ChoiMatrix(d_a, d_ap, diagonal=diag)


def unitary_choi(u) -> ChoiMatrix:
    """Choi matrix of σ ↦ UσU† (float mode)."""
    import numpy as np
    u = np.asarray(u, dtype=complex)
    d = u.shape[0]
    if u.shape != (d, d) or np.max(np.abs(u @ u.conj().T - np.eye(d))) > 1e-9:
        raise ValueError("not a unitary matrix")
    x = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for ip in range(d):
            for j in range(d):
                for jp in range(d):
                    x[j * d + i, jp * d + ip] = u[j, i] * np.conj(u[jp, ip])
    return ChoiMatrix(d, d, dense=x)


def stochastic_from_point(shape: PolySimplex, s) -> StochasticMatrix:
    """The polysimplex point as a padded stochastic matrix:
    T(j|i) = m^i_j(s) for j ≤ l_i and 0 above. Coordinates are read
    raw so float-mode points pass through unconverted."""
    n_out = max(shape.shape) + 1
    rows = []
    for i, l in enumerate(shape.shape):
        off = shape._offset[i]
        row = [s[off + j] if j <= l else R0 for j in range(n_out)]
        rows.append(row)
    return StochasticMatrix(rows)


def point_from_stochastic(shape: PolySimplex, T: StochasticMatrix):
    """Inverse of stochastic_from_point; padding entries must vanish."""
    if T.n_inputs != shape.k + 1 or T.n_outputs != max(shape.shape) + 1:
        raise ValueError("matrix dimensions do not match the shape")
    out = []
    for i, l in enumerate(shape.shape):
        for j in range(T.n_outputs):
            if j <= l:
                out.append(T(j, i))
            elif T(j, i) != 0:
                raise ValueError(f"entry T({j}|{i}) must be 0 for this shape")
    return tuple(out)


def retraction_R(phi: ChoiMatrix, shape: PolySimplex | None = None):
    """R(Φ) ∈ Δ^{d_A}_{d_{A'}−1} with m^i_j R(Φ) = ⟨j|Φ(|i⟩⟨i|)|j⟩, read
    off the Choi diagonal."""
    if not phi.is_trace_preserving():
        raise ValueError("Choi matrix is not trace-preserving")
    if shape is None:
        shape = PolySimplex((phi.d_ap - 1,) * phi.d_a)
    if shape.k + 1 != phi.d_a or max(shape.shape) + 1 > phi.d_ap:
        raise ValueError("shape does not fit the channel dimensions")
    out = []
    for i, l in enumerate(shape.shape):
        for j in range(l + 1):
            out.append(phi.diag_entry(j, i))
    return tuple(out)


def section_S(shape: PolySimplex, s) -> ChoiMatrix:
    """The c-c channel with T = T_s; a right inverse of retraction_R."""
    return cc_channel(stochastic_from_point(shape, s))


def channel_projection(phi: ChoiMatrix, shape: PolySimplex | None = None) -> ChoiMatrix:
    """P = S∘R: projects any channel onto the c-c channels with the
    same input/output statistics; idempotent."""
    if shape is None:
        shape = PolySimplex((phi.d_ap - 1,) * phi.d_a)
    s = retraction_R(phi, shape)
    return section_S(shape, s)


@dataclass
class CausalChannelReport:
    choi: ChoiMatrix
    dims: tuple
    box: object
    recovered: object
    psd: bool
    trace_preserving: bool
    causal: bool
    local_decomposition: list | None


def _bipartite_joint_matrix(box) -> tuple:
    """T_γ((j_A,j_B)|(i_A,i_B)) = p, padded per side; returns the
    StochasticMatrix together with the four local dimensions."""
    sa, sb = box.shape_a, box.shape_b
    d_a, d_b = sa.k + 1, sb.k + 1
    d_ap, d_bp = max(sa.shape) + 1, max(sb.shape) + 1
    rows = []
    for ia in range(d_a):
        for ib in range(d_b):
            row = []
            for ja in range(d_ap):
                for jb in range(d_bp):
                    if ja <= sa.shape[ia] and jb <= sb.shape[ib]:
                        row.append(box.probs[(ia, ib, ja, jb)])
                    else:
                        row.append(R0)
            rows.append(tuple(row))
    return StochasticMatrix(rows), (d_a, d_b, d_ap, d_bp)


def _recover_box(choi: ChoiMatrix, box):
    """(R_A⊗R_B)(Φ) read off the bipartite Choi diagonal."""
    from .bell import Box
    sa, sb = box.shape_a, box.shape_b
    d_b = sb.k + 1
    d_bp = max(sb.shape) + 1
    probs = {}
    for ia, la_ in enumerate(sa.shape):
        for ib, lb in enumerate(sb.shape):
            i = ia * d_b + ib
            for ja in range(la_ + 1):
                for jb in range(lb + 1):
                    probs[(ia, ib, ja, jb)] = choi.diag_entry(ja * d_bp + jb, i)
    return Box(sa, sb, probs)


def box_to_causal_channel(box) -> CausalChannelReport:
    """Φ := Φ_{T_γ}; verifies complete positivity, causality in both
    directions, the exact recovery (R_A⊗R_B)(Φ) = γ, and for local
    boxes also produces the product-c-c-channel decomposition."""
    from .bell import is_local
    T, dims = _bipartite_joint_matrix(box)
    d_a, d_b, d_ap, d_bp = dims
    choi = cc_channel(T)
    psd = choi.is_psd()
    tp = choi.is_trace_preserving()
    causal = _is_causal(T, dims)
    if not causal:
        raise ValueError("box is signalling; no causal channel exists")
    recovered = _recover_box(choi, box)
    if recovered.probs != box.probs:
        raise AssertionError("channel does not recover the box")
    decomposition = None
    if box.mode == "exact":
        local, model = is_local(box)
        if local:
            decomposition = _local_decomposition(box, model, dims)
            _check_local_decomposition(decomposition, T)
    return CausalChannelReport(choi, dims, box, recovered, psd, tp, causal,
                               decomposition)


def _is_causal(T: StochasticMatrix, dims) -> bool:
    """Both marginal channels must ignore the remote input; exact for
    diagonal Choi matrices."""
    d_a, d_b, d_ap, d_bp = dims
    for ia in range(d_a):
        for ja in range(d_ap):
            vals = set()
            for ib in range(d_b):
                marg = sum(T(ja * d_bp + jb, ia * d_b + ib) for jb in range(d_bp))
                vals.add(marg)
            if len(vals) > 1:
                return False
    for ib in range(d_b):
        for jb in range(d_bp):
            vals = set()
            for ia in range(d_a):
                marg = sum(T(ja * d_bp + jb, ia * d_b + ib) for ja in range(d_ap))
                vals.add(marg)
            if len(vals) > 1:
                return False
    return True


def _local_decomposition(box, model, dims):
    """Convex combination of product deterministic c-c channels from
    the LHV weights; certifies membership in the minimal tensor
    product of the two local channel spaces."""
    d_a, d_b, d_ap, d_bp = dims
    out = []
    for (na, nb), w in model.weights.items():
        ta = StochasticMatrix.deterministic(d_a, d_ap, na)
        tb = StochasticMatrix.deterministic(d_b, d_bp, nb)
        out.append((w, ta, tb))
    return out


def _check_local_decomposition(decomposition, T: StochasticMatrix):
    n_in, n_out = T.n_inputs, T.n_outputs
    acc = [[R0] * n_out for _ in range(n_in)]
    for w, ta, tb in decomposition:
        prod = ta.tensor(tb)
        for i in range(n_in):
            for j in range(n_out):
                acc[i][j] += w * prod(j, i)
    if any(acc[i][j] != T(j, i) for i in range(n_in) for j in range(n_out)):
        raise AssertionError("local decomposition does not reproduce the channel")


@dataclass
class ChannelCollectionReport:
    """A maximally incompatible collection of d_A two-outcome
    measurements on the channel space C_{A,A'}: the polysimplex
    collection composed with the channel retraction."""
    d_a: int
    d_ap: int
    shape: PolySimplex
    collection: MeasurementCollection
    id_value: object
    certificate: object
    section: object

    def effect_value(self, phi: ChoiMatrix, i, j):
        """Value of the (i,j) effect on a channel: f^i_j(R(Φ))."""
        if j not in (0, 1):
            raise ValueError("two-outcome measurements: j must be 0 or 1")
        p = phi.diag_entry(0, i)
        return p if j == 0 else (R1 if phi.exact else 1.0) - p

    def point(self, phi: ChoiMatrix):
        return retraction_R(phi, self.shape)


def channel_space_max_incompatibility(d_a, d_ap) -> ChannelCollectionReport:
    """d_A two-outcome measurements on channels A → A', h^i = (m^i_0)∘R,
    with ID = (d_A−1)/d_A: maximal incompatibility, impossible for
    quantum state spaces. The certificate lives on the polysimplex and
    transfers through the retraction/section pair."""
    if d_a < 2 or d_ap < 2:
        raise ValueError("need at least two inputs and two outputs")
    shape = PolySimplex((d_ap - 1,) * d_a)
    space = polysimplex_space(shape.shape)
    cube = PolySimplex((1,) * d_a)
    effects = {}
    for i in range(d_a):
        vals0 = tuple(v[shape._offset[i]] for v in space.vertices)
        effects[(i, 0)] = vals0
        effects[(i, 1)] = tuple(R1 - v for v in vals0)
    F = make_collection(space, cube, effects)
    cert = maximal_incompatibility_certificate(F)
    if not cert.maximal:
        raise AssertionError("polysimplex collection failed the maximality test")
    sect = retraction_check(F)
    if not sect.is_retraction:
        raise AssertionError("collection is not a retraction onto the hypercube")
    return ChannelCollectionReport(d_a, d_ap, shape, F,
                                   rat(d_a - 1, d_a), cert, sect)
