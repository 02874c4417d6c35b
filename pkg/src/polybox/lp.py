"""Exact-rational linear programming.

Dense two-phase simplex with Bland's anti-cycling rule. Every optimal
solve asserts strong duality (primal optimum == dual value) in exact
arithmetic; infeasible solves return a verified Farkas certificate and
unbounded solves a verified improving ray.

LpBuilder is the work-horse used by the other modules; lp_solve is a
flat convenience wrapper over it.
"""
from __future__ import annotations

from dataclasses import dataclass

from .exact import R0, R1, rat

OPTIMAL = "OPTIMAL"
INFEASIBLE = "INFEASIBLE"
UNBOUNDED = "UNBOUNDED"


@dataclass
class LpResult:
    status: str
    objective: object | None = None
    x: tuple | None = None       # one value per builder variable
    duals: tuple | None = None   # one multiplier per constraint row
    farkas: tuple | None = None  # row multipliers certifying infeasibility
    ray: tuple | None = None     # improving ray certifying unboundedness

    def __getitem__(self, var):
        return self.x[var]


def _pivot(tab, r, c):
    row = tab[r]
    inv = 1 / row[c]
    if inv != 1:
        row = [a * inv for a in row]
        tab[r] = row
    for i, other in enumerate(tab):
        if i != r:
            f = other[c]
            if f:
                tab[i] = [a - f * b for a, b in zip(other, row)]


def _run_simplex(tab, basis, allowed):
    """Bland's rule over the columns in `allowed`. Objective is the last
    row (reduced costs, rhs cell = -objective value). Returns 'optimal'
    or ('unbounded', entering_column)."""
    nrows = len(tab) - 1
    while True:
        obj = tab[-1]
        enter = -1
        for j in allowed:
            if obj[j] < 0:
                enter = j
                break
        if enter < 0:
            return "optimal", -1
        leave = -1
        best = None
        for i in range(nrows):
            a = tab[i][enter]
            if a > 0:
                ratio = tab[i][-1] / a
                if best is None or ratio < best or (
                        ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave < 0:
            return "unbounded", enter
        _pivot(tab, leave, enter)
        basis[leave] = enter


class LpBuilder:
    """Incremental LP: nonneg/free variables, ==, <=, >= rows."""

    def __init__(self):
        self._vars = []            # "nonneg" | "free"
        self._rows = []            # (coeffs dict, rhs, kind)

    def var(self, nonneg=True) -> int:
        self._vars.append("nonneg" if nonneg else "free")
        return len(self._vars) - 1

    def vars(self, n, nonneg=True):
        return [self.var(nonneg) for _ in range(n)]

    def add_eq(self, coeffs, rhs):
        self._rows.append((dict(coeffs), rat(rhs), "eq"))

    def add_le(self, coeffs, rhs):
        self._rows.append((dict(coeffs), rat(rhs), "le"))

    def add_ge(self, coeffs, rhs):
        self._rows.append(({v: -rat(c) for v, c in coeffs.items()},
                           -rat(rhs), "le"))

    def minimize(self, coeffs):
        return self._solve({v: rat(c) for v, c in coeffs.items()}, R1)

    def maximize(self, coeffs):
        res = self._solve({v: -rat(c) for v, c in coeffs.items()}, -R1)
        return res

    # ----- internals -----

    def _solve(self, cost, sense):
        # column layout: per-variable columns, then one slack per <= row,
        # then one artificial per row.
        col_of = []
        ncols = 0
        for kind in self._vars:
            if kind == "nonneg":
                col_of.append((ncols,))
                ncols += 1
            else:
                col_of.append((ncols, ncols + 1))
                ncols += 2
        slack_col = {}
        for r, (_, _, kind) in enumerate(self._rows):
            if kind == "le":
                slack_col[r] = ncols
                ncols += 1

        nrows = len(self._rows)
        rows = []
        flipped = []
        for r, (coeffs, rhs, kind) in enumerate(self._rows):
            row = [R0] * ncols
            for v, c in coeffs.items():
                c = rat(c)
                cols = col_of[v]
                row[cols[0]] += c
                if len(cols) == 2:
                    row[cols[1]] -= c
            if kind == "le":
                row[slack_col[r]] = R1
            if rhs < 0:
                row = [-a for a in row]
                rhs = -rhs
                flipped.append(True)
            else:
                flipped.append(False)
            row.append(rhs)
            rows.append(row)

        # phase 1: artificial basis
        art0 = ncols
        tab = []
        for i, row in enumerate(rows):
            full = row[:-1] + [R1 if j == i else R0 for j in range(nrows)] \
                + [row[-1]]
            tab.append(full)
        basis = [art0 + i for i in range(nrows)]
        obj = [R0] * (ncols + nrows + 1)
        for row in tab:
            for j in range(ncols):
                obj[j] -= row[j]
            obj[-1] -= row[-1]
        tab.append(obj)
        allowed = range(ncols)
        _run_simplex(tab, basis, allowed)
        if -tab[-1][-1] != 0:
            return self._extract_farkas(tab, flipped, art0, nrows)

        self._drive_out_artificials(tab, basis, ncols, art0)
        dropped = set()
        keep = []
        for i in range(len(basis)):
            if basis[i] >= art0:
                dropped.add(basis[i] - art0)
            else:
                keep.append(i)
        if dropped:
            newtab = [tab[i] for i in keep] + [tab[-1]]
            basis = [basis[i] for i in keep]
            tab = newtab

        # phase 2
        ncost = [R0] * (ncols + nrows + 1)
        for v, c in cost.items():
            cols = col_of[v]
            ncost[cols[0]] += c
            if len(cols) == 2:
                ncost[cols[1]] -= c
        obj = list(ncost)
        for i, b in enumerate(basis):
            cb = ncost[b]
            if cb:
                obj = [a - cb * t for a, t in zip(obj, tab[i])]
        tab[-1] = obj
        status, enter = _run_simplex(tab, basis, allowed)
        if status == "unbounded":
            return self._extract_ray(tab, basis, enter, col_of, cost, sense)
        return self._extract_optimal(
            tab, basis, col_of, cost, sense, flipped, art0, nrows, dropped)

    def _drive_out_artificials(self, tab, basis, ncols, art0):
        for i in range(len(basis)):
            if basis[i] >= art0:
                enter = next((j for j in range(ncols) if tab[i][j] != 0), None)
                if enter is not None:
                    _pivot(tab, i, enter)
                    basis[i] = enter

    def _public_x(self, tab, basis, col_of):
        colval = {}
        for i, b in enumerate(basis):
            colval[b] = tab[i][-1]
        out = []
        for cols in col_of:
            v = colval.get(cols[0], R0)
            if len(cols) == 2:
                v = v - colval.get(cols[1], R0)
            out.append(v)
        return tuple(out)

    def _extract_optimal(self, tab, basis, col_of, cost, sense,
                         flipped, art0, nrows, dropped):
        x = self._public_x(tab, basis, col_of)
        value = sum((c * x[v] for v, c in cost.items()), R0)
        # duals from reduced costs under the artificial columns
        obj = tab[-1]
        duals = []
        for r in range(nrows):
            if r in dropped:
                duals.append(R0)
                continue
            y = -obj[art0 + r]
            if flipped[r]:
                y = -y
            duals.append(y)
        # exact self-checks: primal feasibility and strong duality
        self._check_primal(x)
        dualval = sum((y * rhs for y, (_, rhs, _) in zip(duals, self._rows)),
                      R0)
        if dualval != value:
            raise AssertionError("simplex strong duality violated")
        return LpResult(OPTIMAL, objective=sense * value, x=x,
                        duals=tuple(sense * y for y in duals))

    def _extract_farkas(self, tab, flipped, art0, nrows):
        obj = tab[-1]
        y = []
        for r in range(nrows):
            yr = R1 - obj[art0 + r]
            if flipped[r]:
                yr = -yr
            y.append(yr)
        # verify: y^T A <= 0 on nonneg columns, == 0 on free vars,
        # slack rows give y_r <= 0 on '<=' rows, and y^T b > 0.
        comb = {}
        total = R0
        for yr, (coeffs, rhs, kind) in zip(y, self._rows):
            if kind == "le" and yr > 0:
                raise AssertionError("Farkas certificate sign check failed")
            for v, c in coeffs.items():
                comb[v] = comb.get(v, R0) + yr * rat(c)
            total += yr * rhs
        for v, s in comb.items():
            if self._vars[v] == "free":
                if s != 0:
                    raise AssertionError("Farkas certificate failed on free var")
            elif s > 0:
                raise AssertionError("Farkas certificate failed")
        if not total > 0:
            raise AssertionError("Farkas certificate not separating")
        return LpResult(INFEASIBLE, farkas=tuple(y))

    def _extract_ray(self, tab, basis, enter, col_of, cost, sense):
        ncols = len(tab[0]) - 1
        d = {enter: R1}
        for i, b in enumerate(basis):
            t = tab[i][enter]
            if t:
                d[b] = d.get(b, R0) - t
        ray = []
        for cols in col_of:
            v = d.get(cols[0], R0)
            if len(cols) == 2:
                v = v - d.get(cols[1], R0)
            ray.append(v)
        ray = tuple(ray)
        # verify the ray: homogeneous feasibility and strict improvement
        drop = sum((c * ray[v] for v, c in cost.items()), R0)
        if not drop < 0:
            raise AssertionError("unboundedness ray does not improve")
        for coeffs, _, kind in self._rows:
            s = sum((rat(c) * ray[v] for v, c in coeffs.items()), R0)
            if kind == "eq" and s != 0:
                raise AssertionError("unboundedness ray leaves equalities")
            if kind == "le" and s > 0:
                raise AssertionError("unboundedness ray violates <=")
        for v, kind in enumerate(self._vars):
            if kind == "nonneg" and ray[v] < 0:
                raise AssertionError("unboundedness ray goes negative")
        return LpResult(UNBOUNDED, ray=ray)

    def _check_primal(self, x):
        for coeffs, rhs, kind in self._rows:
            s = sum((rat(c) * x[v] for v, c in coeffs.items()), R0)
            if kind == "eq" and s != rhs:
                raise AssertionError("simplex produced infeasible point")
            if kind == "le" and s > rhs:
                raise AssertionError("simplex produced infeasible point")
        for v, kind in enumerate(self._vars):
            if kind == "nonneg" and x[v] < 0:
                raise AssertionError("simplex produced negative variable")


def lp_solve(objective, constraints, nonneg=None, sense="min"):
    """Flat interface: objective is a coefficient vector; constraints are
    (coeffs, relation, rhs) triples with relation in {'==','<=','>='};
    nonneg is a per-variable flag list (default: all nonneg)."""
    n = len(objective)
    if nonneg is None:
        nonneg = [True] * n
    if len(nonneg) != n:
        raise ValueError("nonneg flag list does not match objective length")
    b = LpBuilder()
    for flag in nonneg:
        b.var(nonneg=flag)
    for coeffs, rel, rhs in constraints:
        if len(coeffs) != n:
            raise ValueError("constraint dimension mismatch")
        row = {v: c for v, c in enumerate(coeffs) if rat(c) != 0}
        if rel == "==":
            b.add_eq(row, rhs)
        elif rel == "<=":
            b.add_le(row, rhs)
        elif rel == ">=":
            b.add_ge(row, rhs)
        else:
            raise ValueError(f"unknown relation {rel!r}")
    obj = {v: c for v, c in enumerate(objective) if rat(c) != 0}
    if sense == "min":
        return b.minimize(obj)
    if sense == "max":
        return b.maximize(obj)
    raise ValueError(f"unknown sense {sense!r}")
