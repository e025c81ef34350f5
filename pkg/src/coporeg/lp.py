"""Self-contained dense LP engine with primal and dual extraction.

Two-phase simplex over an explicit column geometry: free variables are
split, lower-bounded variables shifted, upper bounds become internal rows.
Pivoting is Dantzig's rule with deterministic lowest-index tie-breaking,
falling back to Bland's rule once a run of degenerate pivots trips the
cycling heuristic.  Dual multipliers follow the convention (min problem):
>= rows nonnegative, <= rows nonpositive, == rows free.
"""

import numpy as np

REL_LE = "<="
REL_EQ = "=="
REL_GE = ">="

_PIV_TOL = 1e-10
_DEGENERATE_RUN = 50
_MAX_ITERS = 20000


class LpError(RuntimeError):
    """Numerical failure inside the simplex engine."""


class LinearProgram:
    """min objective . x subject to rows (coeffs, relation, rhs) and bounds.

    ``bounds[j] = (lo, hi)`` with ``-inf``/``+inf`` allowed; variables
    default to free.  Rows must share the variable count and have finite
    right-hand sides.
    """

    def __init__(self, objective, rows, bounds=None):
        self.objective = np.asarray(objective, dtype=float)
        if self.objective.ndim != 1:
            raise ValueError("objective must be a vector")
        nvar = self.objective.size
        self.rows = []
        for coeffs, rel, rhs in rows:
            a = np.asarray(coeffs, dtype=float)
            if a.shape != (nvar,):
                raise ValueError(f"row has {a.size} coefficients, expected {nvar}")
            if rel not in (REL_LE, REL_EQ, REL_GE):
                raise ValueError(f"unknown relation {rel!r}")
            if not np.isfinite(rhs):
                raise ValueError("row rhs must be finite")
            self.rows.append((a, rel, float(rhs)))
        if bounds is None:
            bounds = [(-np.inf, np.inf)] * nvar
        if len(bounds) != nvar:
            raise ValueError("bounds length must match the variable count")
        self.bounds = [(float(lo), float(hi)) for lo, hi in bounds]
        for lo, hi in self.bounds:
            if lo > hi:
                raise ValueError(f"empty bound interval [{lo}, {hi}]")
        self.nvar = nvar


class LpSolution:
    """Status plus primal/dual data; ``dual`` has one multiplier per row."""

    def __init__(self, status, primal=None, dual=None, objective_value=None,
                 ray=None, basis=None, residual=None):
        self.status = status            # "Optimal" | "Infeasible" | "Unbounded"
        self.primal = primal
        self.dual = dual
        self.objective_value = objective_value
        self.ray = ray
        self.basis = basis
        self.residual = residual

    def __repr__(self):
        return f"LpSolution({self.status}, value={self.objective_value})"


class _Std:
    """Standard-form expansion: A x = b, x >= 0 columnwise.

    Column bookkeeping: ``col_map[pos] = (orig_j, sign, shift)`` so the
    original value is recovered as ``x_j = sum(sign * x'_pos) + shift``
    (split columns carry shift 0 on both halves).
    """

    def __init__(self, lp):
        nvar = lp.nvar
        self.col_map = []
        extra_rows = []    # internal upper-bound rows (std column, ub)
        col_of = [None] * nvar
        for j, (lo, hi) in enumerate(lp.bounds):
            if np.isneginf(lo) and np.isposinf(hi):
                col_of[j] = ("split", len(self.col_map))
                self.col_map += [(j, +1.0, 0.0), (j, -1.0, 0.0)]
            elif np.isfinite(lo):
                col_of[j] = ("plain", len(self.col_map))
                self.col_map.append((j, +1.0, lo))
                if np.isfinite(hi):
                    extra_rows.append((len(self.col_map) - 1, hi - lo))
            else:  # lo = -inf, hi finite: x = hi - x'
                col_of[j] = ("neg", len(self.col_map))
                self.col_map.append((j, -1.0, hi))
        nstruct = len(self.col_map)

        rows_a, rows_rel, rows_rhs, self.row_flip = [], [], [], []
        for coeffs, rel, rhs in lp.rows:
            a = np.zeros(nstruct)
            adj = rhs
            for j in range(nvar):
                cj = coeffs[j]
                if cj == 0.0:
                    continue
                kind, pos = col_of[j]
                if kind == "split":
                    a[pos] += cj
                    a[pos + 1] -= cj
                else:
                    _, sign, shift = self.col_map[pos]
                    a[pos] += sign * cj
                    adj -= cj * shift
            rows_a.append(a)
            rows_rel.append(rel)
            rows_rhs.append(adj)
            self.row_flip.append(1.0)
        self.n_user_rows = len(rows_a)
        for pos, ub in extra_rows:
            a = np.zeros(nstruct)
            a[pos] = 1.0
            rows_a.append(a)
            rows_rel.append(REL_LE)
            rows_rhs.append(ub)
            self.row_flip.append(1.0)

        m = len(rows_a)
        for i in range(m):
            if rows_rhs[i] < 0.0:
                rows_a[i] = -rows_a[i]
                rows_rhs[i] = -rows_rhs[i]
                self.row_flip[i] = -1.0
                if rows_rel[i] == REL_LE:
                    rows_rel[i] = REL_GE
                elif rows_rel[i] == REL_GE:
                    rows_rel[i] = REL_LE

        A = np.array(rows_a, dtype=float).reshape(m, nstruct)
        basis = [None] * m
        slack_cols = []
        art_rows = []
        for i in range(m):
            if rows_rel[i] == REL_LE:
                col = np.zeros(m)
                col[i] = 1.0
                slack_cols.append(col)
                basis[i] = nstruct + len(slack_cols) - 1
            elif rows_rel[i] == REL_GE:
                col = np.zeros(m)
                col[i] = -1.0
                slack_cols.append(col)
                art_rows.append(i)
            else:
                art_rows.append(i)
        if slack_cols:
            A = np.hstack([A, np.column_stack(slack_cols)])
        self.n_real_cols = A.shape[1]
        for i in art_rows:
            col = np.zeros((m, 1))
            col[i, 0] = 1.0
            A = np.hstack([A, col])
            basis[i] = A.shape[1] - 1
        self.A = A
        self.b = np.array(rows_rhs, dtype=float)
        self.basis = [int(x) for x in basis]
        self.nstruct = nstruct

        c = np.zeros(A.shape[1])
        for pos, (j, sign, _shift) in enumerate(self.col_map):
            c[pos] = sign * lp.objective[j]
        self.c = c

    def to_original(self, x_std, nvar):
        x = np.zeros(nvar)
        for pos, (j, sign, shift) in enumerate(self.col_map):
            x[j] += sign * x_std[pos] + shift
        return x

    def direction_to_original(self, d_std, nvar):
        d = np.zeros(nvar)
        for pos, (j, sign, _shift) in enumerate(self.col_map):
            d[j] += sign * d_std[pos]
        return d


def _simplex(A, b, c, basis, allow_cols, tol):
    """Iterate to optimality.  Returns (xb, y, ray) with ray None at optimum."""
    m = A.shape[0]
    if m == 0:
        for j in sorted(allow_cols):
            if c[j] < -tol:
                return np.zeros(0), np.zeros(0), (j, np.zeros(0))
        return np.zeros(0), np.zeros(0), None
    degenerate_run = 0
    use_bland = False
    allow = np.array(sorted(allow_cols), dtype=int)
    for _ in range(_MAX_ITERS):
        try:
            B = A[:, basis]
            xb = np.linalg.solve(B, b)
            y = np.linalg.solve(B.T, c[basis])
        except np.linalg.LinAlgError as e:
            raise LpError(f"singular basis {tuple(basis)}: {e}") from e
        reduced = c[allow] - A[:, allow].T @ y
        in_basis = np.isin(allow, basis)
        mask = (~in_basis) & (reduced < -tol)
        if not np.any(mask):
            return xb, y, None
        cand = allow[mask]
        if use_bland:
            enter = int(cand[0])
        else:
            enter = int(cand[int(np.argmin(reduced[mask]))])
        try:
            d = np.linalg.solve(B, A[:, enter])
        except np.linalg.LinAlgError as e:
            raise LpError(f"singular basis on pivot: {e}") from e
        pos = np.nonzero(d > _PIV_TOL)[0]
        if pos.size == 0:
            return xb, y, (enter, d)
        ratios = xb[pos] / d[pos]
        best = float(np.min(ratios))
        ties = pos[ratios <= best + _PIV_TOL * (1.0 + abs(best))]
        leave_row = int(min(ties, key=lambda r: basis[r]))
        if best <= _PIV_TOL:
            degenerate_run += 1
            if degenerate_run >= _DEGENERATE_RUN:
                use_bland = True
        else:
            degenerate_run = 0
        basis[leave_row] = enter
    raise LpError("simplex iteration cap exceeded")


def solve_lp(lp, tol=1e-9):
    """Solve a LinearProgram; see module docstring for conventions."""
    std = _Std(lp)
    A, b, c = std.A, std.b, std.c
    m, ncols = A.shape
    basis = list(std.basis)
    art_cols = set(range(std.n_real_cols, ncols))

    if m > 0 and art_cols:
        c1 = np.zeros(ncols)
        c1[sorted(art_cols)] = 1.0
        xb, _y, ray = _simplex(A, b, c1, basis, range(ncols), tol)
        if ray is not None:
            raise LpError("phase-1 objective reported unbounded")
        if float(c1[basis] @ xb) > 10.0 * tol * (1.0 + float(np.max(np.abs(b), initial=0.0))):
            return LpSolution("Infeasible")
        for row in range(m):
            if basis[row] in art_cols:
                # pivot the artificial out on any usable real column
                try:
                    binv_row = np.linalg.solve(A[:, basis].T, np.eye(m)[row])
                except np.linalg.LinAlgError as e:
                    raise LpError(f"singular basis after phase 1: {e}") from e
                for j in range(std.n_real_cols):
                    if j in basis:
                        continue
                    if abs(float(binv_row @ A[:, j])) > _PIV_TOL:
                        basis[row] = j
                        break
                # a stuck artificial marks a redundant row; it stays basic at 0

    xb, y, ray = _simplex(A, b, c, basis, range(std.n_real_cols), tol)

    if ray is not None:
        enter, d = ray
        d_std = np.zeros(ncols)
        d_std[enter] = 1.0
        for r in range(m):
            d_std[basis[r]] -= d[r]
        direction = std.direction_to_original(d_std, lp.nvar)
        nrm = float(np.max(np.abs(direction)))
        if nrm > 0.0:
            direction = direction / nrm
        return LpSolution("Unbounded", ray=direction, basis=tuple(basis))

    x_std = np.zeros(ncols)
    if m > 0:
        x_std[basis] = xb
    x = std.to_original(x_std, lp.nvar)

    dual = np.zeros(len(lp.rows))
    for i in range(std.n_user_rows):
        dual[i] = std.row_flip[i] * (float(y[i]) if m > 0 else 0.0)

    residual = _feas_residual(lp, x)
    scale = 1.0 + float(np.max(np.abs(b), initial=0.0))
    if residual > 1e-6 * scale:
        raise LpError(f"optimal basis fails feasibility, residual {residual:.3e}")
    return LpSolution("Optimal", primal=x, dual=dual,
                      objective_value=float(lp.objective @ x),
                      basis=tuple(basis), residual=residual)


def _feas_residual(lp, x):
    worst = 0.0
    for a, rel, rhs in lp.rows:
        v = float(a @ x)
        if rel == REL_LE:
            worst = max(worst, v - rhs)
        elif rel == REL_GE:
            worst = max(worst, rhs - v)
        else:
            worst = max(worst, abs(v - rhs))
    for j, (lo, hi) in enumerate(lp.bounds):
        if np.isfinite(lo):
            worst = max(worst, lo - x[j])
        if np.isfinite(hi):
            worst = max(worst, x[j] - hi)
    return worst
