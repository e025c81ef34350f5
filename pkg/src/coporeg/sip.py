"""Cutting-plane solver for the semi-infinite subproblems.

Each subproblem minimizes the slack mu over the decision box subject to
finitely many linear rows pinned at previously found immobile points and a
quadratic constraint indexed by the full simplex (round zero) or by the
reduced region.  A zero optimum yields a dual certificate assembled from
the master LP multipliers; a certified negative optimum yields a strictly
feasible point of the indexed region.
"""

import numpy as np

from .lp import REL_EQ, REL_GE, LinearProgram, solve_lp
from .model import DecisionPoint, DimensionError, SimplexPoint, eval_constraint
from .oracle import CapabilityError, min_quad_over_omega, min_quad_over_simplex


class CertificateError(RuntimeError):
    """Dual certificate failed its stationarity check."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SipInstance:
    """One subproblem: linear rows (i, k) over records plus a quadratic
    constraint over ``omega`` (None means the full simplex)."""

    def __init__(self, prog, taus, eq_rows, ineq_rows, omega=None):
        self.prog = prog
        self.taus = tuple(taus)
        for t in self.taus:
            if not isinstance(t, SimplexPoint) or t.p != prog.p:
                raise DimensionError("every record point must be a SimplexPoint of dimension p")
        self.eq_rows = tuple((int(i), int(k)) for i, k in eq_rows)
        self.ineq_rows = tuple((int(i), int(k)) for i, k in ineq_rows)
        if set(self.eq_rows) & set(self.ineq_rows):
            raise ValueError("equality and inequality row index pairs must be disjoint")
        for i, k in self.eq_rows + self.ineq_rows:
            if not (0 <= i < len(self.taus)) or not (0 <= k < prog.p):
                raise IndexError(f"row ({i}, {k}) out of range")
        self.omega = omega


class DualCertificate:
    """New index points with positive weights plus per-record multiplier
    vectors; ``residual`` is the stationarity residual at assembly."""

    def __init__(self, new_indices, lam, residual):
        self.new_indices = tuple(new_indices)   # ((SimplexPoint, gamma), ...)
        self.lam = dict(lam)                    # record index -> p-vector
        self.residual = float(residual)

    @property
    def gammas(self):
        return tuple(g for _t, g in self.new_indices)

    def __repr__(self):
        return (f"DualCertificate(new={len(self.new_indices)}, "
                f"lam_records={sorted(self.lam)}, residual={self.residual:.2e})")


class SipOutcome:
    """kind is "negative" (strictly feasible point found), "zero" (zero
    optimum with certificate), or "unresolved"."""

    def __init__(self, kind, point=None, certificate=None, diagnostics=None,
                 cuts=()):
        self.kind = kind
        self.point = point
        self.certificate = certificate
        self.diagnostics = dict(diagnostics or {})
        self.cuts = tuple(cuts)

    @property
    def negative_feasible(self):
        return self.kind == "negative"

    @property
    def optimal_zero(self):
        return self.kind == "zero"

    def __repr__(self):
        return f"SipOutcome({self.kind}, point={self.point}, diag={self.diagnostics})"


def linear_row_data(prog, tau, k):
    """Coefficients and rhs of the row  e_k' A(x) tau  (relation supplied
    by the caller): coefficients over x, rhs moved from the constant A_0."""
    t = tau.coords
    coefs = np.array([float(Aj[k] @ t) for Aj in prog.A[1:]])
    rhs = -float(prog.A[0][k] @ t)
    return coefs, rhs


def cut_row_data(prog, t):
    """Coefficients and rhs of the cut  t' A(x) t  (+ mu >= 0 in masters)."""
    tc = t.coords
    coefs = np.array([float(tc @ Aj @ tc) for Aj in prog.A[1:]])
    rhs = -float(tc @ prog.A[0] @ tc)
    return coefs, rhs


def _build_master(inst, cuts, box_r):
    """Master LP over (x, mu): rows ordered eq, ineq, box, cuts."""
    prog = inst.prog
    n = prog.n
    nvar = n + 1
    rows = []
    for i, k in inst.eq_rows:
        coefs, rhs = linear_row_data(prog, inst.taus[i], k)
        rows.append((np.append(coefs, 0.0), REL_EQ, rhs))
    for i, k in inst.ineq_rows:
        coefs, rhs = linear_row_data(prog, inst.taus[i], k)
        rows.append((np.append(coefs, 0.0), REL_GE, rhs))
    for j in range(nvar):          # box: var_j >= -R and var_j <= R
        e = np.zeros(nvar)
        e[j] = 1.0
        rows.append((e, REL_GE, -box_r))
        rows.append((e.copy() * -1.0, REL_GE, -box_r))
    for t in cuts:
        coefs, rhs = cut_row_data(prog, t)
        rows.append((np.append(coefs, 1.0), REL_GE, rhs))
    objective = np.zeros(nvar)
    objective[n] = 1.0
    return LinearProgram(objective, rows)


def _dual_offsets(inst, n):
    n_eq = len(inst.eq_rows)
    n_ineq = len(inst.ineq_rows)
    box = 2 * (n + 1)
    return n_eq, n_eq + n_ineq, n_eq + n_ineq + box


def _check_zero_feasible(inst, cuts, tol):
    """(x=0, mu=0) must satisfy every master row when A_0 is copositive."""
    prog = inst.prog
    for i, k in inst.eq_rows:
        _coefs, rhs = linear_row_data(prog, inst.taus[i], k)
        if abs(rhs) > tol:
            return False
    for i, k in inst.ineq_rows:
        _coefs, rhs = linear_row_data(prog, inst.taus[i], k)
        if rhs > tol:
            return False
    for t in cuts:
        _coefs, rhs = cut_row_data(prog, t)
        if rhs > tol:
            return False
    return True


def solve_sip(inst, cfg, a0_copositive=False):
    """Run the cutting-plane loop; see module docstring for the trichotomy."""
    prog = inst.prog
    n = prog.n
    h_cur = cfg.grid_h(prog.p)
    box_r = cfg.box_r
    refinements = 0
    escalations = 0
    cuts = []
    trace = []

    for rounds in range(1, cfg.cut_rounds + 1):
        if a0_copositive and not _check_zero_feasible(inst, cuts, cfg.tol_feas):
            raise RuntimeError(
                "A_0 was flagged copositive but (x=0, mu=0) violates the "
                "master; the flag or the record data is wrong")
        master = _build_master(inst, cuts, box_r)
        sol = solve_lp(master, tol=cfg.tol_lp)
        if sol.status == "Infeasible":
            raise RuntimeError(
                "master LP infeasible; with mu free this indicates corrupt "
                "record rows")
        if sol.status == "Unbounded":
            raise RuntimeError("master LP unbounded despite box rows")
        x_star = sol.primal[:n]
        mu_star = float(sol.primal[n])
        trace.append(mu_star)

        ax = eval_constraint(prog, x_star)
        if inst.omega is None:
            res = min_quad_over_simplex(ax, p_max=cfg.p_max)
        else:
            try:
                res = min_quad_over_omega(ax, inst.omega, h_cur,
                                          max_grid_points=cfg.max_grid_points)
            except CapabilityError as e:
                return SipOutcome("unresolved", diagnostics={
                    "reason": f"grid exhausted: {e}", "mu_star": mu_star,
                    "rounds": rounds}, cuts=cuts)
            if res.empty:
                return SipOutcome(
                    "negative", point=DecisionPoint(x_star, -1.0),
                    diagnostics={"omega_empty": True, "rounds": rounds,
                                 "mu_star": mu_star}, cuts=cuts)

        violation = res.value + mu_star
        if violation < -cfg.tol_feas:
            dup = any(np.max(np.abs(res.argmin.coords - t.coords)) <= 1e-12
                      for t in cuts)
            if not dup:
                cuts.append(res.argmin)
                continue
            # repeated cut: the grid cannot separate further at this h
            if inst.omega is not None and refinements < cfg.refine_rounds:
                refinements += 1
                h_cur *= 0.5
                continue
            return SipOutcome("unresolved", diagnostics={
                "reason": "separation stalled on a duplicate cut",
                "mu_star": mu_star, "rounds": rounds}, cuts=cuts)

        if mu_star <= -cfg.tol_neg:
            # preferred slack: half the master optimum; fallback: the
            # certified lower bound itself, when positive at tolerance scale
            mu_bar = None
            if res.value_lb >= -mu_star / 2.0:
                mu_bar = mu_star / 2.0
            elif res.value_lb >= cfg.tol_neg:
                mu_bar = -res.value_lb
            if mu_bar is not None and inst.omega is not None:
                # post-hoc check at half resolution (the h-level bound is
                # already rigorous, so a capped grid keeps the primary claim)
                try:
                    confirm = min_quad_over_omega(ax, inst.omega, h_cur / 2.0,
                                                  max_grid_points=cfg.max_grid_points)
                except CapabilityError:
                    confirm = None
                if confirm is not None and confirm.value_lb < -mu_bar:
                    mu_bar = -confirm.value_lb if confirm.value_lb >= cfg.tol_neg else None
            if mu_bar is not None:
                return SipOutcome(
                    "negative", point=DecisionPoint(x_star, mu_bar),
                    diagnostics={"rounds": rounds, "mu_star": mu_star,
                                 "h": h_cur, "margin_lb": res.value_lb},
                    cuts=cuts)
            if refinements < cfg.refine_rounds:
                refinements += 1
                h_cur *= 0.5
                continue
            return SipOutcome("unresolved", diagnostics={
                "reason": "negative optimum not certifiable at the finest grid",
                "mu_star": mu_star, "rounds": rounds}, cuts=cuts)

        if abs(mu_star) <= cfg.tol_zero:
            _e, _i, box_off = _dual_offsets(inst, n)
            box_duals = sol.dual[box_off - 2 * (n + 1):box_off]
            if float(np.max(np.abs(box_duals), initial=0.0)) > cfg.tol_mult:
                if escalations < 2:
                    escalations += 1
                    box_r *= 10.0
                    continue
                return SipOutcome("unresolved", diagnostics={
                    "reason": "zero optimum supported on the box after escalation",
                    "mu_star": mu_star, "rounds": rounds}, cuts=cuts)
            cert = extract_certificate(sol, cuts, inst, cfg,
                                       iteration0=inst.omega is None)
            return SipOutcome("zero", point=DecisionPoint(x_star, mu_star),
                              certificate=cert,
                              diagnostics={"rounds": rounds, "mu_star": mu_star,
                                           "h": h_cur}, cuts=cuts)

        if mu_star > cfg.tol_zero:
            return SipOutcome("unresolved", diagnostics={
                "reason": "positive optimum: the subproblem admits no zero "
                          "slack (is the program feasible?)",
                "mu_star": mu_star, "rounds": rounds}, cuts=cuts)

        # mu* in the ambiguous gap (-tol_neg, -tol_zero)
        if refinements < cfg.refine_rounds:
            refinements += 1
            h_cur *= 0.5
            continue
        return SipOutcome("unresolved", diagnostics={
            "reason": "optimum stuck between tol_zero and tol_neg",
            "mu_star": mu_star, "rounds": rounds}, cuts=cuts)

    return SipOutcome("unresolved", diagnostics={
        "reason": "cutting-plane round cap exceeded",
        "mu_star": trace[-1] if trace else None, "rounds": cfg.cut_rounds},
        cuts=cuts)


def extract_certificate(sol, cuts, inst, cfg, iteration0):
    """Assemble (tau, gamma, lambda) from the master multipliers.

    Cut duals above ``tol_mult`` become the new index weights (normalized to
    sum to one on round zero); linear-row duals, halved, become the lambda
    vectors.  The result is validated against the stationarity identity and
    the support bound before it is returned.
    """
    if sol.status != "Optimal" or abs(float(sol.primal[-1])) > cfg.tol_zero:
        raise CertificateError("certificate requested away from a zero optimum")
    prog = inst.prog
    n = prog.n
    eq_end, ineq_end, cut_off = _dual_offsets(inst, n)

    lam = {}
    for pos, (i, k) in enumerate(inst.eq_rows):
        v = float(sol.dual[pos])
        if v != 0.0:
            lam.setdefault(i, np.zeros(prog.p))[k] += v / 2.0
    for pos, (i, k) in enumerate(inst.ineq_rows):
        v = float(sol.dual[eq_end + pos])
        if abs(v) <= cfg.tol_mult:
            continue
        v = max(v, 0.0)  # >=-row duals are nonnegative up to LP noise
        lam.setdefault(i, np.zeros(prog.p))[k] += v / 2.0

    new = []
    for c, t in enumerate(cuts):
        g = float(sol.dual[cut_off + c])
        if g > cfg.tol_mult:
            new.append((t, g))
    if not new:
        raise CertificateError("zero optimum but no active cut multiplier "
                               "above tol_mult")
    if len(new) > n + 1:
        new = _reduce_support(new, prog, n, cfg)
    if iteration0:
        total = sum(g for _t, g in new)
        new = [(t, g / total) for t, g in new]

    residual = certificate_residual(prog, new, lam, inst.taus)
    if residual > cfg.tol_cert:
        raise CertificateError(
            f"certificate stationarity residual {residual:.3e} exceeds "
            f"tol_cert={cfg.tol_cert:.0e}", residual=residual)
    return DualCertificate(new, lam, residual)


def certificate_residual(prog, new_indices, lam, taus):
    """max_j | sum gamma t'A_j t + 2 sum lam'A_j tau |, j = 0..n."""
    worst = 0.0
    for Aj in prog.A:
        s = 0.0
        for t, g in new_indices:
            s += g * float(t.coords @ Aj @ t.coords)
        for i, lv in lam.items():
            s += 2.0 * float(lv @ Aj @ taus[i].coords)
        worst = max(worst, abs(s))
    return worst


def _reduce_support(new, prog, n, cfg):
    """Carathéodory-style reduction to at most n+1 active points.

    Keeps the aggregated stationarity sums and the total weight fixed while
    re-solving for a basic (hence sparse) weight vector; index-weighted
    objective makes the retained set deterministic.
    """
    m = len(new)
    cols = np.zeros((n + 1, m))
    target = np.zeros(n + 1)
    for c, (t, g) in enumerate(new):
        tc = t.coords
        for j in range(n):
            cols[j, c] = float(tc @ prog.A[j + 1] @ tc)
        cols[n, c] = 1.0
    for j in range(n + 1):
        target[j] = float(cols[j] @ np.array([g for _t, g in new]))
    rows = [(cols[j], REL_EQ, float(target[j])) for j in range(n + 1)]
    objective = np.arange(1.0, m + 1.0)
    sol = solve_lp(LinearProgram(objective, rows, [(0.0, np.inf)] * m),
                   tol=cfg.tol_lp)
    if sol.status != "Optimal":
        raise CertificateError("support-reduction LP failed, status "
                               f"{sol.status}")
    reduced = [(new[c][0], float(sol.primal[c])) for c in range(m)
               if sol.primal[c] > cfg.tol_mult]
    if not 1 <= len(reduced) <= n + 1:
        raise CertificateError(
            f"support reduction produced {len(reduced)} points, expected "
            f"1..{n + 1}")
    return reduced
