"""Iterative regularization driver and the facial-reduction ledger.

The driver alternates semi-infinite solves with index-set updates: a zero
optimum certifies new immobile points (and new forced-zero rows at old
ones), a certified negative optimum ends the run with a strictly feasible
witness for the reduced region.  Every accepted certificate appends one
ledger entry (a reducing matrix in the constraint kernel plus the face
descriptor it exposes); the ledger can be verified, compressed to a
linearly independent core, and rendered as the final regularized problem.
"""

import numpy as np

from .config import DEFAULT
from .lp import REL_EQ, REL_GE, LinearProgram, solve_lp
from .model import (SimplexPoint, eval_constraint, kernel_dimension,
                    quad_form)
from .oracle import (ReducedRegion, is_copositive, min_quad_over_omega,
                     min_quad_over_simplex, stationary_candidates)
from .sip import (CertificateError, SipInstance, cut_row_data,
                  linear_row_data, solve_sip)


class LedgerError(RuntimeError):
    """A ledger entry violates one of its construction conditions."""


class Record:
    """One immobile point with its set L of forced-zero row indices.

    The driver asserts the support inclusion P_+(tau) <= L after every
    update; the container itself stays permissive so loose row sets (the
    all-inequality one-step mode) can reuse it.
    """

    __slots__ = ("tau", "L")

    def __init__(self, tau, L):
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "L", frozenset(int(k) for k in L))

    def __setattr__(self, name, value):
        raise AttributeError("Record is immutable")

    def __repr__(self):
        return f"Record(tau={self.tau.coords.tolist()}, L={sorted(self.L)})"


def assert_support_inclusion(records, tol_support=1e-7):
    """The invariant P_+(tau) <= L must hold for every driver record."""
    for rec in records:
        if not set(rec.tau.support_plus(tol_support)) <= rec.L:
            raise LedgerError(
                f"record support {rec.tau.support_plus(tol_support)} not "
                f"contained in L={sorted(rec.L)}")


class IterationState:
    """Iteration counter plus the records accumulated so far."""

    def __init__(self, m, records):
        self.m = int(m)
        self.records = tuple(records)

    @property
    def measure(self):
        return len(self.records) + sum(len(r.L) for r in self.records)

    def row_pairs(self, p):
        eq, ineq = [], []
        for i, rec in enumerate(self.records):
            for k in range(p):
                (eq if k in rec.L else ineq).append((i, k))
        return tuple(eq), tuple(ineq)

    def sip_instance(self, prog, omega):
        eq, ineq = self.row_pairs(prog.p)
        return SipInstance(prog, tuple(r.tau for r in self.records), eq, ineq,
                           omega=omega)


class FaceLedgerEntry:
    """(Y_m, face descriptor) produced at iteration m-1, plus the data
    needed to re-verify its construction conditions."""

    def __init__(self, index, reducer, records, prev_records, certificate,
                 cond_disjoint):
        self.index = int(index)
        self.reducer = reducer
        self.records = tuple(records)
        self.prev_records = tuple(prev_records)
        self.certificate = certificate
        self.cond_disjoint = bool(cond_disjoint)

    def __repr__(self):
        return f"FaceLedgerEntry(m={self.index}, records={len(self.records)})"


class CompressedLedger:
    """Core entries whose reducing matrices are linearly independent.

    ``mapping[s]`` is the raw ledger index of core entry s; ``s_star`` is
    one less than the number of core entries (zero when the ledger is
    trivial).
    """

    def __init__(self, core, mapping, s_star):
        self.core = tuple(core)
        self.mapping = tuple(mapping)
        self.s_star = int(s_star)

    def __repr__(self):
        return f"CompressedLedger(core={self.mapping}, s_star={self.s_star})"


class RegularizedProblem:
    """Finitely many linear rows plus one quadratic constraint over the
    reduced region, with a strictly feasible witness and its margin."""

    def __init__(self, prog, records, omega, witness, margin,
                 omega_empty=False):
        self.prog = prog
        self.records = tuple(records)
        self.omega = omega            # None with omega_empty: region is empty
        self.witness = np.asarray(witness, dtype=float)
        self.margin = float(margin)
        self.omega_empty = bool(omega_empty)

    @property
    def eq_rows(self):
        return IterationState(0, self.records).row_pairs(self.prog.p)[0]

    @property
    def ineq_rows(self):
        return IterationState(0, self.records).row_pairs(self.prog.p)[1]

    def row_margins(self, x):
        """(worst equality residual, worst inequality margin) at x."""
        ax = eval_constraint(self.prog, x)
        eq_res, ineq_margin = 0.0, np.inf
        for i, rec in enumerate(self.records):
            vals = ax @ rec.tau.coords
            for k in range(self.prog.p):
                if k in rec.L:
                    eq_res = max(eq_res, abs(float(vals[k])))
                else:
                    ineq_margin = min(ineq_margin, float(vals[k]))
        return eq_res, ineq_margin


class RegularizationResult:
    """status "regular" (Slater witness), "regularized", or "failed"."""

    def __init__(self, status, witness=None, regularized=None, ledger=(),
                 m_star=None, compressed=None, diagnostics=None):
        self.status = status
        self.witness = witness
        self.regularized = regularized
        self.ledger = tuple(ledger)
        self.m_star = m_star
        self.compressed = compressed
        self.diagnostics = dict(diagnostics or {})

    def __repr__(self):
        return f"RegularizationResult({self.status}, m_star={self.m_star})"


# ---------------------------------------------------------------------------
# state updates and ledger construction

def update_index_sets(state, cert, tol_support=1e-7):
    """Grow L at old records from the positive lambda components off L, and
    append one record per new certificate point with L = its support."""
    records = []
    for i, rec in enumerate(state.records):
        lam = cert.lam.get(i)
        if lam is None:
            records.append(rec)
            continue
        delta = {k for k in range(rec.tau.p)
                 if k not in rec.L and lam[k] > 0.0}
        records.append(Record(rec.tau, rec.L | delta))
    for t, _g in cert.new_indices:
        records.append(Record(t, frozenset(t.support_plus(tol_support))))
    return IterationState(state.m + 1, records)


def duplicate_records(state, cert, tol_support=1e-7):
    """New certificate points that replicate an existing record exactly."""
    dups = []
    for t, _g in cert.new_indices:
        L_new = frozenset(t.support_plus(tol_support))
        for rec in state.records:
            if (np.max(np.abs(rec.tau.coords - t.coords)) <= tol_support
                    and rec.L == L_new):
                dups.append(t)
                break
    return dups


def disjointness_condition(state_old, cert, tol_support=1e-7):
    """Every new point's zero set must meet every old point's support
    (the finiteness condition; verified, not enforced)."""
    for t, _g in cert.new_indices:
        p0 = set(t.support_zero(tol_support))
        for rec in state_old.records:
            if not p0 & set(rec.tau.support_plus(tol_support)):
                return False
    return True


def reducing_matrix(cert, state_old, prog, tol_cert=1e-7):
    """Y = sum gamma t t' + sum (tau lam' + lam tau'), checked against the
    constraint kernel."""
    p = prog.p
    Y = np.zeros((p, p))
    for t, g in cert.new_indices:
        tc = t.coords
        Y += g * np.outer(tc, tc)
    for i, lam in cert.lam.items():
        tc = state_old.records[i].tau.coords
        Y += np.outer(tc, lam) + np.outer(lam, tc)
    worst = max(abs(float(np.sum(Aj * Y))) for Aj in prog.A)
    if worst > tol_cert:
        raise LedgerError(f"reducing matrix leaves the constraint kernel: "
                          f"max |A_j . Y| = {worst:.3e} > {tol_cert:.0e}")
    return Y


def face_membership(entry, D, cfg=DEFAULT):
    """D lies in the face: copositive, zero rows on each L, nonnegative
    rows elsewhere."""
    D = np.asarray(D, dtype=float)
    if not is_copositive(D, cfg.tol_cop, cfg.p_max).copositive:
        return False
    for rec in entry.records:
        vals = D @ rec.tau.coords
        for k in range(D.shape[0]):
            if k in rec.L:
                if abs(float(vals[k])) > cfg.tol_feas:
                    return False
            elif float(vals[k]) < -cfg.tol_feas:
                return False
    return True


def sample_copositive(p, rng, scale=1.0):
    """Nonnegative part plus a Gram part; every such matrix is copositive."""
    U = rng.uniform(0.0, scale, size=(p, p))
    N = 0.5 * (U + U.T)
    B = rng.normal(scale=scale / np.sqrt(p), size=(p, p))
    return N + B @ B.T


def _row_functional(tau, k, p):
    """Upper-triangle coefficients of D -> e_k' D tau."""
    iu, ju = np.triu_indices(p)
    row = np.zeros(iu.size)
    t = tau.coords
    for pos in range(iu.size):
        a, b = int(iu[pos]), int(ju[pos])
        v = 0.0
        if a == b:
            v = t[a] if a == k else 0.0
        else:
            if a == k:
                v += t[b]
            if b == k:
                v += t[a]
        row[pos] = v
    return row


def _project_to_zero_rows(D, records, p):
    """Orthogonal projection (upper-triangle coordinates) of D onto the
    subspace where every L-row vanishes."""
    rows = [_row_functional(rec.tau, k, p) for rec in records for k in rec.L]
    if not rows:
        return D
    C = np.array(rows)
    iu = np.triu_indices(p)
    vec = np.asarray(D, dtype=float)[iu]
    corr = C.T @ np.linalg.lstsq(C @ C.T, C @ vec, rcond=None)[0]
    vec = vec - corr
    out = np.zeros((p, p))
    out[iu] = vec
    out = out + out.T - np.diag(np.diag(out))
    return out


def verify_ledger(entries, prog, cfg=DEFAULT, n_samples=200, seed=0):
    """Check the construction conditions of every entry.

    Kernel membership is exact; the generator form of each reducer is
    re-checked against its stored certificate; the face chain is sampled:
    copositive samples (raw and projected onto the entry's zero rows) that
    land in entry m must land in entry m-1 and be orthogonal to Y_m.
    """
    rng = np.random.default_rng(seed)
    report = {"entries": [], "ok": True}
    for idx, entry in enumerate(entries):
        kernel_residual = max(abs(float(np.sum(Aj * entry.reducer)))
                              for Aj in prog.A)
        cond2 = kernel_residual <= cfg.tol_cert

        cert = entry.certificate
        gamma_ok = all(g > 0.0 for _t, g in cert.new_indices)
        lam_sign_ok = True
        prev = entry.prev_records
        for i, lam in cert.lam.items():
            for k in range(prog.p):
                if k not in prev[i].L and lam[k] < -cfg.tol_mult:
                    lam_sign_ok = False
        region_ok = True
        if prev:
            omega_prev = ReducedRegion([r.tau for r in prev],
                                       tol_support=cfg.tol_support,
                                       tol_feas=cfg.tol_feas)
            region_ok = all(omega_prev.contains(t) for t, _g in cert.new_indices)
        cond1 = gamma_ok and lam_sign_ok and region_ok

        members = 0
        mono_viol = 0
        orth_viol = 0
        max_orth = 0.0
        for s in range(n_samples):
            D = sample_copositive(prog.p, rng)
            if s % 2 == 1:  # bias half the samples toward the face
                D = _project_to_zero_rows(D, entry.records, prog.p)
            if not face_membership(entry, D, cfg):
                continue
            members += 1
            orth = abs(float(np.sum(D * entry.reducer)))
            max_orth = max(max_orth, orth)
            if orth > cfg.tol_cert * max(1.0, float(np.max(np.abs(D)))):
                orth_viol += 1
            if idx > 0 and not face_membership(entries[idx - 1], D, cfg):
                mono_viol += 1
        entry_report = {
            "index": entry.index,
            "kernel_residual": kernel_residual,
            "cond_I": {"gamma_positive": gamma_ok, "lambda_signs": lam_sign_ok,
                       "new_points_in_region": region_ok},
            "cond_II": cond2,
            "members_sampled": members,
            "monotonicity_violations": mono_viol,
            "orthogonality_violations": orth_viol,
            "max_orthogonality": max_orth,
            "cond_disjoint": entry.cond_disjoint,
        }
        if not (cond1 and cond2) or mono_viol or orth_viol:
            report["ok"] = False
        report["entries"].append(entry_report)
    return report


def compress_ledger(entries, prog=None, tol_rank=1e-10):
    """Keep each entry whose reducer is independent of those already kept."""
    iu = None
    kept_vecs = []
    core, mapping = [], []
    for entry in entries:
        Y = np.asarray(entry.reducer, dtype=float)
        if iu is None:
            iu = np.triu_indices(Y.shape[0])
        vec = Y[iu]
        scale = max(1.0, float(np.linalg.norm(vec)))
        if kept_vecs:
            K = np.array(kept_vecs).T
            resid = vec - K @ np.linalg.lstsq(K, vec, rcond=None)[0]
            independent = float(np.linalg.norm(resid)) > tol_rank * scale
        else:
            independent = float(np.linalg.norm(vec)) > tol_rank * scale
        if independent:
            kept_vecs.append(vec)
            core.append(entry)
            mapping.append(entry.index)
    s_star = max(len(core) - 1, 0)
    if prog is not None:
        bound = kernel_dimension(prog, tol_rank)
        if s_star > bound:
            raise LedgerError(
                f"s_star={s_star} exceeds the kernel dimension {bound}; "
                "kernel residuals must have drifted")
    return CompressedLedger(core, mapping, s_star)


# ---------------------------------------------------------------------------
# the driver

def regularize(prog, cfg=DEFAULT):
    """Run the full iterative regularization on a program.

    Returns a RegularizationResult: "regular" with a Slater witness when
    round zero already admits a negative slack, otherwise "regularized"
    with the equivalent reduced problem, the ledger, and its compressed
    core; "failed" carries diagnostics instead of raising.
    """
    a0_cop = is_copositive(prog.A[0], cfg.tol_cop, cfg.p_max).copositive
    trace = []
    try:
        state = IterationState(0, ())
        inst = SipInstance(prog, (), (), (), omega=None)
        out = solve_sip(inst, cfg, a0_copositive=a0_cop)
        trace.append({"m": 0, "kind": out.kind, **out.diagnostics})
        if out.negative_feasible:
            return RegularizationResult(
                "regular", witness=out.point, m_star=0,
                compressed=CompressedLedger((), (), 0),
                diagnostics={"trace": trace, "a0_copositive": a0_cop})
        if not out.optimal_zero:
            return RegularizationResult(
                "failed", diagnostics={"trace": trace,
                                       "reason": out.diagnostics.get("reason")})

        ledger = []
        cap = cfg.cap_for(prog.n)
        m = 0
        while True:
            cert = out.certificate
            cond = disjointness_condition(state, cert, cfg.tol_support)
            dups = duplicate_records(state, cert, cfg.tol_support)
            new_state = update_index_sets(state, cert, cfg.tol_support)
            assert_support_inclusion(new_state.records, cfg.tol_support)
            Y = reducing_matrix(cert, state, prog, cfg.tol_cert)
            ledger.append(FaceLedgerEntry(m + 1, Y, new_state.records,
                                          state.records, cert, cond))
            if new_state.measure <= state.measure:
                return RegularizationResult(
                    "failed", ledger=ledger,
                    diagnostics={"trace": trace, "reason": "no progress",
                                 "duplicates": [t.coords.tolist() for t in dups]})
            state = new_state
            m += 1
            if m > cap:
                return RegularizationResult(
                    "failed", ledger=ledger,
                    diagnostics={"trace": trace,
                                 "reason": f"iteration cap {cap} exceeded"})

            omega = ReducedRegion([r.tau for r in state.records],
                                  tol_support=cfg.tol_support,
                                  tol_feas=cfg.tol_feas)
            inst = state.sip_instance(prog, omega)
            out = solve_sip(inst, cfg, a0_copositive=a0_cop)
            trace.append({"m": m, "kind": out.kind, **out.diagnostics})
            if out.negative_feasible:
                empty = bool(out.diagnostics.get("omega_empty"))
                reg = RegularizedProblem(
                    prog, state.records, None if empty else omega,
                    out.point.x, -out.point.mu, omega_empty=empty)
                compressed = compress_ledger(ledger, prog, cfg.tol_rank)
                return RegularizationResult(
                    "regularized", regularized=reg, ledger=ledger, m_star=m,
                    compressed=compressed,
                    diagnostics={"trace": trace, "a0_copositive": a0_cop})
            if not out.optimal_zero:
                return RegularizationResult(
                    "failed", ledger=ledger,
                    diagnostics={"trace": trace,
                                 "reason": out.diagnostics.get("reason")})
    except (CertificateError, LedgerError, RuntimeError) as e:
        return RegularizationResult(
            "failed", diagnostics={"trace": trace, "reason": str(e),
                                   "exception": type(e).__name__})


# ---------------------------------------------------------------------------
# one-step regularization from a supplied vertex set

def one_step_regularize(prog, W, cfg=DEFAULT, strict=True):
    """Regularize in one step from the vertices of the immobile hull.

    Emits the row A(x) t(j) >= 0 per vertex (componentwise), with the
    support components tightened to equalities in strict mode, plus the
    quadratic constraint over the reduced region; the witness comes from a
    single subproblem solve.  Vertex-set completeness cannot be proven
    here: each supplied point is sample-checked for immobility and a
    missing vertex surfaces as a blocking index.
    """
    W = tuple(W)
    if not W:
        raise ValueError("W must be nonempty")
    records = []
    for t in W:
        if not isinstance(t, SimplexPoint) or t.p != prog.p:
            raise ValueError("W must contain SimplexPoints of dimension p")
        L = frozenset(t.support_plus(cfg.tol_support)) if strict else frozenset()
        records.append(Record(t, L))
    omega = ReducedRegion(W, tol_support=cfg.tol_support, tol_feas=cfg.tol_feas)
    eq, ineq = IterationState(0, records).row_pairs(prog.p)
    inst = SipInstance(prog, W, eq, ineq, omega=omega)
    a0_cop = is_copositive(prog.A[0], cfg.tol_cop, cfg.p_max).copositive
    out = solve_sip(inst, cfg, a0_copositive=a0_cop)
    if out.optimal_zero:
        blocking = out.certificate.new_indices[0][0]
        raise ValueError(
            "W is not the full vertex set of the immobile hull; blocking "
            f"index {blocking.coords.tolist()}")
    if not out.negative_feasible:
        raise RuntimeError(f"witness search unresolved: {out.diagnostics}")
    empty = bool(out.diagnostics.get("omega_empty"))
    reg = RegularizedProblem(prog, records, None if empty else omega,
                             out.point.x, -out.point.mu, omega_empty=empty)
    _check_immobile(prog, W, reg, cfg)
    return reg


def _check_immobile(prog, W, reg, cfg, n_samples=20, seed=0):
    for x in sample_feasible(prog, reg.witness, n_samples, seed, cfg):
        for t in W:
            v = quad_form(eval_constraint(prog, x), t)
            if abs(v) > 1e-6:
                raise ValueError(
                    f"supplied point {t.coords.tolist()} is not immobile: "
                    f"quadratic value {v:.3e} at a feasible x")


def sample_feasible(prog, witness, n, seed, cfg):
    """Feasible points found by shooting rays from a feasible witness and
    keeping the copositive prefixes."""
    rng = np.random.default_rng(seed)
    witness = np.asarray(witness, dtype=float)
    out = [witness]
    tries = 0
    while len(out) < n and tries < 50 * n:
        tries += 1
        d = rng.normal(size=prog.n)
        nrm = float(np.linalg.norm(d))
        if nrm == 0.0:
            continue
        step = rng.uniform(0.0, 2.0)
        x = witness + step * d / nrm
        if is_copositive(eval_constraint(prog, x), cfg.tol_cop,
                         cfg.p_max).copositive:
            out.append(x)
    return out[:n]


# ---------------------------------------------------------------------------
# minimal face via the forced-zero row sets

def forced_zero_rows(prog, t_j, reg, cfg=DEFAULT):
    """Indices k whose row e_k' A(x) t_j vanishes on the whole feasible set.

    Each row is maximized over the regularized description (linear rows
    explicit, the quadratic constraint enforced by separation, decision box
    R); a supremum at the numerical zero level puts k in the set, a
    positive value on the box boundary excludes it with a flag.
    """
    p = prog.p
    n = prog.n
    base_rows = []
    for i, rec in enumerate(reg.records):
        for k in range(p):
            coefs, rhs = linear_row_data(prog, rec.tau, k)
            base_rows.append((coefs, REL_EQ if k in rec.L else REL_GE, rhs))
    box = [(-cfg.box_r, cfg.box_r)] * n
    cuts = []
    members, flags = [], {}
    for k in range(p):
        obj = np.array([float(Aj[k] @ t_j.coords) for Aj in prog.A[1:]])
        const = float(prog.A[0][k] @ t_j.coords)
        value, x_star = None, None
        for _ in range(cfg.cut_rounds):
            rows = list(base_rows)
            for t in cuts:
                coefs, rhs = cut_row_data(prog, t)
                rows.append((coefs, REL_GE, rhs))
            sol = solve_lp(LinearProgram(-obj, rows, box), tol=cfg.tol_lp)
            if sol.status != "Optimal":
                raise RuntimeError(f"row maximization LP reported {sol.status}")
            x_star = sol.primal
            if reg.omega is not None:
                res = min_quad_over_omega(eval_constraint(prog, x_star),
                                          reg.omega, cfg.grid_h(p),
                                          max_grid_points=cfg.max_grid_points)
                if not res.empty and res.value < -cfg.tol_feas:
                    cuts.append(res.argmin)
                    continue
            value = float(obj @ x_star) + const
            break
        else:
            raise RuntimeError("separation for the row maximization did not "
                               "settle within the round cap")
        if value <= cfg.tol_feas:
            members.append(k)
        elif float(np.max(np.abs(x_star))) >= cfg.box_r * (1.0 - 1e-9):
            flags[k] = "unbounded above"
    return tuple(members), flags


class MinimalFaceDescriptor:
    """Vertex list with the forced-zero sets, exposing the two equivalent
    membership forms (equalities only, and equalities plus sign rows)."""

    def __init__(self, vertices, M, flags, cfg=DEFAULT):
        self.vertices = tuple(vertices)
        self.M = {int(j): tuple(v) for j, v in M.items()}
        self.flags = dict(flags)
        self.cfg = cfg

    def member_eq(self, D):
        D = np.asarray(D, dtype=float)
        if not is_copositive(D, self.cfg.tol_cop, self.cfg.p_max).copositive:
            return False
        for j, t in enumerate(self.vertices):
            vals = D @ t.coords
            for k in self.M[j]:
                if abs(float(vals[k])) > self.cfg.tol_feas:
                    return False
        return True

    def member_eq_ineq(self, D):
        if not self.member_eq(D):
            return False
        D = np.asarray(D, dtype=float)
        for j, t in enumerate(self.vertices):
            vals = D @ t.coords
            for k in range(t.p):
                if k not in self.M[j] and float(vals[k]) < -self.cfg.tol_feas:
                    return False
        return True

    def cross_check(self, n_samples=500, seed=0):
        """Sample copositive matrices (raw and projected onto the equality
        rows) and require the two forms to agree on every one."""
        rng = np.random.default_rng(seed)
        p = self.vertices[0].p
        recs = [Record(t, self.M[j]) for j, t in enumerate(self.vertices)]
        checked = members = 0
        for s in range(n_samples):
            D = sample_copositive(p, rng)
            if s % 2 == 1:
                D = _project_to_zero_rows(D, recs, p)
            a, b = self.member_eq(D), self.member_eq_ineq(D)
            if a != b:
                raise RuntimeError(
                    "minimal-face forms disagree on a sampled copositive "
                    f"matrix: {D.tolist()}")
            checked += 1
            members += int(a)
        return {"checked": checked, "members": members, "disagreements": 0}


def minimal_face(prog, W, reg, cfg=DEFAULT):
    """Describe the smallest face containing all constraint values, in the
    two equivalent forms, given the vertex set of the immobile hull."""
    M, flags = {}, {}
    for j, t in enumerate(W):
        members, fl = forced_zero_rows(prog, t, reg, cfg)
        M[j] = members
        if fl:
            flags[j] = fl
    return MinimalFaceDescriptor(tuple(W), M, flags, cfg)


# ---------------------------------------------------------------------------
# feasible-set equivalence sampling

def feasibility_equiv_sample(prog, reg, n_samples, seed, cfg=DEFAULT,
                             box_radius=2.0, center=None):
    """Compare direct copositivity of A(x) against the regularized rows
    plus the reduced-region grid check on sampled x.

    Samples where the two decisions differ but either margin falls inside
    ``tol_band`` are excluded as ties.
    """
    rng = np.random.default_rng(seed)
    if center is None:
        center = reg.witness if reg.witness is not None else np.zeros(prog.n)
    center = np.asarray(center, dtype=float)
    report = {"samples": int(n_samples), "agreements": 0, "ties": 0,
              "disagreements": []}
    h = cfg.grid_h(prog.p)
    for _ in range(int(n_samples)):
        x = center + rng.uniform(-box_radius, box_radius, size=prog.n)
        ax = eval_constraint(prog, x)
        exact = min_quad_over_simplex(ax, p_max=cfg.p_max)
        margin_a = exact.value
        dec_a = margin_a >= -cfg.tol_cop

        eq_res, ineq_margin = reg.row_margins(x)
        omega_margin = _omega_margin(ax, reg, h, cfg, exact)
        margin_b = min(-eq_res, ineq_margin, omega_margin)
        dec_b = (eq_res <= cfg.tol_band and ineq_margin >= -cfg.tol_band
                 and omega_margin >= -cfg.tol_band)

        if dec_a == dec_b:
            report["agreements"] += 1
        elif min(abs(margin_a), abs(margin_b)) <= cfg.tol_band:
            report["ties"] += 1
        else:
            report["disagreements"].append(
                {"x": x.tolist(), "margin_direct": margin_a,
                 "margin_regularized": margin_b})
    report["n_disagreements"] = len(report["disagreements"])
    return report


def _omega_margin(ax, reg, h, cfg, exact):
    if reg.omega_empty:
        return np.inf
    if reg.omega is None:
        return exact.value
    # negative stationary candidates inside the region give exact violations
    best = np.inf
    if exact.value < 0.0:
        for val, t in stationary_candidates(ax):
            if val < -cfg.tol_band and reg.omega.contains(t):
                best = min(best, val)
    res = min_quad_over_omega(ax, reg.omega, h,
                              max_grid_points=cfg.max_grid_points)
    if not res.empty:
        best = min(best, res.value)
    return best
