"""Certified minimization of quadratic forms over the simplex and its
reduced regions, copositivity tests with witnesses, and the geometric
constructions (exclusion radius, hull distance, reduced index region).

The exact oracle enumerates all nonempty supports, solving the stationarity
system on each face and comparing against the vertices; it is exact for
dimensions up to ``p_max``.  The reduced-region oracle works on the rational
grid of the simplex with a Lipschitz lower-bound certificate.
"""

from functools import lru_cache

import numpy as np

from .lp import REL_EQ, REL_GE, LinearProgram, LpError, solve_lp
from .model import DimensionError, SimplexPoint


class CapabilityError(RuntimeError):
    """Requested exact computation beyond the configured dimension cap."""


class OracleResult:
    """Certified minimum of t' D t over a region of the simplex.

    ``kind`` is "exact" (support enumeration: value_lb == value), "grid"
    (value_lb certified from the grid values, never above value), or
    "empty" (region empty, value +inf).
    """

    def __init__(self, value, argmin, kind, value_lb=None, h=None, lipschitz=None):
        self.value = value
        self.argmin = argmin
        self.kind = kind
        self.value_lb = value if value_lb is None else value_lb
        self.h = h
        self.lipschitz = lipschitz

    @property
    def empty(self):
        return self.kind == "empty"

    def __repr__(self):
        return (f"OracleResult({self.kind}, value={self.value}, "
                f"value_lb={self.value_lb})")


class CopositivityResult:
    """Outcome of a copositivity test: margin, and a witness if negative."""

    def __init__(self, copositive, margin, witness=None):
        self.copositive = copositive
        self.margin = margin
        self.witness = witness

    def __repr__(self):
        tag = "Copositive" if self.copositive else "NotCopositive"
        return f"{tag}(margin={self.margin}, witness={self.witness})"


def stationary_candidates(D):
    """All stationary points of t' D t on faces of the simplex, plus vertices.

    Returns (value, coords) pairs in a fixed support order (deterministic).
    Faces whose stationarity system is inconsistent contribute nothing: their
    minima live on smaller faces, which are enumerated separately.
    """
    D = np.asarray(D, dtype=float)
    p = D.shape[0]
    scale = max(1.0, float(np.max(np.abs(D))))
    out = []
    for mask in range(1, 1 << p):
        support = [k for k in range(p) if mask >> k & 1]
        s = len(support)
        if s == 1:
            k = support[0]
            t = np.zeros(p)
            t[k] = 1.0
            out.append((float(D[k, k]), t))
            continue
        Dss = D[np.ix_(support, support)]
        K = np.zeros((s + 1, s + 1))
        K[:s, :s] = 2.0 * Dss
        K[:s, s] = -1.0
        K[s, :s] = 1.0
        rhs = np.zeros(s + 1)
        rhs[s] = 1.0
        try:
            z = np.linalg.solve(K, rhs)
            ok = np.all(np.isfinite(z))
        except np.linalg.LinAlgError:
            ok = False
        if not ok:
            z, *_ = np.linalg.lstsq(K, rhs, rcond=None)
            if float(np.max(np.abs(K @ z - rhs))) > 1e-9 * (1.0 + scale):
                continue  # no stationary point on this face
        u = z[:s]
        if float(np.min(u)) < -1e-10:
            continue  # stationary point lies outside the face
        u = np.clip(u, 0.0, None)
        total = float(np.sum(u))
        if total <= 0.0:
            continue
        u = u / total
        t = np.zeros(p)
        t[support] = u
        out.append((float(t @ D @ t), t))
    return out


def min_quad_over_simplex(D, p_max=14):
    """Exact global minimum of t' D t over the simplex."""
    D = np.asarray(D, dtype=float)
    p = D.shape[0]
    if p > p_max:
        raise CapabilityError(
            f"exact support enumeration capped at p_max={p_max} (got p={p}); "
            "use the grid oracle (grid_min_full) instead")
    best_val, best_t = None, None
    for val, t in stationary_candidates(D):
        if best_val is None or val < best_val:
            best_val, best_t = val, t
    return OracleResult(best_val, SimplexPoint(best_t), "exact")


def is_copositive(D, tol_cop=1e-9, p_max=14):
    """Copositive iff the simplex minimum is >= -tol_cop."""
    res = min_quad_over_simplex(D, p_max=p_max)
    if res.value >= -tol_cop:
        return CopositivityResult(True, res.value)
    return CopositivityResult(False, res.value, witness=res.argmin)


def is_strictly_copositive(D, tol_strict=1e-9, p_max=14):
    return min_quad_over_simplex(D, p_max=p_max).value > tol_strict


def l1_dist_to_hull(t, V):
    """l1 distance from t to the convex hull of the points in V (an LP)."""
    tc = t.coords if isinstance(t, SimplexPoint) else np.asarray(t, dtype=float)
    pts = [v.coords if isinstance(v, SimplexPoint) else np.asarray(v, dtype=float)
           for v in V]
    if not pts:
        raise ValueError("V must be nonempty")
    p = tc.size
    for v in pts:
        if v.size != p:
            raise DimensionError("hull points must match the dimension of t")
    m = len(pts)
    # variables: weights w (m) then slacks s (p); minimize sum s
    nvar = m + p
    objective = np.concatenate([np.zeros(m), np.ones(p)])
    rows = []
    for k in range(p):
        a = np.zeros(nvar)
        for j, v in enumerate(pts):
            a[j] = v[k]
        a[m + k] = 1.0
        rows.append((a, REL_GE, tc[k]))          # s_k >= t_k - (Vw)_k
        a2 = np.zeros(nvar)
        for j, v in enumerate(pts):
            a2[j] = -v[k]
        a2[m + k] = 1.0
        rows.append((a2, REL_GE, -tc[k]))        # s_k >= (Vw)_k - t_k
    a = np.zeros(nvar)
    a[:m] = 1.0
    rows.append((a, REL_EQ, 1.0))
    bounds = [(0.0, np.inf)] * nvar
    sol = solve_lp(LinearProgram(objective, rows, bounds))
    if sol.status != "Optimal":
        raise LpError(f"hull-distance LP reported {sol.status}; this cannot "
                      "happen for nonempty V")
    return max(0.0, float(sol.objective_value))


def exclusion_radius(V, tol_support=1e-7):
    """Smallest positive coordinate over all points of V (strictly positive)."""
    if not V:
        raise ValueError("V must be nonempty")
    vals = []
    for v in V:
        plus = v.support_plus(tol_support)
        if not plus:
            raise ValueError("a hull point has empty positive support")
        vals.append(float(np.min(v.coords[list(plus)])))
    return float(min(vals))


class ReducedRegion:
    """The simplex minus the open l1 neighborhood of conv V of radius sigma.

    Membership is ``l1_dist_to_hull(t, V) >= sigma``.  A cheap sandwich
    (dual sign vectors below, nearest-point distance above) decides almost
    every grid point; the thin undecided shell falls back to the exact LP.
    """

    def __init__(self, V, sigma=None, tol_support=1e-7, tol_feas=1e-9):
        self.V = tuple(V)
        if not self.V:
            raise ValueError("V must be nonempty")
        self.p = self.V[0].p
        for v in self.V:
            if v.p != self.p:
                raise DimensionError("all points of V must share a dimension")
        self.sigma = exclusion_radius(self.V, tol_support) if sigma is None else float(sigma)
        if not self.sigma > 0.0:
            raise ValueError("sigma must be strictly positive")
        self.tol_feas = tol_feas
        self._vmat = np.array([v.coords for v in self.V])            # (m, p)
        signs = np.array([[1.0 if i >> k & 1 else -1.0 for k in range(self.p)]
                          for i in range(1 << self.p)])              # (2^p, p)
        self._signs = signs
        self._sign_offsets = np.max(signs @ self._vmat.T, axis=1)    # (2^p,)
        self._selected = {}                                          # N -> points in the region

    def contains(self, t):
        """Exact membership via the hull-distance LP."""
        return l1_dist_to_hull(t, self.V) >= self.sigma - self.tol_feas

    def grid_mask(self, points, relax=0.0):
        """Vectorized membership for an (M, p) array of simplex points.

        Loops run over the small dimensions (sign vectors, hull points) so
        no (M x 2^p) intermediate is materialized.
        """
        M = points.shape[0]
        lower = np.full(M, -np.inf)
        for g, off in zip(self._signs, self._sign_offsets):
            np.maximum(lower, points @ g - off, out=lower)
        upper = np.full(M, np.inf)
        for v in self._vmat:
            np.minimum(upper, np.sum(np.abs(points - v), axis=1), out=upper)
        cut = self.sigma - self.tol_feas - relax
        mask = lower >= cut
        undecided = np.nonzero(~mask & (upper >= cut))[0]
        for i in undecided:
            mask[i] = l1_dist_to_hull(points[i], self.V) >= cut
        return mask

    def selected_points(self, denominator, relax=0.0):
        """Grid points within ``relax`` (in the hull distance) of the
        region, at the given resolution (cached: the mask does not depend
        on the quadratic being minimized)."""
        N = int(denominator)
        key = (N, float(relax))
        if key not in self._selected:
            pts = simplex_grid(self.p, N)
            sel = pts[self.grid_mask(pts, relax=relax)]
            sel.setflags(write=False)
            self._selected[key] = sel
        return self._selected[key]

    def is_empty(self):
        """Exact emptiness probe: the convex distance attains its maximum
        over the simplex at a vertex."""
        eye = np.eye(self.p)
        return all(l1_dist_to_hull(eye[k], self.V) < self.sigma - self.tol_feas
                   for k in range(self.p))


@lru_cache(maxsize=64)
def simplex_grid(p, denominator):
    """All rational simplex points with the given denominator, in
    lexicographic order of the integer compositions; shape (M, p),
    read-only (cached)."""
    N = int(denominator)
    pts = _compositions(p, N) / float(N)
    pts.setflags(write=False)
    return pts


def _compositions(parts, total):
    """Integer compositions of ``total`` into ``parts`` nonnegative parts,
    lexicographic, as an (M, parts) int array.  Built one coordinate at a
    time: every partial row fans out over 0..remaining, vectorized."""
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    rows = np.zeros((1, 0), dtype=np.int64)
    rem = np.array([total], dtype=np.int64)
    for _ in range(parts - 1):
        reps = rem + 1
        parent = np.repeat(np.arange(rem.size), reps)
        offsets = np.repeat(np.cumsum(reps) - reps, reps)
        k = np.arange(int(reps.sum()), dtype=np.int64) - offsets
        rows = np.hstack([rows[parent], k[:, None]])
        rem = rem[parent] - k
    return np.hstack([rows, rem[:, None]])


def grid_point_count(p, denominator):
    from math import comb
    return comb(int(denominator) + p - 1, p - 1)


def min_quad_over_omega(D, omega, h, max_grid_points=3_000_000):
    """Grid minimum of t' D t over the reduced region, certified below.

    The certificate combines two bounds over the grid points within the
    covering radius r = p/(2N) of the region (nearest grid neighbors of
    region points can sit just inside the excluded neighborhood, so the
    selection is relaxed by r): the Lipschitz bound grid_min - L*r with
    L = 2 max|D_kl|, and the per-point expansion
        q(t) >= q(g) - (max_k - min_k)(Dg) * r - max|D| * r^2,
    whose centered gradient (displacements on the simplex sum to zero)
    wins near flat minima.  Returns the distinguished empty result when
    the region holds no grid point and the vertex probe confirms it is
    empty.
    """
    D = np.asarray(D, dtype=float)
    p = D.shape[0]
    if omega.p != p:
        raise DimensionError(f"matrix dimension {p} vs region dimension {omega.p}")
    if h <= 0.0:
        raise ValueError("grid resolution h must be positive")
    N = int(np.ceil(1.0 / h))
    if grid_point_count(p, N) > max_grid_points:
        raise CapabilityError(
            f"grid of {grid_point_count(p, N)} points exceeds the cap "
            f"{max_grid_points} (p={p}, 1/h={N})")
    sel = omega.selected_points(N)
    maxd = float(np.max(np.abs(D)))
    L = 2.0 * maxd
    if sel.shape[0] == 0:
        if omega.is_empty():
            return OracleResult(np.inf, None, "empty", value_lb=np.inf,
                                h=h, lipschitz=L)
        # cannot happen: the grid contains every vertex, and a nonempty
        # region always contains the vertex maximizing the hull distance
        raise RuntimeError("reduced region nonempty but holds no grid point")
    G = sel @ D
    vals = np.einsum("ij,ij->i", sel, G)
    i = int(np.argmin(vals))
    value = float(vals[i])

    r = p / (2.0 * N)
    rel = omega.selected_points(N, relax=r)
    Gr = rel @ D
    vals_r = np.einsum("ij,ij->i", rel, Gr)
    centered = 0.5 * (np.max(Gr, axis=1) - np.min(Gr, axis=1))
    lb_lip = float(np.min(vals_r)) - L * r
    lb_grad = float(np.min(vals_r - 2.0 * centered * r - maxd * r * r))
    return OracleResult(value, SimplexPoint(sel[i]), "grid",
                        value_lb=max(lb_lip, lb_grad), h=h, lipschitz=L)


def grid_min_full(D, denominator):
    """Exact minimum of t' D t over the full simplex grid.

    The last two coordinates of each slice form a segment on which the form
    is a one-dimensional quadratic, so the discrete minimum per slice needs
    only the endpoints and the integers bracketing the vertex.  Returns
    (value, argmin coords).
    """
    D = np.asarray(D, dtype=float)
    p = D.shape[0]
    N = int(denominator)
    if p < 2:
        raise DimensionError("needs p >= 2")
    if p == 2:
        outer = np.zeros((1, 0), dtype=np.int64)
    else:
        outer = _compositions_leq(p - 2, N)
    rem = N - outer.sum(axis=1)                      # segment lengths
    M = outer.shape[0]
    U = np.zeros((M, p))
    if p > 2:
        U[:, :p - 2] = outer / float(N)
    U[:, p - 1] = rem / float(N)                     # segment start: all mass on last
    d = np.zeros(p)
    d[p - 2] = 1.0 / N
    d[p - 1] = -1.0 / N
    a = float(d @ D @ d)
    Du = U @ D
    b = 2.0 * (Du[:, p - 2] - Du[:, p - 1]) / N
    c = np.einsum("ij,ij->i", U, Du)

    cand = [np.zeros(M, dtype=np.int64), rem.astype(np.int64)]
    if a > 0.0:
        star = -b / (2.0 * a)
        lo = np.clip(np.floor(star), 0, rem).astype(np.int64)
        hi = np.clip(np.ceil(star), 0, rem).astype(np.int64)
        cand += [lo, hi]
    best_val = None
    best_slice = best_s = None
    for s in cand:
        vals = a * s.astype(float) ** 2 + b * s + c
        i = int(np.argmin(vals))
        v = float(vals[i])
        if best_val is None or v < best_val:
            best_val, best_slice, best_s = v, i, int(s[i])
    t = U[best_slice].copy()
    t[p - 2] += best_s / float(N)
    t[p - 1] -= best_s / float(N)
    return best_val, t


def _compositions_leq(parts, total):
    """Nonnegative integer vectors of the given length with sum <= total
    (the slack coordinate of a composition absorbs the remainder)."""
    if parts == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return _compositions(parts + 1, total)[:, :parts]
