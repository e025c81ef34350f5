"""Problem data model: symmetric matrices, programs, simplex points, file I/O.

All matrices are dense numpy arrays validated symmetric on entry; all model
objects are immutable after construction, so they are safe to share across
threads without synchronization.
"""

import json

import numpy as np

SYM_TOL = 1e-12


class ProblemFormatError(ValueError):
    """A problem or matrix document violates the documented JSON schema."""


class DimensionError(ValueError):
    """Operands with incompatible dimensions."""


def as_sym_matrix(entries, tol=SYM_TOL, what="matrix"):
    """Validate and return a dense symmetric matrix (copy, read-only)."""
    a = np.array(entries, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ProblemFormatError(f"{what}: expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise ProblemFormatError(f"{what}: dimension must be >= 1")
    if not np.all(np.isfinite(a)):
        raise ProblemFormatError(f"{what}: entries must be finite")
    if a.size and float(np.max(np.abs(a - a.T))) > tol:
        raise ProblemFormatError(f"{what}: matrix not symmetric (max asymmetry "
                                 f"{float(np.max(np.abs(a - a.T))):.3e} > {tol:.0e})")
    a = 0.5 * (a + a.T)  # exact for symmetric input, kills representation noise
    a.setflags(write=False)
    return a


def _frozen_vector(v, what="vector"):
    a = np.array(v, dtype=float)
    if a.ndim != 1:
        raise ProblemFormatError(f"{what}: expected a 1-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ProblemFormatError(f"{what}: entries must be finite")
    a.setflags(write=False)
    return a


class SimplexPoint:
    """A point of the standard simplex with support bookkeeping.

    ``support_plus`` is the set of coordinates above ``tol_support``; its
    complement is ``support_zero``.  Coordinates are validated nonnegative
    (within ``tol``) and summing to one (within ``tol``).
    """

    __slots__ = ("coords",)

    def __init__(self, coords, tol=1e-9):
        t = _frozen_vector(coords, "simplex point")
        if t.size < 1:
            raise DimensionError("simplex point needs at least one coordinate")
        if float(np.min(t)) < -tol:
            raise ValueError(f"simplex point has negative coordinate {float(np.min(t)):.3e}")
        if abs(float(np.sum(t)) - 1.0) > tol:
            raise ValueError(f"simplex point coordinates sum to {float(np.sum(t))!r}, not 1")
        object.__setattr__(self, "coords", t)

    @property
    def p(self):
        return self.coords.size

    def support_plus(self, tol=1e-7):
        return tuple(int(k) for k in np.nonzero(self.coords > tol)[0])

    def support_zero(self, tol=1e-7):
        plus = set(self.support_plus(tol))
        return tuple(k for k in range(self.p) if k not in plus)

    def __setattr__(self, name, value):
        raise AttributeError("SimplexPoint is immutable")

    def __eq__(self, other):
        if not isinstance(other, SimplexPoint):
            return NotImplemented
        return self.coords.shape == other.coords.shape and bool(
            np.all(self.coords == other.coords))

    def __hash__(self):
        return hash(self.coords.tobytes())

    def __repr__(self):
        return f"SimplexPoint({self.coords.tolist()})"


class DecisionPoint:
    """A decision vector x, optionally paired with the slack value mu."""

    __slots__ = ("x", "mu")

    def __init__(self, x, mu=None):
        object.__setattr__(self, "x", _frozen_vector(x, "decision point"))
        object.__setattr__(self, "mu", None if mu is None else float(mu))

    def __setattr__(self, name, value):
        raise AttributeError("DecisionPoint is immutable")

    def __repr__(self):
        return f"DecisionPoint(x={self.x.tolist()}, mu={self.mu})"


class CopositiveProgram:
    """Data (n, p, c, A_0..A_n) of a linear copositive program.

    The constraint map is A(x) = A_0 + sum_i x_i A_i; feasibility means
    A(x) lies in the copositive cone.
    """

    __slots__ = ("n", "p", "c", "A")

    def __init__(self, c, A):
        c = _frozen_vector(c, "objective c")
        if c.size < 1:
            raise ProblemFormatError("objective c must have length n >= 1")
        mats = tuple(as_sym_matrix(a, what=f"A_{i}") for i, a in enumerate(A))
        if len(mats) != c.size + 1:
            raise ProblemFormatError(
                f"expected {c.size + 1} matrices A_0..A_{c.size}, got {len(mats)}")
        p = mats[0].shape[0]
        if p < 2:
            raise ProblemFormatError("matrix dimension p must be >= 2")
        for i, m in enumerate(mats):
            if m.shape[0] != p:
                raise ProblemFormatError(f"A_{i}: dimension {m.shape[0]} != p={p}")
        object.__setattr__(self, "n", int(c.size))
        object.__setattr__(self, "p", int(p))
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", mats)

    def __setattr__(self, name, value):
        raise AttributeError("CopositiveProgram is immutable")

    def __eq__(self, other):
        if not isinstance(other, CopositiveProgram):
            return NotImplemented
        return (self.n == other.n and self.p == other.p
                and bool(np.all(self.c == other.c))
                and all(bool(np.all(a == b)) for a, b in zip(self.A, other.A)))

    def __repr__(self):
        return f"CopositiveProgram(n={self.n}, p={self.p})"


def _coords(t):
    return t.coords if isinstance(t, SimplexPoint) else np.asarray(t, dtype=float)


def eval_constraint(prog, x):
    """A(x) = A_0 + sum_i x_i A_i."""
    x = np.asarray(x, dtype=float)
    if x.shape != (prog.n,):
        raise DimensionError(f"x has shape {x.shape}, expected ({prog.n},)")
    out = prog.A[0].copy()
    for xi, Ai in zip(x, prog.A[1:]):
        out += xi * Ai
    return out


def quad_form(D, t):
    """t' D t in double precision."""
    D = np.asarray(D, dtype=float)
    tc = _coords(t)
    if D.shape != (tc.size, tc.size):
        raise DimensionError(f"matrix {D.shape} vs point of dimension {tc.size}")
    return float(tc @ D @ tc)


def row_action(D, t, k):
    """k-th entry of D t.  The index k is 1-based (math convention)."""
    D = np.asarray(D, dtype=float)
    tc = _coords(t)
    if D.shape != (tc.size, tc.size):
        raise DimensionError(f"matrix {D.shape} vs point of dimension {tc.size}")
    if not 1 <= k <= tc.size:
        raise IndexError(f"row index {k} out of range 1..{tc.size}")
    return float(D[k - 1] @ tc)


def sym_functional_row(M):
    """Coefficients of D -> M . D over the upper-triangle coordinates of D."""
    p = M.shape[0]
    iu = np.triu_indices(p)
    w = np.where(iu[0] == iu[1], 1.0, 2.0)
    return M[iu] * w


def kernel_dimension(prog, tol_rank=1e-10):
    """dim of {D symmetric : A_j . D = 0 for all j}.

    Computed as p(p+1)/2 minus the rank of the n+1 functionals, with rank
    found by Gaussian elimination under full pivoting at ``tol_rank``.
    """
    rows = np.array([sym_functional_row(Aj) for Aj in prog.A])
    dim = prog.p * (prog.p + 1) // 2
    return dim - _pivoted_rank(rows, tol_rank)


def _pivoted_rank(rows, tol):
    a = np.array(rows, dtype=float)
    if a.size == 0:
        return 0
    scale = max(1.0, float(np.max(np.abs(a))))
    rank = 0
    m, n = a.shape
    for _ in range(min(m, n)):
        sub = np.abs(a[rank:, :])
        if sub.size == 0:
            break
        i, j = np.unravel_index(int(np.argmax(sub)), sub.shape)
        piv = a[rank + i, j]
        if abs(piv) <= tol * scale:
            break
        a[[rank, rank + i]] = a[[rank + i, rank]]
        a[rank + 1:, :] -= np.outer(a[rank + 1:, j] / piv, a[rank, :])
        rank += 1
    return rank


def shift_to_feasible(prog, y):
    """Substitute z = x - y so the shifted A_0 becomes A(y).

    With feasible y the new A_0 is copositive; the objective is unchanged
    (the shift only moves a constant).
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (prog.n,):
        raise DimensionError(f"shift y has shape {y.shape}, expected ({prog.n},)")
    a0 = eval_constraint(prog, y)
    return CopositiveProgram(prog.c, (a0,) + prog.A[1:])


# ---------------------------------------------------------------------------
# JSON I/O.  Problem file: {"n": int, "p": int, "c": [...], "A": [[[...]]]}.
# Matrix file: {"p": int, "D": [[...]]}.

def _load_json(data, what):
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    try:
        return json.loads(data)
    except json.JSONDecodeError as e:
        raise ProblemFormatError(f"{what}: invalid JSON at line {e.lineno}, column "
                                 f"{e.colno}: {e.msg}") from e


def _require(doc, key, what):
    if key not in doc:
        raise ProblemFormatError(f"{what}: missing field '{key}'")
    return doc[key]


def parse_problem(data):
    """Parse a problem document; errors carry the offending field."""
    doc = _load_json(data, "problem file")
    if not isinstance(doc, dict):
        raise ProblemFormatError("problem file: top level must be an object")
    n = _require(doc, "n", "problem file")
    p = _require(doc, "p", "problem file")
    c = _require(doc, "c", "problem file")
    A = _require(doc, "A", "problem file")
    if not isinstance(n, int) or not isinstance(p, int):
        raise ProblemFormatError("problem file: fields 'n' and 'p' must be integers")
    try:
        prog = CopositiveProgram(c, A)
    except (ProblemFormatError, DimensionError) as e:
        raise ProblemFormatError(f"problem file: {e}") from e
    if prog.n != n:
        raise ProblemFormatError(f"problem file: field 'n'={n} but c has length {prog.n}")
    if prog.p != p:
        raise ProblemFormatError(f"problem file: field 'p'={p} but matrices have dimension {prog.p}")
    return prog


def serialize_problem(prog):
    doc = {
        "n": prog.n,
        "p": prog.p,
        "c": prog.c.tolist(),
        "A": [a.tolist() for a in prog.A],
    }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def parse_matrix(data):
    doc = _load_json(data, "matrix file")
    if not isinstance(doc, dict):
        raise ProblemFormatError("matrix file: top level must be an object")
    p = _require(doc, "p", "matrix file")
    D = as_sym_matrix(_require(doc, "D", "matrix file"), what="matrix file: D")
    if D.shape[0] != p:
        raise ProblemFormatError(f"matrix file: field 'p'={p} but D has dimension {D.shape[0]}")
    return D


def serialize_matrix(D):
    D = as_sym_matrix(D)
    return (json.dumps({"p": D.shape[0], "D": D.tolist()}, indent=2) + "\n").encode("utf-8")
