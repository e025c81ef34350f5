"""Run configuration: tolerances, grid resolution, box bounds, caps."""

import json
import os
from dataclasses import asdict, dataclass, field, fields


@dataclass(frozen=True)
class RunConfig:
    """All numeric knobs in one place; echoed verbatim into every report.

    Tolerances are absolute unless noted.  ``h`` is the simplex grid
    resolution used by the restricted-region oracle; ``box_r`` bounds the
    decision variables (and the slack variable) in every cutting-plane
    master.  ``iteration_cap`` of ``None`` means 2n+2 for an n-variable
    program.
    """

    tol_feas: float = 1e-9       # feasibility residuals / cut violation
    tol_support: float = 1e-7    # positive-support threshold for simplex points
    tol_rank: float = 1e-10      # rank and span tests
    tol_cop: float = 1e-9        # copositivity margin
    tol_strict: float = 1e-9     # strict copositivity margin
    tol_lp: float = 1e-9         # LP optimality / duality gap
    tol_mult: float = 1e-7       # multipliers at or below this are zero
    tol_cert: float = 1e-7       # certificate stationarity / kernel residual
    tol_zero: float = 1e-7       # |mu*| below this counts as a zero optimum
    tol_neg: float = 1e-6        # mu* below -tol_neg counts as negative
    tol_band: float = 1e-6       # tie band for the feasibility equivalence check
    p_max: int = 14              # exact-oracle dimension cap (2^p supports)
    h: float = 2.0 ** -7         # grid resolution (scaled down for p >= 4)
    box_r: float = 1e3           # box |x_j| <= R and mu >= -R in masters
    iteration_cap: int | None = None
    cut_rounds: int = 300        # cutting-plane rounds per SIP solve
    refine_rounds: int = 4       # grid halvings before giving up
    max_grid_points: int = 3_000_000
    seed: int = 0
    samples: int = 1000          # default sample count for equivalence checks
    out: str | None = None
    verbosity: int = 0

    def __post_init__(self):
        for f in fields(self):
            if f.name.startswith("tol_"):
                v = getattr(self, f.name)
                if not (v > 0.0):
                    raise ValueError(f"{f.name} must be positive, got {v}")
        if not (0.0 < self.h <= 0.25):
            raise ValueError(f"h must lie in (0, 1/4], got {self.h}")
        if self.iteration_cap is not None and self.iteration_cap < 1:
            raise ValueError("iteration_cap must be >= 1")
        if self.box_r <= 0 or self.p_max < 2:
            raise ValueError("box_r must be positive and p_max >= 2")

    def cap_for(self, n):
        return self.iteration_cap if self.iteration_cap is not None else 2 * n + 2

    def grid_h(self, p):
        """Grid resolution scaled so point counts stay at desk scale."""
        if p <= 3:
            return self.h
        shrink = 4 ** (p - 3)           # roughly constant point budget
        return min(0.25, self.h * shrink)

    def replace(self, **kw):
        d = asdict(self)
        d.update(kw)
        return RunConfig(**d)

    def to_dict(self):
        return asdict(self)


def load_env_config(base=None, env_var="COPOREG_CONFIG"):
    """Merge a JSON config file named by the environment under `base` values.

    File values fill in anything not explicitly set in ``base`` (a dict of
    overrides); unknown keys are rejected.
    """
    base = dict(base or {})
    path = os.environ.get(env_var)
    merged = {}
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        known = {f.name for f in fields(RunConfig)}
        unknown = set(file_cfg) - known
        if unknown:
            raise ValueError(f"unknown config keys in {path}: {sorted(unknown)}")
        merged.update(file_cfg)
    merged.update(base)
    return RunConfig(**merged)


DEFAULT = RunConfig()
