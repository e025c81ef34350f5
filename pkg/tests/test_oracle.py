import itertools

import numpy as np
import pytest

from coporeg import (CapabilityError, ReducedRegion, SimplexPoint,
                     exclusion_radius, grid_min_full, is_copositive,
                     is_strictly_copositive, l1_dist_to_hull,
                     min_quad_over_omega, min_quad_over_simplex, quad_form,
                     simplex_grid)

from conftest import simplex


def brute_grid_min(D, p, N):
    """Independent oracle: plain enumeration of every composition."""
    best = None
    for comp in itertools.product(range(N + 1), repeat=p - 1):
        if sum(comp) > N:
            continue
        t = np.array(list(comp) + [N - sum(comp)], dtype=float) / N
        v = float(t @ D @ t)
        if best is None or v < best:
            best = v
    return best


def random_sym(rng, p, scale=1.0):
    m = rng.normal(scale=scale, size=(p, p))
    return 0.5 * (m + m.T)


# ---------------------------------------------------------------------------
# exact minimizer

def test_min_identity():
    # analytic: sum t_k^2 over the simplex is minimized at the barycenter
    res = min_quad_over_simplex(np.eye(2))
    assert res.value == pytest.approx(0.5)
    assert np.allclose(res.argmin.coords, [0.5, 0.5])
    assert res.value_lb == res.value


def test_min_rank_one_difference():
    res = min_quad_over_simplex(np.array([[1.0, -1.0], [-1.0, 1.0]]))
    assert res.value == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(res.argmin.coords, [0.5, 0.5])


def test_min_horn_matrix(horn):
    res = min_quad_over_simplex(horn)
    assert abs(res.value) <= 1e-9
    # cross-check against the fine grid
    gv, _gt = grid_min_full(horn, 64)
    assert gv >= -1e-9
    assert abs(gv - res.value) <= 1e-9


def test_min_flat_form():
    # q = (sum t)^2 is constant on the simplex; every stationarity system
    # is singular and the least-squares branch must still find the value
    res = min_quad_over_simplex(np.ones((3, 3)))
    assert res.value == pytest.approx(1.0)


def test_capability_error():
    with pytest.raises(CapabilityError, match="grid"):
        min_quad_over_simplex(np.eye(15))


def test_grid_min_full_matches_brute_force():
    rng = np.random.default_rng(3)
    for p, N in ((2, 9), (3, 7), (4, 5)):
        for _ in range(5):
            D = random_sym(rng, p)
            expected = brute_grid_min(D, p, N)
            got, argmin = grid_min_full(D, N)
            assert got == pytest.approx(expected, abs=1e-12)
            assert float(argmin @ D @ argmin) == pytest.approx(got, abs=1e-12)


def test_exact_grid_consistency():
    # spec property: exact minimum and the h = 2^-8 grid value differ by
    # at most L*h, across 200 random matrices with p in {3, 4, 5}
    rng = np.random.default_rng(11)
    counts = {3: 90, 4: 90, 5: 20}
    N = 256
    for p, reps in counts.items():
        for _ in range(reps):
            D = random_sym(rng, p)
            exact = min_quad_over_simplex(D).value
            gv, _ = grid_min_full(D, N)
            L = 2.0 * float(np.max(np.abs(D)))
            assert exact <= gv + 1e-12
            assert gv - exact <= L / N


def test_scaling_property():
    rng = np.random.default_rng(5)
    for _ in range(10):
        D = random_sym(rng, 4)
        a = float(rng.uniform(0.5, 3.0))
        r1 = min_quad_over_simplex(D)
        r2 = min_quad_over_simplex(a * D)
        assert r2.value == pytest.approx(a * r1.value, rel=1e-10, abs=1e-12)
        assert np.allclose(r1.argmin.coords, r2.argmin.coords)


# ---------------------------------------------------------------------------
# copositivity

def test_is_copositive_identity5():
    res = is_copositive(np.eye(5))
    assert res.copositive
    assert res.margin == pytest.approx(0.2)


def test_is_copositive_witness():
    res = is_copositive(np.array([[0.0, -1.0], [-1.0, 0.0]]))
    assert not res.copositive
    assert res.margin == pytest.approx(-0.5)
    assert np.allclose(res.witness.coords, [0.5, 0.5])
    assert quad_form(np.array([[0.0, -1.0], [-1.0, 0.0]]), res.witness) < 0


def test_is_copositive_boundary():
    res = is_copositive(np.array([[1.0, -1.0], [-1.0, 1.0]]))
    assert res.copositive
    assert res.margin == pytest.approx(0.0, abs=1e-12)


def test_witness_validity_random():
    rng = np.random.default_rng(9)
    found = 0
    for _ in range(50):
        D = random_sym(rng, 4)
        res = is_copositive(D)
        if not res.copositive:
            found += 1
            t = res.witness
            assert np.min(t.coords) >= -1e-12
            assert abs(np.sum(t.coords) - 1) <= 1e-9
            assert quad_form(D, t) < 0
    assert found > 0


def test_strict_copositivity():
    assert is_strictly_copositive(np.eye(2))
    assert not is_strictly_copositive(np.array([[1.0, -1.0], [-1.0, 1.0]]))
    assert not is_strictly_copositive(np.array([[0.0, 1.0], [1.0, 1.0]]))


# ---------------------------------------------------------------------------
# hull distance and the reduced region

def test_l1_dist_examples():
    assert l1_dist_to_hull(simplex(1, 0), [simplex(0, 1)]) == pytest.approx(2.0)
    assert l1_dist_to_hull(simplex(0.5, 0.5), [simplex(0.5, 0.5)]) == pytest.approx(0.0, abs=1e-12)
    # midpoint of the two hull points
    assert l1_dist_to_hull(simplex(0.75, 0.25),
                           [simplex(0.5, 0.5), simplex(1, 0)]) == pytest.approx(0.0, abs=1e-10)


def test_l1_dist_vanishes_on_hull_points():
    rng = np.random.default_rng(13)
    for _ in range(5):
        V = []
        for _ in range(3):
            raw = rng.uniform(0.05, 1.0, size=3)
            V.append(SimplexPoint(raw / raw.sum()))
        for v in V:
            assert l1_dist_to_hull(v, V) <= 1e-10


def test_l1_dist_triangle_inequality():
    rng = np.random.default_rng(17)
    V = [simplex(1, 0, 0), simplex(0, 0.5, 0.5)]
    for _ in range(20):
        a = rng.uniform(0.0, 1.0, size=3)
        b = rng.uniform(0.0, 1.0, size=3)
        t1 = SimplexPoint(a / a.sum())
        t2 = SimplexPoint(b / b.sum())
        d1 = l1_dist_to_hull(t1, V)
        d2 = l1_dist_to_hull(t2, V)
        assert abs(d1 - d2) <= float(np.sum(np.abs(t1.coords - t2.coords))) + 1e-9


def test_exclusion_radius_examples():
    assert exclusion_radius([simplex(0.5, 0.5)]) == pytest.approx(0.5)
    assert exclusion_radius([simplex(1, 0)]) == pytest.approx(1.0)
    assert exclusion_radius([simplex(1 / 3, 2 / 3, 0), simplex(0, 0, 1)]) == pytest.approx(1 / 3)
    with pytest.raises(ValueError):
        exclusion_radius([])


def test_region_excludes_its_own_points():
    V = [simplex(0.5, 0.5), simplex(1, 0)]
    region = ReducedRegion(V)
    for v in V:
        assert not region.contains(v)


def test_region_duplicate_points_do_not_change_membership():
    V = [simplex(0.5, 0.5)]
    r1 = ReducedRegion(V)
    r2 = ReducedRegion(V + [simplex(0.5, 0.5)])
    assert r1.sigma == r2.sigma
    pts = simplex_grid(2, 32)
    assert np.array_equal(r1.grid_mask(pts), r2.grid_mask(pts))


def test_grid_mask_matches_exact_lp():
    # the sandwich plus LP fallback must agree with the exact predicate
    V = [simplex(0.6, 0.2, 0.2), simplex(0.2, 0.7, 0.1)]
    region = ReducedRegion(V)
    pts = simplex_grid(3, 16)
    mask = region.grid_mask(pts)
    for i in range(pts.shape[0]):
        exact = l1_dist_to_hull(pts[i], V) >= region.sigma - region.tol_feas
        assert mask[i] == exact


# ---------------------------------------------------------------------------
# restricted-region minimization

def test_omega_min_band():
    # q = (2 t1 - 1)^2 on |t1 - 1/2| >= 1/4: minimum 1/4 on the band edge
    D = np.array([[1.0, -1.0], [-1.0, 1.0]])
    region = ReducedRegion([simplex(0.5, 0.5)])
    res = min_quad_over_omega(D, region, 2.0 ** -7)
    assert res.value == pytest.approx(0.25)
    assert res.argmin.coords[0] in (pytest.approx(0.25), pytest.approx(0.75))
    assert res.value_lb <= res.value


def test_omega_min_identity():
    region = ReducedRegion([simplex(1, 0)])
    assert region.sigma == pytest.approx(1.0)
    res = min_quad_over_omega(np.eye(2), region, 2.0 ** -7)
    assert res.value == pytest.approx(0.5)
    assert np.allclose(res.argmin.coords, [0.5, 0.5])


def test_omega_min_zero_matrix():
    region = ReducedRegion([simplex(0.5, 0.5)])
    res = min_quad_over_omega(np.zeros((2, 2)), region, 2.0 ** -6)
    assert res.value == 0.0
    assert res.value_lb == 0.0


def test_omega_empty_region():
    # the hull of the two vertices is the whole simplex, sigma = 1
    region = ReducedRegion([simplex(1, 0), simplex(0, 1)])
    assert region.is_empty()
    res = min_quad_over_omega(np.eye(2), region, 2.0 ** -5)
    assert res.empty
    assert res.value == np.inf


def test_omega_value_lb_is_sound():
    # certified lower bound never exceeds the true region minimum
    # (estimated by a much finer grid)
    rng = np.random.default_rng(23)
    region = ReducedRegion([simplex(0.3, 0.7)])
    for _ in range(10):
        D = random_sym(rng, 2)
        coarse = min_quad_over_omega(D, region, 2.0 ** -4)
        fine = min_quad_over_omega(D, region, 2.0 ** -10)
        assert coarse.value_lb <= fine.value + 1e-12


def test_grid_point_budget():
    region = ReducedRegion([simplex(*([0.2] * 5))])
    with pytest.raises(CapabilityError):
        min_quad_over_omega(np.eye(5), region, 2.0 ** -9)
