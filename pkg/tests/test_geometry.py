import numpy as np
import pytest

from detclust import (
    CenterSet,
    ClusteringParams,
    ExtendedPointSet,
    InputError,
    Partition,
    WeightedPointSet,
    partition_cost,
    power_cost,
    power_triangle_bound,
    solve_1center,
    solve_1center_constrained,
    tree_sum,
)
from detclust.geometry import center_grid, min_power_dists

from oracles import grid_search_1center, naive_power_cost


def test_tree_sum_matches_math_fsum():
    import math

    rng = np.random.default_rng(0)
    for n in [1, 2, 3, 7, 64, 1000]:
        a = rng.normal(size=n) * 10.0**rng.integers(-3, 3, size=n)
        assert tree_sum(a) == pytest.approx(math.fsum(a), rel=1e-14)
    assert tree_sum([]) == 0.0


def test_types_validate():
    with pytest.raises(InputError):
        WeightedPointSet(np.empty((0, 2)))
    with pytest.raises(InputError):
        WeightedPointSet([[0.0, np.nan]])
    with pytest.raises(InputError):
        WeightedPointSet([[0.0, 1.0]], weights=[-1.0])
    with pytest.raises(InputError):
        ExtendedPointSet([[0.0]], extensions=[-0.5])
    with pytest.raises(InputError):
        CenterSet([[0.0], [1.0]], budget=1)
    with pytest.raises(InputError):
        Partition(np.array([0, 2]), k=2)
    with pytest.raises(InputError):
        ClusteringParams(k=1, z=1, epsilon=0.5)
    with pytest.raises(InputError):
        ClusteringParams(k=0, z=1, epsilon=0.1)


def test_power_cost_grid_example():
    # 10-point uniform grid on [0,1], one center at 0.5, z=2
    pts = np.linspace(0.0, 1.0, 10)[:, None]
    got = power_cost(pts, np.array([[0.5]]), 2)
    want = naive_power_cost(pts, [[0.5]], 2)
    assert got == pytest.approx(want, rel=1e-12)


def test_power_cost_matches_naive_oracle():
    rng = np.random.default_rng(1)
    for _ in range(25):
        n = int(rng.integers(1, 30))
        d = int(rng.integers(1, 4))
        m = int(rng.integers(1, 5))
        z = int(rng.integers(1, 5))
        pts = rng.normal(size=(n, d)) * 3
        w = rng.uniform(0.1, 2.0, size=n)
        cts = rng.normal(size=(m, d)) * 3
        got = power_cost(WeightedPointSet(pts, w), cts, z)
        want = naive_power_cost(pts, cts, z, w)
        assert got == pytest.approx(want, rel=1e-11)


def test_power_cost_permutation_invariant_bit_exact():
    rng = np.random.default_rng(2)
    pts = rng.normal(size=(40, 3))
    w = rng.uniform(0.5, 2.0, size=40)
    cts = rng.normal(size=(3, 3))
    base = power_cost(WeightedPointSet(pts, w), cts, 2)
    for seed in range(5):
        rng_p = np.random.default_rng(seed)
        perm = rng_p.permutation(40)
        cperm = rng_p.permutation(3)
        again = power_cost(WeightedPointSet(pts[perm], w[perm]), cts[cperm], 2)
        assert again == base  # bit-exact


def test_power_cost_zero_weights_and_dim_mismatch():
    pts = np.array([[0.0, 0.0], [1.0, 1.0]])
    assert power_cost(WeightedPointSet(pts, np.zeros(2)), [[5.0, 5.0]], 2) == 0.0
    with pytest.raises(InputError):
        power_cost(pts, [[1.0]], 2)


def test_min_power_dists_tie_breaks_to_lowest_index():
    pts = np.array([[0.0, 0.0]])
    cts = np.array([[1.0, 0.0], [-1.0, 0.0]])  # equidistant
    _, idx = min_power_dists(pts, cts, 2)
    assert idx[0] == 0


def test_solve_1center_mean_for_z2():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = int(rng.integers(1, 20))
        d = int(rng.integers(1, 5))
        pts = rng.normal(size=(n, d))
        w = rng.uniform(0.1, 3.0, size=n)
        c = solve_1center(WeightedPointSet(pts, w), 2)
        want = np.average(pts, axis=0, weights=w)
        assert np.allclose(c, want, rtol=0, atol=1e-12 * (1 + np.abs(want).max()))


def test_solve_1center_median_majority_point():
    # Weight-2 point at the origin dominates: the geometric median is there.
    pts = np.array([[0.0, 0.0], [0.0, 0.0], [10.0, 0.0]])
    c, info = solve_1center(pts, 1, full_output=True)
    assert info["converged"]
    assert np.allclose(c, [0.0, 0.0], atol=1e-9)


def test_solve_1center_median_vs_grid_oracle():
    rng = np.random.default_rng(4)
    for _ in range(10):
        pts = rng.uniform(-1, 1, size=(6, 2))
        c, info = solve_1center(pts, 1, full_output=True)
        assert info["converged"]
        got = naive_power_cost(pts, [c], 1)
        _, ref = grid_search_1center(pts, 1)
        assert got <= ref * (1 + 1e-6)


def test_solve_1center_high_z_descends():
    rng = np.random.default_rng(5)
    for z in (3, 4):
        pts = rng.normal(size=(12, 3))
        c = solve_1center(pts, z)
        obj = naive_power_cost(pts, [c], z)
        # optimum is no worse than the best input point or the mean
        cands = [naive_power_cost(pts, [p], z) for p in pts]
        cands.append(naive_power_cost(pts, [pts.mean(axis=0)], z))
        assert obj <= min(cands) + 1e-9 * min(cands)


def test_solve_1center_identical_points():
    pts = np.full((4, 2), 7.25)
    for z in (1, 2, 3):
        c = solve_1center(pts, z)
        assert np.allclose(c, [7.25, 7.25], atol=0)


def test_constrained_center_symmetric_pair():
    # base {-1, +1} with unit extensions, z=1: optimum at 0, cost 2*sqrt(2)
    E = ExtendedPointSet([[-1.0], [1.0]], extensions=[1.0, 1.0])
    c = solve_1center_constrained(E, 1)
    assert abs(c[0]) < 1e-8
    cost = sum(np.sqrt((b - c[0]) ** 2 + 1.0) for b in (-1.0, 1.0))
    assert cost == pytest.approx(2 * np.sqrt(2.0), abs=1e-8)


def test_constrained_center_z2_is_base_mean():
    rng = np.random.default_rng(6)
    base = rng.normal(size=(9, 3))
    ext = rng.uniform(0, 2, size=9)
    w = rng.uniform(0.5, 2, size=9)
    E = ExtendedPointSet(base, extensions=ext, weights=w)
    c = solve_1center_constrained(E, 2)
    assert np.allclose(c, np.average(base, axis=0, weights=w), atol=1e-12)


def test_constrained_reduces_to_plain_when_ext_zero():
    rng = np.random.default_rng(7)
    base = rng.normal(size=(8, 2))
    E = ExtendedPointSet(base, extensions=np.zeros(8))
    for z in (1, 2, 3):
        c1 = solve_1center_constrained(E, z)
        c2 = solve_1center(base, z)
        assert np.allclose(c1, c2, atol=1e-9)


def test_partition_cost_weighted_equals_duplicated():
    # integer weights = duplicated points, exactly
    pts = np.array([[0.0, 0.0], [2.0, 0.0], [5.0, 1.0]])
    w = np.array([3.0, 1.0, 2.0])
    dup = np.repeat(pts, [3, 1, 2], axis=0)
    a_w = np.array([0, 0, 1])
    a_dup = np.array([0, 0, 0, 0, 1, 1])
    for z in (1, 2):
        got = partition_cost(WeightedPointSet(pts, w), Partition(a_w, 2), z)
        want = partition_cost(dup, Partition(a_dup, 2), z)
        assert got == pytest.approx(want, rel=1e-9)


def test_partition_cost_full_output_flags():
    pts = np.random.default_rng(8).normal(size=(6, 2))
    total, info = partition_cost(pts, np.zeros(6, dtype=int), 1, full_output=True)
    assert info["converged"]
    assert total == pytest.approx(sum(info["part_costs"]))
    # starving the solver flags, does not raise
    total2, info2 = partition_cost(
        pts, np.zeros(6, dtype=int), 1, max_iter=1, full_output=True
    )
    assert not info2["converged"]
    assert info2["residuals"][0] > 0


def test_power_triangle_bounds_random_triples():
    rng = np.random.default_rng(9)
    pts = rng.normal(size=(500, 3, 2))
    d_ab = np.sqrt(((pts[:, 0] - pts[:, 1]) ** 2).sum(axis=1))
    d_ac = np.sqrt(((pts[:, 0] - pts[:, 2]) ** 2).sum(axis=1))
    d_bc = np.sqrt(((pts[:, 1] - pts[:, 2]) ** 2).sum(axis=1))
    for z in (1, 2, 3, 4):
        for eps in (0.05, 0.1, 0.3, 1.0):
            sb, db = power_triangle_bound(d_ab, d_ac, d_bc, z, eps)
            assert (d_ab**z <= sb * (1 + 1e-12) + 1e-12).all()
            assert (np.abs(d_ab**z - d_ac**z) <= db * (1 + 1e-12) + 1e-12).all()


def test_power_triangle_degenerate_triples():
    # b = c: second term vanishes, bounds stay valid
    for z in (1, 2, 4):
        sb, db = power_triangle_bound(3.0, 3.0, 0.0, z, 0.1)
        assert 3.0**z <= sb + 1e-12
        assert db >= 0
    with pytest.raises(InputError):
        power_triangle_bound(1.0, 1.0, 1.0, 1, 0.0)
    with pytest.raises(InputError):
        power_triangle_bound(-1.0, 1.0, 1.0, 1, 0.1)


def test_center_grid_shape_and_determinism():
    pts = np.random.default_rng(10).normal(size=(20, 2))
    g1 = center_grid(pts, per_axis=4)
    g2 = center_grid(pts, per_axis=4)
    assert g1.shape == (16, 2)
    assert (g1 == g2).all()
    g3 = center_grid(pts, per_axis=3, include_points=True)
    assert g3.shape == (9 + 20, 2)
