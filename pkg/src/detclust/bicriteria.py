"""Deterministic bicriteria solver for (k, z)-clustering.

Low dimension: farthest-point seeding, single-swap local search over a
lattice candidate family, then greedy center augmentation (more than k
centers are allowed; the payoff is near-optimal cost). High dimension:
solve inside seeded sign-matrix projections and lift the best solution back.

All tie-breaks are index-lexicographic and every run is bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .geometry import (
    CenterSet,
    _coerce_centers,
    _coerce_pointset,
    _power_from_sq,
    power_cost,
    solve_1center,
    solve_1center_constrained,
    ExtendedPointSet,
)
from .linmap import LinearMap

_EVAL_CHUNK = 1 << 22

DEFAULT_ALPHA = 50.0
DEFAULT_MAX_CANDIDATES = 50_000
DEFAULT_DIM_THRESHOLD = 20
DEFAULT_PROJECTION_SEEDS = 16


@dataclass(frozen=True)
class CandidateCenters:
    """Finite candidate family: all input points plus lattice ball covers.

    provenance_point[i] is the index of the input point whose ball generated
    candidate i; provenance_level[i] is the radius level (LEVEL_INPUT for the
    mandatory copies of the input points). spacing_scale records the
    power-of-two thinning factor applied to fit the candidate budget.
    """

    points: np.ndarray
    provenance_point: np.ndarray
    provenance_level: np.ndarray
    spacing_scale: int = 1

    LEVEL_INPUT = np.iinfo(np.int64).min

    @property
    def size(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class BicriteriaResult:
    centers: CenterSet
    cost: float
    stopped_reason: str  # "no-improving-center" | "low-cost"
    alpha_used: float
    projection_seed: int = None
    baseline_size: int = 0  # |S0| the augmentation started from


def _splitmix64(x):
    """Finalizer of splitmix64; vectorized over uint64 arrays."""
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def seeded_projection_family(d, m, seed, seed_bits=16):
    """Member `seed` of a deterministic family of sign-matrix projections.

    Entries are +-1/sqrt(m), the sign being bit 63 of a counter-based
    splitmix64 stream keyed by the seed. Same (d, m, seed) always yields the
    same matrix, on any platform.
    """
    if not (isinstance(m, (int, np.integer)) and m >= 1):
        raise InputError("m must be an integer >= 1")
    if not (isinstance(d, (int, np.integer)) and d >= 1):
        raise InputError("d must be an integer >= 1")
    if not (0 <= seed < (1 << seed_bits)):
        raise InputError(f"seed must lie in [0, 2^{seed_bits})")
    idx = np.arange(m * d, dtype=np.uint64)
    with np.errstate(over="ignore"):  # modular uint64 arithmetic is the point
        key = np.uint64(seed) * np.uint64(0x9E3779B97F4A7C15) + np.uint64(
            0x243F6A8885A308D3
        )
        bits = _splitmix64(key ^ _splitmix64(idx + np.uint64(1)))
    signs = np.where((bits >> np.uint64(63)) & np.uint64(1), 1.0, -1.0)
    matrix = signs.reshape(m, d) / np.sqrt(float(m))
    return LinearMap(matrix)


# ---------------- candidate family ----------------


def _quant_keys(points, quantum):
    q = np.round(points / quantum).astype(np.int64)
    return [tuple(row) for row in q]


def ball_lattice(center, radius, spacing):
    """Origin-anchored lattice of the given spacing, trimmed to the ball.

    Together with the ball's own center this is a (spacing * sqrt(d))-cover
    of B(center, radius): any target in the ball has a kept lattice point
    within spacing * sqrt(d) (boundary targets may lose their nearest cell
    to trimming, but a cell nearer the center survives).
    """
    p = np.asarray(center, dtype=np.float64)
    if radius < 0 or spacing <= 0:
        raise InputError("need radius >= 0 and spacing > 0")
    los = np.ceil((p - radius) / spacing).astype(np.int64)
    his = np.floor((p + radius) / spacing).astype(np.int64)
    if (his < los).any():
        return np.empty((0, p.shape[0]))
    axes = [np.arange(los[j], his[j] + 1) for j in range(p.shape[0])]
    mesh = np.meshgrid(*axes, indexing="ij")
    cand = np.stack([m.ravel() for m in mesh], axis=1) * spacing
    keep = ((cand - p) ** 2).sum(axis=1) <= radius * radius * (1.0 + 1e-12)
    return cand[keep]


def candidate_centers(
    P,
    params,
    anchor,
    *,
    alpha=DEFAULT_ALPHA,
    max_candidates=DEFAULT_MAX_CANDIDATES,
    zero_last_coord=False,
):
    """Candidate centers around an anchor solution.

    For each input point p and radius level i in [log2(eps/(alpha z)),
    log2(n/alpha)] (rounded outward), take the axis-aligned lattice with
    spacing (eps/z) * r_i / sqrt(d) inside B(p, r_i), r_i = 2^(i/z) *
    Delta^(1/z), Delta the anchor's average cost. Every input point is always
    a candidate. If the lattice estimate exceeds max_candidates the spacing
    is doubled (deterministically) until it fits; spacing_scale records the
    factor. Duplicates are merged by coordinate quantization, first
    generator wins.

    zero_last_coord restricts candidates to the slice {last coordinate = 0}
    (balls are intersected with the slice; input points are projected).
    """
    pts, w = _coerce_pointset(P)
    anchor_c = _coerce_centers(anchor)
    n, d = pts.shape
    z, eps = params.z, params.epsilon

    if zero_last_coord:
        base = pts[:, :-1]
        lift_ext = pts[:, -1]
        lat_dim = d - 1
        if lat_dim == 0:
            raise InputError("zero_last_coord needs dimension >= 2")
    else:
        base = pts
        lift_ext = np.zeros(n)
        lat_dim = d

    def _with_slice(x):
        if not zero_last_coord:
            return x
        return np.hstack([x, np.zeros((x.shape[0], 1))])

    total_w = float(w.sum())
    delta = power_cost((pts, w), anchor_c, z) / total_w if total_w > 0 else 0.0

    points_out = []
    prov_point = []
    prov_level = []
    seen = {}
    scale_ref = max(1.0, float(np.abs(pts).max()))
    quantum = 1e-9 * scale_ref

    def _push(arr, pidx, level):
        for row, key in zip(arr, _quant_keys(arr, quantum)):
            if key not in seen:
                seen[key] = True
                points_out.append(row)
                prov_point.append(pidx)
                prov_level.append(level)

    inputs = _with_slice(base)
    for i in range(n):
        _push(inputs[i : i + 1], i, CandidateCenters.LEVEL_INPUT)

    spacing_scale = 1
    if delta > 0:
        lo = int(np.floor(np.log2(eps / (alpha * z))))
        hi = int(np.ceil(np.log2(max(n, 1) / alpha)))
        levels = list(range(lo, hi + 1)) if hi >= lo else []
        radii = [2.0 ** (i / z) * delta ** (1.0 / z) for i in levels]

        def _estimate(scale):
            total = 0.0
            for r in radii:
                s = (eps / z) * r / np.sqrt(lat_dim) * scale
                # slice mode: the ball only reaches the slice where r >= ext
                eff = np.sqrt(np.maximum(0.0, r * r - lift_ext**2))
                per_axis = (
                    np.floor(base / s + eff[:, None] / s)
                    - np.ceil(base / s - eff[:, None] / s)
                    + 1.0
                )
                cells = np.prod(np.maximum(per_axis, 0.0), axis=1)
                total += float(np.minimum(cells, 1e18).sum())
                if total > 1e17:
                    return total
            return total

        while _estimate(spacing_scale) > max_candidates and spacing_scale < (1 << 40):
            spacing_scale *= 2

        for level, r in zip(levels, radii):
            s = (eps / z) * r / np.sqrt(lat_dim) * spacing_scale
            eff_sq = r * r - lift_ext**2
            for pidx in range(n):
                if eff_sq[pidx] < 0:
                    continue
                cand = ball_lattice(base[pidx], np.sqrt(eff_sq[pidx]), s)
                _push(_with_slice(cand), pidx, level)

    return CandidateCenters(
        points=np.array(points_out),
        provenance_point=np.array(prov_point, dtype=np.int64),
        provenance_level=np.array(prov_level, dtype=np.int64),
        spacing_scale=spacing_scale,
    )


# ---------------- evaluation helpers ----------------


def _power_table(cand_pts, pts, w, z):
    """(C, n) table of w_p * ||c - p||^z, chunked over candidates."""
    C = cand_pts.shape[0]
    n = pts.shape[0]
    out = np.empty((C, n))
    rows = max(1, int(_EVAL_CHUNK // max(1, n * pts.shape[1])))
    for i in range(0, C, rows):
        diff = cand_pts[i : i + rows, None, :] - pts[None, :, :]
        sq = np.einsum("ijk,ijk->ij", diff, diff, optimize=False)
        out[i : i + rows] = _power_from_sq(sq, z) * w[None, :]
    return out


def _serve_costs(centers, pts, w, z):
    """(n,) weighted cost of serving each point by its nearest center."""
    tbl = _power_table(np.atleast_2d(centers), pts, w, z)
    return tbl.min(axis=0)


def _scores_all(PC, cur):
    """sum_p min(cur_p, PC[c, p]) for every candidate row c, chunked."""
    C, n = PC.shape
    out = np.empty(C)
    rows = max(1, int(_EVAL_CHUNK // max(1, n)))
    for i in range(0, C, rows):
        out[i : i + rows] = np.minimum(PC[i : i + rows], cur[None, :]).sum(axis=1)
    return out


# ---------------- constant factor ----------------


def _gonzalez_seeds(pts, k, slice_mode=False):
    """Farthest-point traversal from index 0, ties to the lowest index.

    In slice mode the chosen points are projected to the zero slice before
    being used as centers (distances are still measured to the raw points).
    """
    n = pts.shape[0]
    seeds = [0]
    raw = pts
    d2 = ((raw - raw[0]) ** 2).sum(axis=1)
    while len(seeds) < min(k, n):
        nxt = int(np.argmax(d2))  # first occurrence = lowest index
        seeds.append(nxt)
        d2 = np.minimum(d2, ((raw - raw[nxt]) ** 2).sum(axis=1))
    chosen = pts[seeds].copy()
    if slice_mode:
        chosen[:, -1] = 0.0
    return chosen


def constant_factor_approx(
    P,
    params,
    *,
    candidates=None,
    alpha=DEFAULT_ALPHA,
    max_candidates=DEFAULT_MAX_CANDIDATES,
    swap_rounds=100,
    zero_last_coord=False,
):
    """Deterministic k centers at constant-factor cost.

    Gonzalez farthest-point seeding followed by single-swap local search over
    the candidate family, accepting swaps while they improve the cost by a
    factor (1 - 1/(100 k)). Returns the k centers; fewer than k input points
    means every point becomes a center.
    """
    pts, w = _coerce_pointset(P)
    k, z = params.k, params.z
    n = pts.shape[0]
    if n < k:
        out = pts.copy()
        if zero_last_coord:
            out[:, -1] = 0.0
        return CenterSet(out)

    centers = _gonzalez_seeds(pts, k, slice_mode=zero_last_coord)
    if candidates is None:
        candidates = candidate_centers(
            P,
            params,
            centers,
            alpha=alpha,
            max_candidates=max_candidates,
            zero_last_coord=zero_last_coord,
        )
    cand = candidates.points
    PC = _power_table(cand, pts, w, z)
    ctr_tbl = _power_table(centers, pts, w, z)  # (k, n)
    cost = float(ctr_tbl.min(axis=0).sum())

    for _ in range(swap_rounds):
        if cost == 0.0:
            break
        best = (cost, -1, -1)  # (new_cost, swap position, candidate)
        for j in range(ctr_tbl.shape[0]):
            rest = np.delete(ctr_tbl, j, axis=0).min(axis=0) if ctr_tbl.shape[0] > 1 else np.full(n, np.inf)
            scores = _scores_all(PC, rest)
            cbest = int(np.argmin(scores))
            if scores[cbest] < best[0]:
                best = (float(scores[cbest]), j, cbest)
        new_cost, j, cidx = best
        if j < 0 or new_cost > (1.0 - 1.0 / (100.0 * k)) * cost:
            break
        centers[j] = cand[cidx]
        ctr_tbl[j] = PC[cidx]
        cost = new_cost

    return CenterSet(centers)


# ---------------- greedy augmentation ----------------


def greedy_augment(P, S0, candidates, params, *, alpha=DEFAULT_ALPHA, full_output=False):
    """Greedily add candidate centers while each helps enough.

    Repeatedly adds the candidate with the largest cost decrease as long as
    the new cost is at most (1 - eps/(alpha k)) times the current one; stops
    with "no-improving-center" otherwise, or with "low-cost" once the cost
    falls to (eps/alpha) * cost(S0). Candidate ties break to the lowest
    index. Gains are tracked incrementally and exactly.

    full_output also returns the cost history, cost(S0) first.
    """
    pts, w = _coerce_pointset(P)
    k, z, eps = params.k, params.z, params.epsilon
    S0c = _coerce_centers(S0)
    cand = candidates.points if isinstance(candidates, CandidateCenters) else np.asarray(candidates)

    cur = _serve_costs(S0c, pts, w, z)
    cost0 = float(cur.sum())
    cost = cost0
    low_threshold = (eps / alpha) * cost0
    accept_factor = 1.0 - eps / (alpha * k)

    PC = _power_table(cand, pts, w, z)
    decrease = cost - _scores_all(PC, cur)
    np.maximum(decrease, 0.0, out=decrease)

    chosen = []
    history = [cost]
    reason = "no-improving-center"
    while True:
        if cost <= low_threshold:
            reason = "low-cost"
            break
        j = int(np.argmax(decrease))
        new_cost = cost - float(decrease[j])
        if decrease[j] <= 0.0 or new_cost > accept_factor * cost:
            reason = "no-improving-center"
            break
        chosen.append(j)
        newly = PC[j] < cur
        if newly.any():
            idx = np.flatnonzero(newly)
            old = cur[idx]
            new = PC[j, idx]
            # decrease_c -= sum_{p in idx} [max(0,old-PC) - max(0,new-PC)]
            delta_tbl = np.maximum(PC[:, idx] - new[None, :], 0.0) - np.maximum(
                PC[:, idx] - old[None, :], 0.0
            )
            decrease += delta_tbl.sum(axis=1) - (old - new).sum()
            np.maximum(decrease, 0.0, out=decrease)
            cur[idx] = new
        decrease[j] = 0.0
        cost = new_cost
        history.append(cost)

    centers = np.vstack([S0c, cand[chosen]]) if chosen else S0c.copy()
    res = BicriteriaResult(
        centers=CenterSet(centers),
        cost=cost,
        stopped_reason=reason,
        alpha_used=alpha,
        baseline_size=S0c.shape[0],
    )
    return (res, history) if full_output else res


# ---------------- full bicriteria ----------------


def _measure_alpha(cost_S0, alpha_cap, oracle_opt):
    if oracle_opt is None or oracle_opt <= 0:
        return alpha_cap
    return float(min(alpha_cap, max(1.0, cost_S0 / oracle_opt)))


def _bicriteria_lowdim(P, params, alpha_cap, max_candidates, oracle_opt, zero_last_coord):
    pts, w = _coerce_pointset(P)
    S0 = constant_factor_approx(
        P,
        params,
        alpha=alpha_cap,
        max_candidates=max_candidates,
        zero_last_coord=zero_last_coord,
    )
    cost_S0 = power_cost((pts, w), S0, params.z)
    alpha = _measure_alpha(cost_S0, alpha_cap, oracle_opt)
    cands = candidate_centers(
        P,
        params,
        S0,
        alpha=alpha,
        max_candidates=max_candidates,
        zero_last_coord=zero_last_coord,
    )
    res = greedy_augment(P, S0, cands, params, alpha=alpha)
    return res


def assign_to_centers(pts, centers):
    """Nearest-center labels, ties to the lowest center index."""
    diff_sq = np.empty((pts.shape[0], centers.shape[0]))
    for j in range(centers.shape[0]):
        diff_sq[:, j] = ((pts - centers[j]) ** 2).sum(axis=1)
    return np.argmin(diff_sq, axis=1)


def lift_by_clusters(P, labels, z, *, slice_mode=False):
    """Per-cluster optimal centers in the original space.

    slice_mode treats the last coordinate as an extension and solves the
    constrained 1-center on the base coordinates (center extension 0).
    """
    pts, w = _coerce_pointset(P)
    out = []
    for lbl in np.unique(labels):
        idx = np.flatnonzero(labels == lbl)
        if slice_mode:
            E = ExtendedPointSet(pts[idx, :-1], extensions=pts[idx, -1], weights=w[idx])
            c = solve_1center_constrained(E, z)
            out.append(np.append(c, 0.0))
        else:
            out.append(solve_1center((pts[idx], w[idx]), z))
    return np.array(out)


def bicriteria(
    P,
    params,
    *,
    alpha=DEFAULT_ALPHA,
    max_candidates=DEFAULT_MAX_CANDIDATES,
    dim_threshold=DEFAULT_DIM_THRESHOLD,
    projection_seeds=DEFAULT_PROJECTION_SEEDS,
    projection_dim=None,
    oracle_opt=None,
    zero_last_coord=False,
):
    """Bicriteria solution: more than k centers, near-optimal cost.

    Dimension at most dim_threshold: constant-factor seeds, lattice
    candidates, greedy augmentation. Above it: scan sign-matrix projection
    seeds, solve in each projected space, lift every solution back via
    per-cluster 1-centers, and keep the (cost, seed)-lexicographic best.
    """
    pts, w = _coerce_pointset(P)
    d = pts.shape[1]
    if d <= dim_threshold:
        return _bicriteria_lowdim(
            P, params, alpha, max_candidates, oracle_opt, zero_last_coord
        )

    base_dim = d - 1 if zero_last_coord else d
    m = projection_dim if projection_dim is not None else min(base_dim, dim_threshold - (1 if zero_last_coord else 0))
    best = None
    for seed in range(projection_seeds):
        lin = seeded_projection_family(base_dim, m, seed)
        if zero_last_coord:
            proj = np.hstack([lin.apply(pts[:, :-1]), pts[:, -1:]])
        else:
            proj = lin.apply(pts)
        res = _bicriteria_lowdim(
            (proj, w), params, alpha, max_candidates, oracle_opt, zero_last_coord
        )
        labels = assign_to_centers(proj, res.centers.centers)
        lifted = lift_by_clusters((pts, w), labels, params.z, slice_mode=zero_last_coord)
        cost = power_cost((pts, w), lifted, params.z)
        if best is None or cost < best[0]:
            best = (cost, seed, lifted, res)
    cost, seed, lifted, res = best
    return BicriteriaResult(
        centers=CenterSet(lifted),
        cost=cost,
        stopped_reason=res.stopped_reason,
        alpha_used=res.alpha_used,
        projection_seed=seed,
        baseline_size=res.baseline_size,
    )
