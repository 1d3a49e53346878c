"""Exact, near-optimal, and polished constant-factor (k, z) solvers.

exact_solve enumerates every clustering of the input (restricted-growth
strings) and is the oracle the rest of the package is tested against.
approx_solve runs the dimension-reduced coreset pipeline and enumerates
clusterings of the coreset instead, lifting the winner back to the
original space; when the coreset is still too large to enumerate it falls
back to the polished k-center solver and says so.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .bicriteria import constant_factor_approx
from .dimreduce import (
    DEFAULT_JL_C,
    DEFAULT_MAX_COVER_STEPS,
    DEFAULT_MAX_SEEDS,
    DEFAULT_MAX_SUBSETS,
)
from .errors import BudgetError, InputError
from .geometry import (
    CenterSet,
    ExtendedPointSet,
    Partition,
    _coerce_pointset,
    _power_from_sq,
    min_power_dists,
    power_cost,
    solve_1center,
    solve_1center_constrained,
)
from .rings import (
    DEFAULT_ALPHA,
    DEFAULT_RING_CANDIDATES,
    PASSTHROUGH_DIM,
    RangeTestConfig,
    euclidean_pipeline,
)

ENUM_MAX_N = 14
ENUM_MAX_K = 4
DEFAULT_POLISH_ROUNDS = 50
DEFAULT_SUBSET_CAP = 256


@dataclass(frozen=True)
class SolveResult:
    """A k-center solution in the original space.

    cost is always the full power_cost recomputation against the input,
    never an intermediate objective. enumeration_stats counts partitions
    examined (exact, ptas) or initializations polished (bicriteria).
    downgraded marks an approx_solve that had to fall back.
    """

    centers: CenterSet
    cost: float
    method: str  # "exact" | "ptas" | "bicriteria"
    enumeration_stats: int
    downgraded: bool = False


def partition_count(n, k):
    """Number of partitions of n items into at most k nonempty parts."""
    S = [0] * (k + 1)
    S[0] = 1
    for _ in range(n):
        new = [0] * (k + 1)
        for j in range(1, k + 1):
            new[j] = j * S[j] + S[j - 1]
        S = new
    return sum(S[1:])


def enumerate_partitions(n, k):
    """All partitions of n items into at most k nonempty parts.

    Yields Partition objects in lexicographic restricted-growth-string
    order, each exactly once. Hard budget n <= 14, k <= 4; past it the
    error carries the requested and allowed partition counts.
    """
    if n < 1 or k < 1:
        raise InputError("need n >= 1 items and k >= 1 parts")
    if n > ENUM_MAX_N or k > ENUM_MAX_K:
        raise BudgetError(
            f"partition enumeration capped at n <= {ENUM_MAX_N}, "
            f"k <= {ENUM_MAX_K}",
            required=partition_count(n, min(k, n)),
            allowed=partition_count(ENUM_MAX_N, ENUM_MAX_K),
        )

    def gen():
        a = [0] * n

        def rec(i, mx):
            if i == n:
                yield Partition(np.array(a, dtype=np.int64), k)
                return
            for v in range(min(mx + 1, k - 1) + 1):
                a[i] = v
                yield from rec(i + 1, max(mx, v))

        yield from rec(1, 0)

    return gen()


def _cached_part(cache, base, ext, w, z, idx):
    """(cost, center) of one part, memoized on the index bitmask."""
    mask = 0
    for i in idx:
        mask |= 1 << int(i)
    hit = cache.get(mask)
    if hit is None:
        if ext is None:
            c = solve_1center((base[idx], w[idx]), z)
            sq = ((base[idx] - c) ** 2).sum(axis=1)
        else:
            E = ExtendedPointSet(base[idx], ext[idx], weights=w[idx])
            c = solve_1center_constrained(E, z)
            sq = ((base[idx] - c) ** 2).sum(axis=1) + ext[idx] ** 2
        cost = float((w[idx] * _power_from_sq(sq, z)).sum())
        hit = (cost, c)
        cache[mask] = hit
    return hit


_MASK_CHUNK = 2048


def _all_subset_costs(base, ext, w, z):
    """1-center cost of every index subset at once, indexed by bitmask.

    Supports z in {1, 2} (closed form and smoothed Weiszfeld batched over
    masks); the tiny smoothing floor perturbs costs far below the ranking
    gaps the enumeration cares about. Returns None for other z.
    """
    if z not in (1, 2):
        return None
    n = base.shape[0]
    ext_sq = ext**2 if ext is not None else np.zeros(n)
    M = 1 << n
    costs = np.zeros(M)
    bits = np.arange(n, dtype=np.int64)
    diam = float(np.sqrt(((base.max(0) - base.min(0)) ** 2).sum())) if n else 0.0
    scale = max(diam, float(np.sqrt(ext_sq.max())) if n else 0.0)
    if z == 1:
        # the 1-median can sit exactly on a data point, where Weiszfeld
        # stalls; centers at the points themselves give an exact candidate
        pd = base[:, None, :] - base[None, :, :]
        D = np.sqrt(
            np.einsum("jid,jid->ji", pd, pd, optimize=False) + ext_sq[:, None]
        )
    for lo in range(1, M, _MASK_CHUNK):
        hi = min(lo + _MASK_CHUNK, M)
        ids = np.arange(lo, hi, dtype=np.int64)
        B = ((ids[:, None] >> bits) & 1).astype(np.float64)
        W = B * w
        tw = W.sum(axis=1)
        tw_safe = np.where(tw > 0.0, tw, 1.0)
        c = np.einsum("mi,id->md", W, base, optimize=False) / tw_safe[:, None]
        if z == 2:
            diff = base[None, :, :] - c[:, None, :]
            sq = np.einsum("mid,mid->mi", diff, diff, optimize=False)
            costs[lo:hi] = np.einsum(
                "mi,mi->m", W, sq + ext_sq[None, :], optimize=False
            )
            continue
        if scale == 0.0:
            costs[lo:hi] = np.einsum(
                "mi,i->m", W, np.sqrt(ext_sq), optimize=False
            )
            continue
        floor = 1e-12 * scale

        def _iterate(Wm, cm, rounds):
            for _ in range(rounds):
                diff = base[None, :, :] - cm[:, None, :]
                sq = np.einsum("mid,mid->mi", diff, diff, optimize=False)
                delta = np.maximum(np.sqrt(sq + ext_sq[None, :]), floor)
                coef = Wm / delta
                den = coef.sum(axis=1)
                den = np.where(den > 0.0, den, 1.0)
                c_new = np.einsum("mi,id->md", coef, base, optimize=False)
                c_new /= den[:, None]
                step = float(np.abs(c_new - cm).max())
                cm = c_new
                if step < 1e-13 * scale:
                    break
            return cm

        def _certify(Wm, cm, PCm):
            # a mask is certified when the iterate's gradient norm times
            # the hull diameter bounds its gap to the optimum, or when the
            # cheapest member point passes the subgradient optimality test
            # (then the snapped point cost is exact)
            diff = base[None, :, :] - cm[:, None, :]
            sq = np.einsum("mid,mid->mi", diff, diff, optimize=False)
            d_true = np.sqrt(sq + ext_sq[None, :])
            wcost = np.einsum("mi,mi->m", Wm, d_true, optimize=False)
            v = np.minimum(wcost, PCm.min(axis=1))
            coef = Wm / np.maximum(d_true, floor)
            g = cm * coef.sum(axis=1)[:, None]
            g -= np.einsum("mi,id->md", coef, base, optimize=False)
            gn = np.sqrt((g**2).sum(axis=1))
            ok = gn * diam <= 1e-10 * scale * float(w.sum())
            j = np.argmin(np.where(Wm > 0.0, PCm, np.inf), axis=1)
            Dq = D[:, j].T
            atq = Dq < 1e-12 * scale
            coefq = np.where(atq, 0.0, Wm / np.maximum(Dq, floor))
            gq = base[j] * coefq.sum(axis=1)[:, None]
            gq -= np.einsum("mi,id->md", coefq, base, optimize=False)
            w_at = np.where(atq, Wm, 0.0).sum(axis=1)
            ok |= np.sqrt((gq**2).sum(axis=1)) <= w_at
            return v, ok

        c = _iterate(W, c, 120)
        PC = np.einsum("mj,ji->mi", W, D, optimize=False)
        v, ok = _certify(W, c, PC)
        costs[lo:hi] = v
        bad = ~ok
        if not bad.any():
            continue
        # slow masks get a much longer batched run, and whatever is still
        # uncertified after that (flat-valley medians) goes to the
        # canonical per-part solver
        c2 = _iterate(W[bad], c[bad], 3000)
        v2, ok2 = _certify(W[bad], c2, PC[bad])
        costs[lo:hi][bad] = np.minimum(v[bad], v2)
        for m in ids[bad][~ok2]:
            idx = np.flatnonzero((int(m) >> bits) & 1)
            if ext is None:
                ctr = solve_1center((base[idx], w[idx]), 1)
                d_i = np.sqrt(((base[idx] - ctr) ** 2).sum(axis=1))
            else:
                E = ExtendedPointSet(base[idx], ext[idx], weights=w[idx])
                ctr = solve_1center_constrained(E, 1)
                d_i = np.sqrt(
                    ((base[idx] - ctr) ** 2).sum(axis=1) + ext_sq[idx]
                )
            costs[m] = min(costs[m], float((w[idx] * d_i).sum()))
    return costs


_RERANK_WIDTH = 16


def _best_partition(n, k, base, ext, w, z):
    """Scan all partitions; winner is lexicographic by (cost, rank).

    With a batched cost table the scan keeps the leading candidates and
    re-ranks them through the canonical per-part solver, so the table's
    iterative noise cannot flip a near-tie.
    """
    table = _all_subset_costs(base, ext, w, z)
    cache = {}
    keep = _RERANK_WIDTH if table is not None else 1
    kept = []  # (total, rank, part), rank ascending within equal totals
    cutoff = math.inf
    examined = 0
    for part in enumerate_partitions(n, k):
        examined += 1
        total = 0.0
        for _, idx in part.parts():
            if table is not None:
                mask = int(np.bitwise_or.reduce(np.int64(1) << idx))
                total += table[mask]
            else:
                total += _cached_part(cache, base, ext, w, z, idx)[0]
            if total >= cutoff:
                break
        if total < cutoff:
            kept.append((total, examined, part))
            if len(kept) > keep:
                kept.sort(key=lambda t: (t[0], t[1]))
                kept = kept[:keep]
                cutoff = kept[-1][0]
    # the canonical per-part solver re-ranks the survivors
    rescored = []
    for _, rank, part in kept:
        total = 0.0
        for _, idx in part.parts():
            total += _cached_part(cache, base, ext, w, z, idx)[0]
        rescored.append((total, rank, part))
    _, _, best_part = min(rescored, key=lambda t: (t[0], t[1]))
    centers = [
        _cached_part(cache, base, ext, w, z, idx)[1]
        for _, idx in best_part.parts()
    ]
    return np.vstack(centers), best_part, examined


def exact_solve(P, params):
    """Optimal (k, z) solution by exhaustive clustering enumeration.

    Minimizes over every partition of the points into at most k parts,
    each part paying its optimal 1-center cost; subject to the
    enumeration budget. The induced per-part centers are returned.
    """
    pts, w = _coerce_pointset(P)
    n = pts.shape[0]
    if params.k >= n:
        C = CenterSet(pts.copy())
        return SolveResult(
            centers=C,
            cost=power_cost(P, C, params.z),
            method="exact",
            enumeration_stats=0,
        )
    centers, _, examined = _best_partition(
        n, params.k, pts, None, w, params.z
    )
    C = CenterSet(centers)
    return SolveResult(
        centers=C,
        cost=power_cost(P, C, params.z),
        method="exact",
        enumeration_stats=examined,
    )


def _polish(pts, w, C, z, rounds):
    """Alternate assign / per-cluster recenter; monotone, early stop."""
    C = np.array(C, dtype=np.float64)
    cost = power_cost((pts, w), C, z)
    for _ in range(rounds):
        _, lbl = min_power_dists(pts, C, z)
        new = C.copy()
        for t in range(C.shape[0]):
            idx = np.flatnonzero(lbl == t)
            if idx.size:
                new[t] = solve_1center((pts[idx], w[idx]), z)
        new_cost = power_cost((pts, w), new, z)
        if new_cost >= cost * (1.0 - 1e-12):
            break
        C, cost = new, new_cost
    return C, cost


def bicriteria_solve(
    P,
    params,
    *,
    polish_rounds=DEFAULT_POLISH_ROUNDS,
    subset_cap=DEFAULT_SUBSET_CAP,
    alpha=DEFAULT_ALPHA,
    max_candidates=DEFAULT_RING_CANDIDATES,
):
    """Exactly k centers from the constant-factor machinery plus polish.

    Initializations: the swap-search solution, and every k-subset of
    distinct input points when there are at most subset_cap of them. Each
    is polished by assign/recenter rounds; winner by (cost, init order).
    """
    pts, w = _coerce_pointset(P)
    n, k, z = pts.shape[0], params.k, params.z
    if k >= n:
        C = CenterSet(pts.copy())
        return SolveResult(
            centers=C,
            cost=power_cost(P, C, z),
            method="bicriteria",
            enumeration_stats=0,
        )
    inits = [
        constant_factor_approx(
            P, params, alpha=alpha, max_candidates=max_candidates
        ).centers
    ]
    _, first = np.unique(pts, axis=0, return_index=True)
    distinct = np.sort(first)
    if distinct.size >= k and math.comb(distinct.size, k) <= subset_cap:
        for combo in itertools.combinations(distinct.tolist(), k):
            inits.append(pts[list(combo)])
    best = None
    for C0 in inits:
        C, cost = _polish(pts, w, C0, z, polish_rounds)
        if best is None or cost < best[0]:
            best = (cost, C)
    C = CenterSet(best[1])
    return SolveResult(
        centers=C,
        cost=power_cost(P, C, z),
        method="bicriteria",
        enumeration_stats=len(inits),
    )


def approx_solve(
    P,
    params,
    pc_params=None,
    *,
    mode="deterministic",
    test_config: RangeTestConfig = None,
    seed=0,
    delta=0.1,
    alpha=DEFAULT_ALPHA,
    max_candidates=DEFAULT_RING_CANDIDATES,
    passthrough_dim=PASSTHROUGH_DIM,
    strategy="seed-scan",
    jl_c=DEFAULT_JL_C,
    max_seeds=DEFAULT_MAX_SEEDS,
    max_subsets=DEFAULT_MAX_SUBSETS,
    max_cover_steps=DEFAULT_MAX_COVER_STEPS,
    polish_rounds=DEFAULT_POLISH_ROUNDS,
    full_output=False,
):
    """Near-optimal solve via the coreset pipeline.

    Builds the offset coreset, enumerates its clusterings with extension-0
    centers, assigns the original points by the winning sketched centers,
    and re-solves each induced cluster in the original space. A coreset
    too large for the enumeration budget downgrades to bicriteria_solve.

    full_output also returns a dict with the pipeline result, the winning
    partition, the sketched-space centers, and the induced labels.
    """
    pts, _ = _coerce_pointset(P)
    pipe = euclidean_pipeline(
        P,
        params,
        pc_params,
        mode=mode,
        test_config=test_config,
        seed=seed,
        delta=delta,
        alpha=alpha,
        max_candidates=max_candidates,
        passthrough_dim=passthrough_dim,
        strategy=strategy,
        jl_c=jl_c,
        max_seeds=max_seeds,
        max_subsets=max_subsets,
        max_cover_steps=max_cover_steps,
    )
    core = pipe.coreset
    if core.size > ENUM_MAX_N or params.k > ENUM_MAX_K:
        fb = bicriteria_solve(
            P,
            params,
            polish_rounds=polish_rounds,
            alpha=alpha,
            max_candidates=max_candidates,
        )
        res = SolveResult(
            centers=fb.centers,
            cost=fb.cost,
            method="bicriteria",
            enumeration_stats=fb.enumeration_stats,
            downgraded=True,
        )
        if full_output:
            return res, {"pipeline": pipe, "partition": None,
                         "centers_sketch": None, "labels": None}
        return res

    rows = core.points
    base, ext = rows[:, :-1], rows[:, -1]
    w = core.weights
    centers_sk, part, examined = _best_partition(
        core.size, params.k, base, ext, w, params.z
    )

    # induced assignment: each original point follows its sketched row
    if pipe.passthrough:
        all_base = pts
    else:
        all_base = pipe.sketch.sketched_points().as_rows()[:, :-1]
    _, labels = min_power_dists(all_base, centers_sk, params.z)

    lifted = []
    for t in range(centers_sk.shape[0]):
        idx = np.flatnonzero(labels == t)
        if idx.size:
            lifted.append(solve_1center(pts[idx], params.z))
    C = CenterSet(np.vstack(lifted))
    res = SolveResult(
        centers=C,
        cost=power_cost(P, C, params.z),
        method="ptas",
        enumeration_stats=examined,
    )
    if full_output:
        return res, {
            "pipeline": pipe,
            "partition": part,
            "centers_sketch": centers_sk,
            "labels": labels,
        }
    return res
