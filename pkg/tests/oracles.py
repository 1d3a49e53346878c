"""Independent oracles used to freeze expected values.

Deliberately naive: pure-python double loops, brute grid searches, and
re-enumerations that share no code with the library paths they check.
"""

import itertools
import math


def naive_power_cost(points, centers, z, weights=None):
    """Double-loop clustering cost, no numpy reductions."""
    pts = [list(map(float, p)) for p in points]
    cts = [list(map(float, c)) for c in centers]
    if weights is None:
        weights = [1.0] * len(pts)
    total = 0.0
    for w, p in zip(weights, pts):
        best = math.inf
        for c in cts:
            d = math.sqrt(sum((a - b) ** 2 for a, b in zip(p, c)))
            best = min(best, d)
        total += w * best**z
    return total


def naive_extended_cost(base, exts, centers, z, weights=None):
    """Cost of extended points against extension-0 centers, double loop."""
    if weights is None:
        weights = [1.0] * len(base)
    total = 0.0
    for w, p, e in zip(weights, base, exts):
        best = math.inf
        for c in centers:
            d2 = sum((a - b) ** 2 for a, b in zip(p, c)) + float(e) ** 2
            best = min(best, d2)
        total += w * best ** (z / 2.0)
    return total


def grid_search_1center(points, z, weights=None, resolution=1e-4, stages=None):
    """Coarse-to-fine grid search for the 1-center objective.

    The objective c -> sum w ||p - c||^z is convex for z >= 1, so zooming
    on the best cell of a 21-per-axis grid cannot lose the optimum as long
    as each stage's window keeps a neighborhood of the previous best cell.
    Refines until the grid step is below `resolution`.
    """
    pts = [list(map(float, p)) for p in points]
    if weights is None:
        weights = [1.0] * len(pts)
    d = len(pts[0])

    def obj(c):
        return sum(
            w * math.sqrt(sum((a - b) ** 2 for a, b in zip(p, c))) ** z
            for w, p in zip(weights, pts)
        )

    lo = [min(p[j] for p in pts) for j in range(d)]
    hi = [max(p[j] for p in pts) for j in range(d)]
    span = max(max(h - l for h, l in zip(hi, lo)), resolution)
    center = [(h + l) / 2 for h, l in zip(hi, lo)]
    half = span / 2
    per_axis = 21
    best_c, best_f = list(center), obj(center)
    while True:
        axes = [
            [center[j] - half + 2 * half * i / (per_axis - 1) for i in range(per_axis)]
            for j in range(d)
        ]
        for c in itertools.product(*axes):
            f = obj(c)
            if f < best_f:
                best_f, best_c = f, list(c)
        step = 2 * half / (per_axis - 1)
        if step <= resolution:
            return best_c, best_f
        center = best_c
        half = 2 * step  # keep a neighborhood of the best cell

def all_assignments(n, k):
    """Every map {0..n-1} -> {0..k-1} (ordered parts, may be empty)."""
    return itertools.product(range(k), repeat=n)


def set_partitions_up_to_k(n, k):
    """Every set partition of {0..n-1} into at most k parts, as canonical
    restricted-growth strings (independent re-enumeration, recursive)."""
    out = []

    def grow(prefix, mx):
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        for v in range(min(mx + 1, k - 1) + 1):
            grow(prefix + [v], max(mx, v))

    grow([0], 0)
    return out


def weiszfeld_1median(points, weights=None, iters=2000):
    """Textbook Weiszfeld fixed point for the weighted 1-median."""
    pts = [list(map(float, p)) for p in points]
    if weights is None:
        weights = [1.0] * len(pts)
    d = len(pts[0])
    tw = sum(weights)
    c = [sum(w * p[j] for w, p in zip(weights, pts)) / tw for j in range(d)]
    for _ in range(iters):
        num = [0.0] * d
        den = 0.0
        for w, p in zip(weights, pts):
            dist = math.sqrt(sum((a - b) ** 2 for a, b in zip(p, c)))
            if dist < 1e-15:
                continue
            num = [u + w * a / dist for u, a in zip(num, p)]
            den += w / dist
        if den == 0.0:
            break
        nxt = [u / den for u in num]
        if max(abs(a - b) for a, b in zip(nxt, c)) < 1e-14:
            c = nxt
            break
        c = nxt
    return c


def part_cost(points, weights, z):
    """Optimal 1-center cost of one part, independent solvers per z."""
    if not points:
        return 0.0
    if weights is None:
        weights = [1.0] * len(points)
    if z == 2:
        tw = sum(weights)
        d = len(points[0])
        mean = [sum(w * p[j] for w, p in zip(weights, points)) / tw for j in range(d)]
        return sum(
            w * sum((a - b) ** 2 for a, b in zip(p, mean))
            for w, p in zip(weights, points)
        )
    if z == 1:
        c = weiszfeld_1median(points, weights)
        f = naive_power_cost(points, [c], 1, weights)
        # a data point can be the median; Weiszfeld may stall short of it
        best = min(naive_power_cost(points, [q], 1, weights) for q in points)
        return min(f, best)
    raise NotImplementedError("oracle covers z in {1, 2}")


def exact_kz_cost(points, k, z, weights=None):
    """Exact (k, z) optimum by enumerating set partitions into <= k parts."""
    pts = [list(map(float, p)) for p in points]
    if weights is None:
        weights = [1.0] * len(pts)
    best = math.inf
    for rgs in set_partitions_up_to_k(len(pts), k):
        groups = {}
        for i, g in enumerate(rgs):
            groups.setdefault(g, []).append(i)
        total = 0.0
        for idx in groups.values():
            total += part_cost([pts[i] for i in idx], [weights[i] for i in idx], z)
            if total >= best:
                break
        best = min(best, total)
    return best


def recount_witness_net(reps, D, R, eps, z, max_cover_steps=3):
    """Independent recount of witness net size: plain-python re-enumeration
    of origin + subset hull covers + pivoted Gram-Schmidt bases, with the
    same 1e-12 dedup quantization."""
    d = len(reps[0])
    eps_prime = eps / (4.0 * D * z)
    scale = max(1.0, max(abs(c) for p in reps for c in p))
    q = 1e-12 * scale
    seen = set()

    def push(row):
        seen.add(tuple(round(x / q) for x in row))

    def compositions(total, parts):
        slots = total + parts - 1
        for bars in itertools.combinations(range(slots), parts - 1):
            prev, out = -1, []
            for b in bars:
                out.append(b - prev - 1)
                prev = b
            out.append(slots - prev - 1)
            yield out

    push([0.0] * d)
    T = len(reps)
    for j in range(1, min(R, T) + 1):
        for combo in itertools.combinations(range(T), j):
            S = [list(map(float, reps[i])) for i in combo]
            diam = 0.0
            for a in range(j):
                for b in range(a + 1, j):
                    diam = max(diam, math.dist(S[a], S[b]))
            if j == 1 or diam == 0.0:
                push(S[0])
            else:
                G = min(
                    max(1, math.ceil((j - 1) * diam / (eps_prime * diam))),
                    max_cover_steps,
                )
                for comp in compositions(G, j):
                    push(
                        [
                            sum(c / G * S[i][t] for i, c in enumerate(comp))
                            for t in range(d)
                        ]
                    )
            work = [row[:] for row in S]
            smax = max(math.sqrt(sum(x * x for x in row)) for row in work)
            for _ in range(min(len(work), d)):
                norms = [math.sqrt(sum(x * x for x in row)) for row in work]
                i = norms.index(max(norms))
                if norms[i] <= 1e-12 * smax or norms[i] == 0.0:
                    break
                qv = [x / norms[i] for x in work[i]]
                push(qv)
                work = [
                    [x - sum(a * b for a, b in zip(row, qv)) * y for x, y in zip(row, qv)]
                    for row in work
                ]
    return len(seen)


def stirling_partial_sum(n, k):
    """sum_{j<=k} S(n, j) via the recurrence S(n,j) = j*S(n-1,j) + S(n-1,j-1)."""
    S = [[0] * (k + 1) for _ in range(n + 1)]
    S[0][0] = 1
    for i in range(1, n + 1):
        for j in range(1, k + 1):
            S[i][j] = j * S[i - 1][j] + S[i - 1][j - 1]
    return sum(S[n][j] for j in range(1, k + 1))

def naive_far_membership(p, centers, radius):
    """Plain-python recomputation of far-range membership: true iff every
    listed center is at distance >= radius from p."""
    return all(math.dist(list(p), list(c)) >= radius for c in centers)


def recount_deviation(points, indices, ranges):
    """Max deviation between ground and subset counting fractions, double
    loop over (range, point). ranges: list of (centers, radius) pairs."""
    n = len(points)
    sub = set(indices)
    worst = 0.0
    for centers, radius in ranges:
        g = a = 0
        for i, p in enumerate(points):
            if naive_far_membership(p, centers, radius):
                g += 1
                if i in sub:
                    a += 1
        worst = max(worst, abs(g / n - a / len(sub)))
    return worst


def planar_two_means_opt(points):
    """Optimal 2-means cost in the plane via separating-line enumeration.

    An optimal 2-means clustering is split by the perpendicular bisector
    of its two centers, so it appears as a prefix of the point order along
    some direction. Sweeping every pairwise difference direction, its
    perpendicular, and tiny rotations of each covers all such orders.
    """
    pts = [(float(p[0]), float(p[1])) for p in points]
    n = len(pts)

    def split_best(order):
        xs = [pts[i][0] for i in order]
        ys = [pts[i][1] for i in order]
        sq = [x * x + y * y for x, y in zip(xs, ys)]
        cx = list(itertools.accumulate(xs))
        cy = list(itertools.accumulate(ys))
        csq = list(itertools.accumulate(sq))
        best = csq[-1] - (cx[-1] ** 2 + cy[-1] ** 2) / n
        for m in range(1, n):
            a = csq[m - 1] - (cx[m - 1] ** 2 + cy[m - 1] ** 2) / m
            bx = cx[-1] - cx[m - 1]
            by = cy[-1] - cy[m - 1]
            b = (csq[-1] - csq[m - 1]) - (bx * bx + by * by) / (n - m)
            best = min(best, a + b)
        return best

    dirs = [(1.0, 0.0), (0.0, 1.0)]
    for i in range(n):
        for j in range(i + 1, n):
            dx = pts[j][0] - pts[i][0]
            dy = pts[j][1] - pts[i][1]
            if dx == 0.0 and dy == 0.0:
                continue
            dirs.append((dx, dy))
            dirs.append((-dy, dx))
    best = math.inf
    rot = 1e-7
    for dx, dy in dirs:
        for ux, uy in (
            (dx, dy),
            (dx - rot * dy, dy + rot * dx),
            (dx + rot * dy, dy - rot * dx),
        ):
            order = sorted(range(n), key=lambda i: (ux * pts[i][0] + uy * pts[i][1], i))
            best = min(best, split_best(order))
    return best
