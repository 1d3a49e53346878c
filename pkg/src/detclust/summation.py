"""Reproducible floating-point reductions.

Every cost accumulation in the package goes through tree_sum: a fixed-shape
pairwise reduction whose association order depends only on the length of the
input, never on threading or chunking. Combined with a canonical ordering of
the summands this makes costs bit-identical across reruns and across
permutations of the same multiset.
"""

import numpy as np


def tree_sum(values):
    """Pairwise (tree) sum of a 1-d array with a length-determined shape.

    Equivalent to a balanced binary reduction: adjacent pairs are added,
    an odd trailing element is carried, repeat. O(n) work, O(log n) passes.
    """
    a = np.asarray(values, dtype=np.float64).ravel()
    if a.size == 0:
        return 0.0
    while a.size > 1:
        half = a.size // 2
        s = a[0 : 2 * half : 2] + a[1 : 2 * half : 2]
        if a.size % 2:
            s = np.append(s, a[-1])
        a = s
    return float(a[0])


def tree_sum_axis(values, axis=-1):
    """tree_sum along one axis of an nd-array (same association order)."""
    a = np.asarray(values, dtype=np.float64)
    a = np.moveaxis(a, axis, -1)
    if a.shape[-1] == 0:
        return np.zeros(a.shape[:-1])
    while a.shape[-1] > 1:
        n = a.shape[-1]
        half = n // 2
        s = a[..., 0 : 2 * half : 2] + a[..., 1 : 2 * half : 2]
        if n % 2:
            s = np.concatenate([s, a[..., -1:]], axis=-1)
        a = s
    return a[..., 0]


def canonical_order(points, weights=None):
    """Permutation sorting rows lexicographically (last column is the
    primary key for np.lexsort, so feed columns reversed), with the weight
    as the final tie-break. Duplicate (point, weight) rows may land in any
    relative order; their summands are identical so sums are unaffected.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    keys = [pts[:, j] for j in range(pts.shape[1] - 1, -1, -1)]
    if weights is not None:
        keys.insert(0, np.asarray(weights, dtype=np.float64))
    return np.lexsort(keys)
