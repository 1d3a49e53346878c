"""Tour of the three solvers on one small instance.

exact_solve enumerates canonical set partitions and is the ground truth
for tiny inputs. approx_solve shrinks the input through the sketch
pipeline first, enumerates on the sketch, and lifts the centers back;
when the sketch is still too large to enumerate it downgrades to the
bicriteria path instead of failing. bicriteria_solve is the fast
constant-factor baseline.
"""

import numpy as np

from detclust import ClusteringParams, approx_solve, bicriteria_solve, exact_solve

rng = np.random.default_rng(3)
pts = np.vstack([
    rng.standard_normal((5, 2)),
    rng.standard_normal((5, 2)) + [6.0, 0.0],
])
params = ClusteringParams(k=2, z=2, epsilon=0.3)

ex = exact_solve(pts, params)
ap = approx_solve(pts, params)
bc = bicriteria_solve(pts, params)

print(f"exact:      cost={ex.cost:.6f}  candidates={ex.enumeration_stats}")
print(f"ptas:       cost={ap.cost:.6f}  method={ap.method} "
      f"downgraded={ap.downgraded}")
print(f"bicriteria: cost={bc.cost:.6f}  candidates={bc.enumeration_stats}")

eps = params.epsilon
assert ex.cost <= ap.cost <= (1 + eps) / (1 - eps) * ex.cost + 1e-9
assert ex.cost <= bc.cost <= (1 + eps) * ex.cost + 1e-9
print("sandwich bounds hold")

print("\nexact centers:")
print(ex.centers.centers)

# Past the enumeration budget the ptas hands back the bicriteria answer
# and says so instead of raising.
big = rng.standard_normal((40, 2)) * 3.0
res = approx_solve(big, params)
print(f"\nn=40: method={res.method} downgraded={res.downgraded} "
      f"cost={res.cost:.6f}")
assert res.downgraded
