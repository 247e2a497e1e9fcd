"""Gradient flow of f(X) = X_nn and the maps it induces on a level set.

Flowing a point X with X_nn = 0 forward lands on {X_nn = 1}, a copy of
SO(n-1); flowing backward lands on {X_nn = -1}, another copy. Both limits
have closed forms s(X) and t(X), and s t^-1 depends only on the last column.
"""

import numpy as np

from orthomorse.flow import (
    Direction,
    FlowParams,
    check_prop_main,
    flow,
    fnn_limit_component,
    fnn_source,
    fnn_target,
    prop_main_deviation,
    sample_level_set,
)
from orthomorse.linalg import random_orthogonal
from orthomorse.linear import LinearProblem
from orthomorse.quadratic import QuadraticProblem

n = 5
rng = np.random.default_rng(1)
prob = LinearProblem.corner(n)
X = sample_level_set(n, rng)
print("X_nn =", X[-1, -1])

# %% Forward and backward flows against the closed forms.
for direction, closed in ((Direction.FORWARD, fnn_target), (Direction.BACKWARD, fnn_source)):
    tr = flow(prob, X, FlowParams(), direction)
    which, Q = fnn_limit_component(tr.limit)
    print(f"{direction.name.lower():>8s}: {tr.steps} steps, limit X_nn={tr.limit[-1, -1]:+.6f} ({which}),"
          f" distance to closed form {np.max(np.abs(Q - closed(X))):.1e}")

# %% s t^-1 is the reflection determined by the last column.
devs = [prop_main_deviation(sample_level_set(n, rng)) for _ in range(500)]
print("max |s t^-1 - r(pi)| over 500 samples: %.1e" % max(devs))
print("all within 1e-9:", all(check_prop_main(sample_level_set(n, rng)) for _ in range(100)))

# %% A quadratic flow with distinct spectra ends at a signed permutation matrix.
qp = QuadraticProblem.from_diagonals([0.0, 1.0, 3.0, 4.0], [-2.0, 0.5, 1.0, 2.0])
tr = flow(qp, random_orthogonal(4, rng), FlowParams(record=False))
print("\nquadratic flow limit (rounded):")
print(np.round(tr.limit, 8))
print("value", round(tr.values[-1], 10), "after", tr.steps, "steps")
