"""The trace function Tr(X) on O(n) and the Grassmannians inside it.

Critical points of Tr are the symmetric orthogonal matrices X = I - 2P, one for
each subspace L (the -1 eigenspace). The component through a k-dimensional L
is a copy of G(k, n), whose index is C(n-k, 2). Counting cells on the SO(n)
side reproduces the Betti numbers exactly.
"""

from math import comb

import numpy as np

from orthomorse.linalg import index_nullity, random_orthogonal
from orthomorse.linear import (
    GrassmannPoint,
    LinearProblem,
    critical_of_subspace,
    grassmannian_of_critical,
    hessian_form_linear,
    is_critical_linear,
    morse_inequality_report,
)

n = 5
prob = LinearProblem.trace(n)
rng = np.random.default_rng(0)

# %% Index and nullity at a random point of each component.
for k in range(n + 1):
    L = GrassmannPoint(n, random_orthogonal(n, rng)[:, :k])
    X = critical_of_subspace(L)
    assert is_critical_linear(prob, X)
    idx, nul = index_nullity(hessian_form_linear(prob, X))
    back = grassmannian_of_critical(X)
    same = np.allclose(back.projector(), L.projector())
    print(f"k={k}: Tr={np.trace(X):+.0f}  index={idx} (C({n - k},2)={comb(n - k, 2)})"
          f"  nullity={nul} (k(n-k)={k * (n - k)})  subspace recovered={same}")

# %% SO(3): the point {I} (index 3) plus a projective plane (index 0).
rep = morse_inequality_report(3)
print("\nSO(3): b_i =", rep.lhs, " Grassmannian count =", rep.rhs)
for m in range(1, 11):
    assert morse_inequality_report(m).ok
print("Morse inequalities are equalities for n = 1..10")
