"""Critical points of f(X) = Tr(A X B X^T) on O(n).

For diagonal A and B with sorted spectra, the critical components are labelled
by perfect fillings: integer tables whose row and column sums are the
eigenvalue multiplicities. Each component has a Hessian index and a dimension
that can be read off the table, and the numerical Hessian agrees with both.
"""

import numpy as np

from orthomorse.combinatorics import component_dimension, enumerate_fillings, filling_index
from orthomorse.linalg import SignedPermutation, index_nullity, spm_matrix
from orthomorse.quadratic import (
    QuadraticProblem,
    Spectrum,
    construct_critical,
    decompose_critical,
    hessian_form_quadratic,
    is_critical_quadratic,
    random_decomposition,
    spm_report,
)

rng = np.random.default_rng(3)
prob = QuadraticProblem(Spectrum((0.0, 1.0, 2.5), (1, 2, 1)), Spectrum((-1.0, 3.0), (2, 2)))
print("margins:", prob.margins.m, prob.margins.n)

# %% All critical components, with index, dimension and critical value.
a, b = np.array(prob.a.values), np.array(prob.b.values)
for f in enumerate_fillings(prob.margins):
    print(f"  eps={f.eps}  index={filling_index(f)}  dim={component_dimension(f)}"
          f"  value={a @ f.array() @ b:+.2f}")

# %% A random point on one component, then recover its labels from the matrix alone.
f = enumerate_fillings(prob.margins)[2]
X = construct_critical(prob, random_decomposition(prob, f, rng))
print("\ncritical:", is_critical_quadratic(prob, X, 1e-10))
dec = decompose_critical(prob, X)
print("recovered filling:", dec.filling.eps, "same:", dec.filling == f)
print("round-trip error: %.1e" % np.max(np.abs(construct_critical(prob, dec) - X)))
idx, nul = index_nullity(hessian_form_quadratic(prob, X))
print(f"Hessian index {idx} (table says {filling_index(f)}), "
      f"nullity {nul} (dimension {component_dimension(f)})")

# %% Signed permutation matrices meet every component; the Hessian is diagonal there.
sp = SignedPermutation((1, -1, 1, 1), (3, 1, 4, 2))
r = spm_report(prob, sp)
print("\nat", spm_matrix(sp).astype(int).tolist())
print({k: r[k] for k in ("filling", "index", "filling_index", "nullity", "component_dimension")})
print("off-diagonal Hessian entries: %.1e" % r["offdiagonal_max"])
