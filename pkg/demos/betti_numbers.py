"""Mod-2 Betti numbers of SO(n) three ways.

1. Subset sums: b_i(n) counts subsets of {1, ..., n-1} summing to i.
2. The product p_n(t) = (1 + t)(1 + t^2) ... (1 + t^(n-1)).
3. Halving the O(n) counts c_i(n), which are built from Grassmannian cells.
"""

from math import comb

from orthomorse.combinatorics import (
    IotaConvention,
    frankel_report,
    grassmannian_poincare,
    group_poincare,
    poincare_so,
    so_betti,
)

# %% SO(3) is RP^3, so every Betti number in degrees 0..3 is 1.
print("p_3(t) =", poincare_so(3))

# %% The recursion p_n = (1 + t^(n-1)) p_(n-1), row by row.
for n in range(1, 8):
    p = poincare_so(n)
    print(f"n={n}  deg={p.degree:2d}  total={p(1):4d}  {p}")
    assert p.degree == comb(n, 2) and p(1) == 2 ** (n - 1)

# %% O(n) has two components, so its counts are twice those of SO(n).
n = 6
c = group_poincare(n)
print("\nc_i(6):", c.coeffs)
print("2 b_i(6):", tuple(2 * so_betti(i, n) for i in range(comb(n, 2) + 1)))

# %% The O(n) counts split by subset size into shifted Grassmannian polynomials.
for k in range(n + 1):
    print(f"  k={k}: t^{comb(k, 2):<2d} * ({grassmannian_poincare(k, n)})")

# %% Either degree shift for the k-th Grassmannian gives the same total.
for iota in IotaConvention:
    rep = frankel_report(n, iota)
    print(f"shift {iota.value:>10s}: equal in every degree -> {rep.ok}")
