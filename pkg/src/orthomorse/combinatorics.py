"""Exact combinatorics: perfect fillings, subset degrees and mod-2 Betti numbers.

All counts are Python ints, so nothing overflows.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Iterable, Iterator, Sequence

import numpy as np

from .linalg import SignedPermutation, block_slices, spm_matrix


# --------------------------------------------------------------------------
# polynomials
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class IntPolynomial:
    """Polynomial with integer coefficients, ``coeffs[i]`` multiplying ``t**i``."""

    coeffs: tuple[int, ...] = ()

    def __post_init__(self):
        c = [int(x) for x in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def monomial(cls, degree: int, coeff: int = 1) -> "IntPolynomial":
        return cls((0,) * degree + (coeff,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, i: int) -> int:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def __len__(self):
        return len(self.coeffs)

    def __add__(self, other: "IntPolynomial") -> "IntPolynomial":
        k = max(len(self), len(other))
        return IntPolynomial(tuple(self[i] + other[i] for i in range(k)))

    def __mul__(self, other) -> "IntPolynomial":
        if isinstance(other, int):
            return IntPolynomial(tuple(other * c for c in self.coeffs))
        out = [0] * max(len(self) + len(other) - 1, 0)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPolynomial(tuple(out))

    __rmul__ = __mul__

    def shift(self, k: int) -> "IntPolynomial":
        """Multiply by ``t**k``."""
        if not self.coeffs:
            return self
        return IntPolynomial((0,) * k + self.coeffs)

    def __call__(self, t):
        return sum(c * t ** i for i, c in enumerate(self.coeffs))

    def dominates(self, other: "IntPolynomial") -> bool:
        """Coefficientwise ``self >= other``."""
        k = max(len(self), len(other))
        return all(self[i] >= other[i] for i in range(k))

    def __str__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
            if not mono:
                terms.append(str(c))
            else:
                terms.append(mono if c == 1 else f"{c}{mono}")
        return " + ".join(terms)


# --------------------------------------------------------------------------
# perfect fillings
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Margins:
    """Row margins ``m`` (multiplicities of A) and column margins ``n`` (of B)."""

    m: tuple[int, ...]
    n: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "m", tuple(int(x) for x in self.m))
        object.__setattr__(self, "n", tuple(int(x) for x in self.n))
        if any(x <= 0 for x in self.m + self.n):
            raise ValueError("margins must be positive integers")
        if sum(self.m) != sum(self.n):
            raise ValueError(f"margin sums differ: {sum(self.m)} != {sum(self.n)}")

    @property
    def size(self) -> int:
        return sum(self.m)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.m), len(self.n)


@dataclass(frozen=True)
class PerfectFilling:
    """Nonnegative integer ``s x t`` table whose row/column sums are the margins."""

    eps: tuple[tuple[int, ...], ...]
    margins: Margins = field(compare=False)

    def __post_init__(self):
        eps = tuple(tuple(int(x) for x in row) for row in self.eps)
        object.__setattr__(self, "eps", eps)
        s, t = self.margins.shape
        if len(eps) != s or any(len(r) != t for r in eps):
            raise ValueError(f"filling must be {s}x{t}")
        if any(x < 0 for r in eps for x in r):
            raise ValueError("filling entries must be nonnegative")
        if tuple(sum(r) for r in eps) != self.margins.m:
            raise ValueError("row sums do not match row margins")
        if tuple(sum(c) for c in zip(*eps)) != self.margins.n:
            raise ValueError("column sums do not match column margins")

    @classmethod
    def from_table(cls, eps) -> "PerfectFilling":
        eps = [list(map(int, r)) for r in eps]
        return cls(eps, Margins([sum(r) for r in eps], [sum(c) for c in zip(*eps)]))

    def array(self) -> np.ndarray:
        s, t = self.margins.shape
        return np.array(self.eps, dtype=int).reshape(s, t)

    def __str__(self):
        return "[" + ", ".join("[" + ", ".join(map(str, r)) + "]" for r in self.eps) + "]"


def _bounded_compositions(total: int, caps: Sequence[int]) -> Iterator[tuple[int, ...]]:
    # lexicographically increasing
    if not caps:
        if total == 0:
            yield ()
        return
    rest = sum(caps[1:])
    for x in range(max(0, total - rest), min(total, caps[0]) + 1):
        for tail in _bounded_compositions(total - x, caps[1:]):
            yield (x,) + tail


def iter_fillings(margins: Margins) -> Iterator[PerfectFilling]:
    """Generate perfect fillings in row-major lexicographic order."""

    def rows(i: int, caps: tuple[int, ...]):
        if i == len(margins.m):
            yield ()
            return
        for row in _bounded_compositions(margins.m[i], caps):
            nxt = tuple(c - x for c, x in zip(caps, row))
            for tail in rows(i + 1, nxt):
                yield (row,) + tail

    for eps in rows(0, margins.n):
        yield PerfectFilling(eps, margins)


def enumerate_fillings(margins: Margins) -> list[PerfectFilling]:
    return list(iter_fillings(margins))


def filling_index(f: PerfectFilling) -> int:
    """Sum of ``eps[i][j] * eps[k][l]`` over cells with ``i < k`` and ``j < l``.

    This is the Hessian index of the critical component labelled by ``f``
    when both spectra are sorted increasingly.
    """
    E = f.array()
    s, t = E.shape
    total = 0
    for i in range(s):
        for j in range(t):
            if E[i, j]:
                total += int(E[i, j]) * int(E[i + 1:, j + 1:].sum())
    return total


def component_dimension(f: PerfectFilling) -> int:
    """Dimension of ``(O(m) x O(n)) / O(eps)``."""
    dm = sum(comb(x, 2) for x in f.margins.m)
    dn = sum(comb(x, 2) for x in f.margins.n)
    de = sum(comb(x, 2) for r in f.eps for x in r)
    return dm + dn - de


def filling_of_spm(sp: SignedPermutation, margins: Margins) -> PerfectFilling:
    """Count nonzero entries of ``S P_sigma`` in each ``m_i x n_j`` block."""
    if margins.size != sp.n:
        raise ValueError(f"margins total {margins.size} != permutation size {sp.n}")
    X = spm_matrix(sp) != 0
    rs, cs = block_slices(margins.m), block_slices(margins.n)
    eps = [[int(X[r, c].sum()) for c in cs] for r in rs]
    return PerfectFilling(eps, margins)


def inversion_stat(perm: Sequence[int]) -> int:
    """``#{(p, q) : p < q and perm(q) > perm(p)}``.

    Note this counts order-*preserving* pairs; it is the statistic that equals
    the Morse index at ``P_sigma`` for increasing spectra.
    """
    perm = list(perm)
    n = len(perm)
    if sorted(perm) != list(range(1, n + 1)):
        raise ValueError(f"{perm} is not a permutation of 1..{n}")
    return sum(1 for p in range(n) for q in range(p + 1, n) if perm[q] > perm[p])


def distinct_spectrum_morse_polynomial(n: int) -> IntPolynomial:
    """Morse counting polynomial on O(n) when A and B have distinct eigenvalues.

    Each of the ``2**n * n!`` signed permutation matrices contributes ``t**index``.
    """
    counts: dict[int, int] = {}
    for perm in itertools.permutations(range(1, n + 1)):
        k = inversion_stat(perm)
        counts[k] = counts.get(k, 0) + 1
    top = max(counts)
    return IntPolynomial(tuple(counts.get(i, 0) for i in range(top + 1))) * (2 ** n)


# --------------------------------------------------------------------------
# subset degrees and Betti numbers
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SubsetDegrees:
    n: int
    S: frozenset
    deg: int
    sdeg: int


def _check_subset(S: Iterable[int], n: int) -> frozenset:
    S = frozenset(int(s) for s in S)
    bad = [s for s in S if not 1 <= s <= n]
    if bad:
        raise ValueError(f"elements {sorted(bad)} outside 1..{n}")
    return S


def _deg(S: frozenset, n: int) -> int:
    return sum(1 for q in S for p in range(1, q) if p not in S)


def _sdeg(S: frozenset) -> int:
    # |{(p, q) in [n] x S : p < q}|
    return sum(q - 1 for q in S)


def subset_degrees(S: Iterable[int], n: int) -> SubsetDegrees:
    S = _check_subset(S, n)
    deg = _deg(S, n)
    sdeg = _sdeg(S)
    if sdeg != comb(len(S), 2) + deg:
        raise AssertionError("sdeg formulas disagree")  # pragma: no cover
    return SubsetDegrees(n, S, deg, sdeg)


@lru_cache(maxsize=None)
def grassmannian_poincare(k: int, n: int) -> IntPolynomial:
    """Generating polynomial of ``deg S`` over k-subsets of [n]."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    counts = [0] * (k * (n - k) + 1)
    for S in itertools.combinations(range(1, n + 1), k):
        counts[_deg(frozenset(S), n)] += 1
    return IntPolynomial(tuple(counts))


def grassmannian_betti(i: int, k: int, n: int) -> int:
    """``c_i(k, n)``: mod-2 Betti numbers of the Grassmannian G(k, n)."""
    return grassmannian_poincare(k, n)[i]


@lru_cache(maxsize=None)
def group_poincare(n: int) -> IntPolynomial:
    """Generating polynomial of ``sdeg S`` over all subsets of [n] (mod-2 Poincaré
    polynomial of O(n))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    counts = [0] * (comb(n, 2) + 1)
    for mask in range(1 << n):
        S = frozenset(i + 1 for i in range(n) if mask >> i & 1)
        counts[_sdeg(S)] += 1
    return IntPolynomial(tuple(counts))


def group_betti_c(i: int, n: int) -> int:
    """``c_i(n) = #{S subset of [n] : sdeg S = i}``."""
    return group_poincare(n)[i]


@lru_cache(maxsize=None)
def _subset_sum_counts(n: int) -> IntPolynomial:
    if n < 1:
        raise ValueError("n must be >= 1")
    counts = [0] * (comb(n, 2) + 1)
    for r in range(n):
        for S in itertools.combinations(range(1, n), r):
            counts[sum(S)] += 1
    return IntPolynomial(tuple(counts))


def so_betti(i: int, n: int) -> int:
    """``b_i(n)``: number of subsets of ``{1, ..., n-1}`` summing to ``i``."""
    return _subset_sum_counts(n)[i]


def poincare_so(n: int) -> IntPolynomial:
    """Mod-2 Poincaré polynomial of SO(n) via ``p_n = (1 + t**(n-1)) p_{n-1}``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    p = IntPolynomial((1,))
    for k in range(2, n + 1):
        p = p + p.shift(k - 1)
    return p


class IotaConvention(enum.Enum):
    K_CHOOSE_2 = "k"
    COMPLEMENT_CHOOSE_2 = "complement"

    def shift(self, k: int, n: int) -> int:
        return comb(k, 2) if self is IotaConvention.K_CHOOSE_2 else comb(n - k, 2)


@dataclass(frozen=True)
class DegreeComparison:
    """Per-degree comparison of two Betti sequences."""

    n: int
    lhs: tuple[int, ...]
    rhs: tuple[int, ...]
    label: str = ""

    @property
    def equal(self) -> tuple[bool, ...]:
        return tuple(a == b for a, b in zip(self.lhs, self.rhs))

    @property
    def ok(self) -> bool:
        return all(self.equal)

    def rows(self):
        for i, (a, b) in enumerate(zip(self.lhs, self.rhs)):
            yield i, a, b, a == b


def _pad(p: IntPolynomial, length: int) -> tuple[int, ...]:
    return tuple(p[i] for i in range(length))


def frankel_report(n: int, iota: IotaConvention = IotaConvention.K_CHOOSE_2) -> DegreeComparison:
    """Compare ``2 b_i(n)`` with ``sum_k c_{i - iota(k)}(k, n)`` in every degree."""
    iota = IotaConvention(iota)
    lhs = _subset_sum_counts(n) * 2
    rhs = IntPolynomial()
    for k in range(n + 1):
        rhs = rhs + grassmannian_poincare(k, n).shift(iota.shift(k, n))
    length = max(len(lhs), len(rhs))
    return DegreeComparison(n, _pad(lhs, length), _pad(rhs, length),
                            f"frankel[{iota.value}]")
