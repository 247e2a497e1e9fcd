"""Matrix primitives on the orthogonal group.

Matrices are plain ``numpy.ndarray`` values. Indices in the public API
(``p``, ``q``, permutation images) are 1-based.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Iterator, Sequence

import numpy as np

ORTHO_TOL = 1e-9


class NumericalValidationError(ValueError):
    """Raised when a numerical certificate (orthogonality, criticality,
    eigenvalue clustering) fails."""


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def _square(M, name: str = "matrix") -> np.ndarray:
    M = as_matrix(M, name)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    return M


def ortho_residual(X) -> float:
    """Max-abs entry of ``X^T X - I``."""
    X = _square(X)
    if X.size == 0:
        return 0.0
    return float(np.max(np.abs(X.T @ X - np.eye(X.shape[0]))))


def check_orthogonal(X, tol: float = ORTHO_TOL) -> np.ndarray:
    """Return ``X`` as a float array, raising if it is not orthogonal within ``tol``."""
    X = _square(X, "X")
    res = ortho_residual(X)
    if res > tol:
        raise NumericalValidationError(
            f"matrix is not orthogonal: residual {res:.3e} > {tol:.1e}")
    return X


def skew_indices(n: int) -> list[tuple[int, int]]:
    """Pairs ``(p, q)``, ``1 <= p < q <= n``, in lexicographic order."""
    return list(itertools.combinations(range(1, n + 1), 2))


def _check_pair(p: int, q: int, n: int) -> None:
    if not (1 <= p <= n and 1 <= q <= n):
        raise ValueError(f"index ({p}, {q}) out of range for n={n}")


def skew_basis(p: int, q: int, n: int) -> np.ndarray:
    """Standard basis element ``E(p, q)`` of so(n): -1 at (p, q), +1 at (q, p)."""
    _check_pair(p, q, n)
    if not p < q:
        raise ValueError(f"skew_basis requires p < q, got ({p}, {q})")
    E = np.zeros((n, n))
    E[p - 1, q - 1] = -1.0
    E[q - 1, p - 1] = 1.0
    return E


def sym_basis(p: int, q: int, n: int) -> np.ndarray:
    """Symmetric matrix ``F(p, q)`` with ones at (p, q) and (q, p)."""
    _check_pair(p, q, n)
    if p == q:
        raise ValueError("sym_basis requires p != q")
    F = np.zeros((n, n))
    F[p - 1, q - 1] = F[q - 1, p - 1] = 1.0
    return F


def diag_unit(p: int, n: int) -> np.ndarray:
    """``D(p)``: a single 1 at (p, p)."""
    _check_pair(p, p, n)
    D = np.zeros((n, n))
    D[p - 1, p - 1] = 1.0
    return D


def skew_basis_stack(n: int) -> np.ndarray:
    """All ``E(p, q)`` stacked in lexicographic order, shape ``(C(n,2), n, n)``."""
    idx = skew_indices(n)
    E = np.zeros((len(idx), n, n))
    for a, (p, q) in enumerate(idx):
        E[a, p - 1, q - 1] = -1.0
        E[a, q - 1, p - 1] = 1.0
    return E


def skew_coordinates(E) -> np.ndarray:
    """Coordinates of a skew matrix in the standard basis (lexicographic)."""
    E = _square(E)
    n = E.shape[0]
    return np.array([E[q - 1, p - 1] for p, q in skew_indices(n)])


def skew_from_coordinates(c, n: int) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if c.shape != (comb(n, 2),):
        raise ValueError(f"expected {comb(n, 2)} coordinates, got shape {c.shape}")
    return np.tensordot(c, skew_basis_stack(n), axes=1)


def commutator(U, V) -> np.ndarray:
    """``[U, V] = UV - VU``."""
    U, V = _square(U, "U"), _square(V, "V")
    if U.shape != V.shape:
        raise ValueError(f"size mismatch: {U.shape} vs {V.shape}")
    return U @ V - V @ U


def is_tangent(X, M, tol: float = ORTHO_TOL) -> bool:
    """True iff ``M X^T + X M^T`` vanishes within ``tol`` (max-abs)."""
    X, M = _square(X, "X"), _square(M, "M")
    if X.shape != M.shape:
        raise ValueError(f"size mismatch: {X.shape} vs {M.shape}")
    if X.size == 0:
        return True
    return bool(np.max(np.abs(M @ X.T + X @ M.T)) <= tol)


@dataclass(frozen=True)
class SignedPermutation:
    """``S P_sigma`` with ``S = diag(signs)``; ``perm[i-1] = sigma(i)``.

    Column ``i`` of ``P_sigma`` is column ``sigma(i)`` of the identity.
    """

    signs: tuple[int, ...]
    perm: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "signs", tuple(int(s) for s in self.signs))
        object.__setattr__(self, "perm", tuple(int(s) for s in self.perm))
        n = len(self.perm)
        if len(self.signs) != n:
            raise ValueError("signs and perm must have equal length")
        if sorted(self.perm) != list(range(1, n + 1)):
            raise ValueError(f"perm {self.perm} is not a bijection on 1..{n}")
        if any(s not in (1, -1) for s in self.signs):
            raise ValueError("signs must be +1 or -1")

    @property
    def n(self) -> int:
        return len(self.perm)

    @classmethod
    def identity(cls, n: int) -> "SignedPermutation":
        return cls((1,) * n, tuple(range(1, n + 1)))


def permutation_matrix(perm: Sequence[int]) -> np.ndarray:
    n = len(perm)
    P = np.zeros((n, n))
    for i, s in enumerate(perm):
        P[s - 1, i] = 1.0
    return P


def spm_matrix(sp: SignedPermutation) -> np.ndarray:
    """The signed permutation matrix ``S P_sigma`` (exactly orthogonal)."""
    return np.diag(np.array(sp.signs, dtype=float)) @ permutation_matrix(sp.perm)


def signed_permutations(n: int, signs: bool = True) -> Iterator[SignedPermutation]:
    """All signed permutations of size ``n`` (or only ``S = I`` if ``signs`` is false)."""
    sign_choices = itertools.product((1, -1), repeat=n) if signs else [(1,) * n]
    sign_choices = list(sign_choices)
    for perm in itertools.permutations(range(1, n + 1)):
        for s in sign_choices:
            yield SignedPermutation(s, perm)


def random_orthogonal(n: int, seed=None, special: bool = False) -> np.ndarray:
    """Haar-distributed element of O(n) (or SO(n) if ``special``).

    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    rng = np.random.default_rng(seed)
    if n == 0:
        return np.zeros((0, 0))
    Z = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    d = np.sign(np.diag(R))
    d[d == 0] = 1.0
    Q = Q * d
    if special and np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def random_skew(n: int, seed=None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, n))
    return (Z - Z.T) / 2


def project_orthogonal(X) -> np.ndarray:
    """Polar factor of ``X``: the nearest orthogonal matrix in Frobenius norm."""
    X = _square(X, "X")
    if X.size == 0:
        return X.copy()
    w, V = np.linalg.eigh(X.T @ X)
    if w.min() <= 1e-14 * max(1.0, w.max()):
        raise ValueError("cannot project a singular matrix onto O(n)")
    return X @ (V / np.sqrt(w)) @ V.T


@dataclass(frozen=True)
class QuadraticForm:
    """Symmetric form on so(n) in the standard basis (lexicographic order).

    ``defect`` is the max-abs asymmetry of the raw bilinear form before
    symmetrization.
    """

    n: int
    H: np.ndarray
    defect: float = 0.0

    def __post_init__(self):
        H = np.asarray(self.H, dtype=float)
        d = comb(self.n, 2)
        if H.shape != (d, d):
            raise ValueError(f"form for n={self.n} must be {d}x{d}, got {H.shape}")
        object.__setattr__(self, "H", H)

    def __call__(self, E, N=None) -> float:
        e = skew_coordinates(E)
        f = e if N is None else skew_coordinates(N)
        return float(e @ self.H @ f)

    def entry(self, p: int, q: int, u: int, v: int) -> float:
        idx = {pq: a for a, pq in enumerate(skew_indices(self.n))}
        return float(self.H[idx[(p, q)], idx[(u, v)]])

    def diagonal(self) -> np.ndarray:
        return np.diag(self.H).copy()

    def eigenvalues(self) -> np.ndarray:
        if self.H.size == 0:
            return np.zeros(0)
        return np.linalg.eigvalsh(self.H)


def symmetrize(H) -> tuple[np.ndarray, float]:
    H = np.asarray(H, dtype=float)
    defect = float(np.max(np.abs(H - H.T))) if H.size else 0.0
    return (H + H.T) / 2, defect


def index_nullity(form: QuadraticForm, zero_tol: float | None = None,
                  rel_tol: float = 1e-7) -> tuple[int, int]:
    """Count negative and (numerically) zero eigenvalues of ``form``.

    The default threshold is ``rel_tol`` times the spectral radius, with a
    floor of 1e-12 so that an exactly zero form has full nullity.
    """
    w = form.eigenvalues()
    if zero_tol is None:
        radius = float(np.max(np.abs(w))) if w.size else 0.0
        zero_tol = max(rel_tol * radius, 1e-12)
    index = int(np.sum(w < -zero_tol))
    nullity = int(np.sum(np.abs(w) <= zero_tol))
    return index, nullity


def block_slices(sizes: Sequence[int]) -> list[slice]:
    """Consecutive slices of the given sizes."""
    out, start = [], 0
    for s in sizes:
        out.append(slice(start, start + s))
        start += s
    return out


def direct_sum(*blocks) -> np.ndarray:
    mats = [np.atleast_2d(np.asarray(b, dtype=float)) for b in blocks]
    n = sum(m.shape[0] for m in mats)
    k = sum(m.shape[1] for m in mats)
    out = np.zeros((n, k))
    r = c = 0
    for m in mats:
        out[r:r + m.shape[0], c:c + m.shape[1]] = m
        r += m.shape[0]
        c += m.shape[1]
    return out
