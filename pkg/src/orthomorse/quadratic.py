"""The quadratic trace function ``f(X) = Tr(A X B X^T)`` on O(n).

``A`` and ``B`` are diagonal, built from sorted spectra with multiplicities.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .combinatorics import Margins, PerfectFilling
from .linalg import (
    ORTHO_TOL,
    NumericalValidationError,
    QuadraticForm,
    SignedPermutation,
    block_slices,
    check_orthogonal,
    is_tangent,
    ortho_residual,
    random_orthogonal,
    skew_basis_stack,
    skew_coordinates,
    skew_indices,
    symmetrize,
)


@dataclass(frozen=True)
class Spectrum:
    """Strictly increasing eigenvalues with positive multiplicities."""

    values: tuple[float, ...]
    mults: tuple[int, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        mults = tuple(int(m) for m in self.mults)
        if len(values) != len(mults) or not values:
            raise ValueError("values and mults must be nonempty and of equal length")
        if any(m <= 0 for m in mults):
            raise ValueError("multiplicities must be positive")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError(f"values must be strictly increasing: {values}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mults", mults)

    @classmethod
    def distinct(cls, values: Sequence[float]) -> "Spectrum":
        return cls(tuple(values), (1,) * len(values))

    @classmethod
    def from_unsorted(cls, values, mults) -> tuple["Spectrum", list[int]]:
        """Sort raw input; returns the spectrum and the permutation applied."""
        order = sorted(range(len(values)), key=lambda i: values[i])
        return cls([values[i] for i in order], [mults[i] for i in order]), order

    @property
    def size(self) -> int:
        return sum(self.mults)

    def diagonal(self) -> np.ndarray:
        return np.repeat(np.array(self.values), self.mults)

    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal())

    def min_gap(self) -> float:
        if len(self.values) < 2:
            return np.inf
        return float(np.min(np.diff(self.values)))


@dataclass(frozen=True)
class QuadraticProblem:
    a: Spectrum
    b: Spectrum

    def __post_init__(self):
        if self.a.size != self.b.size:
            raise ValueError(f"spectra sizes differ: {self.a.size} != {self.b.size}")

    @classmethod
    def from_diagonals(cls, a: Sequence[float], b: Sequence[float]) -> "QuadraticProblem":
        return cls(Spectrum.distinct(a), Spectrum.distinct(b))

    @property
    def n(self) -> int:
        return self.a.size

    @cached_property
    def A(self) -> np.ndarray:
        return self.a.matrix()

    @cached_property
    def B(self) -> np.ndarray:
        return self.b.matrix()

    @property
    def margins(self) -> Margins:
        return Margins(self.a.mults, self.b.mults)

    @property
    def scale(self) -> float:
        return max(1.0, float(np.max(np.abs(self.a.values))) * float(np.max(np.abs(self.b.values))))

    def value(self, X) -> float:
        return f_value(self, X)

    def gradient(self, X) -> np.ndarray:
        return f_gradient(self, X)

    def hessian(self, X) -> QuadraticForm:
        return hessian_form_quadratic(self, X)


@dataclass
class CriticalDecomposition:
    """``Q[i]`` in O(m_i), ``R[j]`` in O(n_j) and the filling cutting them into blocks."""

    filling: PerfectFilling
    Q: list[np.ndarray]
    R: list[np.ndarray]

    def __post_init__(self):
        m, n = self.filling.margins.m, self.filling.margins.n
        if len(self.Q) != len(m) or len(self.R) != len(n):
            raise ValueError("number of Q/R blocks does not match the margins")
        self.Q = [np.asarray(q, dtype=float).reshape(mi, mi) for q, mi in zip(self.Q, m)]
        self.R = [np.asarray(r, dtype=float).reshape(nj, nj) for r, nj in zip(self.R, n)]

    def Q_block(self, i: int, j: int) -> np.ndarray:
        """``Q[i, j]`` (0-based block indices), of size ``m_i x eps_ij``."""
        return self.Q[i][:, block_slices(self.filling.eps[i])[j]]

    def R_block(self, i: int, j: int) -> np.ndarray:
        """``R[i, j]``, of size ``n_j x eps_ij``."""
        col = [row[j] for row in self.filling.eps]
        return self.R[j][:, block_slices(col)[i]]

    def act(self, U: dict) -> "CriticalDecomposition":
        """Right action of ``U = {(i, j): U_ij}`` in O(eps); missing blocks are identity."""
        eps = self.filling.eps
        s, t = len(eps), len(eps[0])
        Q = [np.hstack([self.Q_block(i, j) @ U.get((i, j), np.eye(eps[i][j]))
                        for j in range(t)]) for i in range(s)]
        R = [np.hstack([self.R_block(i, j) @ U.get((i, j), np.eye(eps[i][j]))
                        for i in range(s)]) for j in range(t)]
        return CriticalDecomposition(self.filling, Q, R)


def _point(prob: QuadraticProblem, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape != (prob.n, prob.n):
        raise ValueError(f"X has shape {X.shape}, expected {(prob.n, prob.n)}")
    return X


def f_value(prob: QuadraticProblem, X) -> float:
    X = _point(prob, X)
    a, b = prob.a.diagonal(), prob.b.diagonal()
    # Tr(A X B X^T) = sum_ij a_i b_j X_ij^2
    return float(a @ (X * X) @ b)


def f_gradient(prob: QuadraticProblem, X) -> np.ndarray:
    """Riemannian gradient ``(A X B X^T - X B X^T A) X``."""
    X = _point(prob, X)
    A, B = prob.A, prob.B
    S = A @ X @ B @ X.T
    return (S - S.T) @ X


def criticality_defect(prob: QuadraticProblem, X) -> float:
    """Max-abs asymmetry of ``A X B X^T``."""
    X = _point(prob, X)
    S = prob.A @ X @ prob.B @ X.T
    return float(np.max(np.abs(S - S.T)))


def is_critical_quadratic(prob: QuadraticProblem, X, tol: float = 1e-9) -> bool:
    return criticality_defect(prob, X) <= tol


def construct_critical(prob: QuadraticProblem, dec: CriticalDecomposition) -> np.ndarray:
    """Assemble ``X`` blockwise with ``X[i, j] = Q[i, j] R[i, j]^T``."""
    if dec.filling.margins != prob.margins:
        raise ValueError("decomposition margins do not match the spectra multiplicities")
    m, n = prob.margins.m, prob.margins.n
    rs, cs = block_slices(m), block_slices(n)
    X = np.zeros((prob.n, prob.n))
    for i, r in enumerate(rs):
        for j, c in enumerate(cs):
            X[r, c] = dec.Q_block(i, j) @ dec.R_block(i, j).T
    return X


def random_decomposition(prob: QuadraticProblem, filling: PerfectFilling,
                         seed=None) -> CriticalDecomposition:
    rng = np.random.default_rng(seed)
    Q = [random_orthogonal(m, rng) for m in filling.margins.m]
    R = [random_orthogonal(n, rng) for n in filling.margins.n]
    return CriticalDecomposition(filling, Q, R)


def _orthonormal_columns(V: np.ndarray) -> np.ndarray:
    if V.shape[1] == 0:
        return V
    Q, Rf = np.linalg.qr(V)
    return Q * np.sign(np.where(np.diag(Rf) == 0, 1.0, np.diag(Rf)))


def decompose_critical(prob: QuadraticProblem, X, tol: float = 1e-8) -> CriticalDecomposition:
    """Recover a filling and ``(Q, R)`` with ``construct_critical(...) == X``.

    Eigenvalues of each diagonal block ``H_i`` of ``X B X^T`` are assigned to
    the ``b_j`` lying within a quarter of the minimal gap of ``b``.
    """
    X = _point(prob, X)
    check_orthogonal(X, max(tol, ORTHO_TOL))
    scale = prob.scale
    if criticality_defect(prob, X) > tol * scale:
        raise NumericalValidationError(
            f"X is not critical (defect {criticality_defect(prob, X):.3e})")
    b = np.array(prob.b.values)
    radius = prob.b.min_gap() / 4
    m, n = prob.margins.m, prob.margins.n
    rs, cs = block_slices(m), block_slices(n)
    H = X @ prob.B @ X.T
    eps: list[list[int]] = []
    qblocks: list[list[np.ndarray]] = []
    for i, r in enumerate(rs):
        Hi = (H[r, r] + H[r, r].T) / 2
        w, V = np.linalg.eigh(Hi)
        dist = np.abs(w[:, None] - b[None, :])
        label = np.argmin(dist, axis=1)
        bad = dist[np.arange(len(w)), label] >= radius
        if np.any(bad):
            raise NumericalValidationError(
                f"eigenvalues {w[bad]} of block H_{i + 1} are not near any b_j")
        row, blocks = [], []
        for j in range(len(b)):
            Vij = _orthonormal_columns(V[:, label == j])
            row.append(Vij.shape[1])
            blocks.append(Vij)
        eps.append(row)
        qblocks.append(blocks)
    try:
        filling = PerfectFilling(eps, prob.margins)
    except ValueError as exc:
        raise NumericalValidationError(f"recovered table is not a perfect filling: {eps}") from exc
    Q = [np.hstack(blocks) for blocks in qblocks]
    R = []
    for j, c in enumerate(cs):
        R.append(np.hstack([X[r, c].T @ qblocks[i][j] for i, r in enumerate(rs)]))
    dec = CriticalDecomposition(filling, Q, R)
    worst = max(ortho_residual(M) for M in Q + R if M.size)
    if worst > 1e3 * max(tol, 1e-12):
        raise NumericalValidationError(f"recovered blocks not orthogonal (residual {worst:.3e})")
    return dec


# --------------------------------------------------------------------------
# Hessian
# --------------------------------------------------------------------------

def _trace_pairs(G: np.ndarray, C: np.ndarray) -> np.ndarray:
    # Tr(G C[a, b]) for a stack C of shape (d, d, n, n)
    return np.einsum("ij,abji->ab", G, C)


def hessian_bilinear_quadratic(prob: QuadraticProblem, X) -> np.ndarray:
    """Raw ``H[a, b] = Tr(A X [E_a, [E_b, B]] X^T)``; symmetric only at critical X."""
    X = _point(prob, X)
    E = skew_basis_stack(prob.n)
    B = prob.B
    K = E @ B - B @ E  # [E_b, B]
    C = np.einsum("aij,bjk->abik", E, K) - np.einsum("bij,ajk->abik", K, E)
    G = X.T @ prob.A @ X
    return _trace_pairs(G, C)


def hessian_bilinear_quadratic_ddf(prob: QuadraticProblem, X) -> np.ndarray:
    """Same form from ``Tr(A X E [N, B] X^T + A X [N, B] E^T X^T)``."""
    X = _point(prob, X)
    E = skew_basis_stack(prob.n)
    B = prob.B
    K = E @ B - B @ E
    G = X.T @ prob.A @ X
    C = (np.einsum("aij,bjk->abik", E, K)
         + np.einsum("bij,akj->abik", K, E))
    return _trace_pairs(G, C)


def hessian_form_quadratic(prob: QuadraticProblem, X) -> QuadraticForm:
    H, defect = symmetrize(hessian_bilinear_quadratic(prob, X))
    return QuadraticForm(prob.n, H, defect)


def differential(prob: QuadraticProblem, X, M) -> float:
    """``(Df)(X)(M) = Tr(A M B X^T + A X B M^T)``."""
    X = _point(prob, X)
    M = np.asarray(M, dtype=float)
    A, B = prob.A, prob.B
    return float(np.trace(A @ M @ B @ X.T + A @ X @ B @ M.T))


def spm_hessian_diagonal(prob: QuadraticProblem, sp: SignedPermutation) -> np.ndarray:
    """Closed-form diagonal ``2 (B_pp - B_qq)(A_sq,sq - A_sp,sp)`` at ``S P_sigma``."""
    if sp.n != prob.n:
        raise ValueError("signed permutation size does not match problem")
    a, b = prob.a.diagonal(), prob.b.diagonal()
    s = sp.perm
    return np.array([2 * (b[p - 1] - b[q - 1]) * (a[s[q - 1] - 1] - a[s[p - 1] - 1])
                     for p, q in skew_indices(prob.n)])


# --------------------------------------------------------------------------
# Morse-Bott criteria for tangent vectors
# --------------------------------------------------------------------------

def _is_block_diagonal(S: np.ndarray, sizes, tol: float) -> bool:
    sl = block_slices(sizes)
    mask = np.ones(S.shape, dtype=bool)
    for s in sl:
        mask[s, s] = False
    off = np.max(np.abs(S[mask])) if mask.any() else 0.0
    asym = max((np.max(np.abs(S[s, s] - S[s, s].T)) if S[s, s].size else 0.0) for s in sl)
    return bool(off <= tol and asym <= tol)


def _is_symmetric(S: np.ndarray, tol: float) -> bool:
    return bool(np.max(np.abs(S - S.T)) <= tol)


def tangent_criteria_bott(prob: QuadraticProblem, X, M, tol: float = 1e-8) -> tuple[bool, ...]:
    """Evaluate the seven equivalent tests that ``M`` is tangent to the critical locus.

    Returns booleans for, in order: symmetry of ``AMBX^T + AXBM^T``; block form
    of ``MBX^T + XBM^T``; commutation with ``A``; the transported equation
    ``BX^TAM + BM^TAX = X^TAMB + M^TAXB``; symmetry of ``BX^TAM + BM^TAX``;
    block form of ``X^TAM + M^TAX``; and ``X^T M`` in the Hessian kernel.
    ``tol`` is relative to ``max|A| max|B| max|M|``.
    """
    X = _point(prob, X)
    M = _point(prob, M)
    mscale = max(float(np.max(np.abs(M))), 1.0) if M.size else 1.0
    if not is_tangent(X, M, tol * mscale):
        raise ValueError("M is not tangent to O(n) at X")
    A, B = prob.A, prob.B
    t = tol * prob.scale * mscale
    S2 = A @ M @ B @ X.T + A @ X @ B @ M.T
    W = M @ B @ X.T + X @ B @ M.T
    U = X.T @ A @ M + M.T @ A @ X
    T5 = B @ X.T @ A @ M + B @ M.T @ A @ X
    c2 = _is_symmetric(S2, t)
    c3 = _is_block_diagonal(W, prob.a.mults, t)
    c4 = bool(np.max(np.abs(S2 - (M @ B @ X.T @ A + X @ B @ M.T @ A))) <= t)
    c5 = bool(np.max(np.abs(T5 - (X.T @ A @ M @ B + M.T @ A @ X @ B))) <= t)
    c6 = _is_symmetric(T5, t)
    c7 = _is_block_diagonal(U, prob.b.mults, t)
    form = hessian_form_quadratic(prob, X)
    c8 = bool(np.max(np.abs(form.H @ skew_coordinates(X.T @ M)), initial=0.0) <= t)
    return (c2, c3, c4, c5, c6, c7, c8)


def critical_tangent(prob: QuadraticProblem, dec: CriticalDecomposition,
                     K: Sequence[np.ndarray], L: Sequence[np.ndarray]) -> np.ndarray:
    """Velocity of ``construct_critical`` along ``Q[i] exp(t K_i)``, ``R[j] exp(t L_j)``.

    ``K_i`` and ``L_j`` are skew; the result is tangent to the critical locus.
    """
    eps = dec.filling.eps
    s, t = len(eps), len(eps[0])
    Md = CriticalDecomposition(dec.filling, [q @ k for q, k in zip(dec.Q, K)],
                               [r @ l for r, l in zip(dec.R, L)])
    rs, cs = block_slices(prob.margins.m), block_slices(prob.margins.n)
    D = np.zeros((prob.n, prob.n))
    for i in range(s):
        for j in range(t):
            D[rs[i], cs[j]] = (Md.Q_block(i, j) @ dec.R_block(i, j).T
                               + dec.Q_block(i, j) @ Md.R_block(i, j).T)
    return D


def orbit_tangent(prob: QuadraticProblem, dec: CriticalDecomposition, P: dict) -> np.ndarray:
    """Image under the derivative of the assembly map of the O(eps)-orbit direction ``P``.

    ``P = {(i, j): skew eps_ij x eps_ij}``; the result is zero.
    """
    eps = dec.filling.eps
    s, t = len(eps), len(eps[0])
    rs, cs = block_slices(prob.margins.m), block_slices(prob.margins.n)
    D = np.zeros((prob.n, prob.n))
    for i in range(s):
        for j in range(t):
            Pij = P.get((i, j), np.zeros((eps[i][j], eps[i][j])))
            Qij, Rij = dec.Q_block(i, j), dec.R_block(i, j)
            D[rs[i], cs[j]] = (Qij @ Pij) @ Rij.T + Qij @ (Rij @ Pij).T
    return D


def spm_report(prob: QuadraticProblem, sp: SignedPermutation, rel_tol: float = 1e-7) -> dict:
    """Hessian diagnostics at a signed permutation matrix."""
    from .combinatorics import component_dimension, filling_index, filling_of_spm
    from .linalg import index_nullity, spm_matrix

    X = spm_matrix(sp)
    form = hessian_form_quadratic(prob, X)
    idx, nul = index_nullity(form, rel_tol=rel_tol)
    f = filling_of_spm(sp, prob.margins)
    closed = spm_hessian_diagonal(prob, sp)
    off = form.H - np.diag(np.diag(form.H))
    return {
        "signs": list(sp.signs),
        "perm": list(sp.perm),
        "filling": [list(r) for r in f.eps],
        "value": f_value(prob, X),
        "index": idx,
        "nullity": nul,
        "filling_index": filling_index(f),
        "component_dimension": component_dimension(f),
        "closed_form_max_diff": float(np.max(np.abs(closed - np.diag(form.H)), initial=0.0)),
        "offdiagonal_max": float(np.max(np.abs(off), initial=0.0)),
        "symmetry_defect": form.defect,
    }
