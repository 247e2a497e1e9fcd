"""Linear functions ``f(X) = Tr(A^T X)`` on O(n) and the trace function ``A = I``."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .combinatorics import DegreeComparison, IntPolynomial, grassmannian_poincare, so_betti
from .linalg import (
    NumericalValidationError,
    QuadraticForm,
    as_matrix,
    skew_basis_stack,
    symmetrize,
)

PM_ONE_TOL = 1e-6


@dataclass(frozen=True)
class LinearProblem:
    A: np.ndarray

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        if A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got {A.shape}")
        object.__setattr__(self, "A", A)

    @classmethod
    def trace(cls, n: int) -> "LinearProblem":
        return cls(np.eye(n))

    @classmethod
    def corner(cls, n: int) -> "LinearProblem":
        """``f(X) = X_nn``."""
        A = np.zeros((n, n))
        A[-1, -1] = 1.0
        return cls(A)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def scale(self) -> float:
        return max(1.0, float(np.max(np.abs(self.A))))

    def value(self, X) -> float:
        return linear_value(self, X)

    def gradient(self, X) -> np.ndarray:
        return linear_gradient(self, X)

    def hessian(self, X) -> QuadraticForm:
        return hessian_form_linear(self, X)


def _point(prob: LinearProblem, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape != prob.A.shape:
        raise ValueError(f"X has shape {X.shape}, expected {prob.A.shape}")
    return X


def linear_value(prob: LinearProblem, X) -> float:
    X = _point(prob, X)
    return float(np.sum(prob.A * X))


def linear_gradient(prob: LinearProblem, X) -> np.ndarray:
    """``(A - X A^T X) / 2``, the projection of ``A`` onto the tangent space at X."""
    X = _point(prob, X)
    A = prob.A
    return 0.5 * (A - X @ A.T @ X)


def is_critical_linear(prob: LinearProblem, X, tol: float = 1e-9) -> bool:
    X = _point(prob, X)
    S = X @ prob.A.T
    return bool(np.max(np.abs(S - S.T)) <= tol)


@dataclass(frozen=True)
class GrassmannPoint:
    """A subspace of R^n given by an orthonormal basis (columns)."""

    n: int
    basis: np.ndarray

    def __post_init__(self):
        V = np.asarray(self.basis, dtype=float).reshape(self.n, -1)
        k = V.shape[1]
        if k > self.n:
            raise ValueError("more basis vectors than the ambient dimension")
        if k and np.max(np.abs(V.T @ V - np.eye(k))) > 1e-10:
            raise ValueError("basis columns are not orthonormal")
        object.__setattr__(self, "basis", V)

    @classmethod
    def span(cls, vectors) -> "GrassmannPoint":
        """Orthonormalize the columns of ``vectors``."""
        V = np.asarray(vectors, dtype=float)
        n = V.shape[0]
        if V.ndim == 1:
            V = V[:, None]
        if V.shape[1] == 0:
            return cls(n, np.zeros((n, 0)))
        Q, R = np.linalg.qr(V)
        if np.min(np.abs(np.diag(R))) < 1e-12:
            raise ValueError("vectors are linearly dependent")
        return cls(n, Q)

    @property
    def k(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T


def grassmannian_of_critical(X, tol: float = 1e-9) -> GrassmannPoint:
    """The (-1)-eigenspace of a symmetric orthogonal ``X``."""
    X = as_matrix(X, "X")
    if np.max(np.abs(X - X.T), initial=0.0) > tol:
        raise NumericalValidationError("X is not symmetric")
    n = X.shape[0]
    w, V = np.linalg.eigh((X + X.T) / 2)
    minus = np.abs(w + 1) < PM_ONE_TOL
    plus = np.abs(w - 1) < PM_ONE_TOL
    if not np.all(minus | plus):
        raise NumericalValidationError(f"eigenvalues {w[~(minus | plus)]} are not near +-1")
    Q, _ = np.linalg.qr(V[:, minus]) if minus.any() else (np.zeros((n, 0)), None)
    return GrassmannPoint(n, Q)


def critical_of_subspace(L: GrassmannPoint) -> np.ndarray:
    """``I - 2 P_L``: -1 on ``L`` and +1 on its orthogonal complement."""
    return np.eye(L.n) - 2 * L.projector()


def reflection_point(k: int, n: int) -> np.ndarray:
    """``-I_k (+) I_{n-k}``."""
    return np.diag(np.r_[-np.ones(k), np.ones(n - k)])


def hessian_bilinear_linear(prob: LinearProblem, X) -> np.ndarray:
    """Raw ``H[a, b] = Tr(A^T X E_a E_b)``."""
    X = _point(prob, X)
    E = skew_basis_stack(prob.n)
    G = prob.A.T @ X
    # Tr(G E_a E_b) = sum_{ijk} G_ij E_a[j,k] E_b[k,i]
    return np.einsum("ij,ajk,bki->ab", G, E, E)


def hessian_form_linear(prob: LinearProblem, X) -> QuadraticForm:
    H, defect = symmetrize(hessian_bilinear_linear(prob, X))
    return QuadraticForm(prob.n, H, defect)


def linear_index_formula(k: int, n: int) -> int:
    return comb(n - k, 2)


def morse_inequality_report(n: int) -> DegreeComparison:
    """Compare ``b_i(n)`` with ``sum_k c_{i - iota(2k)}(2k, n)``, ``iota(2k) = C(n-2k, 2)``."""
    rhs = IntPolynomial()
    for k2 in range(0, n + 1, 2):
        rhs = rhs + grassmannian_poincare(k2, n).shift(comb(n - k2, 2))
    length = max(comb(n, 2) + 1, len(rhs))
    return DegreeComparison(n, tuple(so_betti(i, n) for i in range(length)),
                            tuple(rhs[i] for i in range(length)), "morse")
