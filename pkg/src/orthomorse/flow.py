"""Gradient flows on O(n) and the source/target maps of ``f(X) = X_nn``.

The integrator is the Lie-Euler scheme ``X <- X expm(+-h X^T grad f(X))``;
``X^T grad f`` is skew, so each step stays on O(n) up to roundoff.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np
from scipy.linalg import expm

from .linalg import (
    NumericalValidationError,
    check_orthogonal,
    ortho_residual,
    project_orthogonal,
    random_orthogonal,
)

LEVEL_TOL = 1e-9


class FlowProblem(Protocol):
    def value(self, X) -> float: ...

    def gradient(self, X) -> np.ndarray: ...


class Direction(enum.Enum):
    FORWARD = 1
    BACKWARD = -1


@dataclass(frozen=True)
class FlowParams:
    step: float = 0.1
    grad_tol: float = 1e-10
    max_steps: int = 10**6
    reproject_every: int = 100
    min_step: float = 1e-12
    record: bool = True

    def __post_init__(self):
        if not (self.step > 0 and self.grad_tol > 0 and self.max_steps > 0
                and self.reproject_every > 0):
            raise ValueError("flow parameters must be positive")


@dataclass
class Trajectory:
    points: list = field(default_factory=list)
    values: list = field(default_factory=list)
    converged: bool = False
    limit: np.ndarray | None = None
    steps: int = 0
    grad_norm: float = np.inf
    max_ortho_residual: float = 0.0


def flow(problem: FlowProblem, X0, params: FlowParams = FlowParams(),
         direction: Direction = Direction.FORWARD) -> Trajectory:
    """Integrate ``dX/dtau = +-grad f(X)`` until ``max|grad f| <= grad_tol``.

    Steps that would break monotonicity of ``f`` (or, near a limit, fail to
    shrink the gradient) are halved; successful steps
    let the step size grow back towards ``params.step``. Running out of steps
    returns a trajectory with ``converged=False``.
    """
    direction = Direction(direction)
    sgn = float(direction.value)
    X = check_orthogonal(X0).copy()
    fval = problem.value(X)
    traj = Trajectory()

    def record(X, fval):
        if params.record:
            traj.points.append(X.copy())
            traj.values.append(fval)
        traj.max_ortho_residual = max(traj.max_ortho_residual, ortho_residual(X))

    record(X, fval)
    h = params.step
    G = problem.gradient(X)
    gnorm = float(np.max(np.abs(G)))
    k = 0
    while gnorm > params.grad_tol and k < params.max_steps:
        Omega = X.T @ G
        Omega = (Omega - Omega.T) / 2
        gfro = np.linalg.norm(G)
        while True:
            Xn = X @ expm(sgn * h * Omega)
            fn = problem.value(Xn)
            Gn = problem.gradient(Xn)
            slack = 1e-12 * max(1.0, abs(fval))
            gain = sgn * (fn - fval)
            # once the gain is at roundoff level, insist the gradient shrinks;
            # otherwise an overlong step can oscillate around the limit forever
            if gain >= -slack and (gain > 1e3 * slack or np.linalg.norm(Gn) <= gfro):
                break
            if h <= params.min_step:
                break
            h /= 2
        X, fval, G = Xn, fn, Gn
        k += 1
        if k % params.reproject_every == 0:
            X = project_orthogonal(X)
            fval = problem.value(X)
            G = problem.gradient(X)
        record(X, fval)
        h = min(2 * h, params.step)
        gnorm = float(np.max(np.abs(G)))
    traj.steps = k
    traj.grad_norm = gnorm
    traj.converged = gnorm <= params.grad_tol
    traj.limit = X if traj.converged else None
    if not params.record:
        traj.points.append(X.copy())
        traj.values.append(fval)
    return traj


# --------------------------------------------------------------------------
# f(X) = X_nn on SO(n)
# --------------------------------------------------------------------------

def J_matrix(n: int) -> np.ndarray:
    """``Diag(-1, 1, ..., 1)``."""
    J = np.eye(n)
    J[0, 0] = -1.0
    return J


def fnn_gradient(X) -> np.ndarray:
    """Gradient of ``X -> X_nn``: ``(e_n e_n^T - X[:, n] X[n, :]) / 2``."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if n < 2 or X.shape != (n, n):
        raise ValueError("fnn_gradient needs a square matrix of size >= 2")
    G = -np.outer(X[:, -1], X[-1, :])
    G[-1, -1] += 1.0
    return G / 2


def _level_point(X) -> np.ndarray:
    X = check_orthogonal(X)
    n = X.shape[0]
    if n < 3:
        raise ValueError("source/target maps need n >= 3")
    if abs(X[-1, -1]) > LEVEL_TOL:
        raise NumericalValidationError(f"X_nn = {X[-1, -1]:.3e} is not 0")
    return X


def right_column(X) -> np.ndarray:
    """``pi(X)``: the last column of ``X`` without its last entry."""
    return np.asarray(X, dtype=float)[:-1, -1].copy()


def rotation_to(w) -> np.ndarray:
    """An element of SO(len(w)) whose first column is the unit vector ``w``.

    Householder reflection taking ``e_1`` to ``w``, with the last column
    negated to restore determinant +1.
    """
    w = np.asarray(w, dtype=float)
    m = w.size
    if m < 2:
        raise ValueError("rotation_to needs dimension >= 2")
    w = w / np.linalg.norm(w)
    e1 = np.zeros(m)
    e1[0] = 1.0
    u = e1 - w
    nu = np.linalg.norm(u)
    if nu < 1e-15:
        return np.eye(m)
    u /= nu
    g = np.eye(m) - 2 * np.outer(u, u)
    g[:, -1] = -g[:, -1]
    return g


def _normalized_blocks(X):
    # rotate so that the right column becomes e_1, then read V (middle rows) and v
    X = _level_point(X)
    n = X.shape[0]
    g = rotation_to(right_column(X))
    Xr = np.zeros((n, n))
    Xr[:-1] = g.T @ X[:-1]
    Xr[-1] = X[-1]
    V = Xr[1:-1, :-1]
    v = Xr[-1, :-1]
    return g, V, v


def fnn_source(X) -> np.ndarray:
    """Backward-flow limit of ``X`` in the level set ``X_nn = 0``, as an element of SO(n-1).

    The minimum locus is identified with SO(n-1) via ``Q -> JQ (+) -1``.
    """
    g, V, v = _normalized_blocks(X)
    J = J_matrix(g.shape[0])
    return J @ g @ J @ np.vstack([-v, V])


def fnn_target(X) -> np.ndarray:
    """Forward-flow limit of ``X`` in the level set, as an element of SO(n-1) via ``Q -> Q (+) 1``."""
    g, V, v = _normalized_blocks(X)
    return g @ np.vstack([-v, V])


def reflection_r(w) -> np.ndarray:
    """``J (I - 2 w w^T)`` for the line spanned by ``w``."""
    w = np.asarray(w, dtype=float).ravel()
    nw = np.linalg.norm(w)
    if nw == 0:
        raise ValueError("reflection_r needs a nonzero vector")
    w = w / nw
    return J_matrix(w.size) @ (np.eye(w.size) - 2 * np.outer(w, w))


def prop_main_deviation(X) -> float:
    """Max-abs difference between ``s(X) t(X)^{-1}`` and ``r(pi(X))``."""
    s, t = fnn_source(X), fnn_target(X)
    return float(np.max(np.abs(s @ t.T - reflection_r(right_column(X)))))


def check_prop_main(X, tol: float = 1e-9) -> bool:
    return prop_main_deviation(X) <= tol


def sample_level_set(n: int, seed=None) -> np.ndarray:
    """Haar point of SO(n) rotated in the (n-1, n) plane so that ``X_nn = 0``."""
    rng = np.random.default_rng(seed)
    Y = random_orthogonal(n, rng, special=True)
    theta = np.arctan2(-Y[-1, -1], Y[-2, -1])
    c, s = np.cos(theta), np.sin(theta)
    G = np.eye(n)
    G[-2, -2], G[-2, -1] = c, -s
    G[-1, -2], G[-1, -1] = s, c
    X = G @ Y
    X[-1, -1] = 0.0  # exact zero up to roundoff
    return X


def fnn_limit_component(L, tol: float = 1e-6) -> tuple[str, np.ndarray]:
    """Classify a flow limit of ``X_nn`` and return its SO(n-1) coordinate.

    Returns ``("max", Q)`` for ``L = Q (+) 1`` and ``("min", Q)`` for ``L = JQ (+) -1``.
    """
    L = np.asarray(L, dtype=float)
    top = L[:-1, :-1]
    if abs(L[-1, -1] - 1) <= tol:
        return "max", top.copy()
    if abs(L[-1, -1] + 1) <= tol:
        return "min", J_matrix(top.shape[0]) @ top
    raise NumericalValidationError(f"L_nn = {L[-1, -1]} is not +-1")
