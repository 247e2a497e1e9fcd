import itertools
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orthomorse import flow as fl
from orthomorse import linalg as la
from orthomorse import linear as li
from orthomorse.verify import fd_relative_error, geodesic_derivatives


def test_value_examples():
    assert li.linear_value(li.LinearProblem.trace(4), np.eye(4)) == 4
    for n in range(1, 6):
        for k in range(n + 1):
            assert li.linear_value(li.LinearProblem.trace(n), li.reflection_point(k, n)) == n - 2 * k
    X = la.random_orthogonal(5, 0)
    assert li.linear_value(li.LinearProblem.corner(5), X) == X[-1, -1]


def test_shape_checks():
    with pytest.raises(ValueError):
        li.LinearProblem(np.ones((2, 3)))
    with pytest.raises(ValueError):
        li.linear_value(li.LinearProblem.trace(2), np.eye(3))


def test_gradient_examples():
    prob = li.LinearProblem.trace(4)
    assert not li.linear_gradient(prob, np.eye(4)).any()
    L = li.GrassmannPoint.span(np.random.default_rng(1).standard_normal((4, 2)))
    assert np.max(np.abs(li.linear_gradient(prob, li.critical_of_subspace(L)))) <= 1e-15


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_gradient_tangent_and_characterized(n, seed):
    rng = np.random.default_rng(seed)
    prob = li.LinearProblem(rng.standard_normal((n, n)))
    X = la.random_orthogonal(n, rng)
    G = li.linear_gradient(prob, X)
    assert la.is_tangent(X, G, 1e-12)
    # <grad f, M> = Df(X)(M) for every tangent M = X E
    for E in la.skew_basis_stack(n):
        assert np.sum(G * (X @ E)) == pytest.approx(np.sum(prob.A * (X @ E)), abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_gradient_finite_differences(n):
    rng = np.random.default_rng(n)
    prob = li.LinearProblem(rng.standard_normal((n, n)))
    for _ in range(4):
        X = la.random_orthogonal(n, rng)
        G = li.linear_gradient(prob, X)
        for E in la.skew_basis_stack(n):
            d1, _ = geodesic_derivatives(prob.value, X, E)
            assert fd_relative_error(d1, float(np.sum(G * (X @ E))), G, E) <= 1e-6


def test_critical_examples():
    prob = li.LinearProblem.trace(3)
    S = li.reflection_point(1, 3)
    assert li.is_critical_linear(prob, S)
    rng = np.random.default_rng(2)
    X = la.random_orthogonal(3, rng)
    while np.max(np.abs(X - X.T)) < 1e-3:
        X = la.random_orthogonal(3, rng)
    assert not li.is_critical_linear(prob, X)
    corner = li.LinearProblem.corner(4)
    assert li.is_critical_linear(corner, np.eye(4))
    assert li.is_critical_linear(corner, -np.eye(4))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_critical_iff_symmetric_for_trace(n, seed):
    rng = np.random.default_rng(seed)
    X = la.random_orthogonal(n, rng)
    prob = li.LinearProblem.trace(n)
    assert li.is_critical_linear(prob, X, 1e-9) == bool(np.max(np.abs(X - X.T)) <= 1e-9)


def test_grassmannian_examples():
    assert li.grassmannian_of_critical(np.eye(3)).k == 0
    L = li.grassmannian_of_critical(li.reflection_point(2, 3))
    assert L.k == 2
    assert np.allclose(L.projector(), np.diag([1.0, 1.0, 0.0]))
    with pytest.raises(la.NumericalValidationError):
        li.grassmannian_of_critical(la.random_orthogonal(3, 7))


def test_critical_of_subspace_examples():
    assert np.array_equal(li.critical_of_subspace(li.GrassmannPoint(3, np.zeros((3, 0)))), np.eye(3))
    J = li.critical_of_subspace(li.GrassmannPoint(4, np.eye(4)[:, :1]))
    assert np.array_equal(J, fl.J_matrix(4))
    assert np.array_equal(li.critical_of_subspace(li.GrassmannPoint(3, np.eye(3))), -np.eye(3))


def test_grassmann_point_validation():
    with pytest.raises(ValueError):
        li.GrassmannPoint(2, np.array([[1.0], [1.0]]))
    with pytest.raises(ValueError):
        li.GrassmannPoint.span(np.array([[1.0, 2.0], [1.0, 2.0]]))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 6), data=st.data())
def test_subspace_round_trip(n, data):
    k = data.draw(st.integers(0, n))
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    L = li.GrassmannPoint(n, la.random_orthogonal(n, rng)[:, :k])
    X = li.critical_of_subspace(L)
    assert np.allclose(X, X.T) and np.allclose(X @ X, np.eye(n))
    assert li.is_critical_linear(li.LinearProblem.trace(n), X, 1e-12)
    assert np.linalg.det(X) == pytest.approx((-1) ** k)
    L2 = li.grassmannian_of_critical(X)
    assert L2.k == k
    assert np.allclose(L2.projector(), L.projector(), atol=1e-9)
    # the reflection depends on the subspace only
    U = la.random_orthogonal(k, rng)
    assert np.allclose(li.critical_of_subspace(li.GrassmannPoint(n, L.basis @ U)), X, atol=1e-12)


@pytest.mark.parametrize("n,k", [(n, k) for n in range(1, 7) for k in range(n + 1)])
def test_trace_hessian_at_reflection(n, k):
    prob = li.LinearProblem.trace(n)
    form = li.hessian_form_linear(prob, li.reflection_point(k, n))
    H = form.H
    assert np.array_equal(H, np.diag(np.diag(H)))
    for c, (p, q) in enumerate(la.skew_indices(n)):
        want = 2 if q <= k else (-2 if p > k else 0)
        assert H[c, c] == pytest.approx(want)
    assert la.index_nullity(form) == (comb(n - k, 2), k * (n - k))
    assert li.linear_index_formula(k, n) == comb(n - k, 2)


def test_so3_identity_has_index_3():
    form = li.hessian_form_linear(li.LinearProblem.trace(3), np.eye(3))
    assert la.index_nullity(form)[0] == 3


def test_hessian_entries_match_definition():
    rng = np.random.default_rng(3)
    prob = li.LinearProblem(rng.standard_normal((4, 4)))
    X = la.random_orthogonal(4, rng)
    H = li.hessian_bilinear_linear(prob, X)
    E = la.skew_basis_stack(4)
    for a, b in itertools.product(range(len(E)), repeat=2):
        assert H[a, b] == pytest.approx(np.trace(prob.A.T @ X @ E[a] @ E[b]), abs=1e-12)


@pytest.mark.parametrize("n", range(1, 6))
def test_trace_kernel_dimension(n):
    rng = np.random.default_rng(n)
    prob = li.LinearProblem.trace(n)
    for k in range(n + 1):
        X = li.critical_of_subspace(li.GrassmannPoint(n, la.random_orthogonal(n, rng)[:, :k]))
        form = li.hessian_form_linear(prob, X)
        assert form.defect <= 1e-12
        assert la.index_nullity(form) == (comb(n - k, 2), k * (n - k))


def test_linear_hessian_second_derivative():
    rng = np.random.default_rng(4)
    for _ in range(20):
        n = int(rng.integers(2, 6))
        U, V = la.random_orthogonal(n, rng), la.random_orthogonal(n, rng)
        s = rng.uniform(0.5, 3.0, n)
        prob = li.LinearProblem(U @ np.diag(s) @ V.T)
        S = np.diag(rng.choice([-1.0, 1.0], n))
        X = U @ S @ V.T  # X A^T = U S diag(s) U^T is symmetric
        assert li.is_critical_linear(prob, X, 1e-12)
        E = la.random_skew(n, rng)
        E /= np.linalg.norm(E)
        _, d2 = geodesic_derivatives(prob.value, X, E)
        exact = li.hessian_form_linear(prob, X)(E)
        assert abs(d2 - exact) <= 1e-5 * max(abs(exact), prob.scale * float(np.sum(E * E)))


def test_morse_criterion_at_random_critical_points():
    rng = np.random.default_rng(5)
    for _ in range(30):
        n = int(rng.integers(1, 6))
        U, V = la.random_orthogonal(n, rng), la.random_orthogonal(n, rng)
        s = np.sort(rng.uniform(0.5, 3.0, n))
        prob = li.LinearProblem(U @ np.diag(s) @ V.T)
        X = U @ np.diag(rng.choice([-1.0, 1.0], n)) @ V.T
        assert la.index_nullity(li.hessian_form_linear(prob, X))[1] == 0


def test_repeated_singular_values_are_degenerate():
    prob = li.LinearProblem(np.diag([1.0, 1.0, 2.0]))
    assert la.index_nullity(li.hessian_form_linear(prob, np.diag([1.0, -1.0, 1.0])))[1] > 0


def test_morse_criterion_via_flow():
    rng = np.random.default_rng(6)
    for _ in range(10):
        n = int(rng.integers(2, 5))
        U, V = la.random_orthogonal(n, rng), la.random_orthogonal(n, rng)
        prob = li.LinearProblem(U @ np.diag(np.arange(1.0, n + 1)) @ V.T)
        tr = fl.flow(prob, la.random_orthogonal(n, rng), fl.FlowParams(record=False))
        assert tr.converged
        assert li.is_critical_linear(prob, tr.limit, 1e-8)
        assert la.index_nullity(li.hessian_form_linear(prob, tr.limit))[1] == 0


def test_morse_report_examples():
    rep = li.morse_inequality_report(3)
    assert rep.lhs == (1, 1, 1, 1) and rep.rhs == (1, 1, 1, 1)
    rep = li.morse_inequality_report(1)
    assert rep.lhs == (1,) and rep.rhs == (1,)


@pytest.mark.parametrize("n", range(1, 11))
def test_morse_report_equalities(n):
    assert li.morse_inequality_report(n).ok
