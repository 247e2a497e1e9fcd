"""Desk-scale property checks across all modules (backs the ``verify`` command)."""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from math import comb, factorial

import numpy as np
from scipy.linalg import expm

from . import combinatorics as cb
from . import flow as fl
from . import linalg as la
from . import linear as li
from . import quadratic as qd


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""
    seconds: float = 0.0


def partitions(n: int):
    """Compositions of ``n`` (ordered multiplicity vectors)."""
    if n == 0:
        yield ()
        return
    for k in range(1, n + 1):
        for rest in partitions(n - k):
            yield (k,) + rest


def random_partition(n: int, rng) -> tuple[int, ...]:
    parts = list(partitions(n))
    return parts[rng.integers(len(parts))]


def problem_for(m, n, rng=None) -> qd.QuadraticProblem:
    """Quadratic problem with the given multiplicities and increasing spectra."""
    if rng is None:
        a = np.arange(1, len(m) + 1, dtype=float)
        b = 1.5 * np.arange(1, len(n) + 1, dtype=float)
    else:
        a = np.cumsum(rng.uniform(0.5, 2.0, len(m))) - 1.0
        b = np.cumsum(rng.uniform(0.5, 2.0, len(n))) - 1.0
    return qd.QuadraticProblem(qd.Spectrum(a, m), qd.Spectrum(b, n))


def random_critical(prob, rng):
    fills = cb.enumerate_fillings(prob.margins)
    f = fills[rng.integers(len(fills))]
    dec = qd.random_decomposition(prob, f, rng)
    return qd.construct_critical(prob, dec), dec


def geodesic_derivatives(f, X, E, h1=1e-5, h2=1e-3):
    """Central differences of ``t -> f(X expm(t E))``: first (2-point) and second (5-point)."""
    g = lambda t: f(X @ expm(t * E))
    d1 = (g(h1) - g(-h1)) / (2 * h1)
    d2 = (-g(2 * h2) + 16 * g(h2) - 30 * g(0.0) + 16 * g(-h2) - g(-2 * h2)) / (12 * h2 * h2)
    return d1, d2


def fd_relative_error(fd: float, exact: float, G, E) -> float:
    """``|fd - exact|`` over ``max(|exact|, |grad f| |XE|)``; absolute when that scale vanishes."""
    scale = max(abs(exact), float(np.linalg.norm(G) * np.linalg.norm(E)))
    return abs(fd - exact) / (scale if scale > 1e-12 else 1.0)


# --------------------------------------------------------------------------
# matrix core
# --------------------------------------------------------------------------

def check_skew_basis(seed):
    n = 5
    E = la.skew_basis_stack(n)
    rank = np.linalg.matrix_rank(E.reshape(len(E), -1))
    skew = all(np.array_equal(e, -e.T) for e in E)
    return rank == comb(n, 2) and skew, f"rank {rank}"


def _ef_expected(p, q, u, v, n):
    # [E(p,q), F(u,v)] by cases
    if {p, q} == {u, v}:
        return 2 * la.diag_unit(q, n) - 2 * la.diag_unit(p, n)
    if not {p, q} & {u, v}:
        return np.zeros((n, n))
    if p == u:
        return la.sym_basis(q, v, n)
    if p == v:
        return la.sym_basis(q, u, n)
    if q == v:
        return -la.sym_basis(p, u, n)
    return -la.sym_basis(p, v, n)  # q == u


def check_commutator_table(seed):
    n = 5
    bad = 0
    for p, q in la.skew_indices(n):
        for u, v in itertools.permutations(range(1, n + 1), 2):
            got = la.commutator(la.skew_basis(p, q, n), la.sym_basis(u, v, n))
            bad += not np.array_equal(got, _ef_expected(p, q, u, v, n))
    return bad == 0, f"{bad} mismatches"


def check_permutation_conjugation(seed):
    n = 4
    bad = 0
    for perm in itertools.permutations(range(1, n + 1)):
        P = la.permutation_matrix(perm)
        for p, q in itertools.permutations(range(1, n + 1), 2):
            got = P @ la.sym_basis(p, q, n) @ P.T
            bad += not np.array_equal(got, la.sym_basis(perm[p - 1], perm[q - 1], n))
        for p in range(1, n + 1):
            bad += not np.array_equal(P @ la.diag_unit(p, n) @ P.T, la.diag_unit(perm[p - 1], n))
    return bad == 0, f"{bad} mismatches"


def check_spm_exact(seed):
    bad = sum(not np.array_equal((X := la.spm_matrix(sp)).T @ X, np.eye(sp.n))
              for n in range(1, 5) for sp in la.signed_permutations(n))
    return bad == 0, f"{bad} failures"


def check_tangent_translation(seed):
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(50):
        n = int(rng.integers(2, 7))
        X = la.random_orthogonal(n, rng)
        bad += sum(not la.is_tangent(X, X @ E, 1e-12) for E in la.skew_basis_stack(n))
    return bad == 0, f"{bad} failures"


# --------------------------------------------------------------------------
# combinatorics
# --------------------------------------------------------------------------

def check_permutation_fillings(seed):
    counts = [len(cb.enumerate_fillings(cb.Margins((1,) * n, (1,) * n))) for n in range(1, 7)]
    return counts == [factorial(n) for n in range(1, 7)], str(counts)


def check_filling_margins(seed):
    bad = total = 0
    for n in range(1, 6):
        for m in partitions(n):
            for nn in partitions(n):
                for f in cb.enumerate_fillings(cb.Margins(m, nn)):
                    A = f.array()
                    total += 1
                    bad += tuple(A.sum(1)) != m or tuple(A.sum(0)) != nn or (A < 0).any()
    return bad == 0, f"{total} fillings, {bad} bad"


def check_index_is_inversion(seed):
    mg = cb.Margins((1,) * 4, (1,) * 4)
    bad = sum(cb.filling_index(cb.filling_of_spm(la.SignedPermutation((1,) * 4, p), mg))
              != cb.inversion_stat(p) for p in itertools.permutations(range(1, 5)))
    return bad == 0, f"{bad} mismatches"


def check_cardinality_partition(seed):
    bad = 0
    for n in range(1, 11):
        total = cb.IntPolynomial()
        for k in range(n + 1):
            total = total + cb.grassmannian_poincare(k, n).shift(comb(k, 2))
        bad += total != cb.group_poincare(n)
    return bad == 0, f"{bad} failures"


def check_recursions(seed):
    bad = 0
    for n in range(2, 13):
        for i in range(comb(n, 2) + 2):
            b_prev = cb.so_betti(i + 1 - n, n - 1) if i + 1 - n >= 0 else 0
            c_prev = cb.group_betti_c(i + 1 - n, n - 1) if i + 1 - n >= 0 else 0
            bad += cb.so_betti(i, n) != cb.so_betti(i, n - 1) + b_prev
            bad += cb.group_betti_c(i, n) != cb.group_betti_c(i, n - 1) + c_prev
    return bad == 0, f"{bad} failures"


def check_morse_domination(seed):
    ok = all(cb.distinct_spectrum_morse_polynomial(n).dominates(cb.poincare_so(n) * 2)
             for n in range(1, 6))
    return ok, ""


def check_frankel(seed):
    bad = [(n, c.value) for n in range(1, 13) for c in cb.IotaConvention
           if not cb.frankel_report(n, c).ok]
    return not bad, f"failures: {bad}"


# --------------------------------------------------------------------------
# quadratic trace
# --------------------------------------------------------------------------

def check_quadratic_gradient(seed):
    rng = np.random.default_rng(seed)
    worst_t, worst_fd = 0.0, 0.0
    for _ in range(100):
        n = int(rng.integers(2, 6))
        prob = problem_for(random_partition(n, rng), (1,) * n, rng)
        X = la.random_orthogonal(n, rng)
        G = qd.f_gradient(prob, X)
        worst_t = max(worst_t, float(np.max(np.abs(G @ X.T + X @ G.T))))
        E = la.random_skew(n, rng)
        d1, _ = geodesic_derivatives(prob.value, X, E)
        an = float(np.sum(G * (X @ E)))
        worst_fd = max(worst_fd, fd_relative_error(d1, an, G, E))
    return worst_t < 1e-10 and worst_fd < 1e-6, f"tangent {worst_t:.1e}, fd {worst_fd:.1e}"


def check_construct_roundtrip(seed):
    rng = np.random.default_rng(seed)
    worst, bad = 0.0, 0
    for _ in range(50):
        n = int(rng.integers(1, 5))
        prob = problem_for(random_partition(n, rng),
                           random_partition(n, rng), rng)
        X, dec = random_critical(prob, rng)
        bad += not qd.is_critical_quadratic(prob, X, 1e-10 * prob.scale)
        d2 = qd.decompose_critical(prob, X)
        bad += d2.filling != dec.filling
        worst = max(worst, float(np.max(np.abs(qd.construct_critical(prob, d2) - X))))
    return bad == 0 and worst <= 1e-8, f"{bad} failures, max err {worst:.1e}"


def check_spm_index(seed):
    bad = total = 0
    for n in range(1, 4):
        for m in partitions(n):
            for nn in partitions(n):
                prob = problem_for(m, nn)
                for sp in la.signed_permutations(n):
                    r = qd.spm_report(prob, sp)
                    total += 1
                    bad += (r["index"], r["nullity"]) != (r["filling_index"], r["component_dimension"])
    return bad == 0, f"{total} points, {bad} mismatches"


def check_bott_agreement(seed):
    rng = np.random.default_rng(seed)
    bad = 0
    for trial in range(60):
        n = int(rng.integers(2, 6))
        prob = problem_for(random_partition(n, rng),
                           random_partition(n, rng), rng)
        X, dec = random_critical(prob, rng)
        if trial % 2:
            K = [la.random_skew(m, rng) for m in prob.a.mults]
            L = [la.random_skew(k, rng) for k in prob.b.mults]
            M = qd.critical_tangent(prob, dec, K, L)
        else:
            M = X @ la.random_skew(n, rng)
        crit = qd.tangent_criteria_bott(prob, X, M)
        bad += len(set(crit)) != 1 or (trial % 2 == 1 and not crit[0])
    return bad == 0, f"{bad} disagreements"


def check_hessian_symmetry(seed):
    rng = np.random.default_rng(seed)
    worst_crit, worst_remark = 0.0, 0.0
    for _ in range(30):
        n = int(rng.integers(2, 6))
        prob = problem_for((1,) * n, (1,) * n, rng)
        X, _ = random_critical(prob, rng)
        worst_crit = max(worst_crit, qd.hessian_form_quadratic(prob, X).defect)
        Y = la.random_orthogonal(n, rng)
        H = qd.hessian_bilinear_quadratic(prob, Y)
        E = la.skew_basis_stack(n)
        for a, b in itertools.combinations(range(len(E)), 2):
            D = qd.differential(prob, Y, Y @ la.commutator(E[a], E[b]))
            worst_remark = max(worst_remark, abs(H[a, b] - H[b, a] - D))
    return worst_crit <= 1e-9 and worst_remark <= 1e-8, \
        f"critical defect {worst_crit:.1e}, remark {worst_remark:.1e}"


# --------------------------------------------------------------------------
# linear trace
# --------------------------------------------------------------------------

def check_linear_gradient(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 6))
        prob = li.LinearProblem(rng.standard_normal((n, n)))
        X = la.random_orthogonal(n, rng)
        G = li.linear_gradient(prob, X)
        worst = max(worst, float(np.max(np.abs(G @ X.T + X @ G.T))))
    return worst < 1e-12, f"{worst:.1e}"


def check_trace_kernel(seed):
    rng = np.random.default_rng(seed)
    bad = 0
    for n in range(1, 6):
        prob = li.LinearProblem.trace(n)
        for k in range(n + 1):
            V = la.random_orthogonal(n, rng)[:, :k]
            X = li.critical_of_subspace(li.GrassmannPoint(n, V))
            idx, nul = la.index_nullity(li.hessian_form_linear(prob, X))
            bad += (idx, nul) != (comb(n - k, 2), k * (n - k))
    return bad == 0, f"{bad} failures"


def check_linear_index(seed):
    bad = sum(la.index_nullity(li.hessian_form_linear(li.LinearProblem.trace(n),
                                                      li.reflection_point(k, n)))[0] != comb(n - k, 2)
              for n in range(1, 7) for k in range(n + 1))
    return bad == 0, f"{bad} failures"


def check_subspace_basis_invariance(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(2, 6))
        k = int(rng.integers(0, n + 1))
        V = la.random_orthogonal(n, rng)[:, :k]
        U = la.random_orthogonal(k, rng)
        X1 = li.critical_of_subspace(li.GrassmannPoint(n, V))
        X2 = li.critical_of_subspace(li.GrassmannPoint(n, V @ U))
        worst = max(worst, float(np.max(np.abs(X1 - X2))))
    return worst < 1e-12, f"{worst:.1e}"


def check_linear_morse(seed):
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(8):
        n = int(rng.integers(2, 5))
        U, V = la.random_orthogonal(n, rng), la.random_orthogonal(n, rng)
        prob = li.LinearProblem(U @ np.diag(np.arange(1.0, n + 1)) @ V.T)
        tr = fl.flow(prob, la.random_orthogonal(n, rng), fl.FlowParams(record=False))
        if not tr.converged:
            bad += 1
            continue
        bad += la.index_nullity(li.hessian_form_linear(prob, tr.limit))[1] != 0
    return bad == 0, f"{bad} failures"


def check_morse_report(seed):
    bad = [n for n in range(1, 11) if not li.morse_inequality_report(n).ok]
    return not bad, f"failures: {bad}"


# --------------------------------------------------------------------------
# flows
# --------------------------------------------------------------------------

def check_fnn_flows(seed):
    rng = np.random.default_rng(seed)
    worst, bad = 0.0, 0
    for _ in range(10):
        n = int(rng.integers(3, 7))
        prob = li.LinearProblem.corner(n)
        X = fl.sample_level_set(n, rng)
        for direction, closed in ((fl.Direction.FORWARD, fl.fnn_target),
                                  (fl.Direction.BACKWARD, fl.fnn_source)):
            tr = fl.flow(prob, X, fl.FlowParams(), direction)
            vals = np.asarray(tr.values) * direction.value
            bad += (not tr.converged) or bool(np.any(np.diff(vals) < -1e-12))
            bad += tr.max_ortho_residual > 1e-8
            if tr.converged:
                _, Q = fl.fnn_limit_component(tr.limit)
                worst = max(worst, float(np.max(np.abs(Q - closed(X)))))
    return bad == 0 and worst <= 1e-5, f"{bad} failures, max dev {worst:.1e}"


def check_quadratic_flows(seed):
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(10):
        n = int(rng.integers(2, 5))
        prob = problem_for((1,) * n, (1,) * n, rng)
        tr = fl.flow(prob, la.random_orthogonal(n, rng), fl.FlowParams(record=False))
        if not tr.converged:
            bad += 1
            continue
        L = tr.limit
        S = np.round(L)
        if np.max(np.abs(L - S)) > 1e-6:
            bad += 1
            continue
        perm = tuple(int(np.argmax(np.abs(S[:, c]))) + 1 for c in range(n))
        signs = tuple(int(S[perm[c] - 1, c]) for c in range(n))
        sp = la.SignedPermutation(np.array(signs)[np.argsort(perm)], perm)
        idx, _ = la.index_nullity(qd.hessian_form_quadratic(prob, L))
        bad += idx != cb.filling_index(cb.filling_of_spm(sp, prob.margins))
    return bad == 0, f"{bad} failures"


def check_prop_main(seed):
    rng = np.random.default_rng(seed)
    worst = max(fl.prop_main_deviation(fl.sample_level_set(n, rng))
                for n in (4, 5, 6) for _ in range(100))
    return worst <= 1e-9, f"max dev {worst:.1e}"


CHECKS = [
    ("matrix-core: skew basis independent", check_skew_basis),
    ("matrix-core: [E, F] commutator table (n=5)", check_commutator_table),
    ("matrix-core: P F P^T and P D P^T over S_4", check_permutation_conjugation),
    ("matrix-core: SPMs exactly orthogonal", check_spm_exact),
    ("matrix-core: X E tangent at X", check_tangent_translation),
    ("combinatorics: all-1 margins give n! fillings", check_permutation_fillings),
    ("combinatorics: fillings satisfy margins", check_filling_margins),
    ("combinatorics: filling index = inversion statistic on S_4", check_index_is_inversion),
    ("combinatorics: subsets partitioned by cardinality", check_cardinality_partition),
    ("combinatorics: b/c recursions n<=12", check_recursions),
    ("combinatorics: Morse polynomial dominates 2 p_n, n<=5", check_morse_domination),
    ("combinatorics: 2 b_i(n) = c_i(n), n<=12, both conventions", check_frankel),
    ("quadratic: gradient tangent and matches finite differences", check_quadratic_gradient),
    ("quadratic: construct/decompose round trip", check_construct_roundtrip),
    ("quadratic: SPM index/nullity = filling index/dimension, n<=3", check_spm_index),
    ("quadratic: seven tangent criteria agree", check_bott_agreement),
    ("quadratic: Hessian symmetry and asymmetry defect", check_hessian_symmetry),
    ("linear: gradient tangent", check_linear_gradient),
    ("linear: trace Hessian index C(n-k,2), kernel k(n-k)", check_trace_kernel),
    ("linear: index at -I_k + I_(n-k), n<=6", check_linear_index),
    ("linear: reflection independent of basis", check_subspace_basis_invariance),
    ("linear: distinct AA^T gives nondegenerate limits", check_linear_morse),
    ("linear: Morse inequalities are equalities, n<=10", check_morse_report),
    ("flow: X_nn flows match closed-form source/target", check_fnn_flows),
    ("flow: quadratic limits are SPMs with filling index", check_quadratic_flows),
    ("flow: s t^-1 = r(pi) on level set samples", check_prop_main),
]


def run_all(seed: int = 0) -> list[CheckResult]:
    results = []
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            ok, detail = fn(seed)
        except Exception as exc:  # report, don't abort the suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail, time.perf_counter() - t0))
    return results
