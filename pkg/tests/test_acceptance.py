"""Acceptance criteria, one test each; every test prints a PASS/FAIL line with its timing."""

import itertools
import time
from math import comb

import numpy as np
import pytest

from orthomorse import cli
from orthomorse import combinatorics as cb
from orthomorse import flow as fl
from orthomorse import linalg as la
from orthomorse import linear as li
from orthomorse import quadratic as qd
from orthomorse.verify import (
    fd_relative_error,
    geodesic_derivatives,
    partitions,
    problem_for,
    random_partition,
)


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail, elapsed, limit):
        within = elapsed < limit
        status = "PASS" if ok and within else "FAIL"
        with capsys.disabled():
            print(f"\n[acceptance {number}] {status}  {title}  ({detail}; {elapsed:.2f}s, limit {limit}s)")
        assert ok, detail
        assert within, f"took {elapsed:.2f}s, limit {limit}s"
    return emit


def test_1_betti_so3(report, capsys):
    t0 = time.perf_counter()
    code = cli.main(["betti", "--n", "3"])
    out = capsys.readouterr().out
    elapsed = time.perf_counter() - t0
    rows = [line.split(",") for line in out.strip().splitlines()[1:]]
    coeffs = tuple(int(r[1]) for r in rows)
    report(1, "betti --n 3 gives 1+t+t^2+t^3", code == 0 and coeffs == (1, 1, 1, 1),
           f"coefficients {coeffs}", elapsed, 1)


def test_2_frankel_identity(report):
    t0 = time.perf_counter()
    bad = [(n, i) for n in range(1, 13) for i in range(comb(n, 2) + 2)
           if 2 * cb.so_betti(i, n) != cb.group_betti_c(i, n)]
    bad += [(n, c.value) for n in range(1, 13) for c in cb.IotaConvention
            if not cb.frankel_report(n, c).ok]
    report(2, "2 b_i(n) = c_i(n) for n = 1..12", not bad, f"{len(bad)} mismatches",
           time.perf_counter() - t0, 10)


def test_3_morse_equality(report):
    t0 = time.perf_counter()
    reports = [li.morse_inequality_report(n) for n in range(1, 11)]
    so3 = li.morse_inequality_report(3)
    ok = all(r.ok for r in reports) and so3.lhs == so3.rhs == (1, 1, 1, 1)
    report(3, "Morse inequalities are equalities for n = 1..10", ok,
           f"SO(3): {so3.lhs} = {so3.rhs}", time.perf_counter() - t0, 10)


def test_4_index_correspondence(report):
    t0 = time.perf_counter()
    total, bad = 0, []
    for n in range(1, 5):
        for m, nn in itertools.product(partitions(n), repeat=2):
            prob = problem_for(m, nn)
            for sp in la.signed_permutations(n):
                X = la.spm_matrix(sp)
                idx, nul = la.index_nullity(qd.hessian_form_quadratic(prob, X), rel_tol=1e-7)
                f = cb.filling_of_spm(sp, prob.margins)
                total += 1
                if (idx, nul) != (cb.filling_index(f), cb.component_dimension(f)):
                    bad.append((m, nn, sp))
    report(4, "SPM index/nullity = filling index/component dimension, n <= 4", not bad,
           f"{total} points, {len(bad)} mismatches", time.perf_counter() - t0, 60)


def test_5_finite_differences(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = {"quadratic gradient": 0.0, "linear gradient": 0.0,
             "quadratic Hessian": 0.0, "linear Hessian": 0.0}
    for _ in range(1000):
        n = int(rng.integers(2, 6))
        E = la.random_skew(n, rng)
        X = la.random_orthogonal(n, rng)
        qp = problem_for(random_partition(n, rng), random_partition(n, rng), rng)
        lp = li.LinearProblem(rng.standard_normal((n, n)))
        for key, prob in (("quadratic gradient", qp), ("linear gradient", lp)):
            G = prob.gradient(X)
            d1, _ = geodesic_derivatives(prob.value, X, E)
            worst[key] = max(worst[key], fd_relative_error(d1, float(np.sum(G * (X @ E))), G, E))
        # Hessians at critical points: constructed for the quadratic, U S V^T for the linear
        fills = cb.enumerate_fillings(qp.margins)
        dec = qd.random_decomposition(qp, fills[rng.integers(len(fills))], rng)
        U, s, Vt = np.linalg.svd(lp.A)
        critical = ((qp, qd.construct_critical(qp, dec), "quadratic Hessian"),
                    (lp, U @ np.diag(rng.choice([-1.0, 1.0], n)) @ Vt, "linear Hessian"))
        En = E / np.linalg.norm(E)  # unit direction: fixed stencil step, comparable noise floor
        for prob, Xc, key in critical:
            _, d2 = geodesic_derivatives(prob.value, Xc, En)
            exact = prob.hessian(Xc)(En)
            scale = max(abs(exact), prob.scale)
            worst[key] = max(worst[key], abs(d2 - exact) / scale)
    ok = max(worst.values()) <= 1e-6
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    report(5, "analytic vs central differences, 1000 pairs, n <= 5", ok, detail,
           time.perf_counter() - t0, 30)


def test_6_round_trip(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    margins = [(m, nn) for n in range(1, 5) for m, nn in itertools.product(partitions(n), repeat=2)]
    worst, bad = 0.0, 0
    for trial in range(100):
        m, nn = margins[trial % len(margins)]
        prob = problem_for(m, nn, rng)
        fills = cb.enumerate_fillings(prob.margins)
        dec = qd.random_decomposition(prob, fills[rng.integers(len(fills))], rng)
        X = qd.construct_critical(prob, dec)
        dec2 = qd.decompose_critical(prob, X)
        bad += dec2.filling != dec.filling
        worst = max(worst, float(np.max(np.abs(qd.construct_critical(prob, dec2) - X))))
    report(6, "construct/decompose round trip, 100 decompositions, n <= 4",
           bad == 0 and worst <= 1e-8, f"max error {worst:.1e}, {bad} filling mismatches",
           time.perf_counter() - t0, 30)


def test_7_linear_index(report):
    t0 = time.perf_counter()
    bad = [(n, k) for n in range(1, 7) for k in range(n + 1)
           if la.index_nullity(li.hessian_form_linear(li.LinearProblem.trace(n),
                                                      li.reflection_point(k, n)))[0] != comb(n - k, 2)]
    report(7, "trace Hessian index at -I_k + I_(n-k) is C(n-k,2), n <= 6", not bad,
           f"{len(bad)} mismatches", time.perf_counter() - t0, 5)


def test_8_prop_main(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    devs = [fl.prop_main_deviation(fl.sample_level_set(n, rng)) for n in (4, 5, 6) for _ in range(1000)]
    worst = max(devs)
    report(8, "s t^-1 = r(pi) on 1000 level-set samples for n = 4, 5, 6",
           sum(d > 1e-9 for d in devs) == 0, f"max deviation {worst:.1e}",
           time.perf_counter() - t0, 30)


def test_9_flow_convergence(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    params = fl.FlowParams(record=False)
    prob = li.LinearProblem.corner(5)
    worst_nn, bad_nn = 0.0, 0
    for _ in range(200):
        X = fl.sample_level_set(5, rng)
        for direction, closed, label in ((fl.Direction.FORWARD, fl.fnn_target, "max"),
                                         (fl.Direction.BACKWARD, fl.fnn_source, "min")):
            tr = fl.flow(prob, X, params, direction)
            if not tr.converged:
                bad_nn += 1
                continue
            which, Q = fl.fnn_limit_component(tr.limit)
            bad_nn += which != label
            worst_nn = max(worst_nn, float(np.max(np.abs(Q - closed(X)))))
    worst_q, bad_q = 0.0, 0
    for _ in range(100):
        qp = problem_for((1,) * 4, (1,) * 4, rng)
        tr = fl.flow(qp, la.random_orthogonal(4, rng), params)
        if not tr.converged:
            bad_q += 1
            continue
        L = tr.limit
        S = np.round(L)
        is_spm = np.array_equal(np.abs(S).sum(0), np.ones(4)) and np.array_equal(np.abs(S).sum(1), np.ones(4))
        bad_q += not is_spm
        worst_q = max(worst_q, float(np.max(np.abs(L - S))))
    ok = bad_nn == 0 and worst_nn <= 1e-5 and bad_q == 0 and worst_q <= 1e-6
    report(9, "flow limits: X_nn n=5 (200 starts), distinct-spectra quadratic n=4 (100 starts)", ok,
           f"X_nn max dev {worst_nn:.1e} ({bad_nn} bad), SPM distance {worst_q:.1e} ({bad_q} bad)",
           time.perf_counter() - t0, 60)
