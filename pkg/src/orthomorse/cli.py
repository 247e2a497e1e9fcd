"""Command-line entry point.

Exit codes: 0 on success, 1 on bad arguments or unreadable input, 2 when a
numerical validation fails (a point that is not orthogonal or not critical,
an unclassifiable flow limit, a failed property).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from math import comb

import numpy as np

from . import combinatorics as cb
from . import flow as fl
from . import linalg as la
from . import linear as li
from . import quadratic as qd
from .fileio import dumps, margins_from_json, matrix_from_json, matrix_to_json, read_json
from .verify import run_all

EIG_GROUP_TOL = 1e-9


class UsageError(Exception):
    """Bad arguments or input files (exit code 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _load(path, reader=None):
    try:
        obj = read_json(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc
    if reader is None:
        return obj
    try:
        return reader(obj)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _filling_json(f: cb.PerfectFilling) -> dict:
    return {"eps": [list(r) for r in f.eps], "index": cb.filling_index(f),
            "component_dimension": cb.component_dimension(f)}


def _rng(args) -> np.random.Generator:
    return np.random.default_rng(args.seed)


# --------------------------------------------------------------------------
# spectra input
# --------------------------------------------------------------------------

def _group_sorted(w, tol: float) -> tuple[list[float], list[int]]:
    values, mults = [], []
    for x in w:
        if values and abs(x - values[-1]) <= tol:
            mults[-1] += 1
        else:
            values.append(float(x))
            mults.append(1)
    return values, mults


def reduce_operator(obj) -> tuple[qd.Spectrum, np.ndarray, dict]:
    """Reduce one side of a spectra file to a sorted spectrum.

    ``obj`` is either ``{"values", "mults"}`` (any order; equal values merge)
    or a matrix object holding a symmetric matrix. Returns the spectrum, an
    orthogonal ``U`` with ``input = U diag(spectrum) U^T``, and a record of
    what was done.
    """
    if "values" in obj:
        vals = [float(v) for v in obj["values"]]
        mults = [int(m) for m in obj.get("mults", [1] * len(vals))]
        if len(vals) != len(mults) or not vals:
            raise ValueError("values and mults must be nonempty and of equal length")
        if any(m <= 0 for m in mults) or not np.all(np.isfinite(vals)):
            raise ValueError("multiplicities must be positive and values finite")
        diag = np.repeat(vals, mults)
        order = np.argsort(diag, kind="stable")
        values, ms = _group_sorted(diag[order], 0.0)
        value_order = sorted(range(len(vals)), key=vals.__getitem__)
        U = np.eye(diag.size)[:, order]
        return qd.Spectrum(values, ms), U, {"source": "spectrum",
                                            "permutation": [int(i) for i in value_order]}
    M = matrix_from_json(obj)
    if M.shape[0] != M.shape[1]:
        raise ValueError("operator matrix must be square")
    if np.max(np.abs(M - M.T), initial=0.0) > 1e-12 * max(1.0, float(np.max(np.abs(M), initial=0.0))):
        raise ValueError("operator matrix must be symmetric")
    w, U = np.linalg.eigh((M + M.T) / 2)
    tol = EIG_GROUP_TOL * max(1.0, float(np.max(np.abs(w))))
    values, ms = _group_sorted(w, tol)
    # grouped values are replaced by their mean so the reduced problem is exact
    means, start = [], 0
    for m in ms:
        means.append(float(np.mean(w[start:start + m])))
        start += m
    return qd.Spectrum(means, ms), U, {"source": "matrix", "eigenvalues": w}


def load_spectra(path) -> tuple[qd.QuadraticProblem, np.ndarray, np.ndarray, dict]:
    def reader(obj):
        sides = []
        for lower, upper in (("a", "A"), ("b", "B")):
            part = obj.get(lower, obj.get(upper))
            if part is None:
                raise ValueError(f"missing '{lower}' (or '{upper}')")
            sides.append(reduce_operator(part))
        (sa, Ua, ra), (sb, Ub, rb) = sides
        return qd.QuadraticProblem(sa, sb), Ua, Ub, {"a": ra, "b": rb}

    return _load(path, reader)


def _spectrum_json(s: qd.Spectrum) -> dict:
    return {"values": list(s.values), "mults": list(s.mults)}


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_fillings(args) -> str:
    margins = _load(args.margins, margins_from_json)
    fills = cb.enumerate_fillings(margins)
    return dumps({"seed": args.seed, "margins": {"m": list(margins.m), "n": list(margins.n)},
                  "count": len(fills), "fillings": [_filling_json(f) for f in fills]})


def cmd_betti(args) -> str:
    n = args.n
    b, c = cb.poincare_so(n), cb.group_poincare(n)
    length = max(len(b), len(c))
    rows = [(i, b[i], c[i], 2 * b[i] == c[i]) for i in range(length)]
    if args.format == "json":
        return dumps({"seed": args.seed, "n": n, "rows": [
            {"i": i, "b_i": bi, "c_i": ci, "frankel_ok": ok} for i, bi, ci, ok in rows]})
    return _csv(["i", "b_i", "c_i", "frankel_ok", "seed"],
                [(i, bi, ci, str(ok).lower(), args.seed) for i, bi, ci, ok in rows])


def cmd_frankel(args) -> str:
    rep = cb.frankel_report(args.n, cb.IotaConvention(args.iota))
    if args.format == "json":
        return dumps({"seed": args.seed, "n": args.n, "iota": args.iota, "ok": rep.ok, "rows": [
            {"i": i, "lhs": a, "rhs": b, "equal": e} for i, a, b, e in rep.rows()]})
    return _csv(["i", "two_b_i", "rhs", "equal", "seed"],
                [(i, a, b, str(e).lower(), args.seed) for i, a, b, e in rep.rows()])


def cmd_critical(args) -> str:
    prob, Ua, Ub, record = load_spectra(args.spectra)
    fills = cb.enumerate_fillings(prob.margins)
    a, b = np.array(prob.a.values), np.array(prob.b.values)
    out = {
        "seed": args.seed,
        "n": prob.n,
        "a": _spectrum_json(prob.a),
        "b": _spectrum_json(prob.b),
        "reduction": record,
        "components": [dict(_filling_json(f), value=float(a @ f.array() @ b)) for f in fills],
    }
    if args.all_spms:
        out["spms"] = [qd.spm_report(prob, sp) for sp in la.signed_permutations(prob.n)]
    if args.decompose:
        X = _load(args.decompose, matrix_from_json)
        if X.shape != (prob.n, prob.n):
            raise UsageError(f"X is {X.shape[0]}x{X.shape[1]}, expected {prob.n}x{prob.n}")
        Xr = Ua.T @ la.check_orthogonal(X) @ Ub
        dec = qd.decompose_critical(prob, Xr)
        idx, nul = la.index_nullity(qd.hessian_form_quadratic(prob, Xr))
        out["decomposition"] = {
            "reduced_X": matrix_to_json(Xr),
            "filling": _filling_json(dec.filling),
            "Q": [matrix_to_json(q) for q in dec.Q],
            "R": [matrix_to_json(r) for r in dec.R],
            "reconstruction_error": float(np.max(np.abs(qd.construct_critical(prob, dec) - Xr))),
            "hessian_index": idx,
            "hessian_nullity": nul,
        }
    return dumps(out)


def _linear_point_report(prob: li.LinearProblem, X) -> dict:
    X = la.check_orthogonal(X)
    crit = li.is_critical_linear(prob, X, 1e-9 * prob.scale)
    rep = {"X": matrix_to_json(X), "value": li.linear_value(prob, X),
           "gradient_max": float(np.max(np.abs(li.linear_gradient(prob, X)))), "critical": crit}
    if crit:
        idx, nul = la.index_nullity(li.hessian_form_linear(prob, X))
        rep.update(index=idx, nullity=nul)
        if np.allclose(prob.A, np.eye(prob.n), atol=1e-12):
            k = li.grassmannian_of_critical(X).k
            rep.update(grassmann_k=k, formula_index=comb(prob.n - k, 2),
                       formula_nullity=k * (prob.n - k))
    return rep


def cmd_linear(args) -> str:
    out: dict = {"seed": args.seed}
    if args.A is None and (args.X or args.grassmann is not None):
        raise UsageError("--X and --grassmann need --A")
    if args.A is None and args.morse_report is None:
        raise UsageError("nothing to do: give --A and/or --morse-report")
    if args.A is not None:
        prob = li.LinearProblem(_load(args.A, matrix_from_json))
        out["A"] = matrix_to_json(prob.A)
        if args.X:
            X = _load(args.X, matrix_from_json)
            if X.shape != prob.A.shape:
                raise UsageError("X and A have different shapes")
            out["point"] = _linear_point_report(prob, X)
        elif args.grassmann is not None:
            if not 0 <= args.grassmann <= prob.n:
                raise UsageError(f"--grassmann must lie in 0..{prob.n}")
            out["point"] = _linear_point_report(prob, li.reflection_point(args.grassmann, prob.n))
        else:
            out["point"] = _linear_point_report(prob, np.eye(prob.n))
    if args.morse_report is not None:
        rep = li.morse_inequality_report(args.morse_report)
        out["morse_report"] = {"n": rep.n, "ok": rep.ok, "rows": [
            {"i": i, "b_i": a, "rhs": b, "equal": e} for i, a, b, e in rep.rows()]}
    return dumps(out)


def _classify_flow(kind: str, prob, L) -> dict:
    if kind == "nn":
        which, Q = fl.fnn_limit_component(L)
        return {"component": which, "Q": matrix_to_json(Q)}
    if kind == "trace":
        return {"grassmann_k": li.grassmannian_of_critical(L, 1e-6).k}
    dec = qd.decompose_critical(prob, L, tol=1e-6)
    return {"filling": _filling_json(dec.filling)}


def cmd_flow(args) -> str:
    rng = _rng(args)
    direction = fl.Direction[args.direction.upper()]
    if args.f == "quad":
        if not args.spectra:
            raise UsageError("--f quad needs --spectra")
        prob, _, _, _ = load_spectra(args.spectra)
        if args.n is not None and args.n != prob.n:
            raise UsageError(f"--n {args.n} does not match the spectra size {prob.n}")
        n = prob.n
    else:
        if args.n is None or args.n < 1:
            raise UsageError("--n must be a positive integer")
        n = args.n
        if args.f == "nn":
            if n < 3:
                raise UsageError("--f nn needs n >= 3")
            prob = li.LinearProblem.corner(n)
        else:
            prob = li.LinearProblem.trace(n)
    params = fl.FlowParams(step=args.step, grad_tol=args.grad_tol, max_steps=args.max_steps,
                           record=False)
    trajectories = []
    for _ in range(args.count):
        X0 = fl.sample_level_set(n, rng) if args.f == "nn" else la.random_orthogonal(n, rng)
        tr = fl.flow(prob, X0, params, direction)
        item = {"start": matrix_to_json(X0), "converged": tr.converged, "steps": tr.steps,
                "grad_norm": tr.grad_norm, "value": tr.values[-1],
                "max_ortho_residual": tr.max_ortho_residual}
        if tr.converged:
            L = tr.limit
            idx, nul = la.index_nullity(prob.hessian(L))
            item.update(limit=matrix_to_json(L), index=idx, nullity=nul,
                        classification=_classify_flow(args.f, prob, L))
            if args.f == "nn":
                closed = fl.fnn_target(X0) if direction is fl.Direction.FORWARD else fl.fnn_source(X0)
                _, Q = fl.fnn_limit_component(L)
                item["closed_form_deviation"] = float(np.max(np.abs(Q - closed)))
        trajectories.append(item)
    return dumps({"seed": args.seed, "f": args.f, "n": n, "direction": args.direction,
                  "count": args.count, "trajectories": trajectories})


def cmd_prop_main(args) -> tuple[str, int]:
    if args.n < 3:
        raise UsageError("--n must be at least 3")
    rng = _rng(args)
    devs = [fl.prop_main_deviation(fl.sample_level_set(args.n, rng)) for _ in range(args.samples)]
    failed = sum(d > args.tol for d in devs)
    out = {"seed": args.seed, "n": args.n, "samples": args.samples, "tol": args.tol,
           "passed": len(devs) - failed, "failed": failed,
           "max_deviation": max(devs, default=0.0)}
    return dumps(out), (2 if failed else 0)


def cmd_verify(args) -> tuple[str, int]:
    results = run_all(args.seed)
    lines = [f"seed {args.seed}"]
    lines += [f"{'PASS' if r.ok else 'FAIL'}  {r.name}  [{r.detail}]" for r in results]
    failed = sum(not r.ok for r in results)
    lines.append(f"{len(results) - failed}/{len(results)} properties passed")
    return "\n".join(lines) + "\n", (2 if failed else 0)


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {v}")
    return v


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative: {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="orthomorse",
                description="Critical loci, Hessian indices, gradient flows and Betti-number "
                            "combinatorics of trace functions on O(n).")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_, *, seed_required=False, fmt=False):
        sp = sub.add_parser(name, help=help_, description=help_)
        if seed_required:
            sp.add_argument("--seed", type=_nonneg_int, required=True,
                            help="random seed (required; recorded in the output)")
        else:
            sp.add_argument("--seed", type=_nonneg_int, default=None,
                            help="recorded in the output; this command draws no random numbers")
        if fmt:
            sp.add_argument("--format", choices=("csv", "json"), default="csv",
                            help="output format (default csv)")
        return sp

    sp = add("fillings", "Enumerate perfect fillings with their index and component dimension.")
    sp.add_argument("--margins", required=True, help='JSON file {"m": [...], "n": [...]}')
    sp.set_defaults(func=cmd_fillings)

    sp = add("betti", "Mod-2 Betti numbers b_i of SO(n), counts c_i for O(n), and 2 b_i = c_i.",
             fmt=True)
    sp.add_argument("--n", type=_positive_int, required=True, help="matrix size")
    sp.set_defaults(func=cmd_betti)

    sp = add("frankel", "Compare 2 b_i(n) with the Grassmannian sum under a shift convention.",
             fmt=True)
    sp.add_argument("--n", type=_positive_int, required=True, help="matrix size")
    sp.add_argument("--iota", choices=[c.value for c in cb.IotaConvention], default="k",
                    help="degree shift of the k-th Grassmannian: C(k,2) or C(n-k,2) (default k)")
    sp.set_defaults(func=cmd_frankel)

    sp = add("critical", "Critical components of Tr(A X B X^T), with optional SPM diagnostics "
                         "or decomposition of a critical point.")
    sp.add_argument("--spectra", required=True,
                    help='JSON file {"a": {"values", "mults"}, "b": {...}}; either side may '
                         "instead be a symmetric matrix object")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--all-spms", action="store_true",
                   help="Hessian report at every signed permutation matrix")
    g.add_argument("--decompose", metavar="X.json",
                   help="decompose a critical point (matrix file, original coordinates)")
    sp.set_defaults(func=cmd_critical)

    sp = add("linear", "Diagnostics for Tr(A^T X) and the Morse report for the trace function.")
    sp.add_argument("--A", help="matrix file for A")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--X", help="matrix file for the point X (default: identity)")
    g.add_argument("--grassmann", type=_nonneg_int, metavar="k",
                   help="use the point -I_k (+) I_(n-k)")
    sp.add_argument("--morse-report", type=_positive_int, metavar="n",
                    help="compare b_i(n) with the shifted Grassmannian sum")
    sp.set_defaults(func=cmd_linear)

    sp = add("flow", "Integrate gradient flows from random starts and classify the limits.",
             seed_required=True)
    sp.add_argument("--f", choices=("nn", "trace", "quad"), required=True,
                    help="X_nn (starts on the level set X_nn = 0), Tr(X), or Tr(A X B X^T)")
    sp.add_argument("--spectra", help="spectra file, required for --f quad")
    sp.add_argument("--n", type=_positive_int, help="matrix size (taken from --spectra for quad)")
    sp.add_argument("--count", type=_positive_int, default=1, help="number of starts (default 1)")
    sp.add_argument("--direction", choices=("forward", "backward"), default="forward",
                    help="ascend (forward) or descend (backward)")
    sp.add_argument("--step", type=float, default=0.1, help="maximal step size (default 0.1)")
    sp.add_argument("--grad-tol", type=float, default=1e-10,
                    help="stop when max |grad f| <= this (default 1e-10)")
    sp.add_argument("--max-steps", type=_positive_int, default=10**6,
                    help="step budget per trajectory (default 1e6)")
    sp.set_defaults(func=cmd_flow)

    sp = add("prop-main", "Check s t^-1 = r(pi) on random points of the level set X_nn = 0.",
             seed_required=True)
    sp.add_argument("--n", type=int, required=True, help="matrix size (at least 3)")
    sp.add_argument("--samples", type=_positive_int, required=True, help="number of samples")
    sp.add_argument("--tol", type=float, default=1e-9, help="max-abs tolerance (default 1e-9)")
    sp.set_defaults(func=cmd_prop_main)

    sp = add("verify", "Run the desk-scale property suite; one PASS/FAIL line per property.",
             seed_required=True)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help (0) or a parse error (1)
        return int(exc.code or 0)
    try:
        result = args.func(args)
    except UsageError as exc:
        print(f"orthomorse {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except la.NumericalValidationError as exc:
        print(f"orthomorse {args.command}: numerical validation failed: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # invalid domain input (non-orthogonal X, bad margins, ...)
        print(f"orthomorse {args.command}: error: {exc}", file=sys.stderr)
        return 1
    text, code = result if isinstance(result, tuple) else (result, 0)
    sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
