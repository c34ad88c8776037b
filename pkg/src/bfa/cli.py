"""Command-line front end: reproducible seeded runs, TSV or JSON reports.

Every numeric row carries (lhs, rhs/reference, margin or stderr), the
configuration line records the seed, and identical invocations produce
byte-identical output.  `--assert` turns negative-margin rows into a
nonzero exit code.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import core, gaussian, inequalities, invariance, operators, testers, ulc

HOLD_TOL = 1e-9


@dataclass
class Row:
    name: str
    lhs: float | None = None
    rhs: float | None = None
    margin: float | None = None
    stderr: float | None = None

    def cells(self) -> list[str]:
        def fmt(v):
            return "" if v is None else repr(float(v))

        return [self.name, fmt(self.lhs), fmt(self.rhs), fmt(self.margin), fmt(self.stderr)]

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "stderr": self.stderr,
        }


def _load_function(spec: str) -> core.Table:
    if os.path.exists(spec) or spec.endswith(".bfn"):
        with open(spec, "r", encoding="utf-8") as handle:
            return core.parse_function(handle.read())
    return core.parse_function(spec)


def _poly_of(spec: str) -> gaussian.MultilinearPoly:
    return gaussian.MultilinearPoly.from_spectrum(core.wht(_load_function(spec)))


def _indicator_of(spec: str) -> core.RealTable:
    """0/1 indicator: real tables are taken verbatim, boolean tables
    indicate their -1 (true) side."""
    f = _load_function(spec)
    if isinstance(f, core.RealTable):
        return f
    return core.RealTable(f.n, (1.0 - f.signs()) / 2.0)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("BFA_SEED", "0"))


def _mc_row(name: str, report: operators.McReport, reference: float | None = None) -> Row:
    return Row(name, report.estimate, reference, None, report.stderr)


def _report_row(rep: inequalities.InequalityReport, prefix: str = "") -> Row:
    return Row(prefix + rep.name, rep.lhs, rep.rhs, rep.margin)


# ---------------------------------------------------------------------------
# subcommand handlers: each returns (rows, direct_output)
# ---------------------------------------------------------------------------


def cmd_fourier(args):
    s = core.wht(_load_function(args.fn))
    out = core.summary(s)
    rows = [
        Row(f"fhat[{mask}]", float(c))
        for mask, c in enumerate(s.coeffs)
        if abs(c) > args.tol
    ]
    rows.append(Row("mean", out.mean))
    rows.append(Row("variance", out.variance))
    rows.append(Row("degree", out.degree))
    rows.extend(Row(f"W[{k}]", float(w)) for k, w in enumerate(out.level_weights))
    return rows, None


def cmd_influence(args):
    f = _load_function(args.fn)
    prof = operators.influences(f)
    rows = [Row(f"inf[{i + 1}]", float(v)) for i, v in enumerate(prof.per_var)]
    rows.append(Row("total", prof.total))
    if args.rho is not None:
        noisy = operators.noisy_influence_profile(f, args.rho)
        rows.extend(Row(f"noisy_inf[{i + 1}]", float(v)) for i, v in enumerate(noisy))
    return rows, None


def cmd_stability(args):
    f = _load_function(args.fn)
    exact = operators.stability(f, args.rho)
    rows = [Row("stability_exact", exact)]
    if args.samples:
        rep = operators.stability_mc(f, args.rho, args.samples, _seed(args))
        rows.append(_mc_row("stability_mc", rep, exact))
        rows.append(Row("mc_gap_over_4stderr", abs(rep.estimate - exact), 4 * rep.stderr,
                        4 * rep.stderr - abs(rep.estimate - exact)))
    return rows, None


def _tester_rows(outcome: testers.TestOutcome) -> list[Row]:
    rows = []
    if outcome.exact_accept is not None:
        rows.append(Row(f"{outcome.test}_exact_accept", outcome.exact_accept))
    if outcome.mc is not None:
        rows.append(_mc_row(f"{outcome.test}_mc_accept", outcome.mc, outcome.exact_accept))
    return rows


def cmd_test(args):
    f = _load_function(args.fn)
    samples = None if args.exact else args.samples
    seed = _seed(args)
    if args.which == "blr":
        out = testers.blr(f, samples, seed)
    elif args.which == "nae":
        out = testers.nae_test(f, samples, seed)
    elif args.which == "kkmo":
        out = testers.kkmo_test(f, args.rho, samples, seed)
    elif args.which == "3xor":
        out = testers.threexor_test(f, args.delta, samples, seed)
    else:  # decode
        value = testers.local_decode(f, args.x, args.trials, seed)
        return [Row("decoded_sign", value)], None
    rows = _tester_rows(out)
    if args.which == "blr":
        mask, dist = testers.nearest_linear(f)
        rows.append(Row(f"nearest_linear[{mask}]", dist, 1.0 - out.exact_accept,
                        (1.0 - out.exact_accept) - dist))
    return rows, None


def cmd_gaussian(args):
    seed = _seed(args)
    if args.which == "sheppard":
        exact = gaussian.sheppard(args.rho)
        rows = [Row("sheppard_exact", exact)]
        if args.samples:
            rep = gaussian.sheppard_mc(args.rho, args.samples, seed)
            rows.append(_mc_row("sheppard_mc", rep, exact))
        return rows, None
    if args.which == "rs":
        q = _poly_of(args.fn)
        rep = gaussian.rotation_sensitivity_mc(q, args.delta, args.samples, seed)
        return [_mc_row("rotation_sensitivity", rep, args.delta / math.pi)], None
    q = _poly_of(args.fn)  # gstab
    exact = gaussian.gstab(q, args.rho)
    rows = [Row("gstab_spectral", exact)]
    if args.samples:
        rep = gaussian.gstab_mc(q, args.rho, args.samples, seed)
        rows.append(_mc_row("gstab_mc", rep, exact))
    return rows, None


def cmd_ineq(args):
    if args.which == "suite":
        return _ineq_suite(args)
    if len(args.fn) != 1:
        raise ValueError("single inequality checks take exactly one --fn")
    fn = args.fn[0]
    if args.which == "bonami":
        rep = inequalities.bonami_check(_load_function(fn), args.d)
    elif args.which == "hyper":
        rep = inequalities.hypercontractivity_check(_load_function(fn), args.p, args.q, args.rho)
    elif args.which == "sse":
        rep = inequalities.sse_check(_indicator_of(fn), args.rho)
    elif args.which == "kkl":
        rep = inequalities.kkl_check(_load_function(fn))
    elif args.which == "level1":
        rep = inequalities.level1_check(_indicator_of(fn))
    elif args.which == "twopi":
        rep = inequalities.two_pi_check(_load_function(fn), args.eps)
    else:  # mist
        rep = inequalities.mist_check(_load_function(fn), args.rho, args.eps)
    rows = [_report_row(rep)]
    for key, value in sorted(rep.context.items()):
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            rows.append(Row(f"context_{key}", float(value)))
        else:
            rows.append(Row(f"context_{key}_{value}"))
    return rows, None


def _ineq_suite(args):
    rows = []
    for spec in args.fn:
        f = _load_function(spec)
        label = spec.replace("\t", " ")
        rows.append(_report_row(inequalities.poincare_check(f), f"{label}:"))
        if isinstance(f, core.TruthTable):
            rows.append(_report_row(inequalities.edge_isoperimetry_check(f), f"{label}:"))
            rows.append(
                _report_row(inequalities.sse_check(_indicator_of(spec), 1.0 / 3.0), f"{label}:")
            )
            rows.append(_report_row(inequalities.two_pi_check(f, args.eps), f"{label}:"))
            if abs(float(np.mean(f.signs()))) <= 1e-12:
                rows.append(_report_row(inequalities.kkl_check(f), f"{label}:"))
    return rows, None


def cmd_clt(args):
    seed = _seed(args)
    if args.which == "be":
        w = _weights_of(args)
        gap, ratio = invariance.berry_esseen_gap(w)
        return [
            Row("sup_cdf_gap", gap, math.sqrt(w.fourth_moment_sum()), None),
            Row("gap_over_bound", ratio),
        ], None
    if args.which == "hybrid":
        w = _weights_of(args)
        psi = invariance.smooth_threshold(args.t, args.lam)
        rep = invariance.hybrid_smooth_gap(w, psi, args.samples, seed)
        return [
            Row("hybrid_gap", rep.gap, rep.bound, rep.bound - rep.gap),
            Row("e_discrete", rep.e_discrete),
            Row("e_gaussian", rep.e_gaussian),
        ], None
    if args.which == "invariance":
        q = _clt_poly(args)
        rep = invariance.invariance_gap(q, args.samples, seed)
        return [
            Row("sup_cdf_gap", rep.sup_cdf_gap),
            Row("tau", rep.tau),
            Row("degree", rep.degree),
        ], None
    q = _clt_poly(args)  # cw
    eps_list = [float(e) for e in args.eps.split(",")]
    rep = invariance.carbery_wright_mc(q, eps_list, args.samples, seed, t=args.t)
    rows = [
        Row(f"small_ball[{row.eps!r}]", row.estimate, row.ratio, None, row.stderr)
        for row in rep.rows
    ]
    rows.append(Row("fitted_c", rep.fitted_c))
    return rows, None


def _weights_of(args) -> invariance.WeightedSum:
    if args.weights:
        return invariance.WeightedSum(np.array([float(w) for w in args.weights.split(",")]))
    return invariance.equal_weights(args.n)


def _clt_poly(args) -> gaussian.MultilinearPoly:
    if args.quad_n:
        n = args.quad_n
        c = math.sqrt(2.0 / (n * (n - 1)))
        coeffs = {(1 << i) | (1 << j): c for i in range(n) for j in range(i + 1, n)}
        return gaussian.MultilinearPoly(n, coeffs)
    q = _poly_of(args.fn)
    var = q.variance()
    if var <= 0:
        raise ValueError("polynomial must have positive variance")
    scale = 1.0 / math.sqrt(var)
    return gaussian.MultilinearPoly(
        q.n, {m: c * scale for m, c in q.coeffs.items() if m != 0}
    )


def cmd_ulc(args):
    seed = _seed(args)
    if args.which == "gen":
        psi, labels = ulc.planted_instance(args.vertices, args.degree, args.labels, args.delta, seed)
        doc = psi.to_json()
        if args.planted_out:
            with open(args.planted_out, "w", encoding="utf-8") as handle:
                handle.write(json.dumps([int(x) for x in labels]) + "\n")
        return None, doc
    psi = ulc.UlcInstance.from_json(_read(args.input))
    if args.which == "opt":
        opt, witness = ulc.ulc_brute_opt(psi)
        return [
            Row("opt", opt),
            Row("witness", None),
            Row(",".join(str(int(x)) for x in witness)),
        ], None
    if args.which == "reduce":
        csp = ulc.reduce_to_csp(psi, args.tester, args.m, seed, fold=not args.no_fold)
        return None, csp.to_json()
    assignment = _assignment_of(args, psi)
    if args.which == "value":
        rep = ulc.csp_value_stream(
            psi, args.tester, assignment, args.m, seed, fold=not args.no_fold
        )
        tester = ulc.LongCodeTester.parse(args.tester)
        rows = [_mc_row("csp_value", rep, tester.dictator_acceptance)]
        if tester.name == "kkmo" and psi.L <= ulc.MAX_REDUCE_LABELS:
            exact = ulc.csp_exact_kkmo_value(psi, tester.param, assignment, fold=not args.no_fold)
            rows.append(Row("csp_value_exact", exact, tester.dictator_acceptance))
        return rows, None
    # decode
    labels = ulc.decode_labelling(psi, assignment, args.gamma, seed)
    sets = ulc.influence_sets(psi, assignment, args.gamma)
    rows = [Row("decoded_value", ulc.labelling_value(psi, labels))]
    rows.append(Row("max_ju", max(len(j) for j, _ in sets), 1.0 / args.gamma**2))
    rows.append(Row("max_jup", max(len(jp) for _, jp in sets), 2.0 / args.gamma**2))
    rows.append(Row(",".join(str(int(x)) for x in labels)))
    return rows, None


def _assignment_of(args, psi: ulc.UlcInstance):
    kind = args.assign
    if kind == "dictator":
        if not args.labels_in:
            raise ValueError("dictator assignments need --labels-in")
        labels = np.array(json.loads(_read(args.labels_in)), dtype=np.int64)
        return ulc.dictator_assignment(psi, labels)
    if kind.startswith("const:"):
        table = core.make_family(f"{kind}:{psi.L}")
        return [table] * psi.num_vertices
    if kind.startswith("random:"):
        base = int(kind.split(":")[1])
        return [
            core.make_family(f"random:{base + u}:{psi.L}")
            for u in range(psi.num_vertices)
        ]
    raise ValueError(f"unknown assignment source {kind!r}")


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bfa", description="boolean function analysis on the hypercube"
    )
    parser.add_argument("--json", action="store_true", help="structured output")
    parser.add_argument(
        "--assert", dest="assert_mode", action="store_true",
        help="exit 1 when any report row has a negative margin",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(handler=handler)
        p.add_argument("--seed", type=int, default=None, help="defaults to $BFA_SEED or 0")
        # accepted after the subcommand too; SUPPRESS keeps the top-level value
        p.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
        p.add_argument("--assert", dest="assert_mode", action="store_true", default=argparse.SUPPRESS)
        return p

    p = add("fourier", cmd_fourier, help="spectrum, level weights, degree")
    p.add_argument("--fn", required=True)
    p.add_argument("--tol", type=float, default=1e-12)

    p = add("influence", cmd_influence, help="per-variable and total influence")
    p.add_argument("--fn", required=True)
    p.add_argument("--rho", type=float, default=None, help="also report noisy influences")

    p = add("stability", cmd_stability, help="noise stability, exact and Monte-Carlo")
    p.add_argument("--fn", required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--samples", type=int, default=0)

    p = add("test", cmd_test, help="property testers and the local decoder")
    p.add_argument("which", choices=["blr", "nae", "kkmo", "3xor", "decode"])
    p.add_argument("--fn", required=True)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--exact", action="store_true", help="skip the Monte-Carlo run")
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--x", type=lambda s: int(s, 0), default=0)
    p.add_argument("--trials", type=int, default=41)

    p = add("gaussian", cmd_gaussian, help="Gaussian-space estimates")
    p.add_argument("which", choices=["sheppard", "rs", "gstab"])
    p.add_argument("--fn")
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--delta", type=float, default=math.pi / 4)
    p.add_argument("--samples", type=int, default=100000)

    p = add("ineq", cmd_ineq, help="inequality checks; rows are lhs <= rhs")
    p.add_argument("which", choices=["bonami", "hyper", "sse", "kkl", "level1", "twopi", "mist", "suite"])
    p.add_argument("--fn", action="append", default=None, required=True)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--q", type=float, default=4.0)
    p.add_argument("--rho", type=float, default=1.0 / 3.0)
    p.add_argument("--eps", type=float, default=0.1)

    p = add("clt", cmd_clt, help="Berry-Esseen, hybrid, invariance, small-ball")
    p.add_argument("which", choices=["be", "hybrid", "invariance", "cw"])
    p.add_argument("--n", type=int, default=100, help="equal-weight count")
    p.add_argument("--weights", default=None, help="comma-separated weights")
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--lam", type=float, default=0.5)
    p.add_argument("--fn", default=None)
    p.add_argument("--quad-n", type=int, default=None, help="pair-product family size")
    p.add_argument("--eps", default="0.1", help="comma-separated small-ball radii")
    p.add_argument("--samples", type=int, default=100000)

    p = add("ulc", cmd_ulc, help="label cover and the long-code reduction")
    p.add_argument("which", choices=["gen", "opt", "reduce", "value", "decode"])
    p.add_argument("--in", dest="input", default=None, help="instance JSON path")
    p.add_argument("--vertices", type=int, default=10)
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--labels", type=int, default=4)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--planted-out", default=None, help="write the planted labelling")
    p.add_argument("--tester", default="kkmo:0.5")
    p.add_argument("--m", type=int, default=100000)
    p.add_argument("--no-fold", action="store_true")
    p.add_argument("--assign", default="dictator", help="dictator | const:+1 | random:<seed>")
    p.add_argument("--labels-in", default=None)
    p.add_argument("--gamma", type=float, default=0.2)
    return parser


def _config_line(args) -> str:
    skip = {"handler", "json", "assert_mode"}
    items = [
        f"{key}={value}"
        for key, value in sorted(vars(args).items())
        if key not in skip and value is not None
    ]
    items.append(f"resolved_seed={_seed(args)}")
    return "# " + " ".join(items)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rows, direct = args.handler(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if direct is not None:
        sys.stdout.write(direct if direct.endswith("\n") else direct + "\n")
        return 0
    if args.json:
        payload = {
            "command": args.command,
            "config": {
                k: v for k, v in sorted(vars(args).items())
                if k not in {"handler", "json", "assert_mode"} and v is not None
            },
            "seed": _seed(args),
            "rows": [row.to_json() for row in rows],
        }
        sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
    else:
        lines = [_config_line(args), "name\tlhs\trhs\tmargin\tstderr"]
        lines.extend("\t".join(row.cells()) for row in rows)
        sys.stdout.write("\n".join(lines) + "\n")
    if args.assert_mode and any(
        row.margin is not None and row.margin < -HOLD_TOL for row in rows
    ):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
