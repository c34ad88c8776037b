"""Checkable inequality forms: Bonami, hypercontractivity, small-set
expansion, KKL, the level-1 inequality, the 2/pi theorem, and the
empirical majority-stability comparison.

Asymptotic statements with unspecified constants are checked through the
explicit inequalities their proofs establish, so every `holds` flag is a
literal arithmetic fact about the function at hand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    RealTable,
    Spectrum,
    Table,
    TruthTable,
    inverse_wht,
    popcounts,
    summary,
    table_values,
    wht,
)
from .gaussian import MultilinearPoly
from .operators import influences, stability

HOLD_TOL = 1e-9

TWO_OVER_PI = 2.0 / math.pi

LEVEL1_ALPHA_MAX = math.exp(-0.5)  # proof instantiation needs t0 >= 1


@dataclass(frozen=True)
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    context: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.margin >= -HOLD_TOL

    def row(self, label: str = "") -> tuple:
        return (label, self.name, self.lhs, self.rhs, self.margin)


def _cube_values(f: Table | MultilinearPoly) -> np.ndarray:
    return f.cube_values() if isinstance(f, MultilinearPoly) else table_values(f)


def _norm(values: np.ndarray, p: float) -> float:
    """E[|f|^p]^(1/p) with an exact 2^n sum."""
    return float(np.mean(np.abs(values) ** p) ** (1.0 / p))


def _spectral_degree(f: Table | MultilinearPoly) -> int:
    if isinstance(f, MultilinearPoly):
        return f.degree()
    return summary(wht(f)).degree


def bonami_check(f: Table | MultilinearPoly, d: int) -> InequalityReport:
    """E[f^4] <= 9^d E[f^2]^2 for polynomials of degree at most d."""
    if _spectral_degree(f) > d:
        raise ValueError(f"degree exceeds {d}")
    values = _cube_values(f)
    lhs = float(np.mean(values**4))
    rhs = 9.0**d * float(np.mean(values**2)) ** 2
    return InequalityReport("bonami", lhs, rhs, {"d": d})


def hypercontractivity_check(f: Table, p: float, q: float, rho: float) -> InequalityReport:
    """||T_rho f||_q <= ||f||_p, valid whenever rho <= sqrt((p-1)/(q-1))."""
    if not 1.0 <= p <= q:
        raise ValueError("need 1 <= p <= q")
    limit = math.sqrt((p - 1.0) / (q - 1.0)) if q > 1.0 else 1.0
    if not 0.0 <= rho <= limit + 1e-12:
        raise ValueError(f"rho must lie in [0, sqrt((p-1)/(q-1))] = [0, {limit:.6f}]")
    s = wht(f)
    damped = s.coeffs * rho ** popcounts(f.n).astype(np.float64)
    smoothed = inverse_wht(Spectrum(f.n, damped)).values
    lhs = _norm(smoothed, q)
    rhs = _norm(table_values(f), p)
    return InequalityReport("hypercontractivity", lhs, rhs, {"p": p, "q": q, "rho": rho})


def hypercontractivity_ratio(f: Table, p: float, q: float, rho: float) -> float:
    """lhs/rhs of the norm inequality, without the rho-domain guard.

    Values above 1 witness failure beyond the critical noise rate.
    """
    s = wht(f)
    damped = s.coeffs * rho ** popcounts(f.n).astype(np.float64)
    smoothed = inverse_wht(Spectrum(f.n, damped)).values
    return _norm(smoothed, q) / _norm(table_values(f), p)


def _indicator_values(a: Table) -> np.ndarray:
    values = table_values(a)
    if not np.all((values == 0.0) | (values == 1.0)):
        raise ValueError("expected a 0/1 indicator table")
    return values


def subset_indicator(n: int, members) -> RealTable:
    """0/1 indicator of a set of input masks."""
    values = np.zeros(1 << n)
    values[list(members)] = 1.0
    return RealTable(n, values)


def sse_check(a: Table, rho: float) -> InequalityReport:
    """Stab_rho(1_A) <= alpha^(2/(1+rho)) for a density-alpha indicator.

    Proven here only at rho = 1/3; other rates are reported, with the
    `asserted` context flag cleared.
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError("noise rate must lie in [0, 1]")
    values = _indicator_values(a)
    alpha = float(values.mean())
    table = RealTable(a.n, values) if not isinstance(a, RealTable) else a
    lhs = stability(table, rho)
    rhs = alpha ** (2.0 / (1.0 + rho)) if alpha > 0 else 0.0
    return InequalityReport(
        "sse", lhs, rhs, {"rho": rho, "alpha": alpha, "asserted": rho == 1.0 / 3.0}
    )


def kkl_check(f: TruthTable) -> InequalityReport:
    """The explicit KKL chain for balanced f: 3 * 9^(-Inf(f)) <= sqrt(max_i Inf_i)."""
    values = table_values(f)
    if abs(values.mean()) > 1e-12:
        raise ValueError("the KKL form needs a balanced function")
    prof = influences(f)
    lhs = 3.0 * 9.0 ** (-prof.total)
    rhs = math.sqrt(float(prof.per_var.max()))
    return InequalityReport(
        "kkl", lhs, rhs, {"total_influence": prof.total, "max_influence": float(prof.per_var.max())}
    )


def level1_check(f: Table) -> InequalityReport:
    """Proof-extracted level-1 bound W^1 <= alpha^2 (sqrt(2 ln(1/alpha)) + 2)^2.

    The instantiation is valid for alpha <= e^(-1/2); larger densities are
    reported with `in_domain` cleared rather than rejected.
    """
    values = _indicator_values(f)
    alpha = float(values.mean())
    w1 = summary(wht(RealTable(f.n, values))).level_weights[1]
    if alpha <= 0.0:
        rhs = 0.0
        derivative_bound = 0.0
    else:
        rhs = alpha**2 * (math.sqrt(2.0 * math.log(1.0 / alpha)) + 2.0) ** 2
        # reported only: the sharper 2 alpha^2 ln(1/alpha) that differentiating
        # the general expansion bound would give
        derivative_bound = 2.0 * alpha**2 * math.log(1.0 / alpha)
    return InequalityReport(
        "level1",
        float(w1),
        rhs,
        {
            "alpha": alpha,
            "in_domain": 0.0 <= alpha <= LEVEL1_ALPHA_MAX + 1e-15,
            "sse_derivative_bound": derivative_bound,
        },
    )


def two_pi_check(f: TruthTable, eps: float) -> InequalityReport:
    """Report W^1(f) against 2/pi for functions with small linear coefficients.

    The paper-side O(eps) constant is unspecified, so the report carries the
    implied constant (W^1 - 2/pi)/eps instead of asserting one.
    """
    s = wht(f)
    max_linear = max(abs(float(s.coeffs[1 << b])) for b in range(f.n))
    w1 = float(summary(s).level_weights[1])
    implied = max(0.0, (w1 - TWO_OVER_PI) / eps) if eps > 0 else math.inf
    return InequalityReport(
        "two_pi",
        w1,
        TWO_OVER_PI,
        {
            "eps": eps,
            "max_linear_coeff": max_linear,
            "in_regime": max_linear <= eps,
            "implied_constant": implied,
        },
    )


def mist_check(f: TruthTable, rho: float, eps: float) -> InequalityReport:
    """Report Stab_rho(f) against the majority limit 1 - (2/pi) arccos(rho).

    Requires balance and all influences at most eps; the o(1) slack is
    unquantified, so violations are reported, never raised.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError("need 0 < rho < 1")
    values = table_values(f)
    prof = influences(f)
    balanced = abs(values.mean()) <= 1e-12
    low_influence = bool(prof.per_var.max() <= eps)
    lhs = stability(f, rho)
    rhs = 1.0 - 2.0 * math.acos(rho) / math.pi
    return InequalityReport(
        "mist",
        lhs,
        rhs,
        {
            "rho": rho,
            "eps": eps,
            "balanced": balanced,
            "low_influence": low_influence,
            "in_regime": balanced and low_influence,
        },
    )


def poincare_check(f: Table) -> InequalityReport:
    """Var(f) <= Inf(f); tight exactly on functions with all weight at level 1."""
    out = summary(wht(f))
    return InequalityReport("poincare", out.variance, influences(f).total, {})


def edge_isoperimetry_check(f: TruthTable) -> InequalityReport:
    """2 alpha log2(1/alpha) <= Inf(f), alpha the minority density."""
    signs = table_values(f)
    alpha = float(min(np.mean(signs == 1.0), np.mean(signs == -1.0)))
    lhs = 2.0 * alpha * math.log2(1.0 / alpha) if alpha > 0 else 0.0
    return InequalityReport("edge_isoperimetry", lhs, influences(f).total, {"alpha": alpha})


def suite_rows(named_functions, checks) -> list[tuple]:
    """Run a set of checks over named functions; one TSV-able row each."""
    rows = []
    for label, f in named_functions:
        for check in checks:
            rows.append(check(f).row(label))
    return rows


def format_suite_tsv(rows) -> str:
    lines = ["function\tinequality\tlhs\trhs\tmargin"]
    for label, name, lhs, rhs, margin in rows:
        lines.append(f"{label}\t{name}\t{lhs!r}\t{rhs!r}\t{margin!r}")
    return "\n".join(lines) + "\n"
