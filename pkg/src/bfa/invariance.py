"""Quantitative CLT lab: smooth threshold approximators with certified
derivative bounds, exact Rademacher-sum CDFs, Berry-Esseen gap measurement,
invariance-principle gaps for low-degree polynomials, and Carbery-Wright
small-ball experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import ndtr
from scipy.stats import binom

from .gaussian import MultilinearPoly
from .operators import McReport, mc_report
from .rng import substream

MAX_ENUM_VARS = 24  # exact Rademacher enumeration cap
MAX_EXACT_POLY_VARS = 20
MAX_INVARIANCE_DEGREE = 4

# C^4 ramp: the degree-9 smoothstep rising 0 -> 1 on [0, 1] with four
# vanishing derivatives at both ends; coefficients in ascending powers.
_RAMP = np.array([0, 0, 0, 0, 0, 126, -420, 540, -315, 70], dtype=np.float64)
_RAMP_DERIVS = [_RAMP]
for _ in range(4):
    _RAMP_DERIVS.append(np.polynomial.polynomial.polyder(_RAMP_DERIVS[-1]))


def _ramp_fourth_derivative_max() -> float:
    """max_{[0,1]} |S''''| from the closed-form critical points.

    S'''' is proportional to u(42u^4 - 105u^3 + 90u^2 - 30u + 3), whose
    stationary points satisfy 70 v^4 - 15 v^2 + 3/8 = 0 in v = u - 1/2.
    """
    vs = []
    for sign in (1.0, -1.0):
        v2 = (15.0 + sign * math.sqrt(120.0)) / 140.0
        vs.extend([0.5 + math.sqrt(v2), 0.5 - math.sqrt(v2)])
    candidates = np.array([0.0, 1.0] + vs)
    values = np.polynomial.polynomial.polyval(candidates, _RAMP_DERIVS[4])
    return float(np.max(np.abs(values)))


# ||psi^(4)||_inf = B4 / lambda^4 for the 4-lambda-wide window below
B4 = _ramp_fourth_derivative_max() / 4.0**4


@dataclass(frozen=True)
class SmoothThreshold:
    """C^4 descending ramp: 1 below t - 2 lambda, 0 above t + 2 lambda."""

    t: float
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("window half-scale must be positive")

    @property
    def m4(self) -> float:
        """Certified bound on ||psi^(4)||_inf."""
        return B4 / self.lam**4

    def value(self, x) -> np.ndarray:
        return self.derivative(x, 0)

    def derivative(self, x, order: int) -> np.ndarray:
        if not 0 <= order <= 4:
            raise ValueError("derivatives are certified up to order 4 only")
        x = np.asarray(x, dtype=np.float64)
        lo, width = self.t - 2.0 * self.lam, 4.0 * self.lam
        u = np.clip((x - lo) / width, 0.0, 1.0)
        inside = np.polynomial.polynomial.polyval(u, _RAMP_DERIVS[order])
        if order == 0:
            # the ramp lies in [0,1] identically; clip float residue so the
            # range properties hold exactly
            ramp = np.clip(1.0 - inside, 0.0, 1.0)
            return np.where(x <= lo, 1.0, np.where(x >= lo + width, 0.0, ramp))
        scale = -1.0 / width**order
        return np.where((x <= lo) | (x >= lo + width), 0.0, scale * inside)

    def gaussian_mean(self) -> float:
        """E[psi(G)] for standard G: left tail mass plus window quadrature."""
        lo, hi = self.t - 2.0 * self.lam, self.t + 2.0 * self.lam

        def integrand(x):
            return self.value(x) * math.exp(-x * x / 2.0) / math.sqrt(2.0 * math.pi)

        window, _ = integrate.quad(integrand, lo, hi, epsabs=1e-12, limit=200)
        return float(ndtr(lo)) + window


def smooth_threshold(t: float, lam: float) -> SmoothThreshold:
    return SmoothThreshold(t, lam)


def reasonable_constant(m2: float, m4: float) -> float:
    """B with E[X^4] = B E[X^2]^2; Rademachers give 1, standard Gaussians 3."""
    if m2 <= 0:
        raise ValueError("second moment must be positive")
    return m4 / (m2 * m2)


@dataclass(frozen=True, eq=False)
class WeightedSum:
    """S = sum a_i x_i over Rademachers, normalized so sum a_i^2 = 1."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0 or not np.all(np.isfinite(w)):
            raise ValueError("weights must be a finite nonempty vector")
        norm = float(np.sqrt(np.sum(w * w)))
        if norm == 0.0:
            raise ValueError("weights must not all vanish")
        w = w / norm
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.size

    def fourth_moment_sum(self) -> float:
        """sum E[(a_i x_i)^4] = sum a_i^4."""
        return float(np.sum(self.weights**4))


def equal_weights(n: int) -> WeightedSum:
    return WeightedSum(np.full(n, 1.0 / math.sqrt(n)))


def rademacher_sums(w: WeightedSum) -> np.ndarray:
    """All 2^n values of S, sorted; only for n <= 24."""
    if w.n > MAX_ENUM_VARS:
        raise ValueError(f"enumeration supports n <= {MAX_ENUM_VARS}")
    sums = np.zeros(1)
    for a in w.weights:
        sums = np.concatenate([sums + a, sums - a])
    sums.sort()
    return sums


def _is_equal_weight(w: WeightedSum) -> bool:
    return bool(np.all(np.abs(w.weights) == abs(w.weights[0])))


def rademacher_cdf_exact(w: WeightedSum, t: float) -> float:
    """Pr[S <= t], exactly: binomial closed form for equal weights at any n,
    full enumeration otherwise (n <= 24)."""
    if _is_equal_weight(w):
        a = abs(float(w.weights[0]))
        k = math.floor((t / a + w.n) / 2.0 + 1e-12)
        return float(binom.cdf(k, w.n, 0.5))
    sums = rademacher_sums(w)
    return float(np.searchsorted(sums, t + 1e-12, side="right")) / sums.size


def _atoms_and_cdf(w: WeightedSum) -> tuple[np.ndarray, np.ndarray]:
    if _is_equal_weight(w):
        a = abs(float(w.weights[0]))
        ks = np.arange(w.n + 1)
        return a * (2.0 * ks - w.n), binom.cdf(ks, w.n, 0.5)
    sums = rademacher_sums(w)
    atoms, counts = np.unique(sums, return_counts=True)
    return atoms, np.cumsum(counts) / sums.size


def berry_esseen_gap(w: WeightedSum, grid_step: float = 1e-3) -> tuple[float, float]:
    """(sup_t |Pr[S <= t] - Phi(t)|, gap / sqrt(sum sigma_i^4)).

    The sup is exact: a step CDF against the increasing Phi peaks at atom
    locations, checked from both sides; a uniform grid is swept as well.
    """
    atoms, cdf = _atoms_and_cdf(w)
    phi_at = ndtr(atoms)
    left = np.concatenate([[0.0], cdf[:-1]])
    gap = float(max(np.max(np.abs(cdf - phi_at)), np.max(np.abs(left - phi_at))))
    grid = np.arange(-6.0, 6.0 + grid_step, grid_step)
    idx = np.searchsorted(atoms, grid, side="right")
    f_grid = np.where(idx > 0, cdf[np.maximum(idx - 1, 0)], 0.0)
    gap = max(gap, float(np.max(np.abs(f_grid - ndtr(grid)))))
    return gap, gap / math.sqrt(w.fourth_moment_sum())


@dataclass(frozen=True)
class HybridGapReport:
    e_discrete: float
    e_gaussian: float
    gap: float
    bound: float  # M4 * sum a_i^4
    mode: str  # exact | mc


def hybrid_smooth_gap(
    w: WeightedSum, psi: SmoothThreshold, samples: int | None = None, seed: int = 0
) -> HybridGapReport:
    """|E[psi(S)] - E[psi(G)]| against the fourth-derivative replacement bound."""
    if w.n <= MAX_ENUM_VARS:
        e_disc = float(np.mean(psi.value(rademacher_sums(w))))
        mode = "exact"
    else:
        if samples is None or samples <= 0:
            raise ValueError("large n needs a positive Monte-Carlo sample count")
        rng = substream(seed, 0)
        signs = 1.0 - 2.0 * rng.integers(0, 2, size=(samples, w.n))
        e_disc = float(np.mean(psi.value(signs @ w.weights)))
        mode = "mc"
    e_gauss = psi.gaussian_mean()
    gap = abs(e_disc - e_gauss)
    return HybridGapReport(e_disc, e_gauss, gap, psi.m4 * w.fourth_moment_sum(), mode)


def sup_cdf_distance(
    values1: np.ndarray,
    values2: np.ndarray,
    weights1: np.ndarray | None = None,
    weights2: np.ndarray | None = None,
) -> float:
    """sup_t |F1(t) - F2(t)| for two atomic distributions."""

    def prepared(values, weights):
        values = np.asarray(values, dtype=np.float64)
        if weights is None:
            weights = np.full(values.size, 1.0 / values.size)
        order = np.argsort(values)
        return values[order], np.cumsum(weights[order])

    v1, c1 = prepared(values1, weights1)
    v2, c2 = prepared(values2, weights2)
    pool = np.unique(np.concatenate([v1, v2]))

    def cdf(v, c, pts, side):
        idx = np.searchsorted(v, pts, side=side)
        return np.where(idx > 0, c[np.maximum(idx - 1, 0)], 0.0)

    right = np.abs(cdf(v1, c1, pool, "right") - cdf(v2, c2, pool, "right"))
    left = np.abs(cdf(v1, c1, pool, "left") - cdf(v2, c2, pool, "left"))
    return float(max(right.max(), left.max()))


@dataclass(frozen=True)
class InvarianceGapReport:
    sup_cdf_gap: float
    tau: float  # max_i Inf_i(Q)
    degree: int
    mode: str  # exact | mc on the Rademacher side


def invariance_gap(q: MultilinearPoly, samples: int, seed: int) -> InvarianceGapReport:
    """Sup-CDF distance between Q(Rademacher) and Q(Gaussian).

    The Rademacher side is exact (all 2^n points) up to n = 20, Monte-Carlo
    beyond; the Gaussian side is always Monte-Carlo.
    """
    if abs(q.variance() - 1.0) > 1e-9:
        raise ValueError("normalize Q so its nonconstant mass is 1")
    if q.degree() > MAX_INVARIANCE_DEGREE:
        raise ValueError(f"degree capped at {MAX_INVARIANCE_DEGREE} for desk scale")
    if samples <= 0:
        raise ValueError("samples must be positive")
    if q.n <= MAX_EXACT_POLY_VARS:
        rad_values, rad_weights = q.cube_values(), None
        mode = "exact"
    else:
        rng = substream(seed, 0)
        chunks = []
        for start in range(0, samples, 1 << 17):
            m = min(1 << 17, samples - start)
            signs = 1.0 - 2.0 * rng.integers(0, 2, size=(m, q.n))
            chunks.append(q.evaluate(signs))
        rad_values, rad_weights = np.concatenate(chunks), None
        mode = "mc"
    rng = substream(seed, 1)
    chunks = []
    for start in range(0, samples, 1 << 17):
        m = min(1 << 17, samples - start)
        chunks.append(q.evaluate(rng.standard_normal((m, q.n))))
    gauss_values = np.concatenate(chunks)
    gap = sup_cdf_distance(rad_values, gauss_values, rad_weights, None)
    tau = float(q.influences().max())
    return InvarianceGapReport(gap, tau, q.degree(), mode)


@dataclass(frozen=True)
class SmallBallRow:
    eps: float
    estimate: float
    stderr: float
    ratio: float  # estimate / (d eps^(1/d))


@dataclass(frozen=True)
class CarberyWrightReport:
    rows: tuple[SmallBallRow, ...]
    fitted_c: float
    degree: int
    t: float


def carbery_wright_mc(
    q: MultilinearPoly, eps_list, samples: int, seed: int, t: float = 0.0
) -> CarberyWrightReport:
    """Small-ball probabilities Pr[|Q(G) - t| <= eps] against d eps^(1/d).

    One Gaussian sample batch serves every eps, so the estimates are
    monotone in eps by construction.
    """
    eps_list = [float(e) for e in eps_list]
    if not eps_list or not all(0.0 < e < 1.0 for e in eps_list):
        raise ValueError("eps values must lie in (0, 1)")
    if abs(q.variance() - 1.0) > 1e-9:
        raise ValueError("normalize Q so its nonconstant mass is 1")
    if samples <= 0:
        raise ValueError("samples must be positive")
    rng = substream(seed, 0)
    dist = np.abs(q.evaluate(rng.standard_normal((samples, q.n))) - t)
    d = max(q.degree(), 1)
    rows = []
    for eps in sorted(eps_list):
        hits = (dist <= eps).astype(np.float64)
        rep = mc_report(hits, seed)
        rows.append(SmallBallRow(eps, rep.estimate, rep.stderr, rep.estimate / (d * eps ** (1.0 / d))))
    fitted = max(row.ratio for row in rows)
    return CarberyWrightReport(tuple(rows), fitted, d, t)
