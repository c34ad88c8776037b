"""Correlated Gaussian sampling, Sheppard's formula, majority stability
limits, Gaussian noise stability of multilinear polynomials, rotation
sensitivity, and the hybrid rotation bound check."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Spectrum, inverse_wht
from .operators import McReport, mc_report
from .rng import substream

BALANCE_TOL = 0.02  # empirical |E[f]| allowance where exact balance is required


@dataclass(frozen=True, eq=False)
class MultilinearPoly:
    """Q(u) = sum_S c_S prod_{i in S} u_i with sparse coefficients."""

    n: int
    coeffs: dict[int, float]  # subset bitmask -> c_S

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one variable")
        cleaned = {}
        for mask, c in self.coeffs.items():
            if not 0 <= mask < (1 << self.n):
                raise ValueError(f"coefficient mask {mask} out of range")
            if not math.isfinite(c):
                raise ValueError("coefficients must be finite")
            if c != 0.0:
                cleaned[int(mask)] = float(c)
        object.__setattr__(self, "coeffs", cleaned)

    @classmethod
    def from_spectrum(cls, s: Spectrum) -> "MultilinearPoly":
        return cls(s.n, {m: float(c) for m, c in enumerate(s.coeffs) if c != 0.0})

    def degree(self) -> int:
        return max((m.bit_count() for m in self.coeffs), default=0)

    def variance(self) -> float:
        return sum(c * c for m, c in self.coeffs.items() if m != 0)

    def influences(self) -> np.ndarray:
        out = np.zeros(self.n)
        for mask, c in self.coeffs.items():
            for b in range(self.n):
                if mask & (1 << b):
                    out[b] += c * c
        return out

    def dense_coeffs(self) -> np.ndarray:
        out = np.zeros(1 << self.n)
        for mask, c in self.coeffs.items():
            out[mask] = c
        return out

    def cube_values(self) -> np.ndarray:
        """Q on all 2^n points of {-1,1}^n (inverse transform of coefficients)."""
        return inverse_wht(Spectrum(self.n, self.dense_coeffs())).values

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Q at real points, shape (m, n) -> (m,).

        Degree <= 2 uses a matrix form; higher degrees accumulate per subset.
        """
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if points.shape[1] != self.n:
            raise ValueError(f"points must have {self.n} columns")
        if self.degree() <= 2:
            out = np.full(points.shape[0], self.coeffs.get(0, 0.0))
            linear = np.zeros(self.n)
            quad = np.zeros((self.n, self.n))
            for mask, c in self.coeffs.items():
                k = mask.bit_count()
                if k == 1:
                    linear[mask.bit_length() - 1] = c
                elif k == 2:
                    lo = (mask & -mask).bit_length() - 1
                    hi = mask.bit_length() - 1
                    quad[lo, hi] = c
            out += points @ linear
            out += np.einsum("mi,ij,mj->m", points, quad, points)
            return out
        out = np.zeros(points.shape[0])
        for mask, c in self.coeffs.items():
            term = np.full(points.shape[0], c)
            m = mask
            while m:
                b = (m & -m).bit_length() - 1
                term *= points[:, b]
                m &= m - 1
            out += term
        return out


@dataclass(frozen=True)
class GaussianSampler:
    """Standard-normal vectors in a fixed dimension behind a hashed seed."""

    seed: int
    n: int

    def standard(self, m: int, stream: int = 0) -> np.ndarray:
        return substream(self.seed, stream).standard_normal((m, self.n))

    def correlated(self, rho: float, m: int, stream: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """(G, H) with H = rho G + sqrt(1-rho^2) G', so E[G_i H_i] = rho."""
        if not -1.0 <= rho <= 1.0:
            raise ValueError("correlation must lie in [-1, 1]")
        rng = substream(self.seed, stream)
        g = rng.standard_normal((m, self.n))
        gp = rng.standard_normal((m, self.n))
        return g, rho * g + math.sqrt(1.0 - rho * rho) * gp


def sheppard(rho: float) -> float:
    """Pr[sgn(G) != sgn(H)] = arccos(rho) / pi for rho-correlated Gaussians."""
    if not -1.0 <= rho <= 1.0:
        raise ValueError("correlation must lie in [-1, 1]")
    return math.acos(rho) / math.pi


def sheppard_mc(rho: float, samples: int, seed: int) -> McReport:
    if samples <= 0:
        raise ValueError("samples must be positive")
    g, h = GaussianSampler(seed, 1).correlated(rho, samples)
    disagree = (g[:, 0] >= 0) != (h[:, 0] >= 0)
    return mc_report(disagree.astype(np.float64), seed)


def maj_stab_limit(rho: float) -> float:
    """lim_n Stab_rho(MAJ_n) = 1 - (2/pi) arccos(rho)."""
    if not -1.0 <= rho <= 1.0:
        raise ValueError("correlation must lie in [-1, 1]")
    return 1.0 - 2.0 * math.acos(rho) / math.pi


def wk_maj_limit(k: int) -> float:
    """lim_n W^k(MAJ_n) = C(k-1, (k-1)/2) * 4 / (pi k 2^k) for odd k."""
    if k < 1 or k % 2 == 0:
        raise ValueError("majority level weights vanish unless k is odd")
    return math.comb(k - 1, (k - 1) // 2) * 4.0 / (math.pi * k * 2.0**k)


def gstab(q: MultilinearPoly, rho: float) -> float:
    """GStab_rho(Q) = sum_S rho^|S| c_S^2, identical to Stab_rho on the cube."""
    if not -1.0 <= rho <= 1.0:
        raise ValueError("correlation must lie in [-1, 1]")
    return sum(rho ** mask.bit_count() * c * c for mask, c in q.coeffs.items())


def gstab_mc(q: MultilinearPoly, rho: float, samples: int, seed: int) -> McReport:
    """Estimate E[Q(G) Q(H)] over rho-correlated Gaussian vectors."""
    if samples <= 0:
        raise ValueError("samples must be positive")
    g, h = GaussianSampler(seed, q.n).correlated(rho, samples)
    return mc_report(q.evaluate(g) * q.evaluate(h), seed)


def sign_predicate(q: MultilinearPoly):
    """sgn(Q) as a vectorized +-1 predicate on R^n (zeros map to +1)."""

    def predicate(points: np.ndarray) -> np.ndarray:
        return np.where(q.evaluate(points) >= 0, 1.0, -1.0)

    return predicate


def rotation_sensitivity_mc(
    f, delta: float, samples: int, seed: int, n: int | None = None
) -> McReport:
    """RS_f(delta) = Pr[f(G) != f(H)] for cos(delta)-correlated G, H.

    `f` is a MultilinearPoly (its sign is tested) or a vectorized +-1
    predicate; predicates must be paired with an explicit dimension.
    """
    if not 0.0 <= delta <= math.pi:
        raise ValueError("rotation angle must lie in [0, pi]")
    if samples <= 0:
        raise ValueError("samples must be positive")
    if isinstance(f, MultilinearPoly):
        predicate, dim = sign_predicate(f), f.n
    else:
        if n is None:
            raise ValueError("callable predicates need the dimension n")
        predicate, dim = f, n
    g, h = GaussianSampler(seed, dim).correlated(math.cos(delta), samples)
    disagree = predicate(g) != predicate(h)
    return mc_report(disagree.astype(np.float64), seed)


@dataclass(frozen=True)
class RotationBoundReport:
    ell: int
    rs: McReport
    bound: float  # 1 / (2 ell)
    margin: float  # rs - bound
    mean_estimate: float
    balanced: bool


def rotation_bound_check(f, ell: int, samples: int, seed: int, n: int | None = None) -> RotationBoundReport:
    """Estimate RS_f(pi / 2 ell) and compare against the 1/(2 ell) lower bound.

    The bound needs E[f] = 0; inputs failing the empirical balance check
    |E^[f]| <= 0.02 are flagged rather than scored.
    """
    if ell < 2:
        raise ValueError("need ell >= 2")
    if isinstance(f, MultilinearPoly):
        predicate, dim = sign_predicate(f), f.n
    else:
        if n is None:
            raise ValueError("callable predicates need the dimension n")
        predicate, dim = f, n
    mean = float(
        predicate(GaussianSampler(seed, dim).standard(samples, stream=1)).mean()
    )
    rs = rotation_sensitivity_mc(predicate, math.pi / (2 * ell), samples, seed, n=dim)
    bound = 1.0 / (2 * ell)
    return RotationBoundReport(
        ell=ell,
        rs=rs,
        bound=bound,
        margin=rs.estimate - bound,
        mean_estimate=mean,
        balanced=abs(mean) <= BALANCE_TOL,
    )


def ornstein_uhlenbeck_exact(q: MultilinearPoly, rho: float, x: np.ndarray) -> float:
    """(U_rho Q)(x) for multilinear Q: damp c_S by rho^|S| and evaluate."""
    damped = MultilinearPoly(
        q.n, {m: c * rho ** m.bit_count() for m, c in q.coeffs.items()}
    )
    return float(damped.evaluate(np.asarray(x, dtype=np.float64).reshape(1, -1))[0])


def ornstein_uhlenbeck_mc(
    q: MultilinearPoly, rho: float, x: np.ndarray, samples: int, seed: int
) -> McReport:
    """(U_rho Q)(x) = E[Q(rho x + sqrt(1-rho^2) G)] by direct averaging."""
    if not -1.0 <= rho <= 1.0:
        raise ValueError("correlation must lie in [-1, 1]")
    if samples <= 0:
        raise ValueError("samples must be positive")
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    if x.shape[1] != q.n:
        raise ValueError(f"evaluation point must have {q.n} coordinates")
    g = GaussianSampler(seed, q.n).standard(samples)
    return mc_report(q.evaluate(rho * x + math.sqrt(1.0 - rho * rho) * g), seed)
