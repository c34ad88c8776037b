"""Derivatives, influences, the noise operator, stability, convolution, and
correlated-string sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import RealTable, Spectrum, Table, TruthTable, inverse_wht, popcounts, table_values, wht
from .rng import bernoulli_masks, substream, uniform_masks


@dataclass(frozen=True)
class McReport:
    """A Monte-Carlo estimate with its standard error and provenance."""

    estimate: float
    stderr: float
    samples: int
    seed: int

    def to_json(self) -> dict:
        return {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "samples": self.samples,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class InfluenceProfile:
    per_var: np.ndarray  # Inf_i(f), i = 1..n
    total: float

    def __post_init__(self):
        self.per_var.setflags(write=False)


@dataclass(frozen=True)
class CorrelatedPair:
    x: int
    y: int
    rho: float


def mc_report(samples: np.ndarray, seed: int) -> McReport:
    """Mean +- stderr of a sample vector."""
    m = len(samples)
    if m == 0:
        raise ValueError("samples must be positive")
    stderr = float(samples.std(ddof=1) / np.sqrt(m)) if m > 1 else 0.0
    return McReport(float(samples.mean()), stderr, m, seed)


def derivative(f: Table, i: int) -> RealTable:
    """D_i f(x) = (f(x with x_i=1) - f(x with x_i=-1)) / 2."""
    if not 1 <= i <= f.n:
        raise ValueError(f"variable index {i} outside [1, {f.n}]")
    vals = table_values(f)
    bit = 1 << (i - 1)
    idx = np.arange(1 << f.n)
    return RealTable(f.n, (vals[idx & ~bit] - vals[idx | bit]) / 2.0)


def influences(f: Table | Spectrum) -> InfluenceProfile:
    """Per-variable influences Inf_i(f) = sum_{S ni i} f^(S)^2 and their sum."""
    s = f if isinstance(f, Spectrum) else wht(f)
    sq = s.coeffs**2
    masks = np.arange(1 << s.n, dtype=np.uint32)
    per = np.array(
        [float(sq[(masks & np.uint32(1 << b)) != 0].sum()) for b in range(s.n)]
    )
    return InfluenceProfile(per, float(per.sum()))


def noisy_influence(f: Table | Spectrum, i: int, rho: float) -> float:
    """Inf_i^(rho)(f) = Stab_rho(D_i f) = sum_{S ni i} rho^(|S|-1) f^(S)^2."""
    s = f if isinstance(f, Spectrum) else wht(f)
    if not 1 <= i <= s.n:
        raise ValueError(f"variable index {i} outside [1, {s.n}]")
    if not 0.0 <= rho <= 1.0:
        raise ValueError("noisy influence needs rho in [0, 1]")
    masks = np.arange(1 << s.n, dtype=np.uint32)
    hit = (masks & np.uint32(1 << (i - 1))) != 0
    weights = rho ** (popcounts(s.n)[hit].astype(np.float64) - 1.0)
    return float(np.dot(weights, s.coeffs[hit] ** 2))


def noisy_influence_profile(f: Table | Spectrum, rho: float) -> np.ndarray:
    """All n noisy influences at once (one transform, n subset sums)."""
    s = f if isinstance(f, Spectrum) else wht(f)
    if not 0.0 <= rho <= 1.0:
        raise ValueError("noisy influence needs rho in [0, 1]")
    sq = s.coeffs**2
    weighted = sq * rho ** (popcounts(s.n).astype(np.float64) - 1.0)
    weighted[0] = 0.0  # empty set never contains i; avoids rho=0 blowup
    masks = np.arange(1 << s.n, dtype=np.uint32)
    return np.array(
        [float(weighted[(masks & np.uint32(1 << b)) != 0].sum()) for b in range(s.n)]
    )


def noise_operator(f: Table, rho: float) -> RealTable:
    """T_rho f, computed spectrally: multiply f^(S) by rho^|S| and invert."""
    if not -1.0 <= rho <= 1.0:
        raise ValueError("noise rate must lie in [-1, 1]")
    s = wht(f)
    damped = s.coeffs * rho ** popcounts(f.n).astype(np.float64)
    out = inverse_wht(Spectrum(f.n, damped)).values
    vals = table_values(f)
    # T_rho averages f, so clamp the rounding residue into [min f, max f]
    return RealTable(f.n, np.clip(out, vals.min(), vals.max()))


def stability(f: Table | Spectrum, rho: float) -> float:
    """Stab_rho(f) = sum_S rho^|S| f^(S)^2."""
    if not -1.0 <= rho <= 1.0:
        raise ValueError("noise rate must lie in [-1, 1]")
    s = f if isinstance(f, Spectrum) else wht(f)
    weights = rho ** popcounts(s.n).astype(np.float64)
    return float(np.dot(weights, s.coeffs**2))


def correlated_masks(
    rng: np.random.Generator, m: int, n: int, rho: float
) -> tuple[np.ndarray, np.ndarray]:
    """m rho-correlated input pairs: uniform x, each bit of y flipped w.p. (1-rho)/2."""
    xs = uniform_masks(rng, m, n)
    flips = bernoulli_masks(rng, m, n, (1.0 - rho) / 2.0)
    return xs, xs ^ flips


def stability_mc(f: Table, rho: float, samples: int, seed: int) -> McReport:
    """Estimate Stab_rho(f) = E[f(x) f(y)] over rho-correlated pairs."""
    if not -1.0 <= rho <= 1.0:
        raise ValueError("noise rate must lie in [-1, 1]")
    if samples <= 0:
        raise ValueError("samples must be positive")
    vals = table_values(f)
    xs, ys = correlated_masks(substream(seed, 0), samples, f.n, rho)
    return mc_report(vals[xs] * vals[ys], seed)


def convolve(f: RealTable, g: RealTable) -> RealTable:
    """(f * g)(x) = E_y[f(y) g(x + y)], via coefficient-wise product of spectra."""
    if f.n != g.n:
        raise ValueError("tables must share a variable count")
    prod = wht(f).coeffs * wht(g).coeffs
    return inverse_wht(Spectrum(f.n, prod))


def correlated_pair(n: int, rho: float, seed: int) -> CorrelatedPair:
    """One rho-correlated pair of inputs, drawn from substream 0 of `seed`."""
    if not -1.0 <= rho <= 1.0:
        raise ValueError("noise rate must lie in [-1, 1]")
    xs, ys = correlated_masks(substream(seed, 0), 1, n, rho)
    return CorrelatedPair(int(xs[0]), int(ys[0]), rho)


def edge_weight(x: int, y: int, rho: float, n: int) -> float:
    """Noisy-hypercube edge weight.

    wt(x,y) = 2^-n (1/2 - rho/2)^H(x,y) (1/2 + rho/2)^(n - H(x,y)), the exact
    probability of drawing the pair (x, y); rows sum to 2^-n.
    """
    if not -1.0 <= rho <= 1.0:
        raise ValueError("noise rate must lie in [-1, 1]")
    dist = int(x ^ y).bit_count()
    return (
        2.0**-n * (0.5 - 0.5 * rho) ** dist * (0.5 + 0.5 * rho) ** (n - dist)
    )
