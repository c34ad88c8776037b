"""Property tests with exact spectral acceptance probabilities, Monte-Carlo
protocol execution, the local decoder, and the quasirandomness classifier."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Spectrum, TruthTable, popcounts, wht
from .operators import McReport, correlated_masks, mc_report, noisy_influence_profile, stability
from .rng import bernoulli_masks, substream, uniform_masks

# the six not-all-equal triples as (x, y, z) bits, bit 1 encoding -1
NAE_TRIPLES = np.array(
    [(0, 0, 1), (0, 1, 0), (0, 1, 1), (1, 0, 0), (1, 0, 1), (1, 1, 0)], dtype=np.int64
)


@dataclass(frozen=True)
class TestOutcome:
    test: str
    params: dict = field(default_factory=dict)
    exact_accept: float | None = None
    mc: McReport | None = None

    def to_json(self) -> dict:
        return {
            "test": self.test,
            "params": self.params,
            "exact_accept": self.exact_accept,
            "mc": self.mc.to_json() if self.mc else None,
        }


@dataclass(frozen=True)
class QuasirandomReport:
    epsilon: float
    delta: float
    J: tuple[int, ...]  # 1-indexed variables with large noisy influence
    is_quasirandom: bool


def _spectrum(f: TruthTable) -> Spectrum:
    if not isinstance(f, TruthTable):
        raise ValueError("property testers take boolean tables")
    return wht(f)


def blr(f: TruthTable, samples: int | None = None, seed: int = 0) -> TestOutcome:
    """BLR linearity test: accept iff f(x) f(y) = f(x ^ y).

    Exact acceptance is 1/2 + 1/2 sum_S f^(S)^3.
    """
    s = _spectrum(f)
    exact = 0.5 + 0.5 * float(np.sum(s.coeffs**3))
    mc = None
    if samples is not None:
        if samples <= 0:
            raise ValueError("samples must be positive")
        rng = substream(seed, 0)
        vals = f.signs()
        xs = uniform_masks(rng, samples, f.n)
        ys = uniform_masks(rng, samples, f.n)
        ok = vals[xs] * vals[ys] == vals[xs ^ ys]
        mc = mc_report(ok.astype(np.float64), seed)
    return TestOutcome("blr", {}, exact, mc)


def nearest_linear(f: TruthTable) -> tuple[int, float]:
    """The parity chi_S maximizing f^(S); ties broken by smallest mask."""
    s = _spectrum(f)
    mask = int(np.argmax(s.coeffs))  # argmax takes the first, i.e. smallest mask
    return mask, (1.0 - float(s.coeffs[mask])) / 2.0


def nearest_signed_dictator(f: TruthTable) -> tuple[int, int, float]:
    """(sign, variable index, distance) of the closest +-DICT_i."""
    s = _spectrum(f)
    best = (1, 1, s.coeffs[1])
    for i in range(1, f.n + 1):
        c = float(s.coeffs[1 << (i - 1)])
        for sign in (1, -1):
            if sign * c > best[2]:
                best = (sign, i, sign * c)
    return best[0], best[1], (1.0 - best[2]) / 2.0


def local_decode(f: TruthTable, x: int, trials: int, seed: int) -> int:
    """Majority over `trials` probes of f(y) f(x ^ y), y uniform.

    When f is eps-close to some chi_S, each probe equals chi_S(x) with
    probability at least 1 - 2 eps.
    """
    if trials < 1 or trials % 2 == 0:
        raise ValueError("trials must be odd so the vote cannot tie")
    rng = substream(seed, 0)
    vals = f.signs()
    ys = uniform_masks(rng, trials, f.n)
    votes = vals[ys] * vals[ys ^ x]
    return 1 if votes.sum() > 0 else -1


def nae_test(f: TruthTable, samples: int | None = None, seed: int = 0) -> TestOutcome:
    """3-query not-all-equal test under per-coordinate uniform NAE triples.

    Exact acceptance is 3/4 - 3/4 Stab_{-1/3}(f).
    """
    s = _spectrum(f)
    exact = 0.75 - 0.75 * stability(s, -1.0 / 3.0)
    mc = None
    if samples is not None:
        if samples <= 0:
            raise ValueError("samples must be positive")
        rng = substream(seed, 0)
        xs, ys, zs = nae_query_masks(rng, samples, f.n)
        vals = f.signs()
        a, b, c = vals[xs], vals[ys], vals[zs]
        accept = 0.75 - 0.25 * (a * b + b * c + a * c)
        mc = mc_report(accept, seed)
    return TestOutcome("nae", {}, exact, mc)


def nae_query_masks(
    rng: np.random.Generator, m: int, n: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sample m query triples, each coordinate uniform over the 6 NAE triples."""
    picks = rng.integers(0, 6, size=(m, n))
    powers = np.int64(1) << np.arange(n, dtype=np.int64)
    triples = NAE_TRIPLES[picks]  # (m, n, 3)
    xs = triples[:, :, 0] @ powers
    ys = triples[:, :, 1] @ powers
    zs = triples[:, :, 2] @ powers
    return xs, ys, zs


def kkmo_test(
    f: TruthTable, rho: float, samples: int | None = None, seed: int = 0
) -> TestOutcome:
    """2-query rho-noise test: accept iff f(x) = f(y) for y ~ N_rho(x).

    Exact acceptance is 1/2 + 1/2 Stab_rho(f).
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError("noise test needs rho in [0, 1]")
    s = _spectrum(f)
    exact = 0.5 + 0.5 * stability(s, rho)
    mc = None
    if samples is not None:
        if samples <= 0:
            raise ValueError("samples must be positive")
        xs, ys = correlated_masks(substream(seed, 0), samples, f.n, rho)
        vals = f.signs()
        mc = mc_report((vals[xs] == vals[ys]).astype(np.float64), seed)
    return TestOutcome("kkmo", {"rho": rho}, exact, mc)


def threexor_test(
    f: TruthTable, delta: float, samples: int | None = None, seed: int = 0
) -> TestOutcome:
    """Noisy 3XOR test: accept iff f(x') f(y) f(z) = 1 with z = x ^ y and
    x' ~ N_{1-delta}(x).

    Exact acceptance is 1/2 + 1/2 sum_S (1-delta)^|S| f^(S)^3.
    """
    if not 0.0 <= delta <= 1.0:
        raise ValueError("3xor test needs delta in [0, 1]")
    s = _spectrum(f)
    damp = (1.0 - delta) ** popcounts(f.n).astype(np.float64)
    exact = 0.5 + 0.5 * float(np.dot(damp, s.coeffs**3))
    mc = None
    if samples is not None:
        if samples <= 0:
            raise ValueError("samples must be positive")
        rng = substream(seed, 0)
        xs = uniform_masks(rng, samples, f.n)
        ys = uniform_masks(rng, samples, f.n)
        xps = xs ^ bernoulli_masks(rng, samples, f.n, delta / 2.0)
        vals = f.signs()
        ok = vals[xps] * vals[ys] * vals[xs ^ ys] == 1.0
        mc = mc_report(ok.astype(np.float64), seed)
    return TestOutcome("threexor", {"delta": delta}, exact, mc)


def quasirandomness(f: TruthTable | Spectrum, epsilon: float, delta: float) -> QuasirandomReport:
    """Classify f by its (1-delta)-noisy influences against threshold epsilon."""
    if not (0.0 < epsilon <= 1.0 and 0.0 < delta <= 1.0):
        raise ValueError("epsilon and delta must lie in (0, 1]")
    profile = noisy_influence_profile(f, 1.0 - delta)
    J = tuple(int(i + 1) for i in np.nonzero(profile >= epsilon)[0])
    return QuasirandomReport(epsilon, delta, J, len(J) == 0)
