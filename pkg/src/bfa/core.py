"""Function tables on {-1,1}^n, the fast Walsh-Hadamard transform, and
spectral summaries.

Index convention: inputs are bitmasks, bit i of the index holds variable
x_{i+1}, and a bit value b encodes x = (-1)^b.  With this map the parity
chi_S(x) = prod_{i in S} x_i is (-1)^{popcount(S & x)}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .rng import substream

N_MAX = 26

_DEGREE_TOL = 1e-9


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=32)
def _popcounts_cached(n: int) -> np.ndarray:
    return _freeze(np.bitwise_count(np.arange(1 << n, dtype=np.uint32)).astype(np.int8))


def popcounts(n: int) -> np.ndarray:
    """popcount of every mask in [0, 2**n), as a read-only int8 array."""
    if n <= 16:
        return _popcounts_cached(n)
    return np.bitwise_count(np.arange(1 << n, dtype=np.uint32)).astype(np.int8)


def _check_n(n: int) -> None:
    if not 1 <= n <= N_MAX:
        raise ValueError(f"variable count must be in [1, {N_MAX}], got {n}")


@dataclass(frozen=True, eq=False)
class TruthTable:
    """Dense +-1 valued function, bit-packed: bit 1 encodes f(x) = -1."""

    n: int
    bits: np.ndarray  # packed uint8, little bit order, one bit per input mask

    def __post_init__(self):
        _check_n(self.n)
        size = 1 << self.n
        expected = (size + 7) // 8
        if self.bits.dtype != np.uint8 or self.bits.shape != (expected,):
            raise ValueError(f"packed table must be {expected} uint8 bytes")
        # trailing pad bits must be zero so equality and hashing are canonical
        tail = np.unpackbits(self.bits, bitorder="little")[size:]
        if tail.any():
            raise ValueError("nonzero padding bits in packed table")
        _freeze(self.bits)

    @classmethod
    def from_signs(cls, n: int, signs: np.ndarray) -> "TruthTable":
        signs = np.asarray(signs)
        if signs.shape != (1 << n,) or not np.all(np.abs(signs) == 1):
            raise ValueError("signs must be a +-1 vector of length 2**n")
        bits = np.packbits(signs < 0, bitorder="little")
        return cls(n, bits)

    def signs(self) -> np.ndarray:
        """The table as a +-1 float64 vector indexed by input mask."""
        bits = np.unpackbits(self.bits, count=1 << self.n, bitorder="little")
        return 1.0 - 2.0 * bits.astype(np.float64)

    def sign_at(self, x: int) -> int:
        bit = (self.bits[x >> 3] >> (x & 7)) & 1
        return -1 if bit else 1

    def __eq__(self, other):
        return (
            isinstance(other, TruthTable)
            and self.n == other.n
            and self.bits.tobytes() == other.bits.tobytes()
        )

    def __hash__(self):
        return hash((self.n, self.bits.tobytes()))


@dataclass(frozen=True, eq=False)
class RealTable:
    """Dense real-valued function on {-1,1}^n, same index convention."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        _check_n(self.n)
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.shape != (1 << self.n,):
            raise ValueError(f"table must hold {1 << self.n} values")
        if not np.all(np.isfinite(values)):
            raise ValueError("table values must be finite")
        object.__setattr__(self, "values", _freeze(values))

    def __eq__(self, other):
        return (
            isinstance(other, RealTable)
            and self.n == other.n
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.n, self.values.tobytes()))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """All 2**n Fourier coefficients, indexed by subset bitmask."""

    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        _check_n(self.n)
        coeffs = np.ascontiguousarray(self.coeffs, dtype=np.float64)
        if coeffs.shape != (1 << self.n,):
            raise ValueError(f"spectrum must hold {1 << self.n} coefficients")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", _freeze(coeffs))

    def __eq__(self, other):
        return (
            isinstance(other, Spectrum)
            and self.n == other.n
            and np.array_equal(self.coeffs, other.coeffs)
        )

    def __hash__(self):
        return hash((self.n, self.coeffs.tobytes()))


@dataclass(frozen=True)
class SpectralSummary:
    mean: float
    variance: float
    degree: int
    level_weights: np.ndarray  # W^0 .. W^n

    def __post_init__(self):
        _freeze(self.level_weights)


Table = TruthTable | RealTable


def table_values(f: Table) -> np.ndarray:
    return f.signs() if isinstance(f, TruthTable) else f.values


def _fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis.

    Radix-2 butterfly, O(n 2^n), pairwise summation order.  Output entry S
    is sum_x a[x] * (-1)^{popcount(S & x)}.
    """
    a = np.array(values, dtype=np.float64, copy=True)
    size = a.shape[-1]
    lead = a.shape[:-1]
    h = 1
    while h < size:
        a = a.reshape(lead + (size // (2 * h), 2, h))
        top = a[..., 0, :] + a[..., 1, :]
        bot = a[..., 0, :] - a[..., 1, :]
        a[..., 0, :] = top
        a[..., 1, :] = bot
        a = a.reshape(lead + (size,))
        h *= 2
    return a


def wht(f: Table) -> Spectrum:
    """Fourier coefficients f^(S) = 2^-n sum_x f(x) chi_S(x)."""
    return Spectrum(f.n, _fwht(table_values(f)) / (1 << f.n))


def wht_batch(n: int, values: np.ndarray) -> np.ndarray:
    """Coefficient matrix for a (batch, 2**n) stack of value rows."""
    return _fwht(values) / (1 << n)


def inverse_wht(s: Spectrum) -> RealTable:
    """values[x] = sum_S f^(S) chi_S(x); exact inverse of wht up to rounding."""
    return RealTable(s.n, _fwht(s.coeffs))


def threshold(f: RealTable) -> TruthTable:
    """Sign-threshold a real table (zeros map to +1)."""
    return TruthTable.from_signs(f.n, np.where(f.values < 0, -1.0, 1.0))


def summary(s: Spectrum) -> SpectralSummary:
    """Mean, variance, Fourier degree and level weights of a spectrum."""
    sq = s.coeffs**2
    pc = popcounts(s.n)
    weights = np.bincount(pc, weights=sq, minlength=s.n + 1)
    nonzero = np.abs(s.coeffs) > _DEGREE_TOL
    degree = int(pc[nonzero].max()) if nonzero.any() else 0
    return SpectralSummary(
        mean=float(s.coeffs[0]),
        variance=float(sq.sum() - sq[0]),
        degree=degree,
        level_weights=weights,
    )


def inner_product(f: Table, g: Table) -> float:
    """<f,g> = E[f(x) g(x)]."""
    if f.n != g.n:
        raise ValueError("tables must share a variable count")
    return float(np.dot(table_values(f), table_values(g)) / (1 << f.n))


def distance(f: TruthTable, g: TruthTable) -> float:
    """Normalized Hamming distance Pr[f(x) != g(x)] = (1 - <f,g>)/2."""
    if f.n != g.n:
        raise ValueError("tables must share a variable count")
    disagree = int(np.bitwise_count(np.bitwise_xor(f.bits, g.bits)).sum())
    return disagree / (1 << f.n)


def chi(mask: int, n: int) -> TruthTable:
    """The parity chi_S as a truth table, S given as a bitmask."""
    _check_n(n)
    if not 0 <= mask < (1 << n):
        raise ValueError("parity mask out of range")
    pc = np.bitwise_count(np.arange(1 << n, dtype=np.uint32) & np.uint32(mask))
    return TruthTable.from_signs(n, 1.0 - 2.0 * (pc & 1).astype(np.float64))


# ---------------------------------------------------------------------------
# Named families
# ---------------------------------------------------------------------------


def _variable_signs(n: int) -> np.ndarray:
    """(2**n, n) matrix: column i holds x_{i+1} over all input masks."""
    idx = np.arange(1 << n, dtype=np.uint32)
    bits = (idx[:, None] >> np.arange(n, dtype=np.uint32)[None, :]) & 1
    return 1.0 - 2.0 * bits.astype(np.float64)


def make_family(spec: str) -> TruthTable:
    """Build a named function from a descriptor string.

    Descriptors: maj:n (n odd), dict:i:n, parity:mask:n, tribes:w:s,
    and:n, or:n, const:+1:n, const:-1:n, random:seed:n,
    ltf:a0,a1,...,an.  Tribes/and/or use -1 as true.
    """
    parts = spec.strip().split(":")
    kind = parts[0].lower()
    try:
        if kind == "maj":
            (n,) = map(int, parts[1:])
            if n % 2 == 0:
                raise ValueError(f"maj needs an odd variable count, got {n}")
            _check_n(n)
            s = _variable_signs(n).sum(axis=1)
            return TruthTable.from_signs(n, np.sign(s))
        if kind == "dict":
            i, n = map(int, parts[1:])
            _check_n(n)
            if not 1 <= i <= n:
                raise ValueError(f"dictator index {i} outside [1, {n}]")
            return chi(1 << (i - 1), n)
        if kind == "parity":
            mask, n = (int(parts[1], 0), int(parts[2]))
            return chi(mask, n)
        if kind == "tribes":
            w, s = map(int, parts[1:])
            if w < 1 or s < 1:
                raise ValueError("tribes needs positive tribe width and count")
            n = w * s
            _check_n(n)
            idx = np.arange(1 << n, dtype=np.uint64)
            any_tribe = np.zeros(1 << n, dtype=bool)
            for j in range(s):
                tribe = np.uint64(((1 << w) - 1) << (j * w))
                any_tribe |= (idx & tribe) == tribe  # all members voted -1
            return TruthTable.from_signs(n, np.where(any_tribe, -1.0, 1.0))
        if kind == "and":
            (n,) = map(int, parts[1:])
            return make_family(f"tribes:{n}:1")
        if kind == "or":
            (n,) = map(int, parts[1:])
            return make_family(f"tribes:1:{n}")
        if kind == "const":
            sign, n = parts[1], int(parts[2])
            _check_n(n)
            if sign in ("+1", "1"):
                val = 1.0
            elif sign == "-1":
                val = -1.0
            else:
                raise ValueError(f"const value must be +1 or -1, got {sign!r}")
            return TruthTable.from_signs(n, np.full(1 << n, val))
        if kind == "random":
            seed, n = map(int, parts[1:])
            _check_n(n)
            rng = substream(seed, 0)
            bits = rng.integers(0, 2, size=1 << n)
            return TruthTable.from_signs(n, 1.0 - 2.0 * bits.astype(np.float64))
        if kind == "ltf":
            coeffs = [float(c) for c in ":".join(parts[1:]).split(",")]
            n = len(coeffs) - 1
            _check_n(n)
            vals = coeffs[0] + _variable_signs(n) @ np.asarray(coeffs[1:])
            if np.any(vals == 0):
                raise ValueError("LTF ties on some input (a.x = 0)")
            return TruthTable.from_signs(n, np.sign(vals))
    except (IndexError, ValueError) as exc:
        if isinstance(exc, ValueError) and exc.args and "invalid literal" not in str(exc):
            raise
        raise ValueError(f"malformed family descriptor {spec!r}") from exc
    raise ValueError(f"unknown family {kind!r} in {spec!r}")


# ---------------------------------------------------------------------------
# Closed-form majority spectrum
# ---------------------------------------------------------------------------


def maj_coefficient(n: int, k: int) -> float:
    """Fourier coefficient of MAJ_n on any set of odd size k (0 for even k)."""
    if n % 2 == 0 or n < 1:
        raise ValueError("majority needs odd n")
    if not 0 <= k <= n:
        raise ValueError("level out of range")
    if k % 2 == 0:
        return 0.0
    j = (k - 1) // 2
    value = (
        Fraction(math.comb((n - 1) // 2, j), math.comb(n - 1, k - 1))
        * math.comb(n - 1, (n - 1) // 2)
        / Fraction(1 << (n - 1))
    )
    return float(value) if j % 2 == 0 else -float(value)


def maj_level_weights(n: int) -> np.ndarray:
    """Exact W^0..W^n of MAJ_n, computed in rational arithmetic."""
    if n % 2 == 0 or n < 1:
        raise ValueError("majority needs odd n")
    top = Fraction(math.comb(n - 1, (n - 1) // 2), 1 << (n - 1))
    weights = np.zeros(n + 1)
    for k in range(1, n + 1, 2):
        j = (k - 1) // 2
        coeff = Fraction(math.comb((n - 1) // 2, j), math.comb(n - 1, k - 1)) * top
        weights[k] = float(math.comb(n, k) * coeff * coeff)
    return weights


def maj_influence(n: int) -> float:
    """Inf_i(MAJ_n) = C(n-1, (n-1)/2) 2^-(n-1): votes split evenly without i."""
    if n % 2 == 0 or n < 1:
        raise ValueError("majority needs odd n")
    return float(Fraction(math.comb(n - 1, (n - 1) // 2), 1 << (n - 1)))


def maj_stability(n: int, rho: float) -> float:
    """Exact Stab_rho(MAJ_n) = sum_k rho^k W^k via the closed-form weights."""
    weights = maj_level_weights(n)
    return float(np.polynomial.polynomial.polyval(rho, weights))


# ---------------------------------------------------------------------------
# .bfn text format and family descriptors
# ---------------------------------------------------------------------------


def serialize_function(table: Table) -> str:
    """Render a table in the .bfn text format (ascending-mask order)."""
    lines = ["bfn 1", f"n {table.n}"]
    if isinstance(table, TruthTable):
        bits = np.unpackbits(table.bits, count=1 << table.n, bitorder="little")
        lines.append("kind bool")
        lines.append("".join("1" if b else "0" for b in bits))
    else:
        lines.append("kind real")
        lines.extend(repr(float(v)) for v in table.values)
    return "\n".join(lines) + "\n"


def parse_function(text: str) -> Table:
    """Parse a .bfn document or a family descriptor string."""
    stripped = text.strip()
    if not stripped.startswith("bfn"):
        return make_family(stripped)
    lines = [ln.strip() for ln in stripped.splitlines()]
    if len(lines) < 4 or lines[0].split() != ["bfn", "1"]:
        raise ValueError("malformed .bfn header: expected 'bfn 1'")
    head_n = lines[1].split()
    if len(head_n) != 2 or head_n[0] != "n":
        raise ValueError("malformed .bfn header: expected 'n <int>'")
    n = int(head_n[1])
    _check_n(n)
    kind_line = lines[2].split()
    if len(kind_line) != 2 or kind_line[0] != "kind" or kind_line[1] not in ("bool", "real"):
        raise ValueError("malformed .bfn header: expected 'kind bool|real'")
    size = 1 << n
    if kind_line[1] == "bool":
        if len(lines) != 4:
            raise ValueError("bool payload must be a single line")
        payload = lines[3]
        if len(payload) != size or set(payload) - {"0", "1"}:
            raise ValueError(f"bool payload must be {size} chars over {{0,1}}")
        signs = np.array([-1.0 if c == "1" else 1.0 for c in payload])
        return TruthTable.from_signs(n, signs)
    payload = lines[3:]
    if len(payload) != size:
        raise ValueError(f"real payload must have {size} lines")
    values = np.array([float(v) for v in payload])
    if not np.all(np.isfinite(values)):
        raise ValueError("real payload must be finite")
    return RealTable(n, values)
