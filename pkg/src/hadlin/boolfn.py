"""Boolean functions on F_2^k: truth tables, Fourier analysis, distances,
and the Hadamard predicate matrix.

A k-bit Boolean function takes values in {+1, -1}.  Truth tables are indexed
in little-endian counting order: entry i holds f(x) for the point x whose
j-th coordinate is bit j of i.  The serialized text form is a bitstring of
length 2^k with '0' for +1 and '1' for -1.
"""

from dataclasses import dataclass
from functools import lru_cache

from .bits import (
    MAX_K,
    bitstring_to_mask,
    chi_mask,
    mask_to_bitstring,
    parity,
    popcount,
)
from .rational import Rat

__all__ = ["BoolFn", "chi", "fourier", "dimension", "dist", "hadamard_matrix", "FourierTable"]


@dataclass(frozen=True, order=True)
class BoolFn:
    """Truth table of a k-bit Boolean function with values in {+1, -1}.

    `mask` packs the table: bit i set iff f(point i) = -1.
    """

    k: int
    mask: int

    def __post_init__(self):
        if not 1 <= self.k <= MAX_K:
            raise ValueError(f"arity must be in 1..{MAX_K}, got {self.k}")
        if not 0 <= self.mask < (1 << (1 << self.k)):
            raise ValueError("truth-table mask out of range")

    @classmethod
    def from_table(cls, k: int, values) -> "BoolFn":
        values = tuple(values)
        if len(values) != 1 << k:
            raise ValueError(f"table must have 2^{k} entries")
        mask = 0
        for i, v in enumerate(values):
            if v == -1:
                mask |= 1 << i
            elif v != 1:
                raise ValueError("table entries must be +1 or -1")
        return cls(k, mask)

    @classmethod
    def from_string(cls, s: str, k: int | None = None) -> "BoolFn":
        if k is None:
            n = len(s)
            k = n.bit_length() - 1
            if 1 << k != n:
                raise ValueError(f"bitstring length {n} is not a power of two")
        elif len(s) != 1 << k:
            raise ValueError(f"bitstring length must be 2^{k}")
        return cls(k, bitstring_to_mask(s))

    def __call__(self, x: int) -> int:
        return -1 if (self.mask >> x) & 1 else 1

    def table(self) -> tuple:
        return tuple(self(x) for x in range(1 << self.k))

    def __str__(self) -> str:
        return mask_to_bitstring(self.mask, self.k)

    def __neg__(self) -> "BoolFn":
        return BoolFn(self.k, self.mask ^ ((1 << (1 << self.k)) - 1))

    def __mul__(self, other: "BoolFn") -> "BoolFn":
        if self.k != other.k:
            raise ValueError("arity mismatch")
        return BoolFn(self.k, self.mask ^ other.mask)

    def weight(self) -> int:
        """Number of points where f = -1."""
        return popcount(self.mask)

    def is_affine(self) -> bool:
        return dimension(self) == 0


def chi(alpha, k: int | None = None) -> BoolFn:
    """The linear character x -> (-1)^(alpha, x); chi(0) is the constant +1."""
    if isinstance(alpha, (tuple, list)):
        if k is None:
            k = len(alpha)
        elif k != len(alpha):
            raise ValueError("alpha must have k coordinates")
        a = 0
        for j, bit in enumerate(alpha):
            if bit:
                a |= 1 << j
    else:
        a = int(alpha)
        if k is None:
            raise ValueError("k is required when alpha is given as an int")
        if a >= (1 << k):
            raise ValueError("alpha must have k coordinates")
    return BoolFn(k, chi_mask(a, k))


@dataclass(frozen=True)
class FourierTable:
    """Exact Fourier coefficients of a BoolFn; coeffs[alpha] is dyadic."""

    k: int
    coeffs: tuple  # indexed by alpha = 0 .. 2^k - 1

    def __getitem__(self, alpha: int):
        return self.coeffs[alpha]

    def support(self) -> tuple:
        return tuple(a for a, c in enumerate(self.coeffs) if c != 0)

    def inverse(self) -> BoolFn:
        """Reconstruct the truth table; exact, fails loudly if coeffs are not a BoolFn's."""
        n = 1 << self.k
        values = []
        for x in range(n):
            v = sum(
                c if parity(a & x) == 0 else -c
                for a, c in enumerate(self.coeffs)
                if c != 0
            )
            if v not in (1, -1):
                raise ValueError("coefficients do not describe a +-1 function")
            values.append(int(v))
        return BoolFn.from_table(self.k, values)


def fourier(f: BoolFn) -> FourierTable:
    """Exact Fourier transform: coeff[alpha] = 2^-k sum_x chi_alpha(x) f(x)."""
    n = 1 << f.k
    # Walsh-Hadamard over the +-1 table with integer arithmetic
    vals = [1 - 2 * ((f.mask >> x) & 1) for x in range(n)]
    h = 1
    while h < n:
        for i in range(0, n, h * 2):
            for j in range(i, i + h):
                a, b = vals[j], vals[j + h]
                vals[j], vals[j + h] = a + b, a - b
        h *= 2
    return FourierTable(f.k, tuple(Rat(v, n) for v in vals))


@lru_cache(maxsize=None)
def _support_mask(k: int, mask: int) -> int:
    n = 1 << k
    vals = [1 - 2 * ((mask >> x) & 1) for x in range(n)]
    h = 1
    while h < n:
        for i in range(0, n, h * 2):
            for j in range(i, i + h):
                a, b = vals[j], vals[j + h]
                vals[j], vals[j + h] = a + b, a - b
        h *= 2
    s = 0
    for a, v in enumerate(vals):
        if v:
            s |= 1 << a
    return s


def dimension(f: BoolFn) -> int:
    """Dimension of the affine span of the Fourier support; 0 for affine functions."""
    from .bits import affine_span_tables  # local import, tables cached below

    span, dim = _span_tables(f.k)
    return int(dim[_support_mask(f.k, f.mask)])


def affine_support(f: BoolFn) -> int:
    """Point mask of the supporting affine subspace Aff(f)."""
    span, _ = _span_tables(f.k)
    return int(span[_support_mask(f.k, f.mask)])


@lru_cache(maxsize=None)
def _span_tables(k: int):
    from .bits import affine_span_tables

    return affine_span_tables(k)


def dist(f1: BoolFn, f2: BoolFn):
    """Normalised Hamming distance, exact rational in [0, 1]."""
    if f1.k != f2.k:
        raise ValueError("arity mismatch")
    return Rat(popcount(f1.mask ^ f2.mask), 1 << f1.k)


def hadamard_matrix(k: int) -> list:
    """0/1 matrix with 2^k rows (beta) and 2^k - 1 columns (nonempty S).

    Entry (beta, S) is 0 if chi_beta(S) = 1 and 1 otherwise; row and column
    index sets are enumerated in binary counting order with element j of [k]
    mapped to bit j-1.
    """
    if k < 2:
        raise ValueError("hadamard_matrix requires k >= 2")
    return [
        [parity(beta & s) for s in range(1, 1 << k)]
        for beta in range(1 << k)
    ]
