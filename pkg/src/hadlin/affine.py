"""Affine maps between Boolean function spaces.

M_{A,b,beta,c} sends a k-bit function f to the k'-bit function
    y  |->  f(Ay + b) * (-1)^c * chi_beta(y),
where A is a full-rank k x k' matrix over F_2, b in F_2^k, beta in F_2^{k'}
and c a bit.  For k = k' these maps form a group under composition; they
preserve dimension and pairwise distance, and permute the affine functions
(the source/sink nodes of all flow graphs in this package).
"""

from dataclasses import dataclass
from functools import lru_cache

from .bits import (
    chi_mask,
    identity_rows,
    mat_inverse,
    mat_mul,
    mat_rank,
    mat_transpose,
    mat_vec,
    parity,
)
from .boolfn import BoolFn

__all__ = [
    "AffineMap",
    "identity_map",
    "apply",
    "compose",
    "inverse",
    "sharp",
    "sharp_apply",
    "enumerate_group",
    "enumerate_lifts",
    "group_order",
    "lift_count",
]


@dataclass(frozen=True)
class AffineMap:
    """The tuple (A, b, beta, c); domain arity k, codomain arity kp >= k."""

    k: int
    kp: int
    a_rows: tuple  # k row masks, each kp bits wide
    b: int  # k-bit vector
    beta: int  # kp-bit vector
    c: int  # single bit

    def __post_init__(self):
        if len(self.a_rows) != self.k:
            raise ValueError("A must have k rows")
        if mat_rank(self.a_rows) != self.k:
            raise ValueError("A must have rank k")
        if not 0 <= self.b < (1 << self.k):
            raise ValueError("b out of range")
        if not 0 <= self.beta < (1 << self.kp):
            raise ValueError("beta out of range")
        if self.c not in (0, 1):
            raise ValueError("c must be a bit")

    def point_map(self, y: int) -> int:
        """The pullback point transform y -> Ay + b."""
        return mat_vec(self.a_rows, y) ^ self.b

    def sign_mask(self) -> int:
        """Table mask over codomain points of (-1)^c chi_beta."""
        m = chi_mask(self.beta, self.kp)
        if self.c:
            m ^= (1 << (1 << self.kp)) - 1
        return m

    def key(self) -> tuple:
        return (self.k, self.kp, self.a_rows, self.b, self.beta, self.c)


def identity_map(k: int) -> AffineMap:
    return AffineMap(k, k, identity_rows(k), 0, 0, 0)


def apply(m: AffineMap, f: BoolFn) -> BoolFn:
    """M(f)(y) = f(Ay + b) (-1)^c chi_beta(y)."""
    if f.k != m.k:
        raise ValueError(f"arity mismatch: map domain {m.k}, function {f.k}")
    out = 0
    for y in range(1 << m.kp):
        bit = (f.mask >> m.point_map(y)) & 1
        bit ^= m.c ^ parity(m.beta & y)
        out |= bit << y
    return BoolFn(m.kp, out)


def compose(m2: AffineMap, m1: AffineMap) -> AffineMap:
    """m2 after m1 (m1 applied to the function first)."""
    if m1.kp != m2.k:
        raise ValueError("arity mismatch in composition")
    a = mat_mul(m1.a_rows, m2.a_rows)
    b = mat_vec(m1.a_rows, m2.b) ^ m1.b
    beta = mat_vec(mat_transpose(m2.a_rows, m2.kp), m1.beta) ^ m2.beta
    c = m1.c ^ m2.c ^ parity(m1.beta & m2.b)
    return AffineMap(m1.k, m2.kp, a, b, beta, c)


def inverse(m: AffineMap) -> AffineMap:
    if m.k != m.kp:
        raise ValueError("only square maps are invertible")
    ainv = mat_inverse(m.a_rows)
    b = mat_vec(ainv, m.b)
    beta = mat_vec(mat_transpose(ainv, m.k), m.beta)
    c = m.c ^ parity(b & m.beta)
    return AffineMap(m.k, m.k, ainv, b, beta, c)


def sharp(m: AffineMap) -> AffineMap:
    """The companion map M# = M_{A^T, beta, b, c}, pulling placements back.

    M lifts the sinks of placement g onto the sinks of g' exactly when
    sharp(M)(g') = g.
    """
    return AffineMap(m.kp, m.k, mat_transpose(m.a_rows, m.kp), m.beta, m.b, m.c)


def sharp_apply(m: AffineMap, g: BoolFn) -> BoolFn:
    return apply(sharp(m), g)


def group_order(k: int) -> int:
    return lift_count(k, k)


def lift_count(k: int, kp: int) -> int:
    n = 1
    for i in range(k):
        n *= (1 << kp) - (1 << i)
    return n * (1 << k) * (1 << kp) * 2


def _full_rank_matrices(k: int, kp: int):
    """Yield all rank-k k x kp row tuples, rows chosen independent one by one."""

    def rec(rows, basis):
        if len(rows) == k:
            yield tuple(rows)
            return
        for r in range(1, 1 << kp):
            v = r
            for lb, bv in basis.items():
                if (v >> lb) & 1:
                    v ^= bv
            if v == 0:
                continue
            nb = dict(basis)
            nb[v.bit_length() - 1] = v
            rows.append(r)
            yield from rec(rows, nb)
            rows.pop()

    yield from rec([], {})


def enumerate_lifts(k: int, kp: int):
    """All maps in M_{k->k'}, each exactly once (iterator)."""
    if not 1 <= k <= kp <= 5:
        raise ValueError("need 1 <= k <= k' <= 5")
    if k == kp and k > 4:
        raise ValueError("group enumeration capped at k = 4")
    for rows in _full_rank_matrices(k, kp):
        for b in range(1 << k):
            for beta in range(1 << kp):
                yield AffineMap(k, kp, rows, b, beta, 0)
                yield AffineMap(k, kp, rows, b, beta, 1)


def enumerate_group(k: int):
    """All of M_{k->k} (iterator; group_order(k) elements)."""
    if k > 4:
        raise ValueError("group enumeration capped at k = 4 (memory guard)")
    return enumerate_lifts(k, k)


@lru_cache(maxsize=None)
def group_generators(k: int) -> tuple:
    """A small generating set of M_{k->k}.

    Invertible substitutions plus a point translation, one character twist and
    the global negation generate the whole group; generation of the GL part by
    a cycle and a transvection is verified by closure in gl_order_check().
    """
    gens = []
    ident = identity_rows(k)
    if k >= 2:
        cyc = tuple(1 << ((i + 1) % k) for i in range(k))
        trans = (0b11,) + tuple(1 << i for i in range(1, k))
        gens.append(AffineMap(k, k, cyc, 0, 0, 0))
        gens.append(AffineMap(k, k, trans, 0, 0, 0))
    gens.append(AffineMap(k, k, ident, 1, 0, 0))  # b = e1
    gens.append(AffineMap(k, k, ident, 0, 1, 0))  # beta = e1
    gens.append(AffineMap(k, k, ident, 0, 0, 1))  # negation
    return tuple(gens)


@lru_cache(maxsize=None)
def _gl_generated_order(k: int) -> int:
    """Order of the subgroup of GL(k,2) generated by the matrix generators."""
    if k == 1:
        return 1
    cyc = tuple(1 << ((i + 1) % k) for i in range(k))
    trans = (0b11,) + tuple(1 << i for i in range(1, k))
    seen = {cyc, trans}
    frontier = [cyc, trans]
    gens = [cyc, trans]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                p = mat_mul(a, g)
                if p not in seen:
                    seen.add(p)
                    nxt.append(p)
        frontier = nxt
    return len(seen)


def gl_order(k: int) -> int:
    n = 1
    for i in range(k):
        n *= (1 << k) - (1 << i)
    return n


def gl_order_check(k: int) -> bool:
    """True iff the shipped matrix generators generate all of GL(k,2)."""
    return _gl_generated_order(k) == gl_order(k)
