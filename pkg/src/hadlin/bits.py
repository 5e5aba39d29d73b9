"""Bit-level utilities shared by the function/affine-map machinery.

Boolean functions on F_2^k are packed into Python ints ("table masks"):
bit i is set iff f evaluates to -1 at the point whose j-th coordinate is
bit j of i.  Vectors in F_2^k are ints with coordinate j = bit j; k x k'
matrices over F_2 are tuples of k row masks (each a k'-bit int).
"""

import numpy as np

MAX_K = 5


def popcount(x: int) -> int:
    return bin(x).count("1")


def parity(x: int) -> int:
    return popcount(x) & 1


def parity_table(nbits: int) -> np.ndarray:
    """parity of i for i < 2**nbits, as uint8."""
    t = np.arange(1 << nbits, dtype=np.uint32)
    p = t.copy()
    for s in (16, 8, 4, 2, 1):
        p ^= p >> s
    return (p & 1).astype(np.uint8)


def chi_mask(beta: int, k: int) -> int:
    """Table mask of the character x -> (-1)^(beta, x): bit x set iff inner product is odd."""
    m = 0
    for x in range(1 << k):
        if parity(beta & x):
            m |= 1 << x
    return m


def bitstring_to_mask(s: str) -> int:
    m = 0
    for i, ch in enumerate(s):
        if ch == "1":
            m |= 1 << i
        elif ch != "0":
            raise ValueError(f"invalid truth-table character {ch!r}")
    return m


def mask_to_bitstring(mask: int, k: int) -> str:
    n = 1 << k
    return "".join("1" if (mask >> i) & 1 else "0" for i in range(n))


def lex_key(mask: int, k: int) -> int:
    """Integer key whose natural order equals lexicographic order of the bitstring."""
    n = 1 << k
    key = 0
    for i in range(n):
        if (mask >> i) & 1:
            key |= 1 << (n - 1 - i)
    return key


def lex_key_array(masks: np.ndarray, k: int) -> np.ndarray:
    n = 1 << k
    out = np.zeros(masks.shape, dtype=np.uint64)
    m = masks.astype(np.uint64)
    for i in range(n):
        out |= ((m >> np.uint64(i)) & np.uint64(1)) << np.uint64(n - 1 - i)
    return out


# ---------------------------------------------------------------------------
# GF(2) linear algebra on row-mask tuples.  A k x k' matrix A is a tuple of k
# ints; row i holds the k' coefficients of row i.  (A @ y)_i = parity(A[i] & y).


def mat_vec(rows, y: int) -> int:
    x = 0
    for i, r in enumerate(rows):
        if parity(r & y):
            x |= 1 << i
    return x


def mat_mul(a_rows, b_rows) -> tuple:
    """(A @ B) where A is k x m and B is m x k' (rows of B are k'-bit)."""
    out = []
    for ra in a_rows:
        acc = 0
        r = ra
        j = 0
        while r:
            if r & 1:
                acc ^= b_rows[j]
            r >>= 1
            j += 1
        out.append(acc)
    return tuple(out)


def mat_transpose(rows, ncols: int) -> tuple:
    out = []
    for j in range(ncols):
        c = 0
        for i, r in enumerate(rows):
            if (r >> j) & 1:
                c |= 1 << i
        out.append(c)
    return tuple(out)


def mat_rank(rows) -> int:
    rank = 0
    rows = list(rows)
    for i in range(len(rows)):
        piv = rows[i]
        if piv == 0:
            continue
        low = piv & -piv
        rank += 1
        for j in range(len(rows)):
            if j != i and rows[j] & low:
                rows[j] ^= piv
    return rank


def mat_inverse(rows) -> tuple:
    """Inverse of a square matrix given as row masks; raises on singular input."""
    k = len(rows)
    aug = [rows[i] | (1 << (k + i)) for i in range(k)]
    for col in range(k):
        piv = None
        for i in range(col, k):
            if (aug[i] >> col) & 1:
                piv = i
                break
        if piv is None:
            raise ValueError("matrix is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        for i in range(k):
            if i != col and (aug[i] >> col) & 1:
                aug[i] ^= aug[col]
    return tuple(aug[i] >> k for i in range(k))


def identity_rows(k: int) -> tuple:
    return tuple(1 << i for i in range(k))


def all_invertible_matrices(k: int):
    """All invertible k x k matrices over F_2 as row-mask tuples (k <= 4)."""
    if k > 4:
        raise ValueError("refusing to enumerate GL(k,2) for k > 4")
    out = []
    # enumerate by building row-echelon choices: brute force is fine up to 2^16
    for bits in range(1 << (k * k)):
        rows = tuple((bits >> (k * i)) & ((1 << k) - 1) for i in range(k))
        if mat_rank(rows) == k:
            out.append(rows)
    return out


def affine_span_tables(k: int):
    """For every subset mask S of F_2^k points, the affine span of S and its dimension.

    Returns (span_mask[2^(2^k)]... ) -- only sensible for k <= 4, where點 sets
    are 16-bit masks.  span[0] = 0 and dim[0] = -1 (empty set).
    """
    n = 1 << k
    size = 1 << n
    span = np.zeros(size, dtype=np.uint32)
    dim = np.full(size, -1, dtype=np.int8)
    for s in range(1, size):
        low = (s & -s).bit_length() - 1  # anchor point alpha0
        rest = s & ~(1 << low)
        basis = {}  # leading bit -> reduced vector
        m = rest
        while m:
            p = (m & -m).bit_length() - 1
            v = p ^ low
            while v:
                lb = v.bit_length() - 1
                if lb in basis:
                    v ^= basis[lb]
                else:
                    basis[lb] = v
                    break
            m &= m - 1
        basis = list(basis.values())
        d = len(basis)
        # expand span: alpha0 + linear span of basis
        pts = [0]
        for b in basis:
            pts += [p ^ b for p in pts]
        mask = 0
        for p in pts:
            mask |= 1 << (p ^ low)
        span[s] = mask
        dim[s] = d
    return span, dim
