"""Gadgets: orbit-compressed capacity distributions over function pairs.

A gadget assigns a nonnegative per-edge capacity to every edge orbit; the
expanded edge map (constant on orbits) is a probability distribution over
admissible unordered pairs {f1, f2}, f1 not in {f2, -f2}.  Files store one
line per orbit with the canonical pair and the per-edge capacity.
"""

from dataclasses import dataclass

from . import orbits
from .boolfn import BoolFn, dist
from .orbits import edge_orbits, group_context
from .rational import Rat, ZERO, format_rat, rat

__all__ = [
    "Gadget",
    "completeness",
    "symmetrize",
    "lift_gadget",
    "true_soundness_bruteforce",
    "parse_gadget",
    "serialize_gadget",
]


@dataclass(frozen=True)
class Gadget:
    """k plus a map edge-orbit-id -> per-edge capacity (only nonzero entries)."""

    k: int
    weights: tuple  # sorted tuple of (orbit_id, Rat)

    def __post_init__(self):
        total = ZERO
        table = edge_orbits(self.k)
        seen = set()
        for oid, w in self.weights:
            if oid in seen:
                raise ValueError(f"duplicate orbit {oid}")
            seen.add(oid)
            if w < 0:
                raise ValueError("capacities must be nonnegative")
            total += w * table[oid].size
        if total != 1:
            raise ValueError(f"total capacity is {total}, expected 1")

    @classmethod
    def from_weights(cls, k: int, weights: dict) -> "Gadget":
        items = tuple(sorted((int(o), Rat(w)) for o, w in weights.items() if w != 0))
        return cls(k, items)

    def weight_map(self) -> dict:
        return {o: w for o, w in self.weights}

    def support_orbits(self) -> list:
        return [o for o, _ in self.weights]

    def percent_of_total(self) -> list:
        """(orbit_id, exact share) of the total capacity; shares sum to 1."""
        table = edge_orbits(self.k)
        return [(o, w * table[o].size) for o, w in self.weights]


def completeness(g: Gadget):
    """1 - sum over orbits of size * weight * dist; the expected dictator-cut value."""
    table = edge_orbits(g.k)
    n = 1 << g.k
    s = ZERO
    for o, w in g.weights:
        e = table[o]
        s += w * e.size * Rat(e.ham, n)
    return 1 - s


def symmetrize(k: int, raw: dict) -> Gadget:
    """Full k->k lift of an arbitrary admissible edge-weight map, normalized.

    `raw` maps unordered pairs of BoolFns (or bitstrings, or table masks) to
    nonnegative weights.  Idempotent on symmetric inputs; preserves
    completeness.
    """
    table = edge_orbits(k)
    totals = {}
    grand = ZERO
    for (f1, f2), w in raw.items():
        w = Rat(w)
        if w < 0:
            raise ValueError("weights must be nonnegative")
        if w == 0:
            continue
        m1, m2 = _mask(f1, k), _mask(f2, k)
        oid = orbits.edge_orbit_of(k, m1, m2)
        totals[oid] = totals.get(oid, ZERO) + w
        grand += w
    if grand == 0:
        raise ValueError("all weights are zero")
    return Gadget.from_weights(
        k, {o: t / grand / table[o].size for o, t in totals.items()}
    )


def _mask(f, k: int) -> int:
    if isinstance(f, BoolFn):
        if f.k != k:
            raise ValueError("arity mismatch")
        return f.mask
    if isinstance(f, str):
        return BoolFn.from_string(f, k).mask
    return int(f)


def lift_gadget(g: Gadget, kp: int) -> Gadget:
    """The full k->k' lift; completeness is preserved and the result is symmetric."""
    if not g.k <= kp <= 4:
        raise ValueError("exact lift materialization requires k <= k' <= 4")
    if kp == g.k:
        return g
    from .affine import AffineMap, apply
    from .bits import identity_rows

    table_k = edge_orbits(g.k)
    table_kp = edge_orbits(kp)
    embed = AffineMap(g.k, kp, identity_rows(g.k), 0, 0, 0)
    out = {}
    for o, w in g.weights:
        e = table_k[o]
        hi = apply(embed, BoolFn(g.k, e.hi)).mask
        lo = apply(embed, BoolFn(g.k, e.lo)).mask
        oid = orbits.edge_orbit_of(kp, hi, lo)
        total = w * e.size
        out[oid] = out.get(oid, ZERO) + total / table_kp[oid].size
    return Gadget.from_weights(kp, out)


def expand_edges(g: Gadget):
    """Arrays (u, v, per-edge weight) of all support edges; u < v as ints."""
    ctx = group_context(g.k)
    table = edge_orbits(g.k)
    out = []
    for o, w in g.weights:
        e = table[o]
        a, b = orbits.expand_edge_orbit(ctx, e.hi, e.lo)
        out.append((a, b, w))
    return out


def true_soundness_bruteforce(g: Gadget):
    """Exact s(G) for k = 2 by enumerating folded assignments.

    The sampled assignment P covers the four affine fold-pairs {chi_a, -chi_a}
    (constants included, as in the folded-soundness form that upper-bounds by
    the relaxation); the maximum runs over folded completions of the four
    non-affine pairs.
    """
    if g.k != 2:
        raise ValueError("brute-force soundness is k = 2 only")
    ctx = group_context(2)
    full = ctx.full_mask
    edges = []
    for a, b, w in expand_edges(g):
        for u, v in zip(a.tolist(), b.tolist()):
            edges.append((u, v, w))
    # fold-pair representatives: min(mask, ~mask)
    reps = sorted({min(f, f ^ full) for f in range(16)})
    chis = [int(c) for c in ctx.chi_packed]
    primary = [min(c, c ^ full) for c in chis]
    free = [r for r in reps if r not in primary]
    idx = {r: i for i, r in enumerate(reps)}

    def val(bits):
        # bits: assignment per fold-pair rep; A(f) = bits[rep] xor (f is negated member)
        s = ZERO
        for u, v, w in edges:
            bu = bits[idx[min(u, u ^ full)]] ^ (1 if u != min(u, u ^ full) else 0)
            bv = bits[idx[min(v, v ^ full)]] ^ (1 if v != min(v, v ^ full) else 0)
            if bu == bv:
                s += w
        return s

    total = ZERO
    for p in range(1 << len(primary)):
        best = None
        for q in range(1 << len(free)):
            bits = [0] * len(reps)
            for i, r in enumerate(primary):
                bits[idx[r]] = (p >> i) & 1
            for i, r in enumerate(free):
                bits[idx[r]] = (q >> i) & 1
            v = val(bits)
            if best is None or v > best:
                best = v
        total += best
    return total / (1 << len(primary))


# ---------------------------------------------------------------------------
# text format


def serialize_gadget(g: Gadget) -> str:
    table = edge_orbits(g.k)
    lines = [f"k {g.k}"]
    for o, w in g.weights:
        e = table[o]
        lines.append(
            f"{BoolFn(g.k, e.hi)} {BoolFn(g.k, e.lo)} {format_rat(w)}"
        )
    return "\n".join(lines) + "\n"


def parse_gadget(text: str) -> Gadget:
    k = None
    weights = {}
    for lineno, rawline in enumerate(text.splitlines(), 1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if k is None:
            if len(parts) != 2 or parts[0] != "k":
                raise ValueError(f"line {lineno}: expected header 'k <int>'")
            k = int(parts[1])
            if not 1 <= k <= 4:
                raise ValueError(f"line {lineno}: arity {k} out of range")
            continue
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected '<f1> <f2> <p>/<q>'")
        f1 = BoolFn.from_string(parts[0], k).mask
        f2 = BoolFn.from_string(parts[1], k).mask
        w = rat(parts[2])
        if w < 0:
            raise ValueError(f"line {lineno}: negative capacity")
        hi, lo = orbits.canonical_pair(k, f1, f2)
        if {f1, f2} != {hi, lo}:
            raise ValueError(
                f"line {lineno}: pair is not a canonical orbit representative; "
                f"canonical form is {BoolFn(k, hi)} {BoolFn(k, lo)}"
            )
        oid = orbits.edge_orbit_index(k)[(hi, lo)]
        if oid in weights:
            raise ValueError(f"line {lineno}: duplicate orbit")
        weights[oid] = w
    if k is None:
        raise ValueError("missing header 'k <int>'")
    try:
        return Gadget.from_weights(k, weights)
    except ValueError as exc:
        raise ValueError(str(exc)) from None
