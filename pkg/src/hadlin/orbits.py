"""Vectorized orbit machinery for the affine-map group acting on functions,
placements, edges and flow triples (k <= 4).

Functions are raw table masks (ints).  The group acts on nodes by
f -> M(f) and on source/sink placements by the left action
g -> sharp(inverse(M))(g); both actions induce the same orbit partition of
the function space but different transversals.  Edge orbits are enumerated
without materializing the ~2^31 pairs at k = 4: pairs are anchored at the
function-orbit representative with the lexicographically greatest bitstring
and classified by that representative's stabilizer, which is found by a
direct vectorized scan over all |AGL(k,2)| point transforms.
"""

import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import affine
from .affine import AffineMap, compose, inverse, sharp
from .bits import (
    affine_span_tables,
    all_invertible_matrices,
    chi_mask,
    lex_key_array,
    mat_transpose,
    parity_table,
)
from .rational import Rat


def cache_dir() -> Path:
    root = os.environ.get("HADLIN_CACHE_DIR")
    if root is None:
        root = Path.home() / ".cache" / "hadlin"
    p = Path(root)
    p.mkdir(parents=True, exist_ok=True)
    return p


# ---------------------------------------------------------------------------
# group context


class GroupContext:
    """Cached per-k data: generators, orbit labels, transversals, dimensions."""

    def __init__(self, k: int):
        if not 1 <= k <= 4:
            raise ValueError("orbit machinery supports 1 <= k <= 4")
        self.k = k
        self.n = 1 << k
        self.N = 1 << self.n
        assert affine.gl_order_check(k), "matrix generators must span GL(k,2)"
        self.gens = list(affine.group_generators(k))
        self.parity_small = parity_table(k)
        self.chi_packed = np.array(
            [chi_mask(beta, k) for beta in range(self.n)], dtype=np.int64
        )
        self.full_mask = self.N - 1  # all-ones table
        self.gen_perms = [self.perm_of_map(m) for m in self.gens]
        self.gen_perms_sharp = [self.perm_of_map(sharp(inverse(m))) for m in self.gens]
        self.lexkeys = lex_key_array(np.arange(self.N, dtype=np.int64), k)
        self._func_orbits()
        self._dims()
        self._transversals()
        self._maps_cache = {}

    # -- actions ------------------------------------------------------------

    def perm_of_map(self, m: AffineMap) -> np.ndarray:
        """Function-action permutation of all N table masks (requires m.k == m.kp == k)."""
        assert m.k == self.k and m.kp == self.k
        pm = [m.point_map(y) for y in range(self.n)]
        sm = m.sign_mask()
        vals = np.arange(self.N, dtype=np.int64)
        out = np.zeros(self.N, dtype=np.int64)
        for y in range(self.n):
            out |= ((vals >> pm[y]) & 1) << y
        out ^= sm
        return out

    def apply_mask(self, m: AffineMap, fmask: int) -> int:
        """Apply a square map to a raw table mask."""
        sm = m.sign_mask()
        out = 0
        for y in range(1 << m.kp):
            out |= (((fmask >> m.point_map(y)) & 1) ^ ((sm >> y) & 1)) << y
        return out

    # -- function orbits ------------------------------------------------------

    def _func_orbits(self):
        labels = np.arange(self.N, dtype=np.int64)
        while True:
            prev = labels.copy()
            for perm in self.gen_perms:
                np.minimum(labels, labels[perm], out=labels)
            labels = labels[labels]
            if np.array_equal(labels, prev):
                break
        # canonical representative per orbit: lexicographically greatest bitstring
        order = np.argsort(labels, kind="stable")
        sorted_labels = labels[order]
        starts = np.flatnonzero(
            np.r_[True, sorted_labels[1:] != sorted_labels[:-1]]
        )
        groups = np.split(order, starts[1:])
        reps = []
        for g in groups:
            reps.append(int(g[np.argmax(self.lexkeys[g])]))
        # orbit ids sorted by descending lex key of the canonical rep
        rep_order = np.argsort([-int(self.lexkeys[r]) for r in reps], kind="stable")
        self.func_orbit_reps = [reps[i] for i in rep_order]
        self.func_orbit_sizes = [len(groups[i]) for i in rep_order]
        self.func_labels = np.empty(self.N, dtype=np.int32)
        for oid, gi in enumerate(rep_order):
            self.func_labels[groups[gi]] = oid
        self.n_func_orbits = len(reps)

    # -- dimensions -----------------------------------------------------------

    def _dims(self):
        n, N = self.n, self.N
        vals = np.arange(N, dtype=np.int64)
        tables = np.empty((N, n), dtype=np.int32)
        for y in range(n):
            tables[:, y] = 1 - 2 * ((vals >> y) & 1)
        h = 1
        while h < n:
            for i in range(0, n, h * 2):
                a = tables[:, i : i + h].copy()
                b = tables[:, i + h : i + 2 * h].copy()
                tables[:, i : i + h] = a + b
                tables[:, i + h : i + 2 * h] = a - b
            h *= 2
        support = np.zeros(N, dtype=np.int64)
        for a in range(n):
            support |= (tables[:, a] != 0).astype(np.int64) << a
        span, dim = affine_span_tables(self.k)
        self.fdim = dim[support]
        self.aff_mask = span[support].astype(np.int64)  # point mask of Aff(f)
        self.is_affine = self.fdim == 0
        self.affine_nodes = np.flatnonzero(self.is_affine)
        assert len(self.affine_nodes) == 2 * self.n

    # -- transversals -----------------------------------------------------------

    def _bfs(self, perms, roots):
        parent = np.full(self.N, -1, dtype=np.int64)
        genid = np.full(self.N, -1, dtype=np.int8)
        visited = np.zeros(self.N, dtype=bool)
        visited[roots] = True
        frontier = np.array(roots, dtype=np.int64)
        order = [frontier]
        while frontier.size:
            nxt = []
            for gi, perm in enumerate(perms):
                img = perm[frontier]
                fresh = ~visited[img]
                if fresh.any():
                    new = img[fresh]
                    # dedupe within the round
                    new, idx = np.unique(new, return_index=True)
                    src = frontier[fresh][idx]
                    still = ~visited[new]
                    new, src = new[still], src[still]
                    visited[new] = True
                    parent[new] = src
                    genid[new] = gi
                    nxt.append(new)
            frontier = np.concatenate(nxt) if nxt else np.empty(0, dtype=np.int64)
            if frontier.size:
                order.append(frontier)
        assert visited.all()
        return parent, genid, np.concatenate(order)

    def _transversals(self):
        reps = self.func_orbit_reps
        self.func_parent, self.func_genid, self.func_bfs_order = self._bfs(
            self.gen_perms, reps
        )
        self.place_parent, self.place_genid, self.place_bfs_order = self._bfs(
            self.gen_perms_sharp, reps
        )

    def func_transversal(self, f: int) -> AffineMap:
        """Map W with W(orbit rep) = f under the function action."""
        key = ("f", f)
        m = self._maps_cache.get(key)
        if m is None:
            if self.func_parent[f] < 0:
                m = affine.identity_map(self.k)
            else:
                m = compose(
                    self.gens[self.func_genid[f]],
                    self.func_transversal(int(self.func_parent[f])),
                )
            self._maps_cache[key] = m
        return m

    def place_transversal(self, g: int) -> AffineMap:
        """Map M with sharp_action(M)(orbit rep) = g, i.e. sharp(M)(g) = rep."""
        key = ("p", g)
        m = self._maps_cache.get(key)
        if m is None:
            if self.place_parent[g] < 0:
                m = affine.identity_map(self.k)
            else:
                m = compose(
                    self.gens[self.place_genid[g]],
                    self.place_transversal(int(self.place_parent[g])),
                )
            self._maps_cache[key] = m
        return m

    # function-action data of U_g = inverse(place_transversal(g)) for every g:
    # the flow at placement g equals the flow at the class representative after
    # relabeling nodes by U_g.
    def place_action_arrays(self):
        if not hasattr(self, "_pt_place"):
            PT = np.empty((self.N, self.n), dtype=np.uint8)
            SM = np.empty(self.N, dtype=np.int64)
            for g in self.place_bfs_order:
                g = int(g)
                u = inverse(self.place_transversal(g))
                PT[g] = [u.point_map(y) for y in range(self.n)]
                SM[g] = u.sign_mask()
            self._pt_place, self._sm_place = PT, SM
        return self._pt_place, self._sm_place

    def apply_place_action(self, g_arr: np.ndarray, fmask: int) -> np.ndarray:
        """U_{g}(f) for an array of placements g."""
        PT, SM = self.place_action_arrays()
        fb = ((fmask >> np.arange(self.n)) & 1).astype(np.int64)
        gathered = fb[PT[g_arr]]  # (m, n)
        out = np.zeros(len(g_arr), dtype=np.int64)
        for y in range(self.n):
            out |= gathered[:, y] << y
        out ^= SM[g_arr]
        return out


@lru_cache(maxsize=None)
def group_context(k: int) -> GroupContext:
    return GroupContext(k)


# ---------------------------------------------------------------------------
# stabilizers via the AGL scan


class MapSet:
    """A set of maps in M_{k->k} with vectorized function-side application."""

    def __init__(self, ctx: GroupContext, a_rows, b, beta, c):
        self.ctx = ctx
        self.a_rows = a_rows  # (m, k) uint8 row masks
        self.b = b
        self.beta = beta
        self.c = c
        self.m = len(b)
        k, n = ctx.k, ctx.n
        par = parity_table(k)
        PT = np.zeros((self.m, n), dtype=np.uint8)
        for y in range(n):
            x = np.zeros(self.m, dtype=np.uint8)
            for i in range(k):
                x |= par[self.a_rows[:, i] & y] << i
            PT[:, y] = x ^ self.b
        self.PT = PT
        self.SM = ctx.chi_packed[self.beta] ^ (-(self.c.astype(np.int64)) & ctx.full_mask)

    def batch_apply(self, fmask: int) -> np.ndarray:
        ctx = self.ctx
        fb = ((fmask >> np.arange(ctx.n)) & 1).astype(np.int64)
        gathered = fb[self.PT]
        out = np.zeros(self.m, dtype=np.int64)
        for y in range(ctx.n):
            out |= gathered[:, y] << y
        out ^= self.SM
        return out

    def batch_apply_pair(self, umask: int, vmask: int):
        return self.batch_apply(umask), self.batch_apply(vmask)

    def maps(self):
        """Materialize as AffineMap objects."""
        out = []
        for i in range(self.m):
            rows = tuple(int(r) for r in self.a_rows[i])
            out.append(
                AffineMap(self.ctx.k, self.ctx.k, rows, int(self.b[i]), int(self.beta[i]), int(self.c[i]))
            )
        return out

    def node_partition(self, active=None):
        """Orbit labels (consecutive ints) of all N functions under this set.

        Only correct when the set is a subgroup (which stabilizers are).
        Returns (labels int32[N] with -1 outside `active`, reps list).
        """
        ctx = self.ctx
        labels = np.full(ctx.N, -1, dtype=np.int32)
        candidates = np.arange(ctx.N) if active is None else np.asarray(active)
        reps = []
        for v in candidates:
            v = int(v)
            if labels[v] >= 0:
                continue
            orb = np.unique(self.batch_apply(v))
            oid = len(reps)
            labels[orb] = oid
            # canonical rep: lexicographically greatest member
            reps.append(int(orb[np.argmax(ctx.lexkeys[orb])]))
        return labels, reps


class AglScan:
    """All point-affine transforms of F_2^k, as one big gather table."""

    def __init__(self, k: int):
        self.k = k
        self.n = 1 << k
        mats = all_invertible_matrices(k)
        self.mats = mats
        nm = len(mats)
        cols = np.zeros((nm, k), dtype=np.uint8)
        for i, rows in enumerate(mats):
            t = mat_transpose(rows, k)
            for j in range(k):
                cols[i, j] = t[j]  # column j of the matrix, as a k-bit mask
        # B @ x = xor of columns over set bits of x
        BX = np.zeros((nm, self.n), dtype=np.uint8)
        for x in range(self.n):
            acc = np.zeros(nm, dtype=np.uint8)
            for j in range(k):
                if (x >> j) & 1:
                    acc ^= cols[:, j]
            BX[:, x] = acc
        ts = np.arange(self.n, dtype=np.uint8)
        # PT[(i, t), x] = B_i x + t
        self.PT = (BX[:, None, :] ^ ts[None, :, None]).reshape(-1, self.n)
        self.rows_arr = np.zeros((nm, k), dtype=np.uint8)
        for i, rows in enumerate(mats):
            for j in range(k):
                self.rows_arr[i, j] = rows[j]
        self.rows_t_arr = np.zeros((nm, k), dtype=np.uint8)
        for i, rows in enumerate(mats):
            t = mat_transpose(rows, k)
            for j in range(k):
                self.rows_t_arr[i, j] = t[j]
        # character tables: packed table of (-1)^c chi_b for all (b, c)
        chars = []
        for b in range(self.n):
            chars.append((chi_mask(b, k), b, 0))
            chars.append((chi_mask(b, k) ^ ((1 << self.n) - 1), b, 1))
        chars.sort()
        self.char_packed = np.array([c[0] for c in chars], dtype=np.int64)
        self.char_b = np.array([c[1] for c in chars], dtype=np.int16)
        self.char_c = np.array([c[2] for c in chars], dtype=np.int8)

    def scan(self, target: int):
        """Indices (mat_idx, t, b, c) with target(Tx) * target(x) = (-1)^c chi_b(x)."""
        n = self.n
        tb = ((target >> np.arange(n)) & 1).astype(np.int64)
        gathered = tb[self.PT]
        packed = np.zeros(self.PT.shape[0], dtype=np.int64)
        for y in range(n):
            packed |= gathered[:, y] << y
        packed ^= target
        pos = np.searchsorted(self.char_packed, packed)
        pos[pos >= len(self.char_packed)] = 0
        ok = self.char_packed[pos] == packed
        idx = np.flatnonzero(ok)
        mat_idx = idx // n
        t = (idx % n).astype(np.uint8)
        return mat_idx, t, self.char_b[pos[idx]], self.char_c[pos[idx]]


@lru_cache(maxsize=None)
def agl_scan(k: int) -> AglScan:
    return AglScan(k)


def func_stabilizer(ctx: GroupContext, f: int) -> MapSet:
    """All M in M_{k->k} with M(f) = f."""
    sc = agl_scan(ctx.k)
    mat_idx, t, b, c = sc.scan(f)
    return MapSet(
        ctx,
        sc.rows_arr[mat_idx],
        t,
        b.astype(np.int64),
        c,
    )


def place_stabilizer(ctx: GroupContext, g: int) -> MapSet:
    """All M in M_{k->k} with sharp(M)(g) = g (the symmetry group of g's flow graph)."""
    sc = agl_scan(ctx.k)
    mat_idx, t, b, c = sc.scan(g)
    # scanned transform is x -> A^T x + beta, character is (-1)^c chi_{b'}
    return MapSet(
        ctx,
        sc.rows_t_arr[mat_idx],  # A = (scanned matrix)^T
        b.astype(np.uint8),  # b = character index
        t.astype(np.int64),  # beta = scanned translation
        c,
    )


# ---------------------------------------------------------------------------
# edge orbits


@dataclass(frozen=True)
class EdgeOrbit:
    hi: int  # canonical pair, lexicographically greatest first
    lo: int
    size: int  # number of unordered pairs in the orbit
    ham: int  # raw Hamming distance between the endpoints


@lru_cache(maxsize=None)
def edge_orbits(k: int) -> tuple:
    """All orbits of admissible unordered pairs {f1, f2}, f1 not in {f2, -f2}."""
    ctx = group_context(k)
    out = []
    for oid, rep in enumerate(ctx.func_orbit_reps):
        stab = func_stabilizer(ctx, rep)
        assert stab.m * ctx.func_orbit_sizes[oid] == affine.group_order(k)
        labels, reps = stab.node_partition()
        neg_rep = rep ^ ctx.full_mask
        # partners: functions whose orbit id is >= oid (their canonical rep is
        # lexicographically no greater), excluding rep itself and -rep
        partner_oid = ctx.func_labels
        valid = partner_oid >= oid
        valid[rep] = False
        valid[neg_rep] = False
        vs = np.flatnonzero(valid)
        order = np.argsort(labels[vs], kind="stable")
        vs = vs[order]
        ls = labels[vs]
        starts = np.flatnonzero(np.r_[True, ls[1:] != ls[:-1]])
        cls_members = {
            int(ls[s]): [int(x) for x in grp]
            for s, grp in zip(starts, np.split(vs, starts[1:]))
        }
        handled = set()
        for cl, members in sorted(cls_members.items()):
            if cl in handled:
                continue
            a = members[0]
            size_cls = len(members)
            if partner_oid[a] == oid:
                # same function orbit: merge with the swap-partner class
                w = ctx.func_transversal(a)
                b0 = affine.apply(inverse(w), _fn(ctx, rep)).mask
                cl2 = int(labels[b0])
                assert cl2 in cls_members
                handled.add(cl)
                handled.add(cl2)
                if cl2 == cl:
                    total = size_cls
                    assert (ctx.func_orbit_sizes[oid] * total) % 2 == 0
                    size = ctx.func_orbit_sizes[oid] * total // 2
                    pool = members
                else:
                    assert len(cls_members[cl2]) == size_cls
                    size = ctx.func_orbit_sizes[oid] * size_cls
                    pool = members + cls_members[cl2]
            else:
                handled.add(cl)
                size = ctx.func_orbit_sizes[oid] * size_cls
                pool = members
            partner = max(pool, key=lambda v: int(ctx.lexkeys[v]))
            ham = bin(rep ^ partner).count("1")
            out.append(EdgeOrbit(rep, partner, size, ham))
    out.sort(
        key=lambda e: (e.ham, -e.size, -int(ctx.lexkeys[e.hi]), -int(ctx.lexkeys[e.lo]))
    )
    total = sum(e.size for e in out)
    N = ctx.N
    assert total == N * (N - 2) // 2, "edge orbit sizes must cover all admissible pairs"
    return tuple(out)


def _fn(ctx: GroupContext, mask: int):
    from .boolfn import BoolFn

    return BoolFn(ctx.k, mask)


def canonical_pair(k: int, f1: int, f2: int):
    """Canonical representative pair of the edge orbit containing {f1, f2}."""
    ctx = group_context(k)
    if f1 == f2 or f1 == (f2 ^ ctx.full_mask):
        raise ValueError("pair must satisfy f1 not in {f2, -f2}")
    o1, o2 = int(ctx.func_labels[f1]), int(ctx.func_labels[f2])
    if o1 > o2:
        f1, f2, o1, o2 = f2, f1, o2, o1
    # move f1 (the anchor side, smaller orbit id = lex-greater rep) onto its rep
    w = inverse(ctx.func_transversal(f1))
    rep = affine.apply(w, _fn(ctx, f1)).mask
    assert rep == ctx.func_orbit_reps[o1]
    partner = affine.apply(w, _fn(ctx, f2)).mask
    stab = func_stabilizer(ctx, rep)
    orb = np.unique(stab.batch_apply(partner))
    best = int(orb[np.argmax(ctx.lexkeys[orb])])
    if o1 == o2:
        # the swap side may carry a lexicographically greater partner
        wv = ctx.func_transversal(partner)
        b0 = affine.apply(inverse(wv), _fn(ctx, rep)).mask
        orb2 = np.unique(stab.batch_apply(b0))
        best2 = int(orb2[np.argmax(ctx.lexkeys[orb2])])
        best = max(best, best2, key=lambda v: int(ctx.lexkeys[v]))
    return rep, best


@lru_cache(maxsize=None)
def edge_orbit_index(k: int) -> dict:
    return {(e.hi, e.lo): i for i, e in enumerate(edge_orbits(k))}


def edge_orbit_of(k: int, f1: int, f2: int) -> int:
    return edge_orbit_index(k)[canonical_pair(k, f1, f2)]


def expand_edge_orbit(ctx: GroupContext, hi: int, lo: int):
    """All unordered pairs of the orbit of {hi, lo}, as (a, b) arrays with a < b."""
    a, b = (hi, lo) if hi < lo else (lo, hi)
    N = ctx.N
    seen = np.array([a * N + b], dtype=np.int64)
    frontier = seen
    while frontier.size:
        us, vs = frontier // N, frontier % N
        imgs = []
        for perm in ctx.gen_perms:
            iu, iv = perm[us], perm[vs]
            imgs.append(np.minimum(iu, iv) * N + np.maximum(iu, iv))
        cand = np.unique(np.concatenate(imgs))
        fresh = cand[~np.isin(cand, seen, assume_unique=True)]
        seen = np.sort(np.concatenate([seen, fresh]))
        frontier = fresh
    return (seen // N).astype(np.int64), (seen % N).astype(np.int64)


# ---------------------------------------------------------------------------
# placements


def placement_classes(k: int):
    """(rep, size, weight) per orbit of placements under the sharp action.

    The partition coincides with the function-orbit partition; weights are
    size / 2^(2^k).
    """
    ctx = group_context(k)
    return [
        (rep, size, Rat(size, ctx.N))
        for rep, size in zip(ctx.func_orbit_reps, ctx.func_orbit_sizes)
    ]


def source_sink_nodes(ctx: GroupContext, g: int):
    """Source and sink node masks of the flow graph with placement g.

    Sinks are the nodes g(alpha) * chi_alpha, sources their negations.
    """
    sources, sinks = [], []
    for alpha in range(ctx.n):
        chi = int(ctx.chi_packed[alpha])
        if (g >> alpha) & 1:  # g(alpha) = -1
            sinks.append(chi ^ ctx.full_mask)
            sources.append(chi)
        else:
            sinks.append(chi)
            sources.append(chi ^ ctx.full_mask)
    return sources, sinks
