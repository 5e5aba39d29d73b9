"""Per-placement-class data over a fixed support set of edge orbits.

For each placement class (orbit of source/sink placements) this computes the
stabilizer subgroup, the node-orbit partition, the orbits of directed support
pairs, and the sparse "netflow" vectors that become conservation rows and
objective coefficients of the compressed LPs.  Everything is exact; numpy is
used only for integer bookkeeping.
"""

import hashlib
import pickle

import numpy as np

from . import orbits
from .orbits import (
    MapSet,
    cache_dir,
    edge_orbits,
    expand_edge_orbit,
    group_context,
    place_stabilizer,
    source_sink_nodes,
)
from .rational import Rat, rat, format_rat

__all__ = ["SupportSystem"]

_CACHED_FIELDS = (
    "n_node_orbits",
    "node_reps",
    "pair_rep_u",
    "pair_rep_v",
    "pair_eid",
    "pair_dir_count",
    "n_pair_orbits",
)


class ClassData:
    """One placement class: stabilizer, node orbits, directed-pair orbits."""

    def __init__(self, system, rep: int, size: int):
        ctx = system.ctx
        self.system = system
        self.g = rep
        self.size = size
        self.weight = Rat(size, ctx.N)
        self.H = place_stabilizer(ctx, rep)
        from .affine import group_order

        assert self.H.m * size == group_order(ctx.k)
        srcs, snks = source_sink_nodes(ctx, rep)
        self.sources = srcs
        self.sinks = snks
        self.is_source = np.zeros(ctx.N, dtype=bool)
        self.is_source[srcs] = True
        self.is_sink = np.zeros(ctx.N, dtype=bool)
        self.is_sink[snks] = True
        sys_ = system
        # directed pairs that can carry useful flow: never into a source,
        # never out of a sink (optimal flows need neither)
        self.kept = ~(self.is_sink[sys_.U] | self.is_source[sys_.V])
        self.pair_labels = None
        if not self._load_cached():
            self.node_labels, self.node_reps = self.H.node_partition()
            self.n_node_orbits = len(self.node_reps)
            self._pair_orbits()
            self._netvecs = {o: self.netvec_fresh(o) for o in range(self.n_node_orbits)
                            if ctx.fdim[self.node_reps[o]] >= 1}
            self._objective = self._objective_fresh()
            self._quotient = self._quotient_fresh()
            self._save_cache()
        src_orbs = {int(self.node_labels[s]) for s in srcs}
        snk_orbs = {int(self.node_labels[t]) for t in snks}
        assert not (src_orbs & snk_orbs), "stabilizer mixes sources and sinks"
        self.source_orbits = src_orbs
        self.sink_orbits = snk_orbs

    # -- disk cache ---------------------------------------------------------

    def _cache_path(self):
        key = self.system.cache_key + f"-g{self.g}"
        return cache_dir() / f"class-{key}.pkl"

    def _load_cached(self) -> bool:
        path = self._cache_path()
        if not path.exists():
            return False
        try:
            with open(path, "rb") as fh:
                data = pickle.load(fh)
        except Exception:
            return False
        if data.get("version") != 2:
            return False
        for f in _CACHED_FIELDS:
            setattr(self, f, data[f])
        self.node_labels = data["node_labels"]
        self.pair_partner = data["pair_partner"]
        self._netvecs = data["netvecs"]
        self._objective = data["objective"]
        self._quotient = data["quotient"]
        return True

    def _save_cache(self):
        data = {"version": 2, "node_labels": self.node_labels,
                "pair_partner": self.pair_partner,
                "netvecs": self._netvecs, "objective": self._objective,
                "quotient": self._quotient}
        for f in _CACHED_FIELDS:
            data[f] = getattr(self, f)
        path = self._cache_path()
        tmp = path.with_suffix(".tmp")
        try:
            with open(tmp, "wb") as fh:
                pickle.dump(data, fh, protocol=4)
            tmp.replace(path)
        except OSError:
            pass

    def _pair_orbits(self):
        sys_ = self.system
        ctx = sys_.ctx
        nd = len(sys_.U)
        labels = np.full(nd, -1, dtype=np.int32)
        rep_u, rep_v, eids = [], [], []
        counts = []
        lex = ctx.lexkeys
        todo = np.flatnonzero(self.kept)
        for idx in todo:
            if labels[idx] >= 0:
                continue
            iu = self.H.batch_apply(int(sys_.U[idx]))
            iv = self.H.batch_apply(int(sys_.V[idx]))
            keys = iu * ctx.N + iv
            pos = np.searchsorted(sys_.sorted_keys, keys)
            assert (sys_.sorted_keys[pos] == keys).all(), "support not closed under stabilizer"
            orig = sys_.order[pos]
            oid = len(rep_u)
            labels[orig] = oid
            best = np.lexsort((lex[iv], lex[iu]))[-1]
            rep_u.append(int(iu[best]))
            rep_v.append(int(iv[best]))
            eids.append(int(sys_.EID[idx]))
            counts.append(int(np.unique(orig).size))
        self.pair_labels = labels
        self.n_pair_orbits = len(rep_u)
        self.pair_rep_u = rep_u
        self.pair_rep_v = rep_v
        self.pair_eid = eids
        self.pair_dir_count = counts
        # orbit of the reversed pair (-1 when the reversal was trimmed)
        if rep_u:
            ru = np.array(rep_u, dtype=np.int64)
            rv = np.array(rep_v, dtype=np.int64)
            pos = np.searchsorted(sys_.sorted_keys, rv * ctx.N + ru)
            assert (sys_.sorted_keys[pos] == rv * ctx.N + ru).all()
            self.pair_partner = labels[sys_.order[pos]].astype(np.int64)
        else:
            self.pair_partner = np.zeros(0, dtype=np.int64)

    def ensure_pair_labels(self):
        """Recompute the per-pair orbit labels (not kept in the disk cache)."""
        if self.pair_labels is None:
            reps_u, reps_v = self.pair_rep_u, self.pair_rep_v
            self._pair_orbits()
            # the enumeration is deterministic, so labels line up with the
            # cached representative order
            assert self.pair_rep_u == reps_u and self.pair_rep_v == reps_v
        return self.pair_labels

    def pairs_from(self, node: int):
        """Indices of directed support pairs (node, *)."""
        sys_ = self.system
        ctx = sys_.ctx
        lo = np.searchsorted(sys_.sorted_keys, node * ctx.N)
        hi = np.searchsorted(sys_.sorted_keys, (node + 1) * ctx.N)
        return sys_.order[lo:hi]

    def pairs_to(self, node: int):
        """Indices of directed support pairs (*, node)."""
        sys_ = self.system
        ctx = sys_.ctx
        lo = np.searchsorted(sys_.sorted_keys2, node * ctx.N)
        hi = np.searchsorted(sys_.sorted_keys2, (node + 1) * ctx.N)
        return sys_.order2[lo:hi]

    def netvec(self, node_orbit: int) -> dict:
        """Out-minus-in counts per flow orbit at the orbit's representative node."""
        return self._netvecs.get(node_orbit, {})

    def netvec_fresh(self, node_orbit: int) -> dict:
        rep = self.node_reps[node_orbit]
        out = {}
        labs = self.pair_labels[self.pairs_from(rep)]
        labs = labs[labs >= 0]
        for t, c in zip(*np.unique(labs, return_counts=True)):
            out[int(t)] = out.get(int(t), 0) + int(c)
        labs = self.pair_labels[self.pairs_to(rep)]
        labs = labs[labs >= 0]
        for t, c in zip(*np.unique(labs, return_counts=True)):
            out[int(t)] = out.get(int(t), 0) - int(c)
        return {t: c for t, c in out.items() if c}

    def objective_counts(self) -> dict:
        """Per flow orbit: (#pairs leaving a source) - (#pairs entering a source)."""
        return self._objective

    def _objective_fresh(self) -> dict:
        sys_ = self.system
        out = {}
        for mask, sign in ((self.is_source[sys_.U], 1), (self.is_source[sys_.V], -1)):
            labs = self.pair_labels[mask]
            labs = labs[labs >= 0]
            for t, c in zip(*np.unique(labs, return_counts=True)):
                val = out.get(int(t), 0) + sign * int(c)
                out[int(t)] = val
        return {t: c for t, c in out.items() if c}

    def value_of_flow(self, wvals: list) -> Rat:
        """val_g of per-edge flows given per pair-orbit (Appendix-style: net source outflow)."""
        total = Rat(0)
        for t, c in self.objective_counts().items():
            if wvals[t] != 0:
                total += Rat(c) * wvals[t]
        return total

    def quotient_counts(self):
        """{(A, B): {edge_orbit: count}} over ordered node-orbit pairs, A != B."""
        return self._quotient

    def _quotient_fresh(self):
        sys_ = self.system
        AL = self.node_labels[sys_.U].astype(np.int64)
        BL = self.node_labels[sys_.V].astype(np.int64)
        EID = sys_.EID.astype(np.int64)
        L = self.n_node_orbits
        nE = sys_.EID.max() + 1
        key = (AL * L + BL) * nE + EID
        uk, cnt = np.unique(key, return_counts=True)
        out = {}
        for kk, c in zip(uk.tolist(), cnt.tolist()):
            e = kk % nE
            ab = kk // nE
            a, b = ab // L, ab % L
            if a == b:
                continue
            out.setdefault((int(a), int(b)), {})[int(e)] = int(c)
        return out


class SupportSystem:
    """Expanded directed support arrays for a set of edge orbits, plus classes."""

    def __init__(self, k: int, orbit_ids):
        self.k = k
        self.ctx = group_context(k)
        self.orbit_ids = tuple(sorted(set(int(o) for o in orbit_ids)))
        self.cache_key = hashlib.sha1(
            f"{k}:{','.join(map(str, self.orbit_ids))}".encode()
        ).hexdigest()[:16]
        table = edge_orbits(k)
        npz = cache_dir() / f"support-{self.cache_key}.npz"
        loaded = False
        if npz.exists():
            try:
                with np.load(npz) as data:
                    self.U, self.V, self.EID = data["U"], data["V"], data["EID"]
                loaded = True
            except Exception:
                loaded = False
        if not loaded:
            us, vs, es = [], [], []
            for oid in self.orbit_ids:
                e = table[oid]
                a, b = expand_edge_orbit(self.ctx, e.hi, e.lo)
                assert len(a) == e.size
                us += [a, b]
                vs += [b, a]
                es += [np.full(2 * len(a), oid, dtype=np.int32)]
            self.U = np.concatenate(us)
            self.V = np.concatenate(vs)
            self.EID = np.concatenate(es)
            try:
                np.savez(npz, U=self.U, V=self.V, EID=self.EID)
            except OSError:
                pass
        keys = self.U * self.ctx.N + self.V
        self.order = np.argsort(keys, kind="stable")
        self.sorted_keys = keys[self.order]
        keys2 = self.V * self.ctx.N + self.U
        self.order2 = np.argsort(keys2, kind="stable")
        self.sorted_keys2 = keys2[self.order2]
        self._classes = {}
        self.class_list = orbits.placement_classes(k)

    @property
    def n_classes(self):
        return len(self.class_list)

    def class_data(self, ci: int) -> ClassData:
        cd = self._classes.get(ci)
        if cd is None:
            rep, size, _w = self.class_list[ci]
            cd = ClassData(self, rep, size)
            self._classes[ci] = cd
        return cd
