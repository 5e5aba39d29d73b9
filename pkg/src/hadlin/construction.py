"""Building and solving the compressed gadget-construction LPs.

Flow variables are orbits of directed triples (f1, f2, g) under the joint
action M: (f1, f2, g) -> (M f1, M f2, sigma_M(g)); a variable's value is the
flow on each individual member pair at the class representative placement.
Capacity rows pair a flow orbit with its reversal; conservation rows are
instantiated at orbit representatives (rs: per node and placement class,
rsinf: class-summed over placements agreeing on the node's supporting affine
subspace, deduplicated by orbit).  Gadget capacities enter as one variable
per support edge orbit, so the same LP constructs gadgets and, with the
capacities substituted, evaluates them.
"""

import numpy as np

from . import orbits
from .gadget import Gadget
from .orbits import edge_orbits, func_stabilizer, group_context
from .rational import Rat, ZERO
from .simplex import LinearProgram
from .support import SupportSystem

__all__ = ["build_construction_lp", "ConstructionLP"]


class ConstructionLP:
    """The LP plus the index maps needed to read a solution back."""

    def __init__(self, lp, system, cap_vars, flow_vars, mode):
        self.lp = lp
        self.system = system
        self.cap_vars = cap_vars  # orbit_id -> var name
        self.flow_vars = flow_vars  # (class_idx, pair_orbit) -> var name
        self.mode = mode

    def gadget_from(self, assignment: dict) -> Gadget:
        weights = {}
        for oid, name in self.cap_vars.items():
            w = Rat(assignment.get(name, ZERO))
            if w != 0:
                weights[oid] = w
        return Gadget.from_weights(self.system.k, weights)

    def witness_from(self, assignment: dict) -> dict:
        """{class_idx: [flow per pair orbit]} from an LP assignment."""
        out = {}
        for ci in range(self.system.n_classes):
            cd = self.system.class_data(ci)
            vals = [ZERO] * cd.n_pair_orbits
            for t in range(cd.n_pair_orbits):
                name = self.flow_vars.get((ci, t))
                if name is not None:
                    vals[t] = Rat(assignment.get(name, ZERO))
            out[ci] = vals
        return out


def conservation_rows_rs(system: SupportSystem):
    """(class_idx, node_orbit) pairs needing a conservation row, with vectors."""
    ctx = system.ctx
    rows = []
    for ci in range(system.n_classes):
        cd = system.class_data(ci)
        for o in range(cd.n_node_orbits):
            rep = cd.node_reps[o]
            if ctx.fdim[rep] < 1:
                continue
            vec = cd.netvec(o)
            if vec:
                rows.append((ci, o, vec))
    return rows


def pattern_orbit_reps(system: SupportSystem):
    """Representatives (F, pattern placement mask) of the class-summed
    conservation constraints: orbits of (node, g restricted to Aff(node))."""
    ctx = system.ctx
    reps = []
    for F, size in zip(ctx.func_orbit_reps, ctx.func_orbit_sizes):
        if ctx.fdim[F] < 1:
            continue
        apts = [p for p in range(ctx.n) if (int(ctx.aff_mask[F]) >> p) & 1]
        stab = func_stabilizer(ctx, F)
        sigma = _sigma_mapset(ctx, stab)
        d2 = len(apts)
        npat = 1 << d2
        emb = np.zeros(npat, dtype=np.int64)
        for i, p in enumerate(apts):
            emb |= ((np.arange(npat, dtype=np.int64) >> i) & 1) << p
        seen = np.zeros(npat, dtype=bool)
        for pi in range(npat):
            if seen[pi]:
                continue
            imgs = sigma.batch_apply(int(emb[pi]))
            pats = np.zeros(len(imgs), dtype=np.int64)
            for i, p in enumerate(apts):
                pats |= ((imgs >> p) & 1) << i
            pats = np.unique(pats)
            seen[pats] = True
            reps.append((F, apts, int(emb[pi])))
    return reps


def _sigma_mapset(ctx, stab):
    """Transform a stabilizer MapSet through M -> sharp(inverse(M))."""
    from .affine import AffineMap, inverse, sharp
    from .bits import mat_transpose
    from .orbits import MapSet

    k = ctx.k
    m = stab.m
    a_rows = np.zeros((m, k), dtype=np.uint8)
    b = np.zeros(m, dtype=np.int64)
    beta = np.zeros(m, dtype=np.int64)
    c = np.zeros(m, dtype=np.int8)
    for i in range(m):
        rows = tuple(int(r) for r in stab.a_rows[i])
        mm = AffineMap(k, k, rows, int(stab.b[i]), int(stab.beta[i]), int(stab.c[i]))
        s = sharp(inverse(mm))
        for j in range(k):
            a_rows[i, j] = s.a_rows[j]
        b[i] = s.b
        beta[i] = s.beta
        c[i] = s.c
    return MapSet(ctx, a_rows, b, beta, c)


def conservation_rows_rsinf(system: SupportSystem):
    """Deduplicated class-summed conservation rows as {(ci, t): coeff} dicts."""
    ctx = system.ctx
    class_of_placement = ctx.func_labels  # placement orbits = function orbits
    rows = []
    seen = set()
    for F, apts, pat in pattern_orbit_reps(system):
        # all placements agreeing with the pattern on Aff(F)
        g_all = np.arange(ctx.N, dtype=np.int64)
        sel = np.ones(ctx.N, dtype=bool)
        for i, p in enumerate(apts):
            sel &= ((g_all >> p) & 1) == ((pat >> p) & 1)
        members = g_all[sel]
        images = ctx.apply_place_action(members, F)
        dcls = class_of_placement[members]
        acc = {}
        for ci in range(system.n_classes):
            mask = dcls == ci
            if not mask.any():
                continue
            cd = system.class_data(ci)
            labs = cd.node_labels[images[mask]]
            for o, cnt in zip(*np.unique(labs, return_counts=True)):
                for t, c in cd.netvec(int(o)).items():
                    key = (ci, int(t))
                    acc[key] = acc.get(key, 0) + int(cnt) * c
        acc = {kk: v for kk, v in acc.items() if v}
        if not acc:
            continue
        frozen = tuple(sorted(acc.items()))
        if frozen in seen:
            continue
        seen.add(frozen)
        rows.append(acc)
    return rows


def build_construction_lp(
    k: int,
    c_target=None,
    mode: str = "rs",
    support_ids=None,
    fixed_caps: dict | None = None,
    ratio_penalty=None,
):
    """The compressed construction LP (or, with fixed_caps, evaluation LP).

    maximize  E_g val_g(w)  [- ratio_penalty * (1 - completeness expression)]
    subject to per-orbit capacity rows, conservation rows per `mode`,
    total capacity = 1 and, when c_target is given, completeness = c_target.
    """
    if mode not in ("rs", "rsinf"):
        raise ValueError("mode must be 'rs' or 'rsinf'")
    table = edge_orbits(k)
    if support_ids is None:
        support_ids = range(len(table))
    system = SupportSystem(k, support_ids)
    n = 1 << k
    lp = LinearProgram("max")
    cap_vars = {}
    if fixed_caps is None:
        for oid in system.orbit_ids:
            cap_vars[oid] = f"c{oid}"
            lp.add_var(f"c{oid}")
    flow_vars = {}
    for ci in range(system.n_classes):
        cd = system.class_data(ci)
        w = cd.weight
        obj = cd.objective_counts()
        for t in range(cd.n_pair_orbits):
            name = f"w{ci}.{t}"
            flow_vars[(ci, t)] = name
            lp.add_var(name, obj=w * obj.get(t, 0))
    # capacity rows
    for ci in range(system.n_classes):
        cd = system.class_data(ci)
        for t in range(cd.n_pair_orbits):
            t2 = int(cd.pair_partner[t])
            if 0 <= t2 < t:
                continue
            coeffs = {}
            if t2 == t:
                coeffs[flow_vars[(ci, t)]] = 2
            elif t2 < 0:  # reversal carries no variable (trimmed as useless)
                coeffs[flow_vars[(ci, t)]] = 1
            else:
                coeffs[flow_vars[(ci, t)]] = 1
                coeffs[flow_vars[(ci, t2)]] = 1
            eid = cd.pair_eid[t]
            if fixed_caps is None:
                coeffs[cap_vars[eid]] = -1
                lp.add_row(coeffs, "<=", 0)
            else:
                lp.add_row(coeffs, "<=", fixed_caps.get(eid, ZERO))
    # conservation rows
    if mode == "rs":
        for ci, _o, vec in conservation_rows_rs(system):
            lp.add_row({flow_vars[(ci, t)]: c for t, c in vec.items()}, "=", 0)
    else:
        for acc in conservation_rows_rsinf(system):
            lp.add_row({flow_vars[key]: c for key, c in acc.items()}, "=", 0)
    if fixed_caps is None:
        lp.add_row({cap_vars[o]: table[o].size for o in system.orbit_ids}, "=", 1)
        if c_target is not None:
            lp.add_row(
                {
                    cap_vars[o]: Rat(table[o].size) * Rat(table[o].ham, n)
                    for o in system.orbit_ids
                    if table[o].ham
                },
                "=",
                1 - Rat(c_target),
            )
        if ratio_penalty is not None:
            for o in system.orbit_ids:
                if table[o].ham:
                    lp.add_obj(
                        cap_vars[o],
                        -Rat(ratio_penalty) * table[o].size * Rat(table[o].ham, n),
                    )
    return ConstructionLP(lp, system, cap_vars, flow_vars, mode)
