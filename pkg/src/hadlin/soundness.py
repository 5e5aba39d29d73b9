"""Evaluating and constructing gadgets: relaxed soundness by per-class
max-flow on quotient graphs, infinity relaxed soundness by the compressed LP,
gadget construction (cutting planes for rs, exact LP for rsinf), the minimal
completeness extremal gadgets, the hardness curve, flow lifting and leakage.
"""

from dataclasses import dataclass

import numpy as np

from . import affine, orbits
from .boolfn import BoolFn
from .construction import build_construction_lp
from .flow import FlowGraph, Flow, max_flow, min_cut
from .gadget import Gadget, completeness
from .orbits import edge_orbits, group_context
from .rational import Rat, ZERO
from .simplex import LinearProgram
from .support import SupportSystem

__all__ = [
    "relaxed_soundness",
    "infinity_relaxed_soundness",
    "construct_gadget",
    "min_completeness_extremal_gadget",
    "curve",
    "lift_flow",
    "measure_leakage",
    "GadgetFlowWitness",
]


@dataclass
class GadgetFlowWitness:
    """Per placement class: per-edge flows keyed by ordered-pair orbit."""

    k: int
    mode: str  # "rs" | "rsinf"
    support_ids: tuple
    flows: dict  # class_idx -> list of Rat per pair orbit (of that class)
    value: object  # the soundness value it certifies


def _support_of(g: Gadget) -> tuple:
    return tuple(o for o, _ in g.weights)


def quotient_graph(cd, caps: dict):
    """The class's quotient flow graph for the given per-edge orbit capacities."""
    qc = cd.quotient_counts()
    capmap = {}
    for (a, b), per_eid in qc.items():
        if (b, a) in capmap:
            continue
        tot = ZERO
        for e, cnt in per_eid.items():
            w = caps.get(e, ZERO)
            if w != 0:
                tot += w * cnt
        rev = qc.get((b, a), {})
        # (a, b) and (b, a) instance counts describe the same unordered edges
        if tot != 0:
            capmap[(a, b)] = tot
    nodes = set(range(cd.n_node_orbits))
    graph = FlowGraph(
        sorted(nodes),
        capmap,
        sorted(cd.source_orbits),
        sorted(cd.sink_orbits),
    )
    return graph


def _class_flow_value(system, ci, caps):
    cd = system.class_data(ci)
    graph = quotient_graph(cd, caps)
    value, wq = max_flow(graph)
    return cd, graph, value, wq


def _uncompress_to_pair_orbits(system, cd, graph, wq, caps):
    """Quotient flow -> per-edge flow constant on ordered-pair orbits."""
    vals = [ZERO] * cd.n_pair_orbits
    qcap = {}
    for (a, b), c in graph.cap.items():
        qcap[(a, b)] = c
        qcap[(b, a)] = c
    for t in range(cd.n_pair_orbits):
        u, v = cd.pair_rep_u[t], cd.pair_rep_v[t]
        A, B = int(cd.node_labels[u]), int(cd.node_labels[v])
        if A == B:
            continue
        x = wq.get(A, B)
        if x == 0:
            continue
        cap_edge = caps.get(cd.pair_eid[t], ZERO)
        tot = qcap.get((A, B), ZERO)
        vals[t] = x * cap_edge / tot
    return vals


def relaxed_soundness(g: Gadget, with_witness: bool = True):
    """rs(G) = 1 - sum over placement classes of weight * quotient max-flow."""
    system = SupportSystem(g.k, _support_of(g))
    caps = g.weight_map()
    total = ZERO
    flows = {}
    for ci in range(system.n_classes):
        cd, graph, value, wq = _class_flow_value(system, ci, caps)
        total += cd.weight * value
        if with_witness:
            flows[ci] = _uncompress_to_pair_orbits(system, cd, graph, wq, caps)
    rs = 1 - total
    witness = GadgetFlowWitness(g.k, "rs", system.orbit_ids, flows, rs) if with_witness else None
    return rs, witness


def relaxed_soundness_bruteforce(g: Gadget):
    """Uncompressed oracle: one expanded max-flow per placement (k <= 3)."""
    if g.k > 3:
        raise ValueError("uncompressed evaluation is k <= 3 only")
    ctx = group_context(g.k)
    from .gadget import expand_edges

    edges = []
    for a, b, w in expand_edges(g):
        for u, v in zip(a.tolist(), b.tolist()):
            edges.append((u, v, w))
    total = ZERO
    for gmask in range(ctx.N):
        srcs, snks = orbits.source_sink_nodes(ctx, gmask)
        caps = {(u, v): w for u, v, w in edges}
        graph = FlowGraph(range(ctx.N), caps, srcs, snks)
        value, _ = max_flow(graph)
        total += Rat(1, ctx.N) * value
    return 1 - total


def infinity_relaxed_soundness(g: Gadget, with_witness: bool = True, **solve_kw):
    """rsinf(G) via the compressed LP with the capacities substituted."""
    clp = build_construction_lp(
        g.k, mode="rsinf", support_ids=_support_of(g), fixed_caps=g.weight_map()
    )
    big = clp.lp.n_rows > 1500
    res = clp.lp.solve(float_guided=big, rule="dantzig" if big else "bland", **solve_kw)
    if not res.is_optimal:
        raise RuntimeError(f"rsinf LP solve failed: {res.status}")
    rsinf = 1 - res.value
    witness = None
    if with_witness:
        witness = GadgetFlowWitness(
            g.k, "rsinf", clp.system.orbit_ids, clp.witness_from(res.assignment), rsinf
        )
    return rsinf, witness


# ---------------------------------------------------------------------------
# construction


def _ham1_orbits(k: int):
    return [i for i, e in enumerate(edge_orbits(k)) if e.ham == 1]


def default_restriction(k: int):
    """Orbit ids eligible as gadget support during construction."""
    if k <= 3:
        return list(range(len(edge_orbits(k))))
    from .fixtures import restriction_orbits

    return restriction_orbits(k)


def construct_gadget(
    k: int,
    c_target,
    mode: str = "rs",
    restriction=None,
    ratio_penalty=None,
    **solve_kw,
):
    """Best gadget (max expected flow = min soundness) at the given completeness.

    Returns (Gadget, witness, soundness).  rs mode runs an exact cutting-plane
    loop whose subproblems are integer max-flows on the class quotient graphs;
    rsinf mode solves the compressed LP (float-guided for k = 4, always
    verified exactly).
    """
    c_target = Rat(c_target) if c_target is not None else None
    n = 1 << k
    if c_target is not None and not Rat(1, 2) <= c_target <= 1 - Rat(1, n):
        raise ValueError("completeness must lie in [1/2, 1 - 2^-k]")
    if restriction is None:
        restriction = default_restriction(k)
        if c_target == 1 - Rat(1, n):
            restriction = _ham1_orbits(k)
    if mode == "rs":
        return _construct_rs(k, c_target, restriction, ratio_penalty)
    if mode == "rsinf":
        return _construct_rsinf(k, c_target, restriction, ratio_penalty, **solve_kw)
    raise ValueError("mode must be 'rs' or 'rsinf'")


def _construct_rs(k: int, c_target, restriction, ratio_penalty):
    """Exact Benders/cutting-plane loop over capacity variables."""
    system = SupportSystem(k, restriction)
    table = edge_orbits(k)
    n = 1 << k
    oids = list(system.orbit_ids)
    master = LinearProgram("max")
    for o in oids:
        master.add_var(f"c{o}")
        if ratio_penalty is not None and table[o].ham:
            master.set_obj(f"c{o}", -Rat(ratio_penalty) * table[o].size * Rat(table[o].ham, n))
    zs = []
    for ci in range(system.n_classes):
        w = system.class_list[ci][2]
        master.add_var(f"z{ci}", obj=w)
        zs.append(f"z{ci}")
    master.add_row({f"c{o}": table[o].size for o in oids}, "=", 1)
    if c_target is not None:
        master.add_row(
            {f"c{o}": Rat(table[o].size) * Rat(table[o].ham, n) for o in oids if table[o].ham},
            "=",
            1 - c_target,
        )
    # initial cuts: the all-sources cut bounds each z
    cds = [system.class_data(ci) for ci in range(system.n_classes)]
    for ci, cd in enumerate(cds):
        cut = _cut_coeffs(cd, set(cd.source_orbits))
        master.add_row({f"z{ci}": 1, **{f"c{o}": -c for o, c in cut.items()}}, "<=", 0)
    while True:
        res = master.solve()
        if not res.is_optimal:
            raise RuntimeError(f"master LP failed: {res.status}")
        caps = {o: Rat(res.assignment.get(f"c{o}", ZERO)) for o in oids}
        flows = {}
        gap = False
        true_total = ZERO
        for ci, cd in enumerate(cds):
            graph = quotient_graph(cd, caps)
            value, side = min_cut(graph)
            true_total += cd.weight * value
            zval = Rat(res.assignment.get(f"z{ci}", ZERO))
            if value < zval:
                gap = True
                cut = _cut_coeffs(cd, side)
                master.add_row(
                    {f"z{ci}": 1, **{f"c{o}": -c for o, c in cut.items()}}, "<=", 0
                )
        if not gap:
            gadget = Gadget.from_weights(k, {o: w for o, w in caps.items() if w != 0})
            # final witness via max-flow per class on the realized support
            rs, witness = relaxed_soundness(gadget)
            assert rs == 1 - res.value + (0 if ratio_penalty is None else _penalty_part(res, master, oids, table, n)), \
                "cutting-plane optimum must match the realized evaluation"
            return gadget, witness, rs


def _penalty_part(res, master, oids, table, n):
    part = ZERO
    for o in oids:
        coeff = master.objective.get(master._var_index[f"c{o}"])
        if coeff:
            part += coeff * Rat(res.assignment.get(f"c{o}", ZERO))
    return part


def _cut_coeffs(cd, side):
    """Per edge-orbit count of instances crossing the cut (source side given)."""
    out = {}
    for (a, b), per_eid in cd.quotient_counts().items():
        if a in side and b not in side:
            for e, cnt in per_eid.items():
                out[e] = out.get(e, 0) + cnt
    return out


def _construct_rsinf(k, c_target, restriction, ratio_penalty, **solve_kw):
    clp = build_construction_lp(
        k, c_target=c_target, mode="rsinf", support_ids=restriction,
        ratio_penalty=ratio_penalty,
    )
    big = clp.lp.n_rows > 1500
    res = clp.lp.solve(float_guided=big, rule="dantzig" if big else "bland", **solve_kw)
    if not res.is_optimal:
        raise RuntimeError(f"construction LP failed: {res.status}")
    gadget = clp.gadget_from(res.assignment)
    witness = GadgetFlowWitness(
        k, "rsinf", clp.system.orbit_ids, clp.witness_from(res.assignment), None
    )
    # soundness = 1 - flow part of the objective
    flow_val = res.value
    if ratio_penalty is not None:
        flow_val = flow_val - _lp_penalty(clp, res, ratio_penalty)
    s = 1 - flow_val
    witness.value = s
    return gadget, witness, s


def _lp_penalty(clp, res, ratio_penalty):
    table = edge_orbits(clp.system.k)
    n = 1 << clp.system.k
    part = ZERO
    for o, name in clp.cap_vars.items():
        if table[o].ham:
            part -= Rat(ratio_penalty) * table[o].size * Rat(table[o].ham, n) * Rat(
                res.assignment.get(name, ZERO)
            )
    return part


def min_completeness_extremal_gadget(k: int, mode: str = "rs", **solve_kw):
    """Two-stage solve for the minimal-completeness maximizer of (1-s)/(1-c).

    Stage 1 pins the optimal ratio at completeness 1 - 2^-k; stage 2 drops the
    completeness constraint and maximizes flow - (ratio - eps) * (1 - c-expr),
    then verifies the result attains the ratio exactly.
    """
    n = 1 << k
    c_top = 1 - Rat(1, n)
    _g1, _w1, s1 = construct_gadget(k, c_top, mode, **solve_kw)
    rho = (1 - s1) / (1 - c_top)
    eps = Rat(1, 1 << 20)
    while True:
        g2, w2, s2 = construct_gadget(
            k, None, mode, restriction=default_restriction(k),
            ratio_penalty=rho - eps, **solve_kw
        )
        c2 = completeness(g2)
        if (1 - s2) == rho * (1 - c2):
            return g2, w2, s2, rho
        eps = eps / 2
        if eps < Rat(1, 1 << 40):
            raise RuntimeError("ratio verification kept failing; eps exhausted")


def curve(k: int = 4, step=None, points=None, mode: str = "rsinf", **solve_kw):
    """The hardness curve: for each grid completeness the soundness of the
    restricted compressed construction; linear extension above 1 - 2^-k.

    Returns a list of rows (c_exact, s_exact).
    """
    n = 1 << k
    c_top = 1 - Rat(1, n)
    if points is None:
        step = Rat(step) if step is not None else Rat(1, 512)
        points = []
        c = Rat(1, 2)
        while c <= 1:
            points.append(c)
            c += step
    else:
        points = [Rat(p) for p in points]
    s_top = None
    rows = []
    for c in sorted(points):
        if c > c_top:
            if s_top is None:
                _g, _w, s_top = construct_gadget(k, c_top, mode, **solve_kw)
            s = 1 + n * (s_top - 1) * (1 - c)
        else:
            _g, _w, s = construct_gadget(k, c, mode, **solve_kw)
            if c == c_top:
                s_top = s
        rows.append((c, s))
    return rows


# ---------------------------------------------------------------------------
# lifting flows and leakage


def _leak_table(g: Gadget, witness: GadgetFlowWitness):
    """leak(f, g') = fin - fout for every node and every placement (small k only)."""
    if g.k > 2:
        raise ValueError("full leak tables are materialized for k = 2 witnesses only")
    ctx = group_context(g.k)
    system = SupportSystem(g.k, witness.support_ids)
    fin = np.zeros((ctx.N, ctx.N), dtype=object)  # [placement, node]
    fout = np.zeros((ctx.N, ctx.N), dtype=object)
    fin[:, :] = ZERO
    fout[:, :] = ZERO
    for ci, vals in witness.flows.items():
        cd = system.class_data(ci)
        # per-edge flows at the representative placement
        per_pair_out = {}
        for t, x in enumerate(vals):
            if x == 0:
                continue
            iu = cd.H.batch_apply(cd.pair_rep_u[t])
            iv = cd.H.batch_apply(cd.pair_rep_v[t])
            seen = set()
            for u, v in zip(iu.tolist(), iv.tolist()):
                if (u, v) in seen:
                    continue
                seen.add((u, v))
                per_pair_out[(u, v)] = x
        rep = cd.g
        # extend to every placement in the class via the transversal
        members = np.flatnonzero(ctx.func_labels == ctx.func_labels[rep])
        for gm in members.tolist():
            mp = affine.compose(
                ctx.place_transversal(int(gm)), affine.inverse(ctx.place_transversal(rep))
            )
            # sigma_mp maps rep -> gm; nodes map by mp
            perm = ctx.perm_of_map(mp)
            for (u, v), x in per_pair_out.items():
                fu, fv = int(perm[u]), int(perm[v])
                fout[gm, fu] += x
                fin[gm, fv] += x
    return fin, fout


def lift_flow(g: Gadget, witness: GadgetFlowWitness, kp: int):
    """Data of the full k->k' lift of a witness: exact leak evaluator.

    Returns a callable leak(fp, gp) for node/placement masks at arity k'
    plus the lifted gadget; value preservation and leakage are computed
    against it.  Exact for k' <= 4.
    """
    if kp > 4:
        raise ValueError("exact lift evaluation is k' <= 4 only")
    return LiftedFlow(g, witness, kp)


class LiftedFlow:
    def __init__(self, g: Gadget, witness: GadgetFlowWitness, kp: int):
        self.k = g.k
        self.kp = kp
        self.gadget = g
        self.witness = witness
        ctx = group_context(g.k)
        self.ctx = ctx
        fin, fout = _leak_table(g, witness)
        self.leak_w = fin - fout  # [placement, node] at arity k
        self.maps = list(affine.enumerate_lifts(g.k, kp))
        n_k = 1 << g.k
        n_kp = 1 << kp
        # per lift map: point map of sharp(M) (arity k points -> ...) for
        # placement pullback, and the data to invert M on node masks
        self.sharp_pt = np.zeros((len(self.maps), n_k), dtype=np.int64)
        self.sharp_sm = np.zeros(len(self.maps), dtype=np.int64)
        self.fwd_pt = np.zeros((len(self.maps), n_kp), dtype=np.int64)
        self.fwd_sm = np.zeros(len(self.maps), dtype=np.int64)
        for i, m in enumerate(self.maps):
            sh = affine.sharp(m)
            self.sharp_pt[i] = [sh.point_map(x) for x in range(n_k)]
            self.sharp_sm[i] = sh.sign_mask()
            self.fwd_pt[i] = [m.point_map(y) for y in range(n_kp)]
            self.fwd_sm[i] = m.sign_mask()
        # precompute, per low-dimensional node f at arity k: its lift image per
        # map, and integer leak numerators at a common denominator
        self.low_nodes = [f for f in range(ctx.N) if int(ctx.fdim[f]) >= 1]
        self.images = {f: self.lift_images(f) for f in self.low_nodes}
        import math

        denom = 1
        for f in self.low_nodes:
            for gm in range(ctx.N):
                d = int(self.leak_w[gm, f].denominator)
                denom = denom * d // math.gcd(denom, d)
        self.leak_denom = int(denom)
        self.leak_num = {
            f: np.array(
                [int(self.leak_w[gm, f] * self.leak_denom) for gm in range(ctx.N)],
                dtype=np.int64,
            )
            for f in self.low_nodes
        }

    def sharp_placements(self, gp: int) -> np.ndarray:
        """sharp(M)(g') for every lift map M."""
        n_k = 1 << self.k
        gb = ((gp >> self.sharp_pt) & 1).astype(np.int64)
        out = np.zeros(len(self.maps), dtype=np.int64)
        for x in range(n_k):
            out |= gb[:, x] << x
        out ^= self.sharp_sm
        return out

    def lift_images(self, f: int) -> np.ndarray:
        """M(f) for every lift map M."""
        n_kp = 1 << self.kp
        fb = ((f >> self.fwd_pt) & 1).astype(np.int64)
        out = np.zeros(len(self.maps), dtype=np.int64)
        for y in range(n_kp):
            out |= fb[:, y] << y
        out ^= self.fwd_sm
        return out

    def leak_at(self, fp: int, gp: int, gs=None):
        """Exact leak of the lifted flow at node f' and placement g'."""
        if gs is None:
            gs = self.sharp_placements(gp)
        num = 0
        for f in self.low_nodes:
            mask = self.images[f] == fp
            if mask.any():
                num += int(self.leak_num[f][gs[mask]].sum())
        return Rat(num, self.leak_denom * len(self.maps))


def measure_leakage(g: Gadget, witness: GadgetFlowWitness, kp: int, samples=None, seed=0):
    """Expected total absolute leakage of the lifted flow at arity k'.

    Exact for k' <= 4 (orbit-compressed over joint (node, placement) classes);
    k' = 5 is a labeled Monte Carlo estimate over sampled placements.
    """
    if kp > 5:
        raise ValueError("k' > 5 is out of range")
    if kp == 5:
        return _leakage_mc(g, witness, samples or 64, seed)
    lifted = LiftedFlow(g, witness, kp)
    ctxp = group_context(kp)
    total = ZERO
    # joint orbits of (node, placement) at k': enumerate per placement class
    for rep, size, weight in orbits.placement_classes(kp):
        H = orbits.place_stabilizer(ctxp, rep)
        labels, reps = H.node_partition()
        counts = np.bincount(labels[labels >= 0])
        gs = lifted.sharp_placements(int(rep))
        cls_total = ZERO
        for o, frep in enumerate(reps):
            d = int(ctxp.fdim[frep])
            if d < 1 or d > lifted.k:
                continue
            l = lifted.leak_at(int(frep), int(rep), gs=gs)
            if l != 0:
                cls_total += abs(l) * int(counts[o])
        total += weight * cls_total
    return total


def _leakage_mc(g: Gadget, witness: GadgetFlowWitness, samples: int, seed: int):
    import random

    rng = random.Random(seed)
    lifted = LiftedFlow(g, witness, 5)
    n_kp = 1 << 5
    vals = []
    for _ in range(samples):
        gp = rng.getrandbits(n_kp)
        gs = lifted.sharp_placements(gp)
        # group signed leak numerators by lifted node; sums fit exactly in floats
        acc = {}
        for f in lifted.low_nodes:
            nums = lifted.leak_num[f][gs]
            mask = nums != 0
            if not mask.any():
                continue
            fps, inv = np.unique(lifted.images[f][mask], return_inverse=True)
            sums = np.bincount(inv, weights=nums[mask].astype(np.float64))
            for fp, s in zip(fps.tolist(), sums.tolist()):
                acc[fp] = acc.get(fp, 0) + int(s)
        tot = Rat(sum(abs(v) for v in acc.values()), lifted.leak_denom * len(lifted.maps))
        vals.append(tot)
    mean = sum(vals, ZERO) / len(vals)
    var = sum(((v - mean) ** 2 for v in vals), ZERO) / max(1, len(vals) - 1)
    return {"estimate": True, "samples": samples, "mean": mean, "stddev_float": float(var) ** 0.5}
