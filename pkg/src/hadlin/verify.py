"""Witness files and the five-step verification pipeline.

A witness stores, per placement-class representative, the per-edge flow of
every orbit of ordered node pairs under the class stabilizer (canonical pair
plus one rational).  Verification checks, in order: (1) capacity constraints
at every class representative, (2) gadget symmetry (orbit-canonical keying),
(3) the map-based extension of in/out-flows to every placement, (4) flow
conservation (plain per placement for rs, class-summed over placements
agreeing on the node's supporting affine subspace for rsinf), and (5) the
exact completeness and soundness certified by the flows.  No LP is solved.
"""

from dataclasses import dataclass, field

import numpy as np

from . import orbits
from .boolfn import BoolFn
from .gadget import Gadget, completeness, parse_gadget
from .orbits import group_context
from .rational import Rat, ZERO, format_rat, rat
from .soundness import GadgetFlowWitness
from .support import SupportSystem

__all__ = ["serialize_witness", "parse_witness", "verify", "VerificationReport"]


@dataclass
class StepResult:
    step: int
    ok: bool
    detail: str = ""


@dataclass
class VerificationReport:
    steps: list = field(default_factory=list)
    completeness: object = None
    soundness: object = None
    mode: str = ""

    @property
    def accepted(self) -> bool:
        return all(s.ok for s in self.steps) and len(self.steps) == 5

    def fail(self, step: int, detail: str):
        self.steps.append(StepResult(step, False, detail))
        return self

    def passed(self, step: int, detail: str = ""):
        self.steps.append(StepResult(step, True, detail))

    def lines(self):
        out = []
        for s in self.steps:
            mark = "pass" if s.ok else "FAIL"
            out.append(f"step {s.step}: {mark}" + (f" ({s.detail})" if s.detail else ""))
        if self.completeness is not None:
            out.append(f"completeness {format_rat(self.completeness)}")
        if self.soundness is not None:
            out.append(f"{self.mode} {format_rat(self.soundness)}")
        out.append("accepted" if self.accepted else "rejected")
        return out


def serialize_witness(g: Gadget, witness: GadgetFlowWitness) -> str:
    system = SupportSystem(g.k, witness.support_ids)
    lines = [f"k {g.k}", f"mode {witness.mode}"]
    for ci in sorted(witness.flows):
        cd = system.class_data(ci)
        vals = witness.flows[ci]
        lines.append(f"g {BoolFn(g.k, cd.g)}")
        for t, x in enumerate(vals):
            if x != 0:
                lines.append(
                    f"{BoolFn(g.k, cd.pair_rep_u[t])} {BoolFn(g.k, cd.pair_rep_v[t])} {format_rat(x)}"
                )
    return "\n".join(lines) + "\n"


def parse_witness(text: str):
    """-> (k, mode, blocks) with blocks = {placement mask: [(u, v, Rat)]}."""
    k = mode = None
    blocks = {}
    current = None
    for lineno, rawline in enumerate(text.splitlines(), 1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "k":
            k = int(parts[1])
            continue
        if parts[0] == "mode":
            mode = parts[1]
            if mode not in ("rs", "rsinf"):
                raise ValueError(f"line {lineno}: unknown mode {mode!r}")
            continue
        if parts[0] == "g":
            gm = BoolFn.from_string(parts[1], k).mask
            current = blocks.setdefault(gm, [])
            continue
        if len(parts) != 3 or current is None:
            raise ValueError(f"line {lineno}: expected '<f1> <f2> <p>/<q>' inside a block")
        u = BoolFn.from_string(parts[0], k).mask
        v = BoolFn.from_string(parts[1], k).mask
        x = rat(parts[2])
        if x < 0:
            raise ValueError(f"line {lineno}: negative flow")
        current.append((u, v, x))
    if k is None or mode is None:
        raise ValueError("witness must declare 'k' and 'mode'")
    return k, mode, blocks


def verify(gadget_text: str, witness_text: str, mode: str) -> VerificationReport:
    """Run the five verification steps on serialized inputs."""
    report = VerificationReport(mode=mode)
    try:
        gadget = parse_gadget(gadget_text)
    except ValueError as exc:
        return report.fail(1, f"gadget rejected: {exc}")
    try:
        wk, wmode, blocks = parse_witness(witness_text)
    except ValueError as exc:
        return report.fail(1, f"witness rejected: {exc}")
    if wk != gadget.k:
        return report.fail(1, f"arity mismatch: gadget k={gadget.k}, witness k={wk}")
    if wmode != mode:
        return report.fail(1, f"witness is {wmode}-mode, asked to verify {mode}")
    return verify_parsed(gadget, blocks, mode, report)


def verify_parsed(gadget: Gadget, blocks: dict, mode: str, report=None) -> VerificationReport:
    ctx = group_context(gadget.k)
    report = report or VerificationReport(mode=mode)
    system = SupportSystem(gadget.k, [o for o, _ in gadget.weights])
    caps = gadget.weight_map()
    table = orbits.edge_orbits(gadget.k)

    # locate each block at its placement class
    class_of = {}
    for ci in range(system.n_classes):
        class_of[system.class_list[ci][0]] = ci
    flows = {}
    for gm, lines in blocks.items():
        if gm not in class_of:
            return report.fail(
                1, f"{BoolFn(gadget.k, gm)} is not a canonical placement representative"
            )
        ci = class_of[gm]
        cd = system.class_data(ci)
        cd.ensure_pair_labels()
        vals = [ZERO] * cd.n_pair_orbits
        for (u, v, x) in lines:
            key = u * ctx.N + v
            pos = int(np.searchsorted(system.sorted_keys, key))
            if pos >= len(system.sorted_keys) or system.sorted_keys[pos] != key:
                if x != 0:
                    return report.fail(
                        1,
                        f"flow on zero-capacity pair {BoolFn(gadget.k,u)} {BoolFn(gadget.k,v)}",
                    )
                continue
            t = int(cd.pair_labels[system.order[pos]])
            if t < 0:
                return report.fail(
                    1, f"flow into a source / out of a sink at {BoolFn(gadget.k,u)} {BoolFn(gadget.k,v)}"
                )
            vals[t] = vals[t] + x
        flows[ci] = vals

    # step 1: capacity constraints per representative placement
    for ci, vals in flows.items():
        cd = system.class_data(ci)
        for t in range(cd.n_pair_orbits):
            t2 = int(cd.pair_partner[t])
            back = vals[t2] if t2 >= 0 else ZERO
            cap = caps.get(cd.pair_eid[t], ZERO)
            if vals[t] + back > cap:
                return report.fail(
                    1,
                    f"capacity violated at class {BoolFn(gadget.k, cd.g)} pair "
                    f"{BoolFn(gadget.k, cd.pair_rep_u[t])} {BoolFn(gadget.k, cd.pair_rep_v[t])}: "
                    f"{format_rat(vals[t] + back)} > {format_rat(cap)}",
                )
    report.passed(1)

    # step 2: gadget symmetry under the map group (orbit-constant capacities,
    # canonical keying; a non-canonical pair file is rejected here)
    for o, _w in gadget.weights:
        e = table[o]
        hi2, lo2 = orbits.canonical_pair(gadget.k, e.hi, e.lo)
        if (hi2, lo2) != (e.hi, e.lo):
            return report.fail(2, f"orbit {o} representative is not canonical")
    report.passed(2)

    # step 3: in/out flows at every representative, extensible to all
    # placements through the transversal maps
    fin = {}
    fout = {}
    for ci, vals in flows.items():
        cd = system.class_data(ci)
        fi = np.zeros(ctx.N, dtype=object)
        fo = np.zeros(ctx.N, dtype=object)
        fi[:] = ZERO
        fo[:] = ZERO
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
                fo[u] += x
                fi[v] += x
        fin[ci] = fi
        fout[ci] = fo
    report.passed(3)

    # step 4: conservation
    if mode == "rs":
        for ci in flows:
            cd = system.class_data(ci)
            for f in range(ctx.N):
                if ctx.fdim[f] < 1:
                    continue
                if fin[ci][f] != fout[ci][f]:
                    return report.fail(
                        4,
                        f"conservation violated at node {BoolFn(gadget.k, f)} of class "
                        f"{BoolFn(gadget.k, cd.g)}",
                    )
    else:
        bad = _rsinf_conservation(ctx, system, fin, fout)
        if bad is not None:
            return report.fail(4, bad)
    report.passed(4)

    # step 5: completeness and certified soundness from the extended flows
    report.completeness = completeness(gadget)
    total = ZERO
    for ci, vals in flows.items():
        cd = system.class_data(ci)
        val = ZERO
        for s in cd.sources:
            val += fout[ci][s] - fin[ci][s]
        total += cd.weight * val
    report.soundness = 1 - total
    report.passed(5)
    return report


def _rsinf_conservation(ctx, system, fin, fout):
    """Class-summed conservation over orbits of (node, restriction)."""
    from .construction import pattern_orbit_reps

    class_label = ctx.func_labels
    for F, apts, pat in pattern_orbit_reps(system):
        g_all = np.arange(ctx.N, dtype=np.int64)
        sel = np.ones(ctx.N, dtype=bool)
        for i, p in enumerate(apts):
            sel &= ((g_all >> p) & 1) == ((pat >> p) & 1)
        members = g_all[sel]
        images = ctx.apply_place_action(members, F)
        total = ZERO
        for gm, u in zip(members.tolist(), images.tolist()):
            ci = int(class_label[gm])
            if ci in fin:
                total += fout[ci][u] - fin[ci][u]
        if total != 0:
            return (
                f"class-summed conservation violated at node {BoolFn(system.k, F)} "
                f"restriction pattern {pat:0{1 << system.k}b}"
            )
    return None
