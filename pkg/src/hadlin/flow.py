"""Exact-rational flow graphs: max-flow, leaky flows and their repair,
quotient graphs under symmetry, and flow uncompression.

Capacities are symmetric rationals on unordered node pairs; flows are
directed nonnegative assignments w(u,v) with w(u,v) + w(v,u) <= C(u,v).
Max-flow clears denominators and runs an integer Dinic solver, so every
value is exact.
"""

from collections import deque

from .rational import Rat, ZERO

__all__ = ["FlowGraph", "Flow", "max_flow", "leaks", "repair_leaky", "quotient", "uncompress_flow"]


class FlowGraph:
    """Capacitated undirected graph with source and sink sets."""

    def __init__(self, nodes, capacities, sources, sinks):
        self.nodes = list(nodes)
        self.sources = set(sources)
        self.sinks = set(sinks)
        if self.sources & self.sinks:
            raise ValueError("sources and sinks must be disjoint")
        node_set = set(self.nodes)
        if not self.sources <= node_set or not self.sinks <= node_set:
            raise ValueError("terminals must be nodes")
        self.cap = {}
        for (u, v), c in capacities.items():
            c = Rat(c)
            if c < 0:
                raise ValueError("capacities must be nonnegative")
            if c == 0:
                continue
            key = (u, v) if (u == v or self._lt(u, v)) else (v, u)
            self.cap[key] = self.cap.get(key, ZERO) + c

    @staticmethod
    def _lt(u, v):
        return (str(type(u)), u) < (str(type(v)), v) if type(u) is not type(v) else u < v

    def capacity(self, u, v):
        key = (u, v) if self._lt(u, v) else (v, u)
        return self.cap.get(key, ZERO)

    def total_capacity(self):
        return sum(self.cap.values(), ZERO)

    def neighbors(self):
        adj = {u: set() for u in self.nodes}
        for u, v in self.cap:
            adj[u].add(v)
            adj[v].add(u)
        return adj


class Flow:
    """Directed rational flow; w[(u,v)] >= 0 on ordered pairs."""

    def __init__(self, w=None):
        self.w = {}
        for k, x in (w or {}).items():
            x = Rat(x)
            if x < 0:
                raise ValueError("flow values must be nonnegative")
            if x != 0:
                self.w[k] = x

    def get(self, u, v):
        return self.w.get((u, v), ZERO)

    def fout(self, v):
        return sum((x for (a, _b), x in self.w.items() if a == v), ZERO)

    def fin(self, v):
        return sum((x for (_a, b), x in self.w.items() if b == v), ZERO)

    def value(self, g: FlowGraph):
        return sum((self.fout(s) - self.fin(s) for s in g.sources), ZERO)

    def check_capacity(self, g: FlowGraph):
        pair_tot = {}
        for (u, v), x in self.w.items():
            key = (u, v) if FlowGraph._lt(u, v) else (v, u)
            pair_tot[key] = pair_tot.get(key, ZERO) + x
        for key, tot in pair_tot.items():
            if tot > g.cap.get(key, ZERO):
                raise ValueError(f"capacity violated on {key}")


def leaks(w: Flow, g: FlowGraph) -> dict:
    """Signed leak fin - fout at every non-terminal node; zero map iff feasible."""
    w.check_capacity(g)
    out = {}
    fin, fout = {}, {}
    for (u, v), x in w.w.items():
        fout[u] = fout.get(u, ZERO) + x
        fin[v] = fin.get(v, ZERO) + x
    for v in g.nodes:
        if v in g.sources or v in g.sinks:
            continue
        l = fin.get(v, ZERO) - fout.get(v, ZERO)
        out[v] = l
    return out


def _dinic(n, arcs, s, t):
    """Integer Dinic on node ids 0..n-1; arcs = list of (u, v, cap) directed.

    Returns (value, flow_per_arc).
    """
    head = [[] for _ in range(n)]
    cap = []
    to = []

    def add(u, v, c):
        head[u].append(len(cap))
        to.append(v)
        cap.append(c)
        head[v].append(len(cap))
        to.append(u)
        cap.append(0)

    for u, v, c in arcs:
        add(u, v, c)
    orig_caps = [cap[2 * i] for i in range(len(arcs))]
    INF = sum(c for _u, _v, c in arcs) + 1
    total = 0
    while True:
        level = [-1] * n
        level[s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for e in head[u]:
                v = to[e]
                if cap[e] > 0 and level[v] < 0:
                    level[v] = level[u] + 1
                    q.append(v)
        if level[t] < 0:
            break
        it = [0] * n
        # iterative blocking-flow DFS; it[] persists across paths within a phase
        while True:
            path = []
            u = s
            found = False
            while True:
                if u == t:
                    found = True
                    break
                moved = False
                while it[u] < len(head[u]):
                    e = head[u][it[u]]
                    v = to[e]
                    if cap[e] > 0 and level[v] == level[u] + 1:
                        path.append(e)
                        u = v
                        moved = True
                        break
                    it[u] += 1
                if moved:
                    continue
                if u == s:
                    break
                level[u] = -1
                e = path.pop()
                u = to[e ^ 1]
                it[u] += 1
            if not found:
                break
            aug = min(cap[e] for e in path)
            for e in path:
                cap[e] -= aug
                cap[e ^ 1] += aug
            total += aug
    flows = [orig_caps[i] - cap[2 * i] for i in range(len(arcs))]
    # net out the antiparallel residual bookkeeping
    return total, flows, cap, head, to


def max_flow(g: FlowGraph):
    """Exact max-flow value and a feasible witness flow."""
    if not g.cap or not g.sources or not g.sinks:
        return ZERO, Flow()
    ids = {u: i for i, u in enumerate(g.nodes)}
    n = len(g.nodes) + 2
    s, t = n - 2, n - 1
    denom_lcm = 1
    for c in g.cap.values():
        d = int(c.denominator)
        denom_lcm = denom_lcm * d // _gcd(denom_lcm, d)
    arcs = []
    arc_pairs = []
    for (u, v), c in g.cap.items():
        if u == v:
            continue
        ci = int(c.numerator) * (denom_lcm // int(c.denominator))
        if ci == 0:
            continue
        arcs.append((ids[u], ids[v], ci))
        arc_pairs.append((u, v))
        arcs.append((ids[v], ids[u], ci))
        arc_pairs.append((v, u))
    big = sum(c for _u, _v, c in arcs) + 1
    for src in g.sources:
        arcs.append((s, ids[src], big))
        arc_pairs.append((None, src))
    for snk in g.sinks:
        arcs.append((ids[snk], t, big))
        arc_pairs.append((snk, None))
    total, flows, *_ = _dinic(n, arcs, s, t)
    raw = {}
    for i, f in enumerate(flows):
        u, v = arc_pairs[i]
        if u is None or v is None or f == 0:
            continue
        raw[(u, v)] = f
    netted = {}
    for (u, v) in g.cap:
        net = raw.get((u, v), 0) - raw.get((v, u), 0)
        if net > 0:
            netted[(u, v)] = Rat(net, denom_lcm)
        elif net < 0:
            netted[(v, u)] = Rat(-net, denom_lcm)
    value = Rat(total, denom_lcm)
    return value, Flow(netted)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def min_cut(g: FlowGraph):
    """Exact max-flow value and a minimum cut (source-side node set)."""
    if not g.cap or not g.sources or not g.sinks:
        return ZERO, set(g.sources)
    ids = {u: i for i, u in enumerate(g.nodes)}
    n = len(g.nodes) + 2
    s, t = n - 2, n - 1
    denom_lcm = 1
    for c in g.cap.values():
        d = int(c.denominator)
        denom_lcm = denom_lcm * d // _gcd(denom_lcm, d)
    arcs = []
    for (u, v), c in g.cap.items():
        if u == v:
            continue
        ci = int(c.numerator) * (denom_lcm // int(c.denominator))
        if ci:
            arcs.append((ids[u], ids[v], ci))
            arcs.append((ids[v], ids[u], ci))
    big = sum(c for _u, _v, c in arcs) + 1
    for src in g.sources:
        arcs.append((s, ids[src], big))
    for snk in g.sinks:
        arcs.append((ids[snk], t, big))
    total, _flows, cap, head, to = _dinic(n, arcs, s, t)
    # residual reachability from the super source
    seen = [False] * n
    seen[s] = True
    q = deque([s])
    while q:
        u = q.popleft()
        for e in head[u]:
            if cap[e] > 0 and not seen[to[e]]:
                seen[to[e]] = True
                q.append(to[e])
    side = {u for u in g.nodes if seen[ids[u]]}
    return Rat(total, denom_lcm), side


def repair_leaky(w: Flow, g: FlowGraph) -> Flow:
    """Turn a leaky flow into a feasible one, losing at most the total |leak|.

    Extends the flow to an auxiliary graph whose extra terminals absorb the
    leaks, decomposes it into paths and cycles, and drops every path that
    touches an auxiliary terminal.
    """
    lk = leaks(w, g)
    if all(x == 0 for x in lk.values()):
        return Flow(dict(w.w))
    AUX_S, AUX_T = ("__aux_s__",), ("__aux_t__",)
    arcs = dict(w.w)
    for v, l in lk.items():
        if l > 0:
            arcs[(v, AUX_T)] = l
        elif l < 0:
            arcs[(AUX_S, v)] = -l
    # strip cycles and peel paths
    out_adj = {}
    for (u, v), x in arcs.items():
        if x != 0:
            out_adj.setdefault(u, {})[v] = x

    terminals = set(g.sources) | set(g.sinks) | {AUX_S, AUX_T}

    def pop_path(start):
        """Follow positive-flow arcs until hitting a terminal; cancels cycles."""
        path = [start]
        seen_local = {start}
        u = start
        while True:
            nxt = out_adj.get(u)
            if not nxt:
                # interior nodes conserve flow, so this only happens at terminals
                assert u in terminals
                return None
            v = next(iter(nxt))
            if v in seen_local:
                i = path.index(v)
                cyc = path[i:] + [v]
                amt = min(out_adj[cyc[j]][cyc[j + 1]] for j in range(len(cyc) - 1))
                for j in range(len(cyc) - 1):
                    _dec(out_adj, cyc[j], cyc[j + 1], amt)
                return "retry"
            path.append(v)
            seen_local.add(v)
            if v in terminals:
                return path
            u = v

    kept = {}
    for src in sorted(set(g.sources) | {AUX_S}, key=str):
        while src in out_adj and out_adj[src]:
            res = pop_path(src)
            if res == "retry":
                continue
            if res is None:
                break
            amt = min(out_adj[res[j]][res[j + 1]] for j in range(len(res) - 1))
            keep = src != AUX_S and res[-1] in g.sinks
            for j in range(len(res) - 1):
                _dec(out_adj, res[j], res[j + 1], amt)
                if keep:
                    e = (res[j], res[j + 1])
                    kept[e] = kept.get(e, ZERO) + amt
    return Flow(kept)


def _dec(adj, u, v, amt):
    adj[u][v] -= amt
    if adj[u][v] == 0:
        del adj[u][v]
        if not adj[u]:
            del adj[u]


def check_action(g: FlowGraph, action):
    """Verify that the given node maps are symmetries of g (capacity-invariant,
    terminal-preserving bijections); raises naming the offender."""
    node_set = set(g.nodes)
    for gi, move in enumerate(action):
        img = {u: move(u) for u in g.nodes}
        if set(img.values()) != node_set:
            raise ValueError(f"generator {gi} is not a bijection of the nodes")
        for s in g.sources:
            if img[s] not in g.sources:
                raise ValueError(f"generator {gi} moves source {s!r} out of the source set")
        for t in g.sinks:
            if img[t] not in g.sinks:
                raise ValueError(f"generator {gi} moves sink {t!r} out of the sink set")
        for (u, v), c in g.cap.items():
            if g.capacity(img[u], img[v]) != c:
                raise ValueError(
                    f"generator {gi} changes the capacity of pair ({u!r}, {v!r})"
                )


def node_orbits(nodes, action):
    """Orbits of the nodes under the closure of the given maps."""
    parent = {u: u for u in nodes}

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for move in action:
        for u in nodes:
            a, b = find(u), find(move(u))
            if a != b:
                parent[a] = b
    groups = {}
    for u in nodes:
        groups.setdefault(find(u), []).append(u)
    return list(groups.values())


def quotient(g: FlowGraph, action):
    """Quotient flow graph under a verified symmetry action.

    Nodes are orbits (frozensets); capacities are summed over orbit pairs.
    """
    check_action(g, action)
    orbits_ = node_orbits(g.nodes, action)
    orb_of = {}
    orb_nodes = []
    for orb in orbits_:
        fs = frozenset(orb)
        orb_nodes.append(fs)
        for u in orb:
            orb_of[u] = fs
    caps = {}
    for (u, v), c in g.cap.items():
        a, b = orb_of[u], orb_of[v]
        key = (a, b) if (a == b or FlowGraph._lt(a, b)) else (b, a)
        caps[key] = caps.get(key, ZERO) + c
    sources = {orb_of[s] for s in g.sources}
    sinks = {orb_of[t] for t in g.sinks}
    if sources & sinks:
        raise ValueError("action merges a source orbit with a sink orbit")
    return FlowGraph(orb_nodes, caps, sources, sinks), orb_of


def uncompress_flow(wq: Flow, g: FlowGraph, orb_of) -> Flow:
    """Lift a feasible quotient flow back to g with equal value.

    w(a,b) = w'(A,B) * C(a,b) / (C/H)(A,B); zero-capacity orbit pairs must
    carry no quotient flow.
    """
    qcap = {}
    for (u, v), c in g.cap.items():
        a, b = orb_of[u], orb_of[v]
        if a == b:
            continue  # internal capacity never carries quotient flow
        key = (a, b) if FlowGraph._lt(a, b) else (b, a)
        qcap[key] = qcap.get(key, ZERO) + c
    w = {}
    for (a, b), x in wq.w.items():
        if x == 0:
            continue
        key = (a, b) if FlowGraph._lt(a, b) else (b, a)
        tot = qcap.get(key, ZERO)
        if tot == 0:
            raise ValueError(f"quotient flow on zero-capacity orbit pair {key}")
        for u in a:
            for v in b:
                c = g.capacity(u, v)
                if c != 0:
                    w[(u, v)] = w.get((u, v), ZERO) + x * c / tot
    return Flow(w)
