import random

import pytest

from hadlin.flow import (
    Flow,
    FlowGraph,
    leaks,
    max_flow,
    min_cut,
    node_orbits,
    quotient,
    repair_leaky,
    uncompress_flow,
)
from hadlin.rational import Rat
from hadlin.simplex import LinearProgram


def rand_graph(rng, nmax=10):
    n = rng.randint(3, nmax)
    caps = {}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.55:
                caps[(i, j)] = Rat(rng.randint(0, 6), rng.randint(1, 9))
    srcs, snks = {0}, {n - 1}
    if n > 4 and rng.random() < 0.4:
        srcs.add(1)
        snks.add(n - 2)
    return FlowGraph(range(n), caps, srcs, snks)


def flow_lp_value(g):
    """Independent LP oracle for the max-flow value."""
    lp = LinearProgram("max")
    arcs = []
    for (u, v) in g.cap:
        arcs.append((u, v))
        arcs.append((v, u))
    for (u, v) in arcs:
        lp.add_var(f"w{u}_{v}")
    for (u, v) in g.cap:
        lp.add_row({f"w{u}_{v}": 1, f"w{v}_{u}": 1}, "<=", g.cap[(u, v)])
    for x in g.nodes:
        if x in g.sources or x in g.sinks:
            continue
        coeffs = {}
        for (u, v) in arcs:
            if u == x:
                coeffs[f"w{u}_{v}"] = coeffs.get(f"w{u}_{v}", 0) + 1
            if v == x:
                coeffs[f"w{u}_{v}"] = coeffs.get(f"w{u}_{v}", 0) - 1
        if coeffs:
            lp.add_row(coeffs, "=", 0)
    for (u, v) in arcs:
        if u in g.sources:
            lp.add_obj(f"w{u}_{v}", 1)
        if v in g.sources:
            lp.add_obj(f"w{u}_{v}", -1)
    res = lp.solve()
    assert res.is_optimal
    return res.value


def test_trivial_cases():
    g = FlowGraph([0, 1], {}, [0], [1])
    assert max_flow(g)[0] == 0
    g = FlowGraph([0, 1], {(0, 1): Rat(3, 7)}, [0], [1])
    v, w = max_flow(g)
    assert v == Rat(3, 7) and w.get(0, 1) == Rat(3, 7)


def test_max_flow_against_lp_oracle():
    rng = random.Random(11)
    for _ in range(50):
        g = rand_graph(rng)
        v, w = max_flow(g)
        w.check_capacity(g)
        assert all(x == 0 for x in leaks(w, g).values())
        assert w.value(g) == v
        assert flow_lp_value(g) == v
        v2, side = min_cut(g)
        assert v2 == v
        cutcap = sum(c for (a, b), c in g.cap.items() if (a in side) != (b in side))
        assert cutcap == v


def test_leaks_examples():
    g = FlowGraph([0, 1, 2], {(0, 1): 1, (1, 2): 1}, [0], [2])
    w = Flow({(0, 1): Rat(1, 3)})
    lk = leaks(w, g)
    assert lk == {1: Rat(1, 3)}
    w = Flow({(0, 1): Rat(1, 2), (1, 2): Rat(1, 2)})
    assert all(x == 0 for x in leaks(w, g).values())
    with pytest.raises(ValueError):
        leaks(Flow({(0, 1): 2}), g)


def test_leak_totals_match_terminal_net():
    rng = random.Random(12)
    for _ in range(40):
        g = rand_graph(rng)
        w = {}
        for (u, v), c in g.cap.items():
            t = c * Rat(rng.randint(0, 3), 3)
            if t:
                if rng.random() < 0.5:
                    w[(u, v)] = t
                else:
                    w[(v, u)] = t
        fl = Flow(w)
        lk = leaks(fl, g)
        net_terminals = sum(
            (fl.fout(v) - fl.fin(v) for v in list(g.sources) + list(g.sinks)),
            Rat(0),
        )
        assert sum(lk.values(), Rat(0)) == net_terminals


def test_repair_two_hop_example():
    g = FlowGraph([0, 1, 2], {(0, 1): 1, (1, 2): 1}, [0], [2])
    w = Flow({(0, 1): Rat(1, 2), (1, 2): 1})  # 1/2 appears mid-path
    lk = leaks(w, g)
    tot = sum(abs(x) for x in lk.values())
    assert tot == Rat(1, 2)
    wr = repair_leaky(w, g)
    assert all(x == 0 for x in leaks(wr, g).values())
    assert wr.value(g) >= w.value(g) - tot


def test_repair_feasible_input_unchanged():
    g = FlowGraph([0, 1, 2], {(0, 1): 1, (1, 2): 1}, [0], [2])
    w = Flow({(0, 1): Rat(1, 2), (1, 2): Rat(1, 2)})
    wr = repair_leaky(w, g)
    assert wr.w == w.w


def test_repair_property_random():
    rng = random.Random(13)
    done = 0
    while done < 100:
        g = rand_graph(rng)
        vmax, wopt = max_flow(g)
        w = dict(wopt.w)
        for (u, v) in list(g.cap):
            if rng.random() < 0.4:
                room = g.capacity(u, v) - wopt.get(u, v) - wopt.get(v, u)
                if room > 0:
                    w[(u, v)] = w.get((u, v), Rat(0)) + room * Rat(rng.randint(1, 3), 3)
        fl = Flow(w)
        try:
            fl.check_capacity(g)
        except ValueError:
            continue
        lk = leaks(fl, g)
        tot = sum(abs(x) for x in lk.values())
        wr = repair_leaky(fl, g)
        wr.check_capacity(g)
        assert all(x == 0 for x in leaks(wr, g).values())
        assert wr.value(g) >= fl.value(g) - tot
        assert wr.value(g) <= vmax
        done += 1


def _rotation_graph(rng, m):
    layers = rng.randint(2, 4)
    caps = {}
    for lay in range(layers - 1):
        for j in range(m):
            off = rng.randint(0, m - 1)
            c = Rat(rng.randint(1, 5), rng.randint(1, 4))
            for t in range(m):
                caps[((lay, t), (lay + 1, (t + off) % m))] = c
    # some intra-layer rings
    for lay in range(layers):
        if rng.random() < 0.5:
            c = Rat(rng.randint(0, 3), rng.randint(1, 3))
            if c:
                for t in range(m):
                    caps[((lay, t), (lay, (t + 1) % m))] = caps.get(((lay, t), (lay, (t + 1) % m)), Rat(0)) + c
    nodes = [(l, t) for l in range(layers) for t in range(m)]
    g = FlowGraph(nodes, caps, [(0, t) for t in range(m)], [(layers - 1, t) for t in range(m)])
    rot = lambda u: (u[0], (u[1] + 1) % m)
    return g, rot


def test_quotient_equivalence_30_random_symmetric_graphs():
    rng = random.Random(14)
    for _ in range(30):
        g, rot = _rotation_graph(rng, rng.choice([2, 3, 4]))
        q, orb_of = quotient(g, [rot])
        assert sum(q.cap.values(), Rat(0)) == sum(g.cap.values(), Rat(0))
        v, _ = max_flow(g)
        vq, wq = max_flow(q)
        assert v == vq
        wu = uncompress_flow(wq, g, orb_of)
        wu.check_capacity(g)
        assert all(x == 0 for x in leaks(wu, g).values())
        assert wu.value(g) == vq


def test_quotient_trivial_group():
    g = FlowGraph([0, 1, 2], {(0, 1): 1, (1, 2): Rat(1, 2)}, [0], [2])
    q, orb_of = quotient(g, [lambda u: u])
    assert len(q.nodes) == 3
    assert max_flow(q)[0] == max_flow(g)[0]
    wq = max_flow(q)[1]
    wu = uncompress_flow(wq, g, orb_of)
    assert wu.value(g) == max_flow(g)[0]
    assert uncompress_flow(Flow(), g, orb_of).w == {}


def test_quotient_rejects_bad_action():
    g = FlowGraph([0, 1, 2], {(0, 1): 1, (1, 2): 2}, [0], [2])
    swap = {0: 0, 1: 2, 2: 1}
    with pytest.raises(ValueError):
        quotient(g, [lambda u: swap[u]])
    swap_terminals = {0: 2, 1: 1, 2: 0}
    with pytest.raises(ValueError):
        quotient(g, [lambda u: swap_terminals[u]])
