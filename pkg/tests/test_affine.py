import random

import pytest

from hadlin import affine
from hadlin.affine import (
    AffineMap,
    apply,
    compose,
    enumerate_group,
    enumerate_lifts,
    group_order,
    identity_map,
    inverse,
    lift_count,
    sharp,
    sharp_apply,
)
from hadlin.boolfn import BoolFn, chi, dimension, dist
from hadlin.orbits import group_context, source_sink_nodes


def rand_map(rng, k, kp=None):
    kp = kp or k
    maps = None
    while True:
        rows = tuple(rng.getrandbits(kp) for _ in range(k))
        try:
            return AffineMap(k, kp, rows, rng.getrandbits(k), rng.getrandbits(kp), rng.getrandbits(1))
        except ValueError:
            continue


def rand_fn(rng, k):
    return BoolFn(k, rng.getrandbits(1 << k))


def test_identity_and_constant_images():
    rng = random.Random(0)
    for k in (1, 2, 3):
        f = rand_fn(rng, k)
        assert apply(identity_map(k), f) == f
        m = rand_map(rng, k)
        one = BoolFn(k, 0)
        img = apply(m, one)
        expected = chi(m.beta, k=k)
        if m.c:
            expected = -expected
        assert img == expected


def test_apply_lift_example():
    f = chi((1,))
    m = AffineMap(1, 2, (0b01,), 0, 0b10, 0)
    assert apply(m, f) == chi((1, 1))


def test_rank_enforced():
    with pytest.raises(ValueError):
        AffineMap(2, 2, (0b01, 0b01), 0, 0, 0)


def test_group_laws_and_composition_action():
    rng = random.Random(1)
    for k in (2, 3):
        ident = identity_map(k)
        for _ in range(100):
            m1 = rand_map(rng, k)
            m2 = rand_map(rng, k)
            f = rand_fn(rng, k)
            assert apply(compose(m2, m1), f) == apply(m2, apply(m1, f))
            assert compose(ident, m1).key() == m1.key()
            assert compose(inverse(m1), m1).key() == ident.key()
            assert compose(m1, inverse(m1)).key() == ident.key()


def test_sharp_involution_and_identity():
    rng = random.Random(2)
    assert sharp(identity_map(3)).key() == identity_map(3).key()
    for _ in range(50):
        m = rand_map(rng, 2)
        assert sharp(sharp(m)).key() == m.key()


def test_sharp_moves_terminals_correctly():
    # g = sharp(M)(g') must place sources/sinks so that M maps them onto g"s
    rng = random.Random(3)
    ctx = group_context(2)
    for _ in range(40):
        m = rand_map(rng, 2)
        gp = rand_fn(rng, 2)
        g = sharp_apply(m, gp)
        src, snk = source_sink_nodes(ctx, g.mask)
        srcp, snkp = source_sink_nodes(ctx, gp.mask)
        assert {apply(m, BoolFn(2, s)).mask for s in src} == set(srcp)
        assert {apply(m, BoolFn(2, t)).mask for t in snk} == set(snkp)


def test_group_sizes():
    assert sum(1 for _ in enumerate_group(1)) == 8
    assert sum(1 for _ in enumerate_group(2)) == 192 == group_order(2)
    assert sum(1 for _ in enumerate_lifts(2, 3)) == 2688 == lift_count(2, 3)


def test_group_closure_k2():
    maps = {m.key() for m in enumerate_group(2)}
    rng = random.Random(4)
    pool = list(enumerate_group(2))
    for _ in range(200):
        a, b = rng.choice(pool), rng.choice(pool)
        assert compose(a, b).key() in maps


def test_lift_rank_invariant():
    for m in enumerate_lifts(1, 2):
        assert m.k == 1 and m.kp == 2
    rng = random.Random(5)
    for _ in range(30):
        m = rand_map(rng, 2, 4)
        from hadlin.bits import mat_rank

        assert mat_rank(m.a_rows) == 2


def test_distance_and_dimension_preservation():
    rng = random.Random(6)
    for (k, kp) in ((2, 2), (2, 3), (3, 3), (2, 4)):
        for _ in range(100):
            m = rand_map(rng, k, kp)
            f1, f2 = rand_fn(rng, k), rand_fn(rng, k)
            assert dist(apply(m, f1), apply(m, f2)) == dist(f1, f2)
            assert dimension(apply(m, f1)) == dimension(f1)


def test_memory_guard():
    with pytest.raises(ValueError):
        enumerate_group(5)
