import random

import numpy as np
import pytest

from hadlin import affine, fixtures, orbits
from hadlin.affine import apply, inverse, sharp_apply
from hadlin.boolfn import BoolFn
from hadlin.orbits import (
    canonical_pair,
    edge_orbits,
    func_stabilizer,
    group_context,
    place_stabilizer,
    placement_classes,
)


def test_edge_orbit_counts():
    assert len(edge_orbits(2)) == 4
    assert len(edge_orbits(3)) == 26


def test_k2_orbit_sizes_match_published_rows():
    for s1, s2, ham, size in fixtures.PUBLISHED_ORBITS_K2:
        oid = fixtures.orbit_id_of_pair(2, s1, s2)
        e = edge_orbits(2)[oid]
        assert (e.ham, e.size) == (ham, size)


def test_k3_published_rows():
    for s1, s2, ham, size in fixtures.PUBLISHED_ORBITS_K3:
        oid = fixtures.orbit_id_of_pair(3, s1, s2)
        e = edge_orbits(3)[oid]
        assert (e.ham, e.size) == (ham, size)


def test_orbit_sizes_partition_all_pairs():
    for k in (2, 3):
        N = 1 << (1 << k)
        assert sum(e.size for e in edge_orbits(k)) == N * (N - 2) // 2


def test_orbit_well_defined_under_action():
    rng = random.Random(0)
    ctx = group_context(2)
    for e in edge_orbits(2):
        for _ in range(20):
            m = rng.choice(list(affine.enumerate_group(2)))
            a = apply(m, BoolFn(2, e.hi)).mask
            b = apply(m, BoolFn(2, e.lo)).mask
            assert canonical_pair(2, a, b) == (e.hi, e.lo)


def test_placement_classes_match_function_orbits():
    # the sharp action induces the same partition as the plain action
    ctx = group_context(2)
    classes = placement_classes(2)
    assert sum(size for _rep, size, _w in classes) == 16
    group = list(affine.enumerate_group(2))
    for rep, size, _w in classes:
        orbit = {sharp_apply(m, BoolFn(2, rep)).mask for m in group}
        assert len(orbit) == size
        assert ctx.func_labels[list(orbit)].tolist() == [ctx.func_labels[rep]] * size


def test_placement_orbit_of_constant():
    # the constant placement's orbit is all +-chi_b: size 2^(k+1)
    for k in (2, 3):
        ctx = group_context(k)
        const = (1 << (1 << k)) - 1  # the all-(-1) canonical affine rep
        classes = placement_classes(k)
        sizes = {rep: size for rep, size, _ in classes}
        assert sizes[const] == 2 << k


def test_placement_orbit_count_k3_brute_force():
    ctx = group_context(3)
    group = list(affine.enumerate_group(3))
    seen = set()
    count = 0
    for g in range(256):
        if g in seen:
            continue
        count += 1
        orb = {sharp_apply(m, BoolFn(3, g)).mask for m in group}
        seen |= orb
    assert count == len(placement_classes(3)) == ctx.n_func_orbits


def test_stabilizers():
    ctx = group_context(2)
    for g in (0, 15, 7, 1):
        stab = place_stabilizer(ctx, g)
        maps = stab.maps()
        assert any(m.key() == affine.identity_map(2).key() for m in maps)
        for m in maps:
            assert sharp_apply(m, BoolFn(2, g)).mask == g
        # orbit-stabilizer
        orbit = {sharp_apply(m, BoolFn(2, g)).mask for m in affine.enumerate_group(2)}
        assert len(orbit) * stab.m == affine.group_order(2)
    # the constant placement for k=2: |stab| = 192/8 = 24
    assert place_stabilizer(ctx, 0).m == 24


def test_func_stabilizer_is_subgroup_sample():
    rng = random.Random(1)
    ctx = group_context(2)
    stab = func_stabilizer(ctx, 7).maps()
    for _ in range(50):
        a, b = rng.choice(stab), rng.choice(stab)
        c = affine.compose(a, b)
        assert apply(c, BoolFn(2, 7)).mask == 7


@pytest.mark.heavy
def test_k4_orbit_fixture():
    import time

    t = time.time()
    eo = edge_orbits(4)
    elapsed = time.time() - t
    assert len(eo) == 1061
    assert elapsed < 900, f"k=4 edge orbits took {elapsed:.0f}s (budget 15 min)"
    for s1, s2, ham, size in fixtures.PUBLISHED_ORBITS_K4:
        oid = fixtures.orbit_id_of_pair(4, s1, s2)
        e = edge_orbits(4)[oid]
        assert (e.ham, e.size) == (ham, size)
    N = 1 << 16
    assert sum(e.size for e in eo) == N * (N - 2) // 2
