import random

import pytest
from hypothesis import given, strategies as st

from hadlin.boolfn import BoolFn, chi, dimension, dist, fourier, hadamard_matrix
from hadlin.rational import Rat


def rand_fn(rng, k):
    return BoolFn(k, rng.getrandbits(1 << k))


def test_chi_examples():
    assert str(chi((0, 0))) == "0000"
    assert chi((1, 1)).table() == (1, -1, -1, 1)
    assert chi((1,)).table() == (1, -1)


def test_chi_bad_alpha():
    with pytest.raises(ValueError):
        chi((1, 0, 1), k=2)


def test_fourier_indicator_of_characters():
    for k in (1, 2, 3):
        for a in range(1 << k):
            ft = fourier(chi(a, k=k))
            assert ft[a] == 1
            assert all(ft[b] == 0 for b in range(1 << k) if b != a)


def test_fourier_constant_minus_one():
    f = BoolFn.from_string("1111")
    ft = fourier(f)
    assert ft[0] == -1 and all(ft[a] == 0 for a in (1, 2, 3))


def test_fourier_derived_example():
    ft = fourier(BoolFn.from_string("1000"))
    assert ft.coeffs == (Rat(1, 2), Rat(-1, 2), Rat(-1, 2), Rat(-1, 2))


def test_fourier_inversion_exact():
    rng = random.Random(1)
    for k in (1, 2, 3, 4):
        for _ in range(50):
            f = rand_fn(rng, k)
            assert fourier(f).inverse() == f


def test_parseval_exact():
    rng = random.Random(2)
    for k in (2, 3, 4):
        for _ in range(100):
            f = rand_fn(rng, k)
            assert sum(c * c for c in fourier(f).coeffs) == 1


def test_dimension_examples():
    assert dimension(chi((1, 0))) == 0
    assert dimension(-chi((1, 0))) == 0
    assert dimension(BoolFn.from_string("1000")) == 2


def test_dimension_negation_invariant():
    rng = random.Random(3)
    for k in (2, 3):
        for _ in range(60):
            f = rand_fn(rng, k)
            assert dimension(f) == dimension(-f)
            # negation multiplies every coefficient by -1, preserving support
            assert fourier(f).support() == fourier(-f).support()


def test_dist_examples():
    f = BoolFn.from_string("1010")
    assert dist(f, f) == 0
    assert dist(f, -f) == 1
    assert dist(chi((0, 0)), chi((1, 0))) == Rat(1, 2)
    with pytest.raises(ValueError):
        dist(chi((1,)), chi((1, 0)))


@given(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255))
def test_dist_is_a_metric(a, b, c):
    f1, f2, f3 = BoolFn(3, a), BoolFn(3, b), BoolFn(3, c)
    assert dist(f1, f2) == dist(f2, f1)
    assert (dist(f1, f2) == 0) == (a == b)
    assert dist(f1, f3) <= dist(f1, f2) + dist(f2, f3)


def test_hadamard_matrix_k3_matches_published_figure():
    expected = [
        [0, 0, 0, 0, 0, 0, 0],
        [1, 0, 1, 0, 1, 0, 1],
        [0, 1, 1, 0, 0, 1, 1],
        [1, 1, 0, 0, 1, 1, 0],
        [0, 0, 0, 1, 1, 1, 1],
        [1, 0, 1, 1, 0, 1, 0],
        [0, 1, 1, 1, 1, 0, 0],
        [1, 1, 0, 1, 0, 0, 1],
    ]
    assert hadamard_matrix(3) == expected


def test_hadamard_matrix_k2_and_zero_row():
    assert hadamard_matrix(2) == [[0, 0, 0], [1, 0, 1], [0, 1, 1], [1, 1, 0]]
    for k in (2, 3, 4):
        assert hadamard_matrix(k)[0] == [0] * ((1 << k) - 1)
    with pytest.raises(ValueError):
        hadamard_matrix(1)


def test_hadamard_matrix_symmetric_extension():
    for k in (2, 3, 4):
        m = hadamard_matrix(k)
        ext = [[1] + [1 - 2 * x for x in row] for row in m]
        for row in ext:
            row.insert(0, 1) if False else None
        # prepend the all-zero column mapped to +1
        full = [[1] + [1 - 2 * x for x in m[b]] for b in range(1 << k)]
        for i in range(1 << k):
            for j in range(1 << k):
                assert full[i][j] == full[j][i]


def test_serialization_roundtrip_and_negation_involution():
    rng = random.Random(4)
    for k in (1, 2, 3, 4, 5):
        f = rand_fn(rng, k)
        assert BoolFn.from_string(str(f)) == f
        assert -(-f) == f
        assert (-f).mask == f.mask ^ ((1 << (1 << k)) - 1)


def test_arity_cap():
    with pytest.raises(ValueError):
        BoolFn(6, 0)
