import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from charp import linalg

PRIMES = st.sampled_from([3, 5, 7])


@st.composite
def matrices(draw, max_dim=5):
    p = draw(PRIMES)
    r = draw(st.integers(1, max_dim))
    c = draw(st.integers(1, max_dim))
    entries = draw(st.lists(st.integers(0, p - 1), min_size=r * c, max_size=r * c))
    return p, np.array(entries, dtype=np.int64).reshape(r, c)


@pytest.mark.parametrize("p", [2, 4, 9, 1, 0, -3])
def test_rejects_bad_characteristic(p):
    with pytest.raises(linalg.BadPrime):
        linalg.check_prime(p)


def test_inverse_mod_p():
    assert linalg.inv(2, 5) == 3
    assert all(a * linalg.inverse_table(7)[a] % 7 == 1 for a in range(1, 7))
    with pytest.raises(ZeroDivisionError):
        linalg.inv(10, 5)


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_rank_nullity(pm):
    p, M = pm
    kernel = linalg.nullspace(M, p)
    assert linalg.rank(M, p) + len(kernel) == M.shape[1]
    for v in kernel:
        assert not linalg.matmul(M, v, p).any()


@settings(max_examples=60, deadline=None)
@given(matrices(), st.data())
def test_solve_recovers_image_points(pm, data):
    p, M = pm
    x0 = np.array(data.draw(st.lists(st.integers(0, p - 1), min_size=M.shape[1], max_size=M.shape[1])))
    b = linalg.matmul(M, x0, p)
    x, _ = linalg.solve(M, b, p)
    assert np.array_equal(linalg.matmul(M, x, p), b)


def test_solve_inconsistent():
    with pytest.raises(linalg.Inconsistent):
        linalg.solve([[1, 1], [2, 2]], [1, 0], 3)


def test_rref_pivots():
    R, piv = linalg.rref([[0, 2, 1], [0, 1, 2]], 3)
    assert piv == [1]
    assert R[0].tolist() == [0, 1, 2]


def test_mat_inverse_round_trip():
    M = np.array([[1, 2], [3, 4]])
    Mi = linalg.mat_inverse(M, 5)
    assert linalg.matmul(M, Mi, 5).tolist() == [[1, 0], [0, 1]]
    with pytest.raises(ZeroDivisionError):
        linalg.mat_inverse([[1, 2], [2, 4]], 5)


def test_span_and_independence():
    vecs = [[1, 0, 0], [2, 0, 0], [0, 1, 0]]
    assert linalg.independent_rows(vecs, 3) == [0, 2]
    assert linalg.in_span(vecs, [1, 1, 0], 3)
    assert not linalg.in_span(vecs, [0, 0, 1], 3)
    assert linalg.in_span([], [0, 0], 3)
