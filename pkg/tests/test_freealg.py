import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from charp import freealg
from charp.freealg import FreeAlgebra, TensorTarget, commutator, eval_quant


@pytest.fixture(scope="module")
def alg3():
    return FreeAlgebra(3, 2)


def test_parse_and_print_round_trip(alg3):
    t = alg3.parse("xxy - 2 yx + 1")
    assert str(alg3.parse(str(t))) == str(t)
    assert alg3.parse("0").is_zero()
    with pytest.raises(ValueError):
        alg3.parse("xq")


def test_degree_cap():
    alg = FreeAlgebra(3, 2, cap=2)
    with pytest.raises(freealg.DegreeCap):
        alg.element({(0, 0, 1): 1})
    with pytest.raises(freealg.DegreeCap):
        freealg.compute_L(3, alg)


def test_L_at_three_is_the_six_mixed_words():
    L = freealg.compute_L(3)
    assert str(L.tensor) == "xxy + xyx + xyy + yxx + yxy + yyx"
    assert L.bracket_text() == "[x,[x,y]] + 2*[y,[x,y]]"


@pytest.mark.parametrize("p", [3, 5])
def test_L_is_lie_and_matches_word_count(p):
    L = freealg.compute_L(p)
    alg = L.tensor.alg
    assert alg.pbw_level(L.tensor) == 1
    # every mixed word of length p appears with coefficient one
    mixed = [w for w in itertools.product(range(2), repeat=p) if 0 < sum(w) < p]
    assert dict(L.tensor.terms) == {w: 1 for w in mixed}
    # the bracket expansion reproduces the tensor
    assert eval_quant(L, alg.gens(), TensorTarget(alg)) == L.tensor


@pytest.mark.parametrize("p", [3, 5])
def test_L_vanishes_on_degenerate_arguments(p):
    L = freealg.universal_L(p)
    alg = L.tensor.alg
    target = TensorTarget(alg)
    x = alg.gen(0)
    assert eval_quant(L, [x, x], target).is_zero()
    assert eval_quant(L, [x, alg.zero()], target).is_zero()


@pytest.mark.parametrize("p", [3, 5])
def test_P_sits_at_level_p_plus_one(p):
    P = freealg.compute_P(p)
    assert P.level == p + 1
    assert P.is_valid()
    assert eval_quant(P, P.alg.gens(), TensorTarget(P.alg)) == P.tensor


def test_P_at_three_has_two_words():
    assert str(freealg.universal_P(3).tensor) == "-xxxyyy + xyxyxy"


@pytest.mark.parametrize("d, g, expected", [(1, 2, 2), (2, 2, 1), (3, 2, 2), (4, 2, 3), (5, 2, 6), (3, 3, 8)])
def test_witt_dimension(d, g, expected):
    assert freealg.witt_dimension(d, g) == expected
    assert FreeAlgebra(3, g, cap=6).lie_basis(d).dim == expected


def test_lie_membership(alg3):
    x, y = alg3.gens()
    assert alg3.pbw_level(commutator(x, commutator(x, y))) == 1
    assert alg3.pbw_level(x * y) == 2
    assert alg3.pbw_level(x * x * y) == 3


def test_quant_bracket_level(alg3):
    x, y = freealg.quant_gen(alg3, 0), freealg.quant_gen(alg3, 1)
    b = freealg.quant_bracket(x, y)
    assert b.level == 1
    assert b.is_valid()
    with pytest.raises(freealg.LevelViolation):
        freealg.QuantElt(alg3.parse("xy"), 1).products


@pytest.mark.parametrize("p", [3, 5, 7])
def test_ad_frobenius(p):
    assert freealg.verify_ad_fr(p)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_L_in_two_step_algebra_is_y(p):
    target = freealg.two_step_lie(p)
    value = eval_quant(freealg.universal_L(p), [target.basis(0), target.basis(1)], target)
    assert value.tolist() == [0, 1]


words = st.lists(st.tuples(st.lists(st.integers(0, 1), max_size=3).map(tuple), st.integers(0, 2)), max_size=4)


@settings(max_examples=40, deadline=None)
@given(words, words, words)
def test_tensor_product_is_associative_and_distributive(a, b, c):
    alg = FreeAlgebra(3, 2, cap=9)
    a, b, c = alg.element(a), alg.element(b), alg.element(c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert commutator(a, b) == -commutator(b, a)


@settings(max_examples=30, deadline=None)
@given(words, words, words)
def test_jacobi(a, b, c):
    alg = FreeAlgebra(3, 2, cap=9)
    a, b, c = alg.element(a), alg.element(b), alg.element(c)
    total = commutator(a, commutator(b, c)) + commutator(b, commutator(c, a)) + commutator(c, commutator(a, b))
    assert total.is_zero()


def test_dense_round_trip(alg3):
    t = alg3.parse("xxy + 2 yyx")
    assert alg3.from_dense(t.dense(3), 3) == t
    assert np.count_nonzero(t.dense(3)) == 2
