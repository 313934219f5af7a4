import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from charp import weyl
from charp.poisson import verify_restricted

seeds = st.integers(0, 2**32 - 1)


@pytest.fixture(scope="module")
def D():
    return weyl.WeylCtx(3, 1, 5)


def test_commutation_relation(D):
    x, y, h = D.x(), D.y(), D.h()
    assert x * y - y * x == h
    assert weyl.weyl_bracket(x, y) == D.one()
    assert (x ** 3).is_zero() and (y ** 3).is_zero()
    assert D.parse("y0 x0") == D.parse("x0 y0 - h")


def test_normal_ordering_of_y_squared_x_squared(D):
    # y^2 x^2 = x^2 y^2 - 4h xy + 2h^2
    assert D.parse("y0^2 x0^2") == D.parse("x0^2 y0^2 - 4 h x0 y0 + 2 h^2")


def test_printing(D):
    assert str(D.parse("x0 y0 - h")) == "-h + x0 y0"
    assert str(D.parse("2 x0^2 y0 h")) == "-x0^2 y0 h"


def test_truncation_bounds():
    with pytest.raises(ValueError):
        weyl.WeylCtx(3, 1, 9)
    with pytest.raises(ValueError):
        weyl.WeylCtx(3, 3)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(3, 1, 4), (3, 2, 3), (5, 1, 3)]), seeds)
def test_associative_and_bracket_derivation(shape, seed):
    ctx = weyl.WeylCtx(*shape)
    rng = np.random.default_rng(seed)
    a, b, c = (weyl.WeylElt(ctx, rng.integers(0, ctx.p, (ctx.mono, ctx.N))) for _ in range(3))
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    # h{a, bc} = {a, b} c + b {a, c} checked via commutators
    lhs = a * (b * c) - (b * c) * a
    rhs = (a * b - b * a) * c + b * (a * c - c * a)
    assert lhs == rhs


def test_associativity_on_basis():
    assert weyl.check_associativity(weyl.WeylCtx(3, 1, 4)).ok


def test_center_dimension():
    ctx = weyl.WeylCtx(3, 1, 3)
    center = weyl.center_basis(ctx)
    assert len(center) == 11
    g = ctx.gens()
    for z in center:
        assert all((z * v - v * z).is_zero() for v in g)


def test_p_power_examples(D):
    assert str(weyl.p_power(D.parse("x0 y0 + h"))) == "h + x0 y0"
    assert weyl.p_power(D.h()) == D.h().truncate(3)
    assert weyl.p_power(D.x()).is_zero()


def test_fr_const_and_restricted_axioms(D):
    assert all(c.ok for c in weyl.verify_fr_const(D, samples=50, seed=1))
    assert all(c.ok for c in weyl.verify_restr_quant(D, samples=50, seed=1))


def test_quasi_frobenius_lemma():
    checks = weyl.quasi_fr_check(weyl.WeylCtx(3, 1, 4), samples=50)
    assert all(c.ok for c in checks)
    assert checks[0].info["dims"] == [18, 8, 0]


class HSplitting(weyl.Splitting):
    """Sends x0 to h as well: multiplicativity and centrality both break."""

    def values(self, Fbar, T):
        out = super().values(Fbar, T)
        if T > 1:
            x0 = self.ctx.poly_ctx.var(0).c.argmax()
            out[..., 0, 1] += Fbar[..., x0]
        return out


def test_mutated_splitting_is_caught(D):
    checks = weyl.verify_fr_const(D, samples=50, s=HSplitting(D)) + \
        weyl.verify_restr_quant(D, samples=50, s=HSplitting(D))
    assert not all(c.ok for c in checks)


@pytest.mark.parametrize("c", [1, 2])
def test_fibers_are_matrix_algebras(c):
    report = weyl.fiber_matrix_iso(weyl.WeylCtx(3, 1), c)
    assert report["bijective"]
    assert report["dim"] == 9 and report["center_dim"] == 1


def test_reduction_mod_h_matches_poisson():
    ctx = weyl.WeylCtx(3, 1, 4)
    assert weyl.bracket_vs_poisson(ctx).ok
    assert all(ch.ok for ch in verify_restricted(weyl.ReducedPower(ctx), samples=50))
