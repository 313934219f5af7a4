import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from charp import poisson as po
from charp import trunccalc as tc

seeds = st.integers(0, 2**32 - 1)


@pytest.fixture(scope="module")
def plane():
    ctx = tc.algebra(3, 2)
    return ctx, po.check_symplectic(po.standard_form(ctx))


def test_hamiltonian_convention(plane):
    ctx, S = plane
    x, y = ctx.var(0), ctx.var(1)
    assert po.bracket(S, x, y) == ctx.one()
    assert po.hamiltonian(S, x) == -ctx.partial(1)
    assert po.bracket(S, x * x, y) == 2 * x
    # H_f -| Omega = df
    f = ctx.parse_poly("x^2*y + y")
    assert tc.contract(S.form, po.hamiltonian(S, f)) == tc.d(f)


def test_rejects_bad_forms():
    with pytest.raises(po.Degenerate):
        po.check_symplectic(tc.algebra(3, 3).parse_form("dx0^dx1"))
    ctx = tc.algebra(3, 2)
    with pytest.raises(po.Degenerate):
        po.check_symplectic(ctx.parse_form("x dx0^dx1"))
    with pytest.raises(ValueError):
        po.check_symplectic(ctx.parse_form("dx0"))


def test_inverse_gram_of_deformed_form():
    ctx = tc.algebra(3, 2)
    S = po.check_symplectic(ctx.parse_form("dx0^dx1 + x dx0^dx1"))
    assert tc.TruncPoly(ctx, S.gram_inv[0, 1]) == -ctx.parse_poly("1 - x + x^2")


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([3, 5]), seeds)
def test_bracket_is_poisson(p, seed):
    ctx = tc.algebra(p, 2)
    rng = np.random.default_rng(seed)
    S = po.random_symplectic(ctx, rng, top_class=None)
    f, g, k = (tc.random_poly(ctx, rng) for _ in range(3))
    br = lambda a, b: po.bracket(S, a, b)  # noqa: E731
    assert br(f, g) == -br(g, f)
    assert br(f, g * k) == g * br(f, k) + k * br(f, g)
    assert (br(f, br(g, k)) + br(g, br(k, f)) + br(k, br(f, g))).is_zero()
    # Hamiltonian fields bracket like functions, with the order reversed
    lhs = tc.lie_bracket(po.hamiltonian(S, f), po.hamiltonian(S, g))
    assert lhs == po.hamiltonian(S, br(g, f))


def test_center_and_simplicity(plane):
    ctx, S = plane
    center = po.poisson_center(S)
    assert len(center) == 1 and center[0].is_const()
    assert po.poisson_ideal_closure(S, ctx.var(0) ** 2) == ctx.dim
    with pytest.raises(ValueError):
        po.poisson_ideal_closure(S, ctx.zero())


@pytest.mark.parametrize("text, flags", [
    ("dx0^dx1", (True, True)),
    ("dx0^dx1 + x dx0^dx1", (True, True)),
    ("dx0^dx1 + x^2*y^2 dx0^dx1", (False, False)),
])
def test_theorem_cent_flags(text, flags):
    S = po.check_symplectic(tc.algebra(3, 2).parse_form(text))
    assert po.theorem_cent_check(S) == flags


def test_potential_and_conformal_field(plane):
    ctx, S = plane
    alpha = po.potential(S)
    assert tc.de_rham(alpha) == S.form
    xi = po.find_conformal(S)
    assert po.conformal_check(xi, 1, S)
    assert not po.conformal_check(xi, 0, S)
    bad = po.check_symplectic(ctx.parse_form("dx0^dx1 + x^2*y^2 dx0^dx1"))
    with pytest.raises(po.NotExact):
        po.potential(bad)


def test_power_of_xy_is_xy(plane):
    ctx, S = plane
    R = po.restricted_from(S, po.potential(S))
    xy = ctx.var(0) * ctx.var(1)
    assert R.pow(xy) == xy
    assert R.pow(ctx.one()).is_zero()
    with pytest.raises(po.PotentialMismatch):
        po.restricted_from(S, ctx.parse_form("x dx1 + y dx0"))


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_random_structures_are_restricted(seed):
    ctx = tc.algebra(3, 2)
    rng = np.random.default_rng(seed)
    S = po.random_symplectic(ctx, rng)
    alpha = po.potential(S) + tc.random_closed_form(ctx, 1, rng)
    kappa = po.random_kappa(ctx, rng)
    R = po.restricted_from(S, alpha, kappa)
    assert all(c.ok for c in po.verify_restricted(R, samples=30, seed=seed))
    assert po.kappa_of(R, po.field_from_form(S, alpha), 1) == kappa


def test_difference_of_sign(plane):
    ctx, S = plane
    alpha = po.potential(S)
    k1, k2 = tc.FrobDeriv(3, [1, 0]), tc.FrobDeriv(3, [2, 2])
    R1, R2 = po.restricted_from(S, alpha, k1), po.restricted_from(S, alpha, k2)
    assert po.difference_of(R1, R2) == k2 - k1


def test_ravno_on_hamiltonian_field(plane):
    ctx, S = plane
    R = po.restricted_from(S, po.potential(S))
    xi = po.hamiltonian(S, ctx.parse_poly("x^2 + y"))
    assert po.ravno_check(R, xi) == (True, True)


class Shifted(po.PowerMap):
    """A valid power map plus a perturbation."""

    def __init__(self, base, extra):
        self.symplectic = base.symplectic
        self.base, self.extra = base, extra

    def power_batch(self, A):
        return (self.base.power_batch(A) + self.extra(A)) % 3


@pytest.mark.parametrize("name, extra, broken", [
    ("non-central", lambda A: np.tile(tc.algebra(3, 2).var(0).c, (A.shape[0], 1)), "restr.lie.1"),
    ("not Frobenius", lambda A: np.pad(A[:, :1], ((0, 0), (0, 8))), "restr.poi"),
    ("non-additive", lambda A: np.pad(A[:, 1:2] ** 2, ((0, 0), (0, 8))), "restr.lie.2"),
])
def test_perturbed_power_maps_are_caught(plane, name, extra, broken):
    ctx, S = plane
    R = Shifted(po.restricted_from(S, po.potential(S)), extra)
    checks = {c.name: c for c in po.verify_restricted(R, samples=20)}
    assert not checks[broken].ok
    assert checks[broken].counterexample is not None


def test_darboux_planted():
    ctx = tc.algebra(3, 2)
    S = po.check_symplectic(ctx.parse_form("dx0^dx1 + x dx0^dx1"))
    phi = po.darboux_normalize(S)
    assert str(phi) == "x0 -> x0 - x0^2; x1 -> x1"
    assert po.pullback(phi, po.standard_form(ctx)) == S.form


@settings(max_examples=10, deadline=None)
@given(st.sampled_from([(3, 2), (5, 2)]), seeds)
def test_darboux_random(grid, seed):
    ctx = tc.algebra(*grid)
    S = po.random_symplectic(ctx, np.random.default_rng(seed))
    phi = po.darboux_normalize(S, seed=seed)
    assert po.pullback(phi, po.standard_form(ctx)) == S.form


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_pullback_is_multiplicative_and_commutes_with_d(seed):
    ctx = tc.algebra(3, 2)
    rng = np.random.default_rng(seed)
    M = np.array([[1, 1], [0, 1]])
    phi = po.Substitution([ctx.var(0) + ctx.var(1) ** 2, ctx.var(1) + ctx.var(0) * ctx.var(1)])
    for sub in (phi, po.Substitution.linear(ctx, M)):
        f, g = tc.random_poly(ctx, rng), tc.random_poly(ctx, rng)
        assert sub(f * g) == sub(f) * sub(g)
        assert po.pullback(sub, tc.d(f)) == tc.d(sub(f))
