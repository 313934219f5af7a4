"""Symplectic forms, Poisson brackets and restricted Poisson structures on A.

Conventions: ``H_f -| Omega = df`` with contraction in the first slot and
``{f, g} = Omega(H_f, H_g)``.  With ``G_ij = Omega(d_i, d_j)`` this gives
``H_f = -G^{-1} grad f`` and ``{f, g} = -H_f(g) = H_g(f)``; for
``dx ^ dy`` the bracket is ``f_x g_y - f_y g_x``.

Most work happens on coefficient arrays of shape ``(..., dim)`` so that
identities can be checked on thousands of pairs at once.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import linalg
from .checks import Check, rows_differ
from .freealg import eval_quant, universal_polynomials
from .trunccalc import (
    AlgebraCtx, Derivation, DiffForm, FrobDeriv, NotClosed, TruncPoly, algebra,
    batch_deriv, batch_mul, cartier, cartier_by_coefficients, contract, d_matrix,
    de_rham, is_closed, is_exact, random_closed_form, random_form, wedge,
)


class Degenerate(ValueError):
    pass


class PotentialMismatch(ValueError):
    pass


class NotExact(ValueError):
    pass


class NotConformal(ValueError):
    pass


class NotCentral(ArithmeticError):
    pass


class NotFrobenius(ArithmeticError):
    pass


class NormalizationFailed(RuntimeError):
    def __init__(self, message: str, residual: DiffForm | None = None):
        super().__init__(message)
        self.residual = residual


# -- matrices over A, stored as (rows, cols, dim) arrays ------------------------

def _amat_mul(ctx: AlgebraCtx, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return batch_mul(ctx, X[:, :, None, :], Y[None, :, :, :]).sum(axis=1) % ctx.p


def _amat_const(ctx: AlgebraCtx, M: np.ndarray) -> np.ndarray:
    out = np.zeros(M.shape + (ctx.dim,), dtype=np.int64)
    out[..., 0] = M % ctx.p
    return out


def _amat_inverse(ctx: AlgebraCtx, G: np.ndarray) -> np.ndarray:
    """Inverse over A of a matrix with invertible constant part.

    ``G = G0 (1 - K)`` with ``K`` nilpotent, so ``G^{-1} = sum K^j G0^{-1}``.
    """
    try:
        g0inv = linalg.mat_inverse(G[:, :, 0], ctx.p)
    except ZeroDivisionError as exc:
        raise Degenerate("constant part of the Gram matrix is singular") from exc
    G0inv = _amat_const(ctx, g0inv)
    N = G.copy()
    N[:, :, 0] = 0
    K = (-_amat_mul(ctx, G0inv, N)) % ctx.p
    term = np.broadcast_to(_amat_const(ctx, np.eye(G.shape[0], dtype=np.int64)), G.shape).copy()
    total = term.copy()
    while True:
        term = _amat_mul(ctx, K, term)
        if not term.any():
            break
        total = (total + term) % ctx.p
    return _amat_mul(ctx, total, G0inv)


def apply_field(ctx: AlgebraCtx, comps: np.ndarray, F: np.ndarray) -> np.ndarray:
    """Apply vector fields with components ``comps[..., j, :]`` to ``F[..., :]``."""
    out = 0
    for j in range(ctx.m):
        out = out + batch_mul(ctx, comps[..., j, :], batch_deriv(ctx, F, j))
    return out % ctx.p


def gradient(ctx: AlgebraCtx, F: np.ndarray) -> np.ndarray:
    return np.stack([batch_deriv(ctx, F, i) for i in range(ctx.m)], axis=-2)


@dataclass(frozen=True, eq=False)
class Symplectic:
    form: DiffForm
    gram: np.ndarray
    gram_inv: np.ndarray

    @property
    def ctx(self) -> AlgebraCtx:
        return self.form.ctx

    @property
    def gram0inv(self) -> np.ndarray:
        return self.gram_inv[:, :, 0]

    @cached_property
    def poisson_tensor(self) -> np.ndarray:
        """``[i, j] = {x_i, x_j}``, which equals ``G^{-1}[j, i]``."""
        return np.ascontiguousarray(self.gram_inv.transpose(1, 0, 2))

    def ad_comps(self, F: np.ndarray) -> np.ndarray:
        """Components of ``{f, -}`` for each row ``f`` of ``F``."""
        ctx = self.ctx
        dF = gradient(ctx, F)
        P = self.poisson_tensor
        comps = [sum(batch_mul(ctx, P[i, j], dF[..., i, :]) for i in range(ctx.m)) % ctx.p
                 for j in range(ctx.m)]
        return np.stack(comps, axis=-2)

    def bracket_batch(self, F: np.ndarray, G: np.ndarray) -> np.ndarray:
        return apply_field(self.ctx, self.ad_comps(F), G)

    def ad_matrix(self, f: TruncPoly) -> np.ndarray:
        """Matrix of ``g -> {f, g}``."""
        return self.bracket_batch(f.c, np.eye(self.ctx.dim, dtype=np.int64)).T % self.ctx.p


def check_symplectic(omega: DiffForm) -> Symplectic:
    ctx = omega.ctx
    if omega.degree != 2:
        raise ValueError("a symplectic form has degree 2")
    if ctx.m % 2:
        raise Degenerate(f"odd number of variables m={ctx.m}")
    if not is_closed(omega):
        raise NotClosed("symplectic form must be closed")
    m = ctx.m
    G = np.zeros((m, m, ctx.dim), dtype=np.int64)
    for s, (i, j) in enumerate(ctx.subsets(2)):
        G[i, j] = omega.coeffs[s]
        G[j, i] = (-omega.coeffs[s]) % ctx.p
    return Symplectic(omega, G, _amat_inverse(ctx, G))


def standard_form(ctx: AlgebraCtx) -> DiffForm:
    """``sum_i dx_{2i} ^ dx_{2i+1}``."""
    out = ctx.form(2)
    for i in range(0, ctx.m, 2):
        out = out + ctx.dx(i, i + 1)
    return out


def field_from_form(S: Symplectic, beta: DiffForm) -> Derivation:
    """The unique ``xi`` with ``xi -| Omega = beta``."""
    ctx = S.ctx
    comps = (-_amat_mul(ctx, S.gram_inv, beta.coeffs[:, None, :])[:, 0, :]) % ctx.p
    return Derivation(ctx, comps)


def hamiltonian(S: Symplectic, f: TruncPoly) -> Derivation:
    return field_from_form(S, de_rham(DiffForm.function(f)))


def bracket(S: Symplectic, f: TruncPoly, g: TruncPoly) -> TruncPoly:
    return TruncPoly(S.ctx, S.bracket_batch(f.c, g.c))


def ad_field(S: Symplectic, f: TruncPoly) -> Derivation:
    """``{f, -}`` as a derivation; equals ``-H_f``."""
    return Derivation(S.ctx, S.ad_comps(f.c))


def _exact_1forms(ctx: AlgebraCtx, B: np.ndarray) -> np.ndarray:
    """Per-row exactness of 1-forms with coefficient array ``B[..., m, dim]``.

    Closed and no ``x_i^{p-1} dx_i`` coefficient.
    """
    flat = B.reshape(B.shape[:-2] + (-1,))
    closed = ~np.any((flat @ d_matrix(ctx.p, ctx.m, 1).T) % ctx.p, axis=-1) if ctx.m > 1 \
        else np.ones(B.shape[:-2], dtype=bool)
    top = [B[..., i, (ctx.p - 1) * ctx.weights[i]] for i in range(ctx.m)]
    return closed & ~np.any(np.stack(top, axis=-1) % ctx.p, axis=-1)


def is_hamiltonian(S: Symplectic, xi: Derivation) -> bool:
    beta = contract(S.form, xi)
    return bool(_exact_1forms(S.ctx, beta.coeffs))


def poisson_center(S: Symplectic) -> list[TruncPoly]:
    ctx = S.ctx
    eye = np.eye(ctx.dim, dtype=np.int64)
    blocks = [S.bracket_batch(eye, ctx.var(i).c).T for i in range(ctx.m)]
    return [TruncPoly(ctx, v) for v in linalg.nullspace(np.vstack(blocks), ctx.p)]


def poisson_ideal_closure(S: Symplectic, f: TruncPoly) -> int:
    """Dimension of the smallest Poisson ideal containing ``f``."""
    if f.is_zero():
        raise ValueError("f must be nonzero")
    ctx = S.ctx
    ops = [ctx.var(i).mul_matrix() for i in range(ctx.m)] + [S.ad_matrix(ctx.var(i)) for i in range(ctx.m)]
    R, piv = linalg.rref(f.c.reshape(1, -1), ctx.p)
    span = R[: len(piv)]
    while True:
        grown = np.vstack([span] + [(span @ op.T) % ctx.p for op in ops])
        R, piv = linalg.rref(grown, ctx.p)
        if len(piv) == span.shape[0]:
            return len(piv)
        span = R[: len(piv)]


def hamiltonian_power_comps(S: Symplectic, F: np.ndarray) -> np.ndarray:
    """Components of ``(H_f)^p`` per row: ``(H_f)^{p-1}`` applied to ``H_f(x_i)``."""
    ctx = S.ctx
    comps = (-S.ad_comps(F)) % ctx.p
    out = comps.copy()
    for _ in range(ctx.p - 1):
        out = np.stack([apply_field(ctx, comps, out[..., i, :]) for i in range(ctx.m)], axis=-2)
    return out


def theorem_cent_check(S: Symplectic) -> tuple[bool, bool]:
    """(p-th powers of monomial Hamiltonians are Hamiltonian, top class of Omega vanishes)."""
    ctx = S.ctx
    xi_p = hamiltonian_power_comps(S, np.eye(ctx.dim, dtype=np.int64))
    # (xi -| Omega)_j = sum_i xi_i G_ij
    beta = sum(batch_mul(ctx, xi_p[:, i, None, :], S.gram[i][None, :, :]) for i in range(ctx.m)) % ctx.p
    flag1 = bool(np.all(_exact_1forms(ctx, beta)))
    flag2 = cartier(S.form).is_zero()
    return flag1, flag2


def potential(S: Symplectic) -> DiffForm:
    alpha = is_exact(S.form)
    if alpha is None:
        raise NotExact("symplectic form has a nonzero top Cartier class")
    return alpha


def conformal_check(xi: Derivation, lam: int, S: Symplectic) -> bool:
    """``xi{f,g} = {xi f, g} + {f, xi g} - lam {f,g}`` on all monomial pairs."""
    ctx = S.ctx
    eye = np.eye(ctx.dim, dtype=np.int64)
    F = np.repeat(eye, ctx.dim, axis=0)
    G = np.tile(eye, (ctx.dim, 1))
    comps = np.stack([a.c for a in xi.comps])
    fg = S.bracket_batch(F, G)
    lhs = apply_field(ctx, comps, fg)
    rhs = S.bracket_batch(apply_field(ctx, comps, F), G) + S.bracket_batch(F, apply_field(ctx, comps, G)) - lam * fg
    return not rows_differ(lhs, rhs, ctx.p).any()


def find_conformal(S: Symplectic, alpha: DiffForm | None = None) -> Derivation:
    """Weight-1 conformal field ``xi`` with ``xi -| Omega = alpha``."""
    alpha = potential(S) if alpha is None else alpha
    xi = field_from_form(S, alpha)
    if not conformal_check(xi, 1, S):
        raise NotConformal("field dual to the potential is not conformal")
    return xi


# -- restricted structures -------------------------------------------------------

class PowerMap:
    """Anything that assigns ``a^[p]`` to rows of a coefficient array."""

    symplectic: Symplectic

    def power_batch(self, A: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def pow(self, a: TruncPoly) -> TruncPoly:
        return TruncPoly(a.ctx, self.power_batch(a.c))


class RestrictedStructure(PowerMap):
    """``a^[p] = i_p({a, -}, alpha) - kappa(a)``."""

    def __init__(self, S: Symplectic, alpha: DiffForm, kappa: FrobDeriv):
        self.symplectic = S
        self.potential = alpha
        self.kappa = kappa

    def power_batch(self, A: np.ndarray) -> np.ndarray:
        S = self.symplectic
        ctx, p = S.ctx, S.ctx.p
        c = S.ad_comps(A)
        alpha = self.potential.coeffs

        def iterate(F):
            for _ in range(p - 1):
                F = apply_field(ctx, c, F)
            return F

        contracted = sum(batch_mul(ctx, c[..., k, :], alpha[k]) for k in range(ctx.m))
        out = sum(batch_mul(ctx, iterate(c[..., k, :]), alpha[k]) for k in range(ctx.m))
        out = out - iterate(contracted % p)
        out[..., 0] -= self.kappa.batch(ctx, A)
        return out % p

    @cached_property
    def table(self) -> np.ndarray:
        """Power map on the monomial basis, one row per monomial."""
        return self.power_batch(np.eye(self.symplectic.ctx.dim, dtype=np.int64))


def restricted_from(S: Symplectic, alpha: DiffForm, kappa: FrobDeriv | None = None) -> RestrictedStructure:
    if alpha.degree != 1 or de_rham(alpha) != S.form:
        raise PotentialMismatch("d(alpha) differs from the symplectic form")
    return RestrictedStructure(S, alpha, kappa or FrobDeriv.zero(S.ctx))


class PoissonTarget:
    """Batched evaluation target: elements are coefficient arrays, h acts as 0."""

    h_order = 1

    def __init__(self, S: Symplectic, shape: tuple[int, ...]):
        self.S = S
        self.shape = shape + (S.ctx.dim,)

    def zero(self):
        return np.zeros(self.shape, dtype=np.int64)

    def one(self):
        out = self.zero()
        out[..., 0] = 1
        return out

    def add(self, a, b):
        return (a + b) % self.S.ctx.p

    def scale(self, c, a):
        return (c * a) % self.S.ctx.p

    def mul(self, a, b):
        return batch_mul(self.S.ctx, a, b)

    def bracket(self, a, b):
        return self.S.bracket_batch(a, b)

    def h_power(self, a, k):
        return a if k == 0 else self.zero()


def basis_pairs(dim: int) -> tuple[np.ndarray, np.ndarray]:
    eye = np.eye(dim, dtype=np.int64)
    return np.repeat(eye, dim, axis=0), np.tile(eye, (dim, 1))


def sample_pairs(ctx: AlgebraCtx, samples: int, rng: np.random.Generator):
    return (rng.integers(0, ctx.p, (samples, ctx.dim)), rng.integers(0, ctx.p, (samples, ctx.dim)))


def _describe(ctx, A, B):
    return lambda i: {"a": str(TruncPoly(ctx, A[i])), "b": str(TruncPoly(ctx, B[i]))}


def verify_restricted(R: PowerMap, samples: int = 200, seed: int = 0) -> list[Check]:
    """Check the restricted Lie and restricted Poisson axioms for ``R``.

    Runs over all ordered monomial pairs plus ``samples`` random pairs.
    """
    S = R.symplectic
    ctx, p = S.ctx, S.ctx.p
    rng = np.random.default_rng(seed)
    Ab, Bb = basis_pairs(ctx.dim)
    As, Bs = sample_pairs(ctx, samples, rng)
    A, B = np.vstack([Ab, As]), np.vstack([Bb, Bs])
    L, P = universal_polynomials(p)
    target = PoissonTarget(S, (A.shape[0],))
    describe = _describe(ctx, A, B)

    pa, pb = R.power_batch(A), R.power_batch(B)
    lie1 = Check("restr.lie.1")
    rhs = B
    ca = S.ad_comps(A)
    for _ in range(p):
        rhs = apply_field(ctx, ca, rhs)
    lie1.record(rows_differ(S.bracket_batch(pa, B), rhs, p), describe)

    lie2 = Check("restr.lie.2")
    rhs = pa + pb + eval_quant(L, [A, B], target)
    lie2.record(rows_differ(R.power_batch((A + B) % p), rhs, p), describe)

    poi = Check("restr.poi")
    a0, b0 = A[:, :1], B[:, :1]  # a^p = a(0) in A
    rhs = a0 * pb + pa * b0 + eval_quant(P, [A, B], target)
    poi.record(rows_differ(R.power_batch(batch_mul(ctx, A, B)), rhs, p), describe)
    return [lie1, lie2, poi]


def _sample_elements(ctx: AlgebraCtx, samples: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.vstack([np.eye(ctx.dim, dtype=np.int64), rng.integers(0, ctx.p, (samples, ctx.dim))])


def _as_frobenius(ctx: AlgebraCtx, values: np.ndarray, A: np.ndarray) -> FrobDeriv:
    """Package central values on ``A`` rows as a FrobDeriv, checking the extension."""
    if np.any(values[:, 1:] % ctx.p):
        raise NotCentral("values leave the constants")
    k = FrobDeriv(ctx.p, [values[int(w), 0] for w in ctx.weights])
    if np.any((k.batch(ctx, A) - values[:, 0]) % ctx.p):
        raise NotFrobenius("values are not those of a Frobenius-derivation")
    return k


def kappa_of(R: RestrictedStructure, xi: Derivation, lam: int, samples: int = 50, seed: int = 0) -> FrobDeriv:
    """``kappa(a) = (xi - lam)(a^[p]) - (ad a)^{p-1}(xi a)``."""
    S = R.symplectic
    ctx, p = S.ctx, S.ctx.p
    if not conformal_check(xi, lam, S):
        raise NotConformal(f"field is not conformal of weight {lam}")
    A = _sample_elements(ctx, samples, seed)
    comps = np.stack([a.c for a in xi.comps])
    pa = R.power_batch(A)
    ca = S.ad_comps(A)
    tail = apply_field(ctx, comps, A)
    for _ in range(p - 1):
        tail = apply_field(ctx, ca, tail)
    values = (apply_field(ctx, comps, pa) - lam * pa - tail) % p
    return _as_frobenius(ctx, values, A)


def ravno_check(R: PowerMap, xi: Derivation, samples: int = 50, seed: int = 0) -> tuple[bool, bool]:
    """(xi is Hamiltonian, xi(a^[p]) = (ad a)^{p-1}(xi a) for all tested a)."""
    S = R.symplectic
    ctx, p = S.ctx, S.ctx.p
    if not conformal_check(xi, 0, S):
        raise NotConformal("field is not a Poisson derivation")
    A = _sample_elements(ctx, samples, seed)
    comps = np.stack([a.c for a in xi.comps])
    ca = S.ad_comps(A)
    tail = apply_field(ctx, comps, A)
    for _ in range(p - 1):
        tail = apply_field(ctx, ca, tail)
    lhs = apply_field(ctx, comps, R.power_batch(A))
    return is_hamiltonian(S, xi), not rows_differ(lhs, tail, p).any()


def difference_of(R1: PowerMap, R2: PowerMap, samples: int = 50, seed: int = 0) -> FrobDeriv:
    """``a -> R1(a) - R2(a)``, checked to be a central Frobenius-derivation."""
    if R1.symplectic.form != R2.symplectic.form:
        raise ValueError("structures live on different symplectic forms")
    ctx = R1.symplectic.ctx
    A = _sample_elements(ctx, samples, seed)
    return _as_frobenius(ctx, (R1.power_batch(A) - R2.power_batch(A)) % ctx.p, A)


# -- substitutions and Darboux normalization ------------------------------------

class Substitution:
    """Algebra endomorphism ``x_i -> images[i]`` with images in the maximal ideal."""

    def __init__(self, images):
        images = tuple(images)
        ctx = images[0].ctx
        if len(images) != ctx.m:
            raise ValueError(f"need {ctx.m} images")
        if any(f.const_term() for f in images):
            raise ValueError("images must lie in the maximal ideal")
        self.ctx = ctx
        self.images = images
        if linalg.rank(self.jacobian0(), ctx.p) < ctx.m:
            raise ValueError("substitution is not invertible")

    @classmethod
    def identity(cls, ctx: AlgebraCtx) -> "Substitution":
        return cls([ctx.var(i) for i in range(ctx.m)])

    @classmethod
    def linear(cls, ctx: AlgebraCtx, M: np.ndarray) -> "Substitution":
        """``x_i -> sum_j M[i, j] x_j``."""
        return cls([sum((int(M[i, j]) * ctx.var(j) for j in range(ctx.m)), ctx.zero()) for i in range(ctx.m)])

    def jacobian0(self) -> np.ndarray:
        return np.array([[f.linear_coeff(j) for j in range(self.ctx.m)] for f in self.images], dtype=np.int64)

    @cached_property
    def matrix(self) -> np.ndarray:
        """Columns are the images of the monomial basis."""
        ctx = self.ctx
        powers = []
        for f in self.images:
            row = [ctx.one()]
            for _ in range(ctx.p - 1):
                row.append(row[-1] * f)
            powers.append(row)
        cols = []
        for j in range(ctx.dim):
            val = ctx.one()
            for i, a in enumerate(ctx.exps[j]):
                if a:
                    val = val * powers[i][a]
            cols.append(val.c)
        return np.array(cols, dtype=np.int64).T

    def __call__(self, f: TruncPoly) -> TruncPoly:
        return TruncPoly(self.ctx, self.matrix @ f.c)

    def __eq__(self, other):
        return isinstance(other, Substitution) and self.images == other.images

    def __hash__(self):
        return hash(self.images)

    def __str__(self):
        return "; ".join(f"x{i} -> {f}" for i, f in enumerate(self.images))

    def __repr__(self):
        return f"Substitution({self})"


def pullback(phi: Substitution, t):
    """``phi^*`` on functions and forms (chain rule on differentials)."""
    if isinstance(t, TruncPoly):
        return phi(t)
    ctx = phi.ctx
    if t.degree == 0:
        return DiffForm.function(phi(TruncPoly(ctx, t.coeffs[0])))
    dphi = [de_rham(DiffForm.function(f)) for f in phi.images]
    out = ctx.form(t.degree)
    for s, S in enumerate(ctx.subsets(t.degree)):
        coeff = TruncPoly(ctx, t.coeffs[s])
        if coeff.is_zero():
            continue
        w = dphi[S[0]]
        for i in S[1:]:
            w = wedge(w, dphi[i])
        out = out + w.scale_poly(phi(coeff))
    return out


def _symplectic_basis(G0: np.ndarray, p: int) -> np.ndarray:
    """Columns ``e_1, f_1, e_2, f_2, ...`` with ``G0(e_i, f_i) = 1``, others 0."""
    m = G0.shape[0]
    remaining = [np.eye(m, dtype=np.int64)[j] for j in range(m)]
    out = []

    def form(u, v):
        return int(u @ G0 @ v) % p

    while remaining:
        e = next((v for v in remaining if any(form(v, w) for w in remaining)), None)
        if e is None:
            raise Degenerate("constant part is degenerate")
        f = next(w for w in remaining if form(e, w))
        f = (f * linalg.inv(form(e, f), p)) % p
        out += [e, f]
        projected = []
        for v in remaining:
            # remove components along e and f
            v = (v - form(v, f) * e + form(v, e) * f) % p
            if v.any():
                projected.append(v)
        basis = np.array(projected, dtype=np.int64) if projected else np.zeros((0, m), dtype=np.int64)
        idx = linalg.independent_rows(basis, p) if len(projected) else []
        remaining = [projected[i] for i in idx]
    return np.array(out, dtype=np.int64).T


def _linear_darboux(S: Symplectic) -> np.ndarray:
    """``L`` with ``L^T J L = G0`` for the standard Gram matrix ``J``."""
    p = S.ctx.p
    B = _symplectic_basis(S.gram[:, :, 0], p)
    return linalg.mat_inverse(B, p)


def _correction_map(ctx: AlgebraCtx, J: np.ndarray, L: np.ndarray, degrees) -> tuple[np.ndarray, list]:
    """Columns: the 2-forms ``sum_j J_ij d(mu) ^ dL_j`` for ``delta_i = mu``."""
    dL = [sum((int(L[j, k]) * ctx.dx(k) for k in range(ctx.m)), ctx.form(1)) for j in range(ctx.m)]
    monos = [mu for mu in range(ctx.dim) if ctx.total_degree[mu] in degrees]
    cols, labels = [], []
    for i in range(ctx.m):
        for mu in monos:
            dmu = de_rham(DiffForm.function(ctx.basis(mu)))
            w = ctx.form(2)
            for j in range(ctx.m):
                if J[i, j]:
                    w = w + int(J[i, j]) * wedge(dmu, dL[j])
            cols.append(w.flat())
            labels.append((i, mu))
    return np.array(cols, dtype=np.int64).T, labels


def _standard_gram(m: int) -> np.ndarray:
    J = np.zeros((m, m), dtype=np.int64)
    for i in range(0, m, 2):
        J[i, i + 1], J[i + 1, i] = 1, -1
    return J


def darboux_normalize(S: Symplectic, seed: int = 0, restarts: int = 3) -> Substitution:
    """``phi`` with ``phi^*(sum dx_{2i} ^ dx_{2i+1}) = Omega`` exactly."""
    ctx, p = S.ctx, S.ctx.p
    if not cartier(S.form).is_zero():
        raise NormalizationFailed("top Cartier class of the form is nonzero")
    std = standard_form(ctx)
    J = _standard_gram(ctx.m)
    rng = np.random.default_rng(seed)
    L = _linear_darboux(S)
    residual = None
    for attempt in range(restarts + 1):
        if attempt:
            # precompose with a random linear symplectic change and retry
            L = (_random_symplectic_matrix(ctx.m, p, rng) @ L) % p
        phi = Substitution.linear(ctx, L)
        for _ in range(ctx.m * (p - 1) + 2):
            residual = S.form - pullback(phi, std)
            if residual.is_zero():
                return phi
            k = min(ctx.total_degree[np.flatnonzero(residual.coeffs.any(axis=0))])
            target = residual.homogeneous(int(k))
            M, labels = _correction_map(ctx, J, L, {int(k) + 1})
            try:
                x, _ = linalg.solve(M, target.flat(), p)
            except linalg.Inconsistent:
                widen = set(range(int(k) + 1, ctx.m * (p - 1) + 1))
                M, labels = _correction_map(ctx, J, L, widen)
                try:
                    x, _ = linalg.solve(M, residual.flat(), p)
                except linalg.Inconsistent:
                    break
            images = [f.c.copy() for f in phi.images]
            for val, (i, mu) in zip(x, labels):
                images[i][mu] += val
            phi = Substitution([TruncPoly(ctx, v) for v in images])
    raise NormalizationFailed("no normalizing substitution found", residual)


def _random_symplectic_matrix(m: int, p: int, rng: np.random.Generator) -> np.ndarray:
    """A random ``T`` with ``T^T J T = J``, from transvections."""
    J = _standard_gram(m)
    T = np.eye(m, dtype=np.int64)
    for _ in range(2 * m):
        v = rng.integers(0, p, m)
        c = int(rng.integers(1, p))
        # x -> x + c * J(v, x) v preserves J
        Tv = (np.eye(m, dtype=np.int64) + c * np.outer(v, v @ J)) % p
        T = (Tv @ T) % p
    return T


# -- sampling ------------------------------------------------------------------

def random_symplectic(ctx: AlgebraCtx, rng: np.random.Generator, top_class: int | None = 0) -> Symplectic:
    """``d eta + sum_S c_S rep_S`` with nondegenerate constant part.

    ``top_class`` fixes every class coefficient (0 makes the form exact);
    ``None`` draws them at random.
    """
    from .trunccalc import representative

    while True:
        w = de_rham(random_form(ctx, 1, rng))
        for S_ in ctx.subsets(2):
            c = int(rng.integers(0, ctx.p)) if top_class is None else top_class
            w = w + c * representative(ctx, S_)
        try:
            return check_symplectic(w)
        except Degenerate:
            continue


def random_potential_shift(ctx: AlgebraCtx, rng: np.random.Generator) -> DiffForm:
    return de_rham(DiffForm.function(TruncPoly(ctx, rng.integers(0, ctx.p, ctx.dim))))


def random_kappa(ctx: AlgebraCtx, rng: np.random.Generator) -> FrobDeriv:
    return FrobDeriv(ctx.p, rng.integers(0, ctx.p, ctx.m))


def random_closed_1form(ctx: AlgebraCtx, rng: np.random.Generator) -> DiffForm:
    return random_closed_form(ctx, 1, rng)
