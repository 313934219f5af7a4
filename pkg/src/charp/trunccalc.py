"""Calculus on the truncated polynomial algebra A = F_p[x_0..x_{m-1}]/(x_i^p).

Elements are dense coefficient vectors over the monomial basis ``x^a``,
``a in [0, p)^m``, in lex order with ``x_0`` most significant.  Forms of
degree k carry one coefficient vector per k-subset of variables (subsets
in lex order).  Contraction uses the first slot:
``d/dx_i -| (dx_i ^ dx_j) = dx_j``.
"""
from __future__ import annotations

import itertools
import json
from functools import cached_property, lru_cache
from math import comb

import numpy as np

from . import linalg
from .text import ParseError, join_terms, parse_terms


class NotClosed(ValueError):
    pass


class NotDerivation(ArithmeticError):
    pass


MAX_VARS = 4
_ALIASES = {"x": 0, "y": 1, "z": 2, "w": 3}


class AlgebraCtx:
    """Shared, immutable tables for one ``(p, m)``."""

    def __init__(self, p: int, m: int):
        self.p = linalg.check_prime(p)
        if not 1 <= m <= MAX_VARS:
            raise ValueError(f"1 <= m <= {MAX_VARS} required, got {m}")
        self.m = m
        self.dim = p ** m
        self.exps = np.array(list(itertools.product(range(p), repeat=m)), dtype=np.int64).reshape(self.dim, m)
        self.weights = p ** np.arange(m - 1, -1, -1, dtype=np.int64)
        self.total_degree = self.exps.sum(axis=1)

    def __repr__(self):
        return f"AlgebraCtx(p={self.p}, m={self.m})"

    def __reduce__(self):
        return (algebra, (self.p, self.m))

    def index(self, exps) -> int:
        return int(np.dot(np.asarray(exps, dtype=np.int64), self.weights))

    @cached_property
    def _mul_tables(self):
        # monomial pairs whose product survives, and the 0/1 scatter onto targets
        tot = self.exps[:, None, :] + self.exps[None, :, :]
        ok = np.all(tot < self.p, axis=2)
        rows, cols = np.nonzero(ok)
        target = tot[rows, cols] @ self.weights
        scatter = np.zeros((rows.size, self.dim), dtype=np.float64)
        scatter[np.arange(rows.size), target] = 1
        return rows, cols, target, scatter

    @cached_property
    def deriv_matrices(self) -> tuple[np.ndarray, ...]:
        mats = []
        for i in range(self.m):
            D = np.zeros((self.dim, self.dim), dtype=np.int64)
            for j in range(self.dim):
                a = self.exps[j, i]
                if a:
                    D[j - self.weights[i], j] = a % self.p
            mats.append(D)
        return tuple(mats)

    def subsets(self, k: int) -> list[tuple[int, ...]]:
        return _subsets(self.m, k)

    def subset_index(self, k: int) -> dict[tuple[int, ...], int]:
        return {s: i for i, s in enumerate(self.subsets(k))}

    # -- constructors -----------------------------------------------------
    def poly(self, coeffs) -> "TruncPoly":
        return TruncPoly(self, coeffs)

    def zero(self) -> "TruncPoly":
        return TruncPoly(self, np.zeros(self.dim, dtype=np.int64))

    def const(self, c: int) -> "TruncPoly":
        v = np.zeros(self.dim, dtype=np.int64)
        v[0] = c
        return TruncPoly(self, v)

    def one(self) -> "TruncPoly":
        return self.const(1)

    def monomial(self, exps, c: int = 1) -> "TruncPoly":
        v = np.zeros(self.dim, dtype=np.int64)
        if all(0 <= a < self.p for a in exps):
            v[self.index(exps)] = c
        return TruncPoly(self, v)

    def var(self, i: int) -> "TruncPoly":
        e = [0] * self.m
        e[i] = 1
        return self.monomial(e)

    def basis(self, j: int) -> "TruncPoly":
        v = np.zeros(self.dim, dtype=np.int64)
        v[j] = 1
        return TruncPoly(self, v)

    def form(self, k: int, coeffs=None) -> "DiffForm":
        n = comb(self.m, k)
        if coeffs is None:
            coeffs = np.zeros((n, self.dim), dtype=np.int64)
        return DiffForm(self, k, coeffs)

    def dx(self, *idx: int) -> "DiffForm":
        """The constant form ``dx_{i1} ^ ... ^ dx_{ik}`` (indices in any order)."""
        k = len(idx)
        if len(set(idx)) < k:
            return self.form(k)
        order = sorted(idx)
        sign = _perm_sign(idx)
        f = self.form(k)
        c = f.coeffs.copy()
        c[self.subset_index(k)[tuple(order)], 0] = sign % self.p
        return DiffForm(self, k, c)

    def derivation(self, comps) -> "Derivation":
        return Derivation(self, comps)

    def partial(self, i: int) -> "Derivation":
        comps = [self.zero()] * self.m
        comps[i] = self.one()
        return Derivation(self, comps)

    # -- text --------------------------------------------------------------
    def _var_index(self, name: str) -> int:
        if name in _ALIASES and len(name) == 1:
            i = _ALIASES[name]
        elif name.startswith("x") and name[1:].isdigit():
            i = int(name[1:])
        else:
            raise ParseError(f"unknown variable {name!r}")
        if i >= self.m:
            raise ParseError(f"variable {name!r} out of range for m={self.m}")
        return i

    def parse_poly(self, text: str) -> "TruncPoly":
        f = self.parse_form(text)
        if f.degree != 0:
            raise ParseError(f"{text!r} is a form, not a function")
        return f.coeff(())

    def parse_form(self, text: str) -> "DiffForm":
        terms = parse_terms(text)
        degrees = {len(d) for _, _, d in terms}
        if len(degrees) != 1:
            raise ParseError(f"mixed form degrees in {text!r}")
        k = degrees.pop()
        out = self.form(k)
        for c, factors, diffs in terms:
            exps = [0] * self.m
            for name, e in factors:
                exps[self._var_index(name)] += e
            idx = [self._var_index(n) for n in diffs]
            out = out + self.dx(*idx).scale_poly(self.monomial(exps, c % self.p))
        return out

    def format_monomial(self, j: int) -> str:
        parts = []
        for i, a in enumerate(self.exps[j]):
            if a == 1:
                parts.append(f"x{i}")
            elif a > 1:
                parts.append(f"x{i}^{a}")
        return "*".join(parts)


@lru_cache(maxsize=None)
def algebra(p: int, m: int) -> AlgebraCtx:
    return AlgebraCtx(p, m)


@lru_cache(maxsize=None)
def _subsets(m: int, k: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(m), k))


def _perm_sign(seq) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def _reduce(vec, p):
    return np.asarray(vec, dtype=np.int64) % p


class TruncPoly:
    __slots__ = ("ctx", "c")

    def __init__(self, ctx: AlgebraCtx, coeffs):
        c = _reduce(coeffs, ctx.p)
        if c.shape != (ctx.dim,):
            raise ValueError(f"expected {ctx.dim} coefficients, got shape {c.shape}")
        c.flags.writeable = False
        self.ctx = ctx
        self.c = c

    @property
    def p(self):
        return self.ctx.p

    def const_term(self) -> int:
        return int(self.c[0])

    def linear_coeff(self, i: int) -> int:
        return int(self.c[self.ctx.weights[i]])

    def is_zero(self) -> bool:
        return not self.c.any()

    def is_const(self) -> bool:
        return not self.c[1:].any()

    def order(self) -> int:
        """Lowest total degree present (``dim`` for zero)."""
        nz = np.flatnonzero(self.c)
        return int(self.ctx.total_degree[nz].min()) if nz.size else self.ctx.dim

    def homogeneous(self, deg: int) -> "TruncPoly":
        return TruncPoly(self.ctx, np.where(self.ctx.total_degree == deg, self.c, 0))

    def deriv(self, i: int) -> "TruncPoly":
        return TruncPoly(self.ctx, self.ctx.deriv_matrices[i] @ self.c)

    def mul_matrix(self) -> np.ndarray:
        """Matrix of ``g -> self * g``."""
        ctx = self.ctx
        rows, cols, target, _ = ctx._mul_tables
        M = np.zeros((ctx.dim, ctx.dim), dtype=np.int64)
        np.add.at(M, (target, cols), self.c[rows])
        return M % ctx.p

    def __add__(self, other):
        if isinstance(other, (int, np.integer)):
            other = self.ctx.const(other)
        return TruncPoly(self.ctx, self.c + other.c)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, np.integer)):
            other = self.ctx.const(other)
        return TruncPoly(self.ctx, self.c - other.c)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return TruncPoly(self.ctx, -self.c)

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return TruncPoly(self.ctx, self.c * int(other))
        if isinstance(other, TruncPoly):
            return mul(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, np.integer)):
            return TruncPoly(self.ctx, self.c * int(other))
        return NotImplemented

    def __pow__(self, e: int):
        return power(self, e)

    def __eq__(self, other):
        if isinstance(other, (int, np.integer)):
            other = self.ctx.const(other)
        if not isinstance(other, TruncPoly):
            return NotImplemented
        return self.ctx is other.ctx and np.array_equal(self.c, other.c)

    def __hash__(self):
        return hash((self.ctx.p, self.ctx.m, self.c.tobytes()))

    def __str__(self):
        pieces = [(int(self.c[j]), self.ctx.format_monomial(j)) for j in np.flatnonzero(self.c)]
        return join_terms(pieces, self.p)

    def __repr__(self):
        return f"TruncPoly({self})"


def mul(a: TruncPoly, b: TruncPoly) -> TruncPoly:
    """Product in A; monomials with an exponent >= p are dropped."""
    return TruncPoly(a.ctx, batch_mul(a.ctx, a.c, b.c))


def batch_mul(ctx: AlgebraCtx, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise products of coefficient arrays of shape ``(..., dim)``."""
    rows, cols, _, scatter = ctx._mul_tables
    # float matmul is exact here (entries stay far below 2^53) and uses BLAS
    prods = (a[..., rows] * b[..., cols]).astype(np.float64)
    return np.rint(prods @ scatter).astype(np.int64) % ctx.p


def batch_deriv(ctx: AlgebraCtx, a: np.ndarray, i: int) -> np.ndarray:
    return (a @ ctx.deriv_matrices[i].T) % ctx.p


def power(a: TruncPoly, e: int) -> TruncPoly:
    if e < 0:
        raise ValueError("negative exponent")
    result = a.ctx.one()
    base = a
    while e:
        if e & 1:
            result = result * base
        base = base * base
        e >>= 1
    return result


def frobenius(a: TruncPoly) -> int:
    """``a^p``, which is the constant ``a(0)^p = a(0)``."""
    return a.const_term()


def inverse(a: TruncPoly) -> TruncPoly:
    """Inverse of a unit of A via the nilpotent geometric series."""
    c0 = a.const_term()
    if c0 == 0:
        raise ZeroDivisionError("non-unit in the local algebra")
    ctx = a.ctx
    u = linalg.inv(c0, ctx.p)
    n = ctx.one() - a * u  # nilpotent
    term, total = ctx.one(), ctx.one()
    while not term.is_zero():
        term = term * n
        total = total + term
    return total * u


class Derivation:
    """Vector field ``sum_i comps[i] d/dx_i``."""

    __slots__ = ("ctx", "comps")

    def __init__(self, ctx: AlgebraCtx, comps):
        comps = tuple(comps)
        if len(comps) != ctx.m:
            raise ValueError(f"need {ctx.m} components")
        self.ctx = ctx
        self.comps = tuple(c if isinstance(c, TruncPoly) else TruncPoly(ctx, c) for c in comps)

    def __call__(self, f: TruncPoly) -> TruncPoly:
        out = self.ctx.zero()
        for i, a in enumerate(self.comps):
            if not a.is_zero():
                out = out + a * f.deriv(i)
        return out

    def matrix(self) -> np.ndarray:
        ctx = self.ctx
        M = np.zeros((ctx.dim, ctx.dim), dtype=np.int64)
        for i, a in enumerate(self.comps):
            if not a.is_zero():
                M = M + a.mul_matrix() @ ctx.deriv_matrices[i]
        return M % ctx.p

    @classmethod
    def from_matrix(cls, ctx: AlgebraCtx, M: np.ndarray, check: bool = True) -> "Derivation":
        M = np.asarray(M, dtype=np.int64) % ctx.p
        comps = [TruncPoly(ctx, M[:, ctx.weights[i]]) for i in range(ctx.m)]
        xi = cls(ctx, comps)
        if check and not np.array_equal(xi.matrix(), M):
            raise NotDerivation("linear map fails the Leibniz rule")
        return xi

    def is_zero(self) -> bool:
        return all(a.is_zero() for a in self.comps)

    def values_at_zero(self) -> np.ndarray:
        return np.array([a.const_term() for a in self.comps], dtype=np.int64)

    def __add__(self, other):
        return Derivation(self.ctx, [a + b for a, b in zip(self.comps, other.comps)])

    def __sub__(self, other):
        return Derivation(self.ctx, [a - b for a, b in zip(self.comps, other.comps)])

    def __neg__(self):
        return Derivation(self.ctx, [-a for a in self.comps])

    def __rmul__(self, c):
        if isinstance(c, (int, np.integer, TruncPoly)):
            return Derivation(self.ctx, [a * c if isinstance(c, TruncPoly) else c * a for a in self.comps])
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, Derivation):
            return NotImplemented
        return all(a == b for a, b in zip(self.comps, other.comps))

    def __hash__(self):
        return hash(tuple(self.comps))

    def __str__(self):
        parts = []
        for i, a in enumerate(self.comps):
            if not a.is_zero():
                parts.append(f"({a})*d/dx{i}")
        return " + ".join(parts) or "0"

    def __repr__(self):
        return f"Derivation({self})"


def lie_bracket(xi: Derivation, eta: Derivation) -> Derivation:
    """Commutator ``[xi, eta] = xi eta - eta xi``."""
    return Derivation(xi.ctx, [xi(b) - eta(a) for a, b in zip(xi.comps, eta.comps)])


def deriv_p_power(xi: Derivation) -> Derivation:
    """``xi^p`` as an operator, returned as a derivation (Leibniz is checked)."""
    ctx = xi.ctx
    M = xi.matrix()
    P = np.eye(ctx.dim, dtype=np.int64)
    for _ in range(ctx.p):
        P = (M @ P) % ctx.p
    return Derivation.from_matrix(ctx, P)


class DiffForm:
    __slots__ = ("ctx", "degree", "coeffs")

    def __init__(self, ctx: AlgebraCtx, degree: int, coeffs):
        if not 0 <= degree <= ctx.m:
            raise ValueError(f"form degree {degree} out of range for m={ctx.m}")
        c = _reduce(coeffs, ctx.p).reshape(comb(ctx.m, degree), ctx.dim)
        c.flags.writeable = False
        self.ctx = ctx
        self.degree = degree
        self.coeffs = c

    @classmethod
    def function(cls, f: TruncPoly) -> "DiffForm":
        return cls(f.ctx, 0, f.c.reshape(1, -1))

    def coeff(self, subset) -> TruncPoly:
        return TruncPoly(self.ctx, self.coeffs[self.ctx.subset_index(self.degree)[tuple(subset)]])

    def flat(self) -> np.ndarray:
        return self.coeffs.ravel()

    def is_zero(self) -> bool:
        return not self.coeffs.any()

    def const_part(self) -> "ConstForm":
        return ConstForm(self.ctx.p, self.ctx.m, self.degree, self.coeffs[:, 0])

    def homogeneous(self, deg: int) -> "DiffForm":
        mask = self.ctx.total_degree == deg
        return DiffForm(self.ctx, self.degree, np.where(mask[None, :], self.coeffs, 0))

    def scale_poly(self, f: TruncPoly) -> "DiffForm":
        rows = [(f * TruncPoly(self.ctx, r)).c for r in self.coeffs]
        return DiffForm(self.ctx, self.degree, np.array(rows).reshape(self.coeffs.shape))

    def __add__(self, other):
        _same_degree(self, other)
        return DiffForm(self.ctx, self.degree, self.coeffs + other.coeffs)

    def __sub__(self, other):
        _same_degree(self, other)
        return DiffForm(self.ctx, self.degree, self.coeffs - other.coeffs)

    def __neg__(self):
        return DiffForm(self.ctx, self.degree, -self.coeffs)

    def __rmul__(self, c):
        if isinstance(c, (int, np.integer)):
            return DiffForm(self.ctx, self.degree, self.coeffs * int(c))
        if isinstance(c, TruncPoly):
            return self.scale_poly(c)
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, DiffForm):
            return NotImplemented
        return self.degree == other.degree and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash((self.degree, self.coeffs.tobytes()))

    def __str__(self):
        ctx = self.ctx
        pieces = []
        for s, subset in enumerate(ctx.subsets(self.degree)):
            dpart = "^".join(f"dx{i}" for i in subset)
            for j in np.flatnonzero(self.coeffs[s]):
                mono = ctx.format_monomial(j)
                body = "*".join(x for x in (mono, dpart) if x)
                pieces.append((int(self.coeffs[s, j]), body))
        return join_terms(pieces, ctx.p)

    def __repr__(self):
        return f"DiffForm[{self.degree}]({self})"

    def to_json(self) -> str:
        return json.dumps({"p": self.ctx.p, "m": self.ctx.m, "degree": self.degree,
                           "coeffs": self.coeffs.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "DiffForm":
        d = json.loads(text)
        return cls(algebra(d["p"], d["m"]), d["degree"], np.array(d["coeffs"], dtype=np.int64))


def _same_degree(a, b):
    if a.degree != b.degree:
        raise ValueError(f"form degrees differ: {a.degree} vs {b.degree}")


@lru_cache(maxsize=None)
def d_matrix(p: int, m: int, k: int) -> np.ndarray:
    """Matrix of ``d: Omega^k -> Omega^{k+1}`` on flattened coefficients."""
    ctx = algebra(p, m)
    src, dst = ctx.subsets(k), ctx.subset_index(k + 1)
    D = np.zeros((len(dst) * ctx.dim, len(src) * ctx.dim), dtype=np.int64)
    for s, S in enumerate(src):
        for j in range(m):
            if j in S:
                continue
            T = tuple(sorted(S + (j,)))
            sign = (-1) ** sum(1 for a in S if a < j)
            t = dst[T]
            D[t * ctx.dim:(t + 1) * ctx.dim, s * ctx.dim:(s + 1) * ctx.dim] += sign * ctx.deriv_matrices[j]
    D %= p
    D.flags.writeable = False
    return D


def de_rham(w: DiffForm) -> DiffForm:
    ctx = w.ctx
    if w.degree >= ctx.m:
        raise ValueError("d of a top-degree form leaves the complex")
    D = d_matrix(ctx.p, ctx.m, w.degree)
    return DiffForm(ctx, w.degree + 1, D @ w.flat())


def is_closed(w: DiffForm) -> bool:
    return w.degree >= w.ctx.m or de_rham(w).is_zero()


def d(f) -> DiffForm:
    if isinstance(f, TruncPoly):
        f = DiffForm.function(f)
    return de_rham(f)


def wedge(a: DiffForm, b: DiffForm) -> DiffForm:
    ctx = a.ctx
    k = a.degree + b.degree
    if k > ctx.m:
        raise ValueError("wedge degree exceeds m")
    idx = ctx.subset_index(k)
    rows = np.zeros((len(idx), ctx.dim), dtype=np.int64)
    for s, S in enumerate(ctx.subsets(a.degree)):
        fa = TruncPoly(ctx, a.coeffs[s])
        if fa.is_zero():
            continue
        for t, T in enumerate(ctx.subsets(b.degree)):
            if set(S) & set(T):
                continue
            fb = TruncPoly(ctx, b.coeffs[t])
            if fb.is_zero():
                continue
            sign = _perm_sign(S + T)
            rows[idx[tuple(sorted(S + T))]] += sign * (fa * fb).c
    return DiffForm(ctx, k, rows)


def contract(w: DiffForm, xi: Derivation) -> DiffForm:
    """``xi -| w`` in the first slot."""
    ctx = w.ctx
    if w.degree == 0:
        raise ValueError("cannot contract a function")
    idx = ctx.subset_index(w.degree - 1)
    rows = np.zeros((len(idx), ctx.dim), dtype=np.int64)
    for s, S in enumerate(ctx.subsets(w.degree)):
        f = TruncPoly(ctx, w.coeffs[s])
        if f.is_zero():
            continue
        for r, i in enumerate(S):
            a = xi.comps[i]
            if a.is_zero():
                continue
            rest = S[:r] + S[r + 1:]
            rows[idx[rest]] += (-1) ** r * (a * f).c
    return DiffForm(ctx, w.degree - 1, rows)


def lie_der(xi: Derivation, w: DiffForm) -> DiffForm:
    """Lie derivative via the Cartan formula ``d(xi -| w) + xi -| dw``."""
    ctx = w.ctx
    if w.degree == 0:
        return DiffForm.function(xi(TruncPoly(ctx, w.coeffs[0])))
    out = de_rham(contract(w, xi))
    if w.degree < ctx.m:
        out = out + contract(de_rham(w), xi)
    return out


class ConstForm:
    """Constant-coefficient form, i.e. an element of Lambda^k of the dual space."""

    __slots__ = ("p", "m", "degree", "coeffs")

    def __init__(self, p: int, m: int, degree: int, coeffs):
        self.p, self.m, self.degree = p, m, degree
        c = _reduce(coeffs, p).reshape(comb(m, degree))
        c.flags.writeable = False
        self.coeffs = c

    def is_zero(self) -> bool:
        return not self.coeffs.any()

    def contract(self, values) -> "ConstForm":
        """Contract against the constant vector field with the given components."""
        if self.degree == 0:
            raise ValueError("cannot contract a scalar")
        src = _subsets(self.m, self.degree)
        dst = {s: i for i, s in enumerate(_subsets(self.m, self.degree - 1))}
        out = np.zeros(len(dst), dtype=np.int64)
        for s, S in enumerate(src):
            for r, i in enumerate(S):
                out[dst[S[:r] + S[r + 1:]]] += (-1) ** r * self.coeffs[s] * int(values[i])
        return ConstForm(self.p, self.m, self.degree - 1, out)

    def to_form(self, ctx: AlgebraCtx) -> DiffForm:
        rows = np.zeros((len(self.coeffs), ctx.dim), dtype=np.int64)
        rows[:, 0] = self.coeffs
        return DiffForm(ctx, self.degree, rows)

    def __eq__(self, other):
        if not isinstance(other, ConstForm):
            return NotImplemented
        return self.degree == other.degree and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash((self.degree, self.coeffs.tobytes()))

    def __str__(self):
        pieces = []
        for s, S in enumerate(_subsets(self.m, self.degree)):
            if self.coeffs[s]:
                pieces.append((int(self.coeffs[s]), "^".join(f"dx{i}" for i in S)))
        return join_terms(pieces, self.p)

    def __repr__(self):
        return f"ConstForm[{self.degree}]({self})"


class FrobDeriv:
    """Frobenius-derivation of A into the constants, stored by its values on coordinates.

    It kills constants and every product of two elements of the maximal
    ideal, so ``kappa(a)`` only sees the linear part of ``a``.
    """

    __slots__ = ("p", "values")

    def __init__(self, p: int, values):
        self.p = p
        self.values = tuple(int(v) % p for v in values)

    @classmethod
    def zero(cls, ctx: AlgebraCtx) -> "FrobDeriv":
        return cls(ctx.p, [0] * ctx.m)

    def __call__(self, a: TruncPoly) -> int:
        return int(self.batch(a.ctx, a.c))

    def batch(self, ctx: AlgebraCtx, arr: np.ndarray) -> np.ndarray:
        """Values on rows of a coefficient array, as scalars."""
        lin = arr[..., ctx.weights]
        return (lin @ np.array(self.values, dtype=np.int64)) % self.p

    def __sub__(self, other):
        return FrobDeriv(self.p, [a - b for a, b in zip(self.values, other.values)])

    def __add__(self, other):
        return FrobDeriv(self.p, [a + b for a, b in zip(self.values, other.values)])

    def __eq__(self, other):
        if not isinstance(other, FrobDeriv):
            return NotImplemented
        return self.p == other.p and self.values == other.values

    def __hash__(self):
        return hash((self.p, self.values))

    def __repr__(self):
        return f"FrobDeriv{self.values}"


# -- cohomology ---------------------------------------------------------------

def representative(ctx: AlgebraCtx, subset) -> DiffForm:
    """``prod_{i in S} x_i^{p-1} dx_i``, the canonical class representative."""
    exps = [0] * ctx.m
    for i in subset:
        exps[i] = ctx.p - 1
    return ctx.dx(*subset).scale_poly(ctx.monomial(exps))


@lru_cache(maxsize=None)
def _cartier_system(p: int, m: int, k: int) -> np.ndarray:
    ctx = algebra(p, m)
    reps = np.array([representative(ctx, S).flat() for S in ctx.subsets(k)], dtype=np.int64).T
    if k == 0:
        return reps
    return np.concatenate([d_matrix(p, m, k - 1), reps], axis=1)


def cartier(w: DiffForm) -> ConstForm:
    """Cohomology class of a closed form in the representative basis.

    Solves ``w = d eta + sum_S lambda_S rep_S`` and returns the lambdas.
    """
    ctx = w.ctx
    if not is_closed(w):
        raise NotClosed("Cartier operator needs a closed form")
    k = w.degree
    M = _cartier_system(ctx.p, ctx.m, k)
    x, _ = linalg.solve(M, w.flat(), ctx.p)
    return ConstForm(ctx.p, ctx.m, k, x[-comb(ctx.m, k):])


def cartier_by_coefficients(w: DiffForm) -> ConstForm:
    """Read the class off the ``x_S^{p-1}`` coefficient of each component.

    Exact forms never contain ``x_j^{p-1}`` in a ``dx_j`` slot, so on closed
    forms this agrees with :func:`cartier`.
    """
    ctx = w.ctx
    out = []
    for s, S in enumerate(ctx.subsets(w.degree)):
        exps = [0] * ctx.m
        for i in S:
            exps[i] = ctx.p - 1
        out.append(w.coeffs[s, ctx.index(exps)])
    return ConstForm(ctx.p, ctx.m, w.degree, out)


def is_exact(w: DiffForm) -> DiffForm | None:
    """A potential ``eta`` with ``d eta = w``, or ``None`` when the class is nonzero.

    Columns are eliminated from the last basis element backwards, which
    makes the choice deterministic and gives ``dx0^dx1 -> x0*dx1``.
    """
    ctx = w.ctx
    if not is_closed(w):
        raise NotClosed("exactness is only asked of closed forms")
    if w.degree == 0:
        return None
    D = d_matrix(ctx.p, ctx.m, w.degree - 1)
    try:
        x, _ = linalg.solve(D[:, ::-1], w.flat(), ctx.p)
    except linalg.Inconsistent:
        return None
    return DiffForm(ctx, w.degree - 1, x[::-1])


def de_rham_dims(ctx: AlgebraCtx) -> list[int]:
    """Dimensions of H^k computed from ranks of d."""
    ranks = [0] + [linalg.rank(d_matrix(ctx.p, ctx.m, k), ctx.p) for k in range(ctx.m)] + [0]
    out = []
    for k in range(ctx.m + 1):
        dim_k = comb(ctx.m, k) * ctx.dim
        out.append(dim_k - ranks[k + 1] - ranks[k])
    return out


# -- restricted structure on vector fields and Cartier ------------------------

def i_p(xi: Derivation, alpha: DiffForm) -> DiffForm:
    """``xi^[p] -| alpha - (L_xi)^{p-1}(xi -| alpha)``."""
    if alpha.degree == 0:
        raise ValueError("i_p needs a form of positive degree")
    out = contract(alpha, xi)
    for _ in range(xi.ctx.p - 1):
        out = lie_der(xi, out)
    return contract(alpha, deriv_p_power(xi)) - out


def verify_car_p(xi: Derivation, alpha: DiffForm) -> bool:
    """Check ``C(i_p(xi, alpha)) = C(alpha) -| xi`` for a closed form."""
    if not is_closed(alpha):
        raise NotClosed("alpha must be closed")
    lhs_form = i_p(xi, alpha)
    if not is_closed(lhs_form):
        return False
    lhs = cartier(lhs_form)
    # Frobenius twist of xi: coefficients a^p = a(0)
    rhs = cartier(alpha).contract(xi.values_at_zero())
    return lhs == rhs


def hI_sections(ctx: AlgebraCtx, lam: int) -> list[DiffForm]:
    """Basis of closed 1-forms with ``C(alpha) = lam * (constant part of alpha)``."""
    p = ctx.p
    closed = linalg.nullspace(d_matrix(p, ctx.m, 1), p) if ctx.m > 1 else \
        [np.eye(ctx.m * ctx.dim, dtype=np.int64)[j] for j in range(ctx.m * ctx.dim)]
    if not closed:
        return []
    cols = []
    for v in closed:
        w = DiffForm(ctx, 1, v)
        cols.append((cartier(w).coeffs - lam * w.const_part().coeffs) % p)
    constraint = np.array(cols, dtype=np.int64).T  # m x len(closed)
    out = []
    for c in linalg.nullspace(constraint, p):
        vec = (np.array(closed, dtype=np.int64).T @ c) % p
        out.append(DiffForm(ctx, 1, vec))
    return out


# -- sampling ------------------------------------------------------------------

def random_poly(ctx: AlgebraCtx, rng: np.random.Generator) -> TruncPoly:
    return TruncPoly(ctx, rng.integers(0, ctx.p, ctx.dim))


def random_derivation(ctx: AlgebraCtx, rng: np.random.Generator) -> Derivation:
    return Derivation(ctx, [random_poly(ctx, rng) for _ in range(ctx.m)])


def random_form(ctx: AlgebraCtx, k: int, rng: np.random.Generator) -> DiffForm:
    return DiffForm(ctx, k, rng.integers(0, ctx.p, (comb(ctx.m, k), ctx.dim)))


def random_closed_form(ctx: AlgebraCtx, k: int, rng: np.random.Generator) -> DiffForm:
    """``d eta + sum_S c_S rep_S`` with random ``eta`` and classes."""
    if k == 0:
        return DiffForm.function(ctx.const(int(rng.integers(0, ctx.p))))
    w = de_rham(random_form(ctx, k - 1, rng))
    for S in ctx.subsets(k):
        w = w + int(rng.integers(0, ctx.p)) * representative(ctx, S)
    return w
