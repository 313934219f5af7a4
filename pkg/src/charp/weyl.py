"""The reduced Weyl algebra D over F_p[h]/h^N.

Generators ``x_i, y_i`` (``i < n``) with ``x_i y_i - y_i x_i = h`` and
``x_i^p = y_i^p = 0``.  Elements are arrays of shape ``(p^{2n}, trunc)``:
the first axis runs over normal-ordered monomials ``x^a y^b`` indexed like
the truncated polynomial algebra on ``(x_0, y_0, x_1, y_1, ...)``, the
second over powers of h.  Reduction mod h is therefore literally the
first column, a TruncPoly in ``2n`` variables.
"""
from __future__ import annotations

import itertools
from functools import cached_property, lru_cache
from math import comb, factorial

import numpy as np

from . import linalg
from .checks import Check, rows_differ
from .freealg import eval_quant, universal_polynomials
from .poisson import PowerMap, Symplectic, check_symplectic, standard_form
from .text import ParseError, join_terms, parse_terms
from .trunccalc import TruncPoly, algebra


class NotDivisible(ArithmeticError):
    pass


class WeylCtx:
    def __init__(self, p: int, n: int = 1, N: int | None = None):
        self.p = linalg.check_prime(p)
        if n not in (1, 2):
            raise ValueError(f"1 <= n <= 2 required, got {n}")
        N = p + 2 if N is None else int(N)
        if not 1 <= N <= 2 * p + 2:
            raise ValueError(f"truncation N={N} outside [1, {2 * p + 2}]")
        self.n, self.N = n, N
        self.poly_ctx = algebra(p, 2 * n)
        self.mono = self.poly_ctx.dim
        self.dim = self.mono * N

    def __repr__(self):
        return f"WeylCtx(p={self.p}, n={self.n}, N={self.N})"

    @cached_property
    def table(self):
        """Structure constants: ``(i, j, target, hpow, coeff)`` arrays."""
        return _structure(self.p, self.n)

    @cached_property
    def _scatter(self):
        i, j, t, k, c = self.table
        out = {}
        for kk in np.unique(k):
            sel = np.flatnonzero(k == kk)
            S = np.zeros((sel.size, self.mono), dtype=np.float64)
            S[np.arange(sel.size), t[sel]] = c[sel]
            out[int(kk)] = (sel, S)
        return out

    # -- constructors -------------------------------------------------------
    def zero(self, trunc: int | None = None) -> "WeylElt":
        return WeylElt(self, np.zeros((self.mono, trunc or self.N), dtype=np.int64))

    def const(self, c: int, trunc: int | None = None) -> "WeylElt":
        z = np.zeros((self.mono, trunc or self.N), dtype=np.int64)
        z[0, 0] = c
        return WeylElt(self, z)

    def one(self) -> "WeylElt":
        return self.const(1)

    def monomial(self, a, b, c: int = 0, coeff: int = 1) -> "WeylElt":
        """``coeff * x^a y^b h^c`` for exponent tuples ``a, b``."""
        exps = []
        for ai, bi in zip(a, b):
            exps += [ai, bi]
        z = np.zeros((self.mono, self.N), dtype=np.int64)
        if all(e < self.p for e in exps) and c < self.N:
            z[self.poly_ctx.index(exps), c] = coeff
        return WeylElt(self, z)

    def x(self, i: int = 0) -> "WeylElt":
        return self.lift(self.poly_ctx.var(2 * i))

    def y(self, i: int = 0) -> "WeylElt":
        return self.lift(self.poly_ctx.var(2 * i + 1))

    def h(self) -> "WeylElt":
        return self.monomial((0,) * self.n, (0,) * self.n, 1)

    def lift(self, f: TruncPoly, trunc: int | None = None) -> "WeylElt":
        """Normal-ordered lift with zero h-part."""
        z = np.zeros((self.mono, trunc or self.N), dtype=np.int64)
        z[:, 0] = f.c
        return WeylElt(self, z)

    def basis(self) -> np.ndarray:
        """All basis elements as a batch of shape ``(dim, mono, N)``."""
        return np.eye(self.dim, dtype=np.int64).reshape(self.dim, self.mono, self.N)

    def gens(self) -> list["WeylElt"]:
        out = []
        for i in range(self.n):
            out += [self.x(i), self.y(i)]
        return out

    def parse(self, text: str) -> "WeylElt":
        out = self.zero()
        for c, factors, diffs in parse_terms(text):
            if diffs:
                raise ParseError("differentials are not Weyl algebra elements")
            # factors multiply in the order written, so "y0 x0" = x0 y0 - h
            term = self.const(c % self.p)
            for name, e in factors:
                if name == "h":
                    g = self.h()
                elif name[0] in "xy" and name[1:].isdigit() and int(name[1:]) < self.n:
                    g = (self.x if name[0] == "x" else self.y)(int(name[1:]))
                else:
                    raise ParseError(f"unknown generator {name!r}")
                term = term * g ** e
            out = out + term
        return out


@lru_cache(maxsize=None)
def _pair_table(p: int):
    """``(x^a y^b)(x^c y^d) = sum_k k! C(b,k) C(c,k) (-h)^k x^{a+c-k} y^{b+d-k}``."""
    rows = []
    for a, b, c, d in itertools.product(range(p), repeat=4):
        for k in range(min(b, c) + 1):
            xa, yb = a + c - k, b + d - k
            if xa >= p or yb >= p:
                continue
            coeff = (factorial(k) * comb(b, k) * comb(c, k) * (-1) ** k) % p
            if coeff:
                rows.append((a * p + b, c * p + d, xa * p + yb, k, coeff))
    return rows


@lru_cache(maxsize=None)
def _structure(p: int, n: int):
    pair = _pair_table(p)
    rows = pair
    for _ in range(n - 1):
        rows = [(i1 * p * p + i2, j1 * p * p + j2, t1 * p * p + t2, k1 + k2, (c1 * c2) % p)
                for i1, j1, t1, k1, c1 in rows for i2, j2, t2, k2, c2 in pair]
    arr = np.array(rows, dtype=np.int64)
    return tuple(np.ascontiguousarray(arr[:, q]) for q in range(5))


def mul_arrays(ctx: WeylCtx, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Batched product of arrays ``(..., mono, T)``; truncation is the smaller T."""
    T = min(A.shape[-1], B.shape[-1])
    I, J, _, _, _ = ctx.table
    a, b = A[..., I, :T], B[..., J, :T]
    conv = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.int64)
    for c1 in range(T):
        conv[..., c1:] += a[..., c1:c1 + 1] * b[..., :T - c1]
    conv %= ctx.p
    out = np.zeros(conv.shape[:-2] + (ctx.mono, T), dtype=np.float64)
    for k, (sel, S) in ctx._scatter.items():
        if k >= T:
            continue
        part = conv[..., sel, :T - k].astype(np.float64)
        out[..., k:] += np.swapaxes(np.swapaxes(part, -1, -2) @ S, -1, -2)
    return np.rint(out).astype(np.int64) % ctx.p


def pad(A: np.ndarray, T: int) -> np.ndarray:
    """Zero-pad or cut the h-axis to length ``T``."""
    if A.shape[-1] >= T:
        return A[..., :T]
    width = [(0, 0)] * (A.ndim - 1) + [(0, T - A.shape[-1])]
    return np.pad(A, width)


def commutator_arrays(ctx: WeylCtx, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return (mul_arrays(ctx, A, B) - mul_arrays(ctx, B, A)) % ctx.p


def bracket_arrays(ctx: WeylCtx, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """``(ab - ba) / h``.

    Every commutator is divisible by h, so the unknown h^T tails of the
    inputs only reach h^T after division: the result keeps truncation T.
    """
    T = min(A.shape[-1], B.shape[-1])
    comm = commutator_arrays(ctx, pad(A, T + 1), pad(B, T + 1))
    if np.any(comm[..., 0]):
        raise NotDivisible("commutator is not divisible by h")
    return comm[..., 1:]


def shift_h(A: np.ndarray, k: int) -> np.ndarray:
    """Multiply by ``h^k`` keeping the truncation."""
    if k == 0:
        return A
    out = np.zeros_like(A)
    if k < A.shape[-1]:
        out[..., k:] = A[..., :-k]
    return out


def power_arrays(ctx: WeylCtx, A: np.ndarray, e: int) -> np.ndarray:
    out = None
    for _ in range(e):
        out = A if out is None else mul_arrays(ctx, out, A)
    if out is None:
        out = np.zeros_like(A)
        out[..., 0, 0] = 1
    return out


class WeylElt:
    __slots__ = ("ctx", "c")

    def __init__(self, ctx: WeylCtx, coeffs):
        c = np.asarray(coeffs, dtype=np.int64) % ctx.p
        if c.ndim != 2 or c.shape[0] != ctx.mono:
            raise ValueError(f"expected shape ({ctx.mono}, T), got {c.shape}")
        c.flags.writeable = False
        self.ctx = ctx
        self.c = c

    @property
    def trunc(self) -> int:
        return self.c.shape[1]

    def truncate(self, T: int) -> "WeylElt":
        return WeylElt(self.ctx, pad(self.c, T))

    def mod_h(self) -> TruncPoly:
        return TruncPoly(self.ctx.poly_ctx, self.c[:, 0])

    def is_zero(self) -> bool:
        return not self.c.any()

    def _align(self, other):
        if isinstance(other, (int, np.integer)):
            other = self.ctx.const(int(other), self.trunc)
        T = min(self.trunc, other.trunc)
        return self.c[:, :T], other.c[:, :T]

    def __add__(self, other):
        a, b = self._align(other)
        return WeylElt(self.ctx, a + b)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._align(other)
        return WeylElt(self.ctx, a - b)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return WeylElt(self.ctx, -self.c)

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return WeylElt(self.ctx, self.c * int(other))
        if isinstance(other, WeylElt):
            return weyl_mul(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, np.integer)):
            return WeylElt(self.ctx, self.c * int(other))
        return NotImplemented

    def __pow__(self, e: int):
        return WeylElt(self.ctx, power_arrays(self.ctx, self.c, e))

    def __eq__(self, other):
        if isinstance(other, (int, np.integer)):
            other = self.ctx.const(int(other), self.trunc)
        if not isinstance(other, WeylElt):
            return NotImplemented
        return self.trunc == other.trunc and np.array_equal(self.c, other.c)

    def __hash__(self):
        return hash((self.trunc, self.c.tobytes()))

    def __str__(self):
        ctx = self.ctx
        pieces = []
        for j, k in zip(*np.nonzero(self.c)):
            factors = []
            exps = ctx.poly_ctx.exps[j]
            for i in range(ctx.n):
                for name, e in ((f"x{i}", exps[2 * i]), (f"y{i}", exps[2 * i + 1])):
                    if e:
                        factors.append(name if e == 1 else f"{name}^{e}")
            if k:
                factors.append("h" if k == 1 else f"h^{k}")
            pieces.append((int(self.c[j, k]), " ".join(factors)))
        pieces = [(c, body) for c, body in pieces]
        text = join_terms(pieces, ctx.p)
        # "2*x0 y0" reads better as "2 * x0 y0"
        return text.replace("*", " * ")

    def __repr__(self):
        return f"WeylElt({self}, trunc={self.trunc})"


def weyl_mul(a: WeylElt, b: WeylElt) -> WeylElt:
    return WeylElt(a.ctx, mul_arrays(a.ctx, a.c, b.c))


def weyl_bracket(a: WeylElt, b: WeylElt) -> WeylElt:
    return WeylElt(a.ctx, bracket_arrays(a.ctx, a.c, b.c))


def center_basis(ctx: WeylCtx) -> list[WeylElt]:
    """Nullspace of ``z -> ([z, x_i], [z, y_i])_i``."""
    basis = ctx.basis()
    blocks = []
    for g in ctx.gens():
        comm = commutator_arrays(ctx, basis, g.c)
        blocks.append(comm.reshape(ctx.dim, -1).T)
    null = linalg.nullspace(np.vstack(blocks), ctx.p)
    return [WeylElt(ctx, v.reshape(ctx.mono, ctx.N)) for v in null]


class Splitting:
    """``s(sum c_m m) = sum c_m^p s(m)`` with ``s(1) = 1`` and ``s = 0`` on other monomials."""

    def __init__(self, ctx: WeylCtx):
        self.ctx = ctx

    def values(self, Fbar: np.ndarray, T: int) -> np.ndarray:
        """Batched ``s`` on rows of A-coefficient arrays, as D arrays of truncation T."""
        out = np.zeros(Fbar.shape[:-1] + (self.ctx.mono, T), dtype=np.int64)
        out[..., 0, 0] = Fbar[..., 0]  # c^p = c in F_p
        return out

    def __call__(self, fbar: TruncPoly) -> WeylElt:
        return WeylElt(self.ctx, self.values(fbar.c, self.ctx.N))


def splitting(ctx: WeylCtx, fbar: TruncPoly) -> WeylElt:
    return Splitting(ctx)(fbar)


def p_power_arrays(ctx: WeylCtx, F: np.ndarray, s: Splitting | None = None,
                   strict: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """``(f^p - s(f mod h)) / h^{p-1}`` per row, at truncation ``T - p + 1``.

    Returns the values and a per-row flag for exact divisibility; with
    ``strict`` a failed division raises.
    """
    p, T = ctx.p, F.shape[-1]
    if T < p:
        raise ValueError(f"truncation {T} is below p = {p}")
    s = s or Splitting(ctx)
    diff = (power_arrays(ctx, F, p) - s.values(F[..., :, 0], T)) % p
    ok = ~np.any(diff[..., :, : p - 1].reshape(diff.shape[:-2] + (-1,)), axis=-1)
    if strict and not np.all(ok):
        raise NotDivisible("f^p - s(f) is not divisible by h^{p-1}")
    return diff[..., :, p - 1:], ok


def p_power(f: WeylElt, s: Splitting | None = None) -> WeylElt:
    vals, _ = p_power_arrays(f.ctx, f.c, s)
    return WeylElt(f.ctx, vals)


class WeylTarget:
    """Batched evaluation target inside D at a fixed truncation."""

    def __init__(self, ctx: WeylCtx, shape: tuple[int, ...], trunc: int):
        self.ctx, self.shape, self.trunc = ctx, shape + (ctx.mono, trunc), trunc

    def zero(self):
        return np.zeros(self.shape, dtype=np.int64)

    def one(self):
        out = self.zero()
        out[..., 0, 0] = 1
        return out

    def add(self, a, b):
        return (a + b) % self.ctx.p

    def scale(self, c, a):
        return (c * a) % self.ctx.p

    def mul(self, a, b):
        return mul_arrays(self.ctx, a, b)

    def bracket(self, a, b):
        return bracket_arrays(self.ctx, a, b)

    def h_power(self, a, k):
        return shift_h(a, k)


def _flat_differs(a, b, p):
    return rows_differ(a.reshape(a.shape[:-2] + (-1,)), b.reshape(b.shape[:-2] + (-1,)), p)


def _pairs(ctx: WeylCtx, samples: int, rng: np.random.Generator, T: int | None = None):
    T = T or ctx.N
    basis = pad(ctx.basis(), T)
    k = basis.shape[0]
    A = np.concatenate([np.repeat(basis, k, axis=0), rng.integers(0, ctx.p, (samples, ctx.mono, T))])
    B = np.concatenate([np.tile(basis, (k, 1, 1)), rng.integers(0, ctx.p, (samples, ctx.mono, T))])
    return A, B


def _describe(ctx, A, B):
    return lambda i: {"a": str(WeylElt(ctx, A[i])), "b": str(WeylElt(ctx, B[i]))}


def check_associativity(ctx: WeylCtx) -> Check:
    """``(uv)w = u(vw)`` on all triples of basis monomials."""
    basis = ctx.basis()
    k = ctx.dim
    check = Check("associativity")
    for u in range(k):
        uv = mul_arrays(ctx, basis[u], basis)  # (k, mono, N)
        left = mul_arrays(ctx, uv[:, None], basis[None, :])
        vw = mul_arrays(ctx, basis[:, None], basis[None, :])
        right = mul_arrays(ctx, basis[u], vw)
        check.record(_flat_differs(left, right, ctx.p).ravel())
    return check


def verify_fr_const(ctx: WeylCtx, samples: int = 200, seed: int = 0, s: Splitting | None = None) -> list[Check]:
    p, N = ctx.p, ctx.N
    if N < p:
        raise ValueError(f"need N >= p, got N={N}")
    s = s or Splitting(ctx)
    rng = np.random.default_rng(seed)
    mono_basis = np.eye(ctx.mono, dtype=np.int64)

    additive = Check("splitting additive")
    fa, fb = rng.integers(0, p, (samples, ctx.mono)), rng.integers(0, p, (samples, ctx.mono))
    additive.record(_flat_differs(s.values((fa + fb) % p, N), s.values(fa, N) + s.values(fb, N), p))

    multiplicative = Check("splitting multiplicative")
    Pa = np.repeat(mono_basis, ctx.mono, axis=0)
    Pb = np.tile(mono_basis, (ctx.mono, 1))
    from .trunccalc import batch_mul
    prod = batch_mul(ctx.poly_ctx, Pa, Pb)
    multiplicative.record(_flat_differs(s.values(prod, N), mul_arrays(ctx, s.values(Pa, N), s.values(Pb, N)), p))

    central = Check("splitting central")
    svals = s.values(np.vstack([mono_basis, fa]), N)
    for g in ctx.gens():
        central.record(np.any(commutator_arrays(ctx, svals, g.c).reshape(len(svals), -1), axis=-1))

    congruence = Check("f^p = s(f) mod h^(p-1)")
    F = np.concatenate([pad(ctx.basis(), N), rng.integers(0, p, (samples, ctx.mono, N))])
    fp = power_arrays(ctx, F, p)
    diff = (fp - s.values(F[:, :, 0], N))[:, :, : p - 1]
    congruence.record(np.any(diff.reshape(len(F), -1) % p, axis=-1),
                      lambda i: {"f": str(WeylElt(ctx, F[i]))})

    regular = Check("regularity")
    nil = F[F[:, 0, 0] == 0]
    vals, ok = p_power_arrays(ctx, nil, s, strict=False)
    rebuilt = shift_h(pad(vals, N), p - 1)
    regular.record(~ok | _flat_differs(rebuilt, power_arrays(ctx, nil, p), p),
                   lambda i: {"f": str(WeylElt(ctx, nil[i]))})
    return [additive, multiplicative, central, congruence, regular]


def verify_restr_quant(ctx: WeylCtx, samples: int = 200, seed: int = 0, s: Splitting | None = None) -> list[Check]:
    """Restricted quantized axioms for ``p_power`` at truncation ``N - p + 1``."""
    p, N = ctx.p, ctx.N
    if N < p:
        raise ValueError(f"need N >= p, got N={N}")
    T = N - p + 1
    rng = np.random.default_rng(seed)
    A, B = _pairs(ctx, samples, rng)
    describe = _describe(ctx, A, B)
    L, P = universal_polynomials(p)
    target = WeylTarget(ctx, (A.shape[0],), N)

    pa, oka = p_power_arrays(ctx, A, s, strict=False)
    pb, okb = p_power_arrays(ctx, B, s, strict=False)
    div = Check("divisibility")
    div.record(~(oka & okb), describe)

    lie1 = Check("restr.lie.1")
    rhs = B
    for _ in range(p):
        rhs = bracket_arrays(ctx, A, rhs)
    lie1.record(_flat_differs(bracket_arrays(ctx, pa, pad(B, T)), pad(rhs, T), p), describe)

    lie2 = Check("restr.lie.2")
    psum, oks = p_power_arrays(ctx, (A + B) % p, s, strict=False)
    rhs = pa + pb + pad(eval_quant(L, [A, B], target), T)
    lie2.record(~oks | _flat_differs(psum, rhs, p), describe)

    prod = Check("restr.prod")
    pab, okp = p_power_arrays(ctx, mul_arrays(ctx, A, B), s, strict=False)
    ap, bp = pad(power_arrays(ctx, A, p), T), pad(power_arrays(ctx, B, p), T)
    rhs = (mul_arrays(ctx, ap, pb) + mul_arrays(ctx, pa, bp)
           - shift_h(mul_arrays(ctx, pa, pb), p - 1) + pad(eval_quant(P, [A, B], target), T))
    prod.record(~okp | _flat_differs(pab, rhs, p), describe)

    hcheck = Check("h^[p] = h")
    hcheck.expect(p_power(ctx.h()) == ctx.h().truncate(T))
    return [div, lie1, lie2, prod, hcheck]


def _span(vectors: np.ndarray, p: int) -> np.ndarray:
    if vectors.size == 0:
        return vectors.reshape(0, vectors.shape[-1] if vectors.ndim > 1 else 0)
    R, piv = linalg.rref(vectors, p)
    return R[: len(piv)]


def quasi_fr_check(ctx: WeylCtx, samples: int = 200, seed: int = 0) -> list[Check]:
    """Hypotheses and conclusions of the additive multiplicative p-th power lemma in D/h^{p-1}."""
    p = ctx.p
    Q = WeylCtx(p, ctx.n, p - 1)
    rng = np.random.default_rng(seed)
    basis = Q.basis()
    flat = basis.reshape(Q.dim, -1)

    series = [flat]
    for _ in range(p - 1):
        prev = series[-1].reshape(-1, Q.mono, Q.N)
        comm = commutator_arrays(Q, basis[:, None], prev[None, :]).reshape(-1, Q.dim)
        series.append(_span(comm % p, p))
    dims = [len(s) for s in series]
    hyp1 = Check("A_(p) = 0", info={"dims": dims})
    hyp1.expect(dims[-1] == 0)

    hyp2 = Check("A_(2)^p = 0")
    a2 = series[1].reshape(-1, Q.mono, Q.N)
    if len(a2):
        combos = (rng.integers(0, p, (samples, len(a2))) @ series[1]) % p
        elems = np.concatenate([a2, combos.reshape(-1, Q.mono, Q.N)])
        hyp2.record(np.any(power_arrays(Q, elems, p).reshape(len(elems), -1), axis=-1))

    A, B = _pairs(Q, samples, rng)
    describe = _describe(Q, A, B)
    ap, bp = power_arrays(Q, A, p), power_arrays(Q, B, p)
    add = Check("(x+y)^p = x^p + y^p")
    add.record(_flat_differs(power_arrays(Q, (A + B) % p, p), ap + bp, p), describe)
    mult = Check("(xy)^p = x^p y^p")
    mult.record(_flat_differs(power_arrays(Q, mul_arrays(Q, A, B), p), mul_arrays(Q, ap, bp), p), describe)
    cent = Check("x^p central")
    cent.record(np.any(commutator_arrays(Q, ap, B).reshape(len(A), -1), axis=-1), describe)
    return [hyp1, hyp2, add, mult, cent]


# -- fibers h = c ---------------------------------------------------------------

class FiberAlgebra:
    """``D / (h - c)``: relations ``x_i y_i - y_i x_i = c``, ``x^p = y^p = 0``."""

    def __init__(self, ctx: WeylCtx, c: int):
        if c % ctx.p == 0:
            raise ValueError("fiber parameter must be nonzero")
        self.ctx, self.c = ctx, c % ctx.p
        I, J, T, K, C = ctx.table
        coeff = (C * np.array([pow(self.c, int(k), ctx.p) for k in K], dtype=np.int64)) % ctx.p
        self.struct = np.zeros((ctx.mono, ctx.mono, ctx.mono), dtype=np.int64)
        np.add.at(self.struct, (I, J, T), coeff)
        self.struct %= ctx.p

    @property
    def dim(self) -> int:
        return self.ctx.mono

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.einsum("...i,...j,ijk->...k", a, b, self.struct) % self.ctx.p

    def generator(self, i: int) -> np.ndarray:
        return np.eye(self.dim, dtype=np.int64)[self.ctx.poly_ctx.weights[i]]

    def center(self) -> list[np.ndarray]:
        eye = np.eye(self.dim, dtype=np.int64)
        blocks = []
        for g in range(2 * self.ctx.n):
            gen = self.generator(g)
            blocks.append(((self.mul(eye, gen) - self.mul(gen, eye)) % self.ctx.p).T)
        return linalg.nullspace(np.vstack(blocks), self.ctx.p)


def fiber(ctx: WeylCtx, c: int) -> FiberAlgebra:
    return FiberAlgebra(ctx, c)


def _fiber_rep(fib: FiberAlgebra) -> list[np.ndarray]:
    """``x_i -> t_i``, ``y_i -> -c d/dt_i`` on F_p[t]/(t^p); images of all monomials."""
    ctx = fib.ctx
    tctx = algebra(ctx.p, ctx.n)
    gens = []
    for i in range(ctx.n):
        gens.append(tctx.var(i).mul_matrix())
        gens.append((-fib.c * tctx.deriv_matrices[i]) % ctx.p)
    images = []
    eye = np.eye(tctx.dim, dtype=np.int64)
    for j in range(ctx.mono):
        M = eye
        for g, e in enumerate(ctx.poly_ctx.exps[j]):
            for _ in range(e):
                M = (M @ gens[g]) % ctx.p
        images.append(M)
    return images


def fiber_matrix_iso(ctx: WeylCtx, c: int) -> dict:
    """Representation of the fiber on p^n-dimensional space: rank and homomorphism check."""
    fib = fiber(ctx, c)
    images = _fiber_rep(fib)
    stacked = np.array([M.ravel() for M in images], dtype=np.int64)
    rank = linalg.rank(stacked, ctx.p)
    eye = np.eye(fib.dim, dtype=np.int64)
    hom = True
    for i in range(fib.dim):
        prods = fib.mul(eye[i], eye)  # row j = e_i e_j
        for j in range(fib.dim):
            lhs = np.tensordot(prods[j], np.array(images), axes=1) % ctx.p
            if not np.array_equal(lhs, (images[i] @ images[j]) % ctx.p):
                hom = False
                break
        if not hom:
            break
    size = fib.dim
    return {"c": fib.c, "dim": size, "rank": rank, "homomorphism": hom,
            "bijective": hom and rank == size == stacked.shape[1],
            "center_dim": len(fib.center())}


# -- link to the Poisson side ----------------------------------------------------

class ReducedPower(PowerMap):
    """``f -> p_power(lift f) mod h`` as a power map on A with the standard form."""

    def __init__(self, ctx: WeylCtx):
        if ctx.N < ctx.p:
            raise ValueError("need N >= p")
        self.ctx = ctx
        self.symplectic: Symplectic = check_symplectic(standard_form(ctx.poly_ctx))

    def power_batch(self, A: np.ndarray) -> np.ndarray:
        lifted = np.zeros(A.shape + (self.ctx.N,), dtype=np.int64)
        lifted[..., 0] = A
        vals, _ = p_power_arrays(self.ctx, lifted)
        return vals[..., 0]


def bracket_vs_poisson(ctx: WeylCtx) -> Check:
    """``{a, b}`` in D mod h against the standard Poisson bracket on basis pairs."""
    S = check_symplectic(standard_form(ctx.poly_ctx))
    eye = np.eye(ctx.mono, dtype=np.int64)
    Fa, Fb = np.repeat(eye, ctx.mono, axis=0), np.tile(eye, (ctx.mono, 1))
    la = np.zeros(Fa.shape + (ctx.N,), dtype=np.int64)
    lb = np.zeros_like(la)
    la[..., 0], lb[..., 0] = Fa, Fb
    quantum = bracket_arrays(ctx, la, lb)[..., 0]
    check = Check("weyl bracket mod h = Poisson bracket")
    pc = ctx.poly_ctx
    return check.record(rows_differ(quantum, S.bracket_batch(Fa, Fb), ctx.p),
                        lambda i: {"a": str(TruncPoly(pc, Fa[i])), "b": str(TruncPoly(pc, Fb[i]))})
