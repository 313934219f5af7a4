"""Named verification suites and deterministic JSON reports."""
from __future__ import annotations

import itertools
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import comb
from typing import Callable

import numpy as np

from . import freealg, linalg, poisson, trunccalc, weyl
from .checks import Check

SCHEMA = 1


class UnknownSuite(KeyError):
    pass


class BadParams(ValueError):
    pass


@dataclass(frozen=True)
class SuiteSpec:
    suite: str
    p: int
    m: int | None = None
    n: int | None = None
    trunc: int | None = None
    samples: int | None = None
    cases: int | None = None
    seed: int = 0

    def params(self) -> dict:
        return {k: v for k, v in (("p", self.p), ("m", self.m), ("n", self.n), ("trunc", self.trunc),
                                  ("samples", self.samples), ("cases", self.cases), ("seed", self.seed))
                if v is not None}


@dataclass
class Report:
    suite: str
    params: dict
    checks: list[Check] = field(default_factory=list)
    wall_time: float | None = None

    @property
    def cases(self) -> int:
        return sum(c.cases for c in self.checks)

    @property
    def failed(self) -> int:
        return sum(c.failed for c in self.checks)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def to_dict(self) -> dict:
        out = {
            "schema": SCHEMA,
            "suite": self.suite,
            "params": self.params,
            "cases": self.cases,
            "passed": self.cases - self.failed,
            "failed": self.failed,
            "checks": [c.to_dict() for c in self.checks],
            "counterexamples": [dict(check=c.name, **c.counterexample) for c in self.checks
                                if c.counterexample is not None],
        }
        if self.wall_time is not None:
            out["wall_time"] = round(self.wall_time, 3)
        return out


def case_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("CHARP_THREADS", "1")))
    except ValueError:
        return 1


def _merge(per_case: list[list[Check]]) -> list[Check]:
    """Combine same-named checks from cases in index order."""
    merged: dict[str, Check] = {}
    for checks in per_case:
        for c in checks:
            tgt = merged.setdefault(c.name, Check(c.name))
            tgt.cases += c.cases
            tgt.failed += c.failed
            if tgt.counterexample is None and c.counterexample is not None:
                tgt.counterexample = c.counterexample
            for k, v in c.info.items():
                tgt.info.setdefault(k, v)
    return list(merged.values())


def _fan_out(fn: Callable[[int, np.random.Generator], list[Check]], count: int, seed: int) -> list[Check]:
    def run(i):
        return fn(i, case_rng(seed, i))

    workers = _workers()
    if workers > 1 and count > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, range(count)))
    else:
        results = [run(i) for i in range(count)]
    return _merge(results)


def _caught(name: str, fn: Callable[[], bool], describe: Callable[[], dict] | None = None) -> Check:
    """One-case check; an exception counts as a failure with its message."""
    c = Check(name)
    try:
        ok = bool(fn())
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        c.cases, c.failed = 1, 1
        c.counterexample = dict((describe() if describe else {}), error=f"{type(exc).__name__}: {exc}")
        return c
    return c.expect(ok, describe)


# -- free algebra ---------------------------------------------------------------

def _brute_L(alg: freealg.FreeAlgebra, p: int) -> freealg.TensorElt:
    words = {w: 1 for w in itertools.product(range(2), repeat=p) if 0 < sum(w) < p}
    return alg.element(words)


def suite_universal_L(spec: SuiteSpec) -> list[Check]:
    p = spec.p
    alg = freealg.FreeAlgebra(p, 2)
    L = freealg.compute_L(p, alg)
    checks = [Check("L equals word expansion", info={"L": str(L.tensor), "brackets": L.bracket_text()})
              .expect(L.tensor == _brute_L(alg, p))]
    checks.append(Check("L is a Lie element").expect(alg.pbw_level(L.tensor) == 1))
    target = freealg.TensorTarget(alg)
    x = alg.gen(0)
    checks.append(Check("bracket expansion re-expands to L")
                  .expect(freealg.eval_quant(L, [alg.gen(0), alg.gen(1)], target) == L.tensor))
    checks.append(Check("L(x,x) = 0").expect(freealg.eval_quant(L, [x, x], target).is_zero()))
    checks.append(Check("L(x,0) = 0").expect(freealg.eval_quant(L, [x, alg.zero()], target).is_zero()))
    return checks


def suite_lemma_sq(spec: SuiteSpec) -> list[Check]:
    p = spec.p
    target = freealg.two_step_lie(p)
    L = freealg.universal_L(p)
    val = freealg.eval_quant(L, [target.basis(0), target.basis(1)], target)
    return [Check("L(x,y) = y in the two-step algebra", info={"value": val.tolist()})
            .expect(np.array_equal(val, target.basis(1)))]


def suite_universal_P(spec: SuiteSpec) -> list[Check]:
    p = spec.p
    alg = freealg.FreeAlgebra(p, 2)
    Lq, P = freealg.universal_polynomials(p)
    level = alg.pbw_level(P.tensor)
    checks = [Check("P lies in F_(p+1)", info={"pbw_level": level, "words": len(P.tensor.terms)})
              .expect(level <= p + 1)]
    N = spec.trunc or 2 * p
    D = weyl.WeylCtx(p, spec.n or 1, N)
    rng = case_rng(spec.seed, 0)
    samples = spec.samples if spec.samples is not None else 200
    A = rng.integers(0, p, (samples, D.mono, N))
    B = rng.integers(0, p, (samples, D.mono, N))
    target = weyl.WeylTarget(D, (samples,), N)
    describe = lambda i: {"a": str(weyl.WeylElt(D, A[i])), "b": str(weyl.WeylElt(D, B[i]))}  # noqa: E731
    pw = lambda X: weyl.power_arrays(D, X, p)  # noqa: E731
    lhs = weyl.shift_h(freealg.eval_quant(P, [A, B], target), p - 1)
    rhs = pw(weyl.mul_arrays(D, A, B)) - weyl.mul_arrays(D, pw(A), pw(B))
    checks.append(Check("h^(p-1) P(a,b) = (ab)^p - a^p b^p").record(weyl._flat_differs(lhs, rhs, p), describe))
    lhs = weyl.shift_h(freealg.eval_quant(Lq, [A, B], target), p - 1)
    rhs = pw((A + B) % p) - pw(A) - pw(B)
    checks.append(Check("h^(p-1) L(a,b) = (a+b)^p - a^p - b^p").record(weyl._flat_differs(lhs, rhs, p), describe))
    return checks


# -- truncated calculus ------------------------------------------------------------

def suite_cartier(spec: SuiteSpec) -> list[Check]:
    p, m = spec.p, spec.m or 1
    ctx = trunccalc.algebra(p, m)
    dd = Check("d o d = 0")
    for k in range(m - 1):
        prod = linalg.matmul(trunccalc.d_matrix(p, m, k + 1), trunccalc.d_matrix(p, m, k), p)
        dd.expect(not prod.any(), lambda: {"degree": k})
    dims = trunccalc.de_rham_dims(ctx)
    checks = [dd, Check("dim H^k = binom(m,k)", info={"dims": dims})
              .expect(dims == [comb(m, k) for k in range(m + 1)])]
    cd, agree = Check("C o d = 0"), Check("class solver agrees with coefficient reading")
    samples = spec.samples if spec.samples is not None else 20
    for i in range(samples):
        rng = case_rng(spec.seed, i)
        for k in range(1, m + 1):
            eta = trunccalc.random_form(ctx, k - 1, rng)
            w = trunccalc.de_rham(eta)
            cd.expect(trunccalc.cartier(w).is_zero(), lambda: {"eta": str(eta)})
            w = trunccalc.random_closed_form(ctx, k, rng)
            agree.expect(trunccalc.cartier(w) == trunccalc.cartier_by_coefficients(w), lambda: {"form": str(w)})
    units = Check("C(rep_S) is the unit vector")
    for k in range(1, m + 1):
        for s, S in enumerate(ctx.subsets(k)):
            want = np.zeros(comb(m, k), dtype=np.int64)
            want[s] = 1
            units.expect(np.array_equal(trunccalc.cartier(trunccalc.representative(ctx, S)).coeffs, want))
    checks += [cd, agree, units]
    if p == 3:
        one = trunccalc.algebra(3, 1)
        w = one.parse_form("dx - x*dx + x^2*dx")
        checks.append(Check("C((1-x+x^2)dx) = dx").expect(str(trunccalc.cartier(w)) == "dx0"))
    return checks


def suite_car_p(spec: SuiteSpec) -> list[Check]:
    p, m = spec.p, spec.m or 2
    ctx = trunccalc.algebra(p, m)
    count = spec.samples if spec.samples is not None else (200 if p == 3 else 50)

    def case(i, rng):
        xi = trunccalc.random_derivation(ctx, rng)
        k = 1 + i % m
        alpha = trunccalc.random_closed_form(ctx, k, rng)
        describe = lambda: {"xi": str(xi), "alpha": str(alpha)}  # noqa: E731
        closed = Check("i_p maps closed to closed").expect(trunccalc.is_closed(trunccalc.i_p(xi, alpha)), describe)
        return [closed, _caught("C(i_p(xi, alpha)) = C(alpha) -| xi", lambda: trunccalc.verify_car_p(xi, alpha), describe)]

    checks = _fan_out(case, count, spec.seed)
    one = trunccalc.algebra(p, 1)
    planted = trunccalc.verify_car_p(one.partial(0), trunccalc.representative(one, (0,)))
    return checks + [Check("planted d/dx, x^(p-1)dx").expect(planted)]


def suite_hI(spec: SuiteSpec) -> list[Check]:
    p, m = spec.p, spec.m or 1
    ctx = trunccalc.algebra(p, m)
    zero = trunccalc.hI_sections(ctx, 0)
    one = trunccalc.hI_sections(ctx, 1)
    exact_dim = ctx.dim - 1
    return [
        Check("dim hI(0) = dim A - 1", info={"dim": len(zero)}).expect(len(zero) == exact_dim),
        Check("hI(0) = exact forms").expect(all(trunccalc.is_exact(w) is not None for w in zero)),
        Check("hI(1) = 0", info={"dim": len(one)}).expect(len(one) == 0,
                                                          lambda: {"section": str(one[0])}),
    ]


# -- Poisson side ----------------------------------------------------------------

def suite_theorem_cent(spec: SuiteSpec) -> list[Check]:
    p, m = spec.p, spec.m or 2
    ctx = trunccalc.algebra(p, m)
    count = spec.samples if spec.samples is not None else (100 if p == 3 else 30)

    def case(i, rng):
        # planted positives, planted negatives, then unconstrained classes
        plant = i % 3
        top = 0 if plant == 0 else (int(rng.integers(1, p)) if plant == 1 else None)
        S = poisson.random_symplectic(ctx, rng, top_class=top)
        f1, f2 = poisson.theorem_cent_check(S)
        describe = lambda: {"form": str(S.form), "flags": [f1, f2]}  # noqa: E731
        checks = [Check("flags agree").expect(f1 == f2, describe)]
        if plant < 2:
            checks.append(Check("planted class detected").expect(f2 == (plant == 0), describe))
        return checks

    checks = _fan_out(case, count, spec.seed)
    if p == 3 and m == 2:
        for text, want in (("dx^dy", (True, True)), ("dx^dy + x^2*y^2*dx^dy", (False, False)),
                           ("dx^dy + x*dx^dy", (True, True))):
            S = poisson.check_symplectic(ctx.parse_form(text))
            checks.append(Check(f"planted {text}").expect(poisson.theorem_cent_check(S) == want))
    return checks


def _random_structure(ctx, rng):
    S = poisson.random_symplectic(ctx, rng)
    alpha = poisson.potential(S) + trunccalc.random_closed_form(ctx, 1, rng)
    return S, alpha, poisson.random_kappa(ctx, rng)


def suite_restricted(spec: SuiteSpec) -> list[Check]:
    p, m = spec.p, spec.m or 2
    ctx = trunccalc.algebra(p, m)
    count = spec.cases if spec.cases is not None else 50
    samples = spec.samples if spec.samples is not None else 200

    def case(i, rng):
        S, alpha, kappa = _random_structure(ctx, rng)
        R = poisson.restricted_from(S, alpha, kappa)
        describe = lambda: {"form": str(S.form), "alpha": str(alpha), "kappa": list(kappa.values)}  # noqa: E731
        checks = poisson.verify_restricted(R, samples, int(rng.integers(2 ** 31)))
        xi = poisson.field_from_form(S, alpha)
        checks.append(_caught("kappa_of round trip", lambda: poisson.kappa_of(R, xi, 1) == kappa, describe))
        other = poisson.random_kappa(ctx, rng)
        R2 = poisson.restricted_from(S, alpha, other)
        checks.append(_caught("difference is the kappa difference",
                              lambda: poisson.difference_of(R2, R) == kappa - other, describe))
        shifted = poisson.restricted_from(S, alpha + poisson.random_potential_shift(ctx, rng), kappa)
        checks.append(_caught("exact shift invariance",
                              lambda: poisson.difference_of(R, shifted) == trunccalc.FrobDeriv.zero(ctx), describe))
        j = i % m
        moved = poisson.restricted_from(S, alpha + trunccalc.representative(ctx, (j,)), kappa)
        checks.append(_caught("non-exact shift changes the structure",
                              lambda: not np.array_equal(moved.table, R.table), describe))
        return checks

    return _fan_out(case, count, spec.seed)


def suite_darboux(spec: SuiteSpec) -> list[Check]:
    p, m = spec.p, spec.m or 2
    ctx = trunccalc.algebra(p, m)
    count = spec.samples if spec.samples is not None else 50
    std = poisson.standard_form(ctx)

    def case(i, rng):
        S = poisson.random_symplectic(ctx, rng)
        describe = lambda: {"form": str(S.form)}  # noqa: E731
        return [_caught("pullback residual is zero",
                        lambda: poisson.pullback(poisson.darboux_normalize(S, seed=i), std) == S.form, describe)]

    checks = _fan_out(case, count, spec.seed)
    x = ctx.var(0)
    planted = poisson.check_symplectic(ctx.dx(0, 1).scale_poly(1 + x) + (std - ctx.dx(0, 1)))
    phi = poisson.darboux_normalize(planted)
    checks.append(Check("planted (1+x)dx^dy", info={"substitution": str(phi)})
                  .expect(poisson.pullback(phi, std) == planted.form))
    return checks


def suite_poisson_simple(spec: SuiteSpec) -> list[Check]:
    p, m = spec.p, spec.m or 2
    ctx = trunccalc.algebra(p, m)
    count = spec.samples if spec.samples is not None else 50
    S0 = poisson.check_symplectic(poisson.standard_form(ctx))

    def case(i, rng):
        f = trunccalc.random_poly(ctx, rng)
        while f.is_zero():
            f = trunccalc.random_poly(ctx, rng)
        S = S0 if i % 2 == 0 else poisson.random_symplectic(ctx, rng, top_class=None)
        dim = poisson.poisson_ideal_closure(S, f)
        return [Check("Poisson ideal closure is A").expect(dim == ctx.dim, lambda: {"f": str(f), "dim": dim})]

    checks = _fan_out(case, count, spec.seed)
    deepest = ctx.monomial([p - 1] * m)
    checks.append(Check("closure of the deepest monomial").expect(poisson.poisson_ideal_closure(S0, deepest) == ctx.dim))
    center = Check("Poisson center is the constants")
    for S in (S0, poisson.random_symplectic(ctx, case_rng(spec.seed, count), top_class=None)):
        basis = poisson.poisson_center(S)
        center.expect(len(basis) == 1 and basis[0].is_const(), lambda: {"dim": len(basis)})
    return checks + [center]


# -- Weyl algebra ----------------------------------------------------------------

def suite_weyl(spec: SuiteSpec) -> list[Check]:
    p, n = spec.p, spec.n or 1
    samples = spec.samples if spec.samples is not None else 200
    N = spec.trunc or p + 1
    D = weyl.WeylCtx(p, n, N)
    checks = [weyl.check_associativity(D)]
    checks += weyl.quasi_fr_check(D, samples, spec.seed)
    Dq = weyl.WeylCtx(p, n, max(N, p + 2))
    checks += weyl.verify_fr_const(Dq, samples, spec.seed)
    checks += weyl.verify_restr_quant(Dq, samples, spec.seed)
    center = weyl.center_basis(weyl.WeylCtx(p, n, p))
    expected = p + D.mono - 1
    checks.append(Check("center dimension at N = p", info={"dim": len(center)}).expect(len(center) == expected))
    low = Check("center mod h is constant")
    low.expect(all(z.mod_h().is_const() for z in center))
    checks.append(low)
    fib = Check("fiber representation bijective")
    for c in range(1, p):
        rep = weyl.fiber_matrix_iso(D, c)
        fib.expect(rep["bijective"] and rep["center_dim"] == 1, lambda: rep)
    checks.append(fib)
    return checks


def suite_cross_module(spec: SuiteSpec) -> list[Check]:
    p, n = spec.p, spec.n or 1
    D = weyl.WeylCtx(p, n, spec.trunc or p + 2)
    samples = spec.samples if spec.samples is not None else 200
    checks = [weyl.bracket_vs_poisson(D)]
    for c in poisson.verify_restricted(weyl.ReducedPower(D), samples, spec.seed):
        c.name = f"reduced power {c.name}"
        checks.append(c)
    return checks


# -- catalog ---------------------------------------------------------------------

SUITES: dict[str, tuple[Callable[[SuiteSpec], list[Check]], list[dict]]] = {
    "universal-L": (suite_universal_L, [{"p": 3}, {"p": 5}]),
    "lemma-sq": (suite_lemma_sq, [{"p": 3}, {"p": 5}, {"p": 7}]),
    "universal-P": (suite_universal_P, [{"p": 3}, {"p": 5, "samples": 20}]),
    "cartier": (suite_cartier, [{"p": p, "m": m} for p in (3, 5) for m in (1, 2)]),
    "car-p": (suite_car_p, [{"p": 3, "m": 2, "samples": 200}, {"p": 5, "m": 2, "samples": 50}]),
    "theorem-cent": (suite_theorem_cent, [{"p": 3, "m": 2, "samples": 100}, {"p": 5, "m": 2, "samples": 30}]),
    "restricted": (suite_restricted, [{"p": 3, "m": 2, "cases": 50, "samples": 200}]),
    "darboux": (suite_darboux, [{"p": 3, "m": 2, "samples": 50}]),
    "poisson-simple": (suite_poisson_simple, [{"p": 3, "m": 2, "samples": 50}]),
    "weyl": (suite_weyl, [{"p": 3, "n": 1, "trunc": 4, "samples": 200}]),
    "cross-module": (suite_cross_module, [{"p": 3, "n": 1, "samples": 200}]),
    "hI": (suite_hI, [{"p": 3, "m": 1}, {"p": 3, "m": 2}]),
}


def validate(spec: SuiteSpec) -> SuiteSpec:
    if spec.suite not in SUITES:
        raise UnknownSuite(spec.suite)
    try:
        linalg.check_prime(spec.p)
    except linalg.BadPrime as exc:
        raise BadParams(str(exc)) from exc
    if spec.m is not None and not 1 <= spec.m <= trunccalc.MAX_VARS:
        raise BadParams(f"m must be in [1, {trunccalc.MAX_VARS}]")
    if spec.suite in ("theorem-cent", "restricted", "darboux", "poisson-simple") and spec.m is not None and spec.m % 2:
        raise BadParams("symplectic suites need even m")
    if spec.n is not None and spec.n not in (1, 2):
        raise BadParams("n must be 1 or 2")
    if spec.trunc is not None and not 1 <= spec.trunc <= 2 * spec.p + 2:
        raise BadParams(f"trunc must be in [1, {2 * spec.p + 2}]")
    for name in ("samples", "cases"):
        v = getattr(spec, name)
        if v is not None and v < 0:
            raise BadParams(f"{name} must be non-negative")
    return spec


def run_suite(spec: SuiteSpec, timing: bool = False) -> Report:
    fn, _ = SUITES.get(spec.suite, (None, None))
    if fn is None:
        raise UnknownSuite(spec.suite)
    validate(spec)
    start = time.perf_counter()
    checks = fn(spec)
    return Report(spec.suite, spec.params(), checks, time.perf_counter() - start if timing else None)


def default_specs(suite: str, seed: int = 0) -> list[SuiteSpec]:
    """The acceptance grid for a suite."""
    if suite not in SUITES:
        raise UnknownSuite(suite)
    return [SuiteSpec(suite, seed=seed, **params) for params in SUITES[suite][1]]
