"""One test per acceptance criterion, run over the acceptance grid with seed 42."""
import time

import pytest

from charp import trunccalc
from charp.suites import default_specs, run_suite

SEED = 42


def run_grid(number: int, suite: str, limit: float):
    start = time.perf_counter()
    reports = [run_suite(spec) for spec in default_specs(suite, SEED)]
    elapsed = time.perf_counter() - start
    failures = [(r.params, c.name, c.counterexample) for r in reports for c in r.checks if not c.ok]
    ok = not failures and elapsed < limit
    cases = sum(r.cases for r in reports)
    print(f"criterion {number:2d} [{suite}] {'PASS' if ok else 'FAIL'}: "
          f"{cases} cases, {len(failures)} failing checks, {elapsed:.2f}s (limit {limit:g}s)")
    for params, name, example in failures:
        print(f"    {params} {name}: {example}")
    return failures, elapsed


@pytest.mark.parametrize("number, suite, limit", [
    (1, "universal-L", 5),
    (2, "lemma-sq", 1),
    (3, "universal-P", 30),
    (4, "cartier", 5),
    (5, "car-p", 60),
    (6, "theorem-cent", 120),
    (7, "restricted", 120),
    (8, "darboux", 120),
    (9, "poisson-simple", 30),
    (10, "weyl", 60),
    (11, "cross-module", 30),
    (12, "hI", 10),
])
def test_criterion(number, suite, limit):
    failures, elapsed = run_grid(number, suite, limit)
    assert not failures
    assert elapsed < limit


def test_hI_one_has_codimension_one():
    # Closed 1-forms have dimension (dim A - 1) + m; the condition cuts out m of them.
    for m in (1, 2):
        ctx = trunccalc.algebra(3, m)
        sections = trunccalc.hI_sections(ctx, 1)
        assert len(sections) == ctx.dim - 1
        for s in sections:
            assert trunccalc.is_closed(s)
            assert not ((trunccalc.cartier(s).coeffs - s.const_part().coeffs) % 3).any()
