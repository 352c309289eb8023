"""The ten acceptance criteria at their stated tolerances.

Each test prints, and records for the terminal summary, one line
"criterion N: PASS|FAIL <detail>". Run alone with

    python3 -m pytest tests/test_acceptance.py -v
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest
from conftest import ACCEPTANCE_LINES, half_op, identity_op, zero_op

from ballcomp.cli import main as cli_main
from ballcomp.criteria import (
    COMPACT,
    NONCOMPACT,
    UNBOUNDED,
    b1,
    b1_at,
    b2,
    boundedness_report,
    criterion_sequence,
    essential_bracket,
)
from ballcomp.funcmodel import SpaceParams, ipow
from ballcomp.geometry import random_ball, random_sphere
from ballcomp.norms import SearchConfig, monomial_norm_closed, weighted_sup_norm
from ballcomp.testfns import make_f_a, make_g
from ballcomp.verify import InstanceSpec, geometry_suite, merge_reports, pointwise_suite, random_instance

DYADIC = (0, 1, 2, 4, 8, 16, 32, 64, 128, 256)
P11 = SpaceParams(1.0, 1.0)


def record(k: int, ok: bool, detail: str) -> None:
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES[k] = line
    print(line)
    assert ok, line


def test_criterion_01_monomial_norm_oracle():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = 0.0
    for n in (1, 2, 3):
        for alpha in (0.5, 1.0, 2.0):
            for xi in random_sphere(rng, 8, n):
                cx = np.conj(xi)
                for j in DYADIC:
                    est = weighted_sup_norm(lambda z, j=j: ipow(z @ cx, j), alpha, n).value
                    worst = max(worst, abs(est / monomial_norm_closed(j, alpha) - 1.0))
    elapsed = time.perf_counter() - t0
    record(1, worst <= 1e-6 and elapsed < 60.0, f"max rel error {worst:.3g}, runtime {elapsed:.1f}s")


def test_criterion_02_asymptotic_constant():
    val = 200 * monomial_norm_closed(200, 1.0)
    ref = 2 / math.e
    ok = abs(val - 0.73212) <= 1e-5 and abs(val / ref - 1) <= 0.05
    record(2, ok, f"200 * closed(200, 1) = {val:.10f} (target 0.73212 +- 1e-5), ratio to 2/e = {val / ref:.6f}")


def test_criterion_03_geometry_identities():
    reps = [geometry_suite(InstanceSpec(0, n), 10_000) for n in (1, 2, 3)]
    merged = merge_reports(reps)
    c = merged.empirical_constants
    names = ("phi_a(a)", "phi_a(0)-a", "involution", "zhu_identity")
    ok = not [f for f in merged.failures if f["check"] in names]
    record(3, ok, ", ".join(f"{k}={c[f'max_err[{k}]']:.2g}" for k in names))


def test_criterion_04_rho_invariance():
    reps = [geometry_suite(InstanceSpec(1, n), 10_000) for n in (1, 2, 3)]
    dev = max(r.empirical_constants["max_err[rho_invariance]"] for r in reps)
    record(4, dev <= 1e-9, f"max deviation {dev:.3g} over 3 x 10^4 triples")


def test_criterion_05_test_function_norms():
    cfg = SearchConfig()
    f_err = g_max = g_zero = 0.0
    pairs = 0
    for n in (1, 2):
        spec = InstanceSpec(5, n)
        for t in range(50):
            ts = spec.trial(t)
            q = random_instance(ts)
            rng = np.random.default_rng(ts.seed)
            for a in random_ball(rng, 10, n, 0.995):
                f = make_f_a(a, 1.0)
                f_err = max(f_err, abs(weighted_sup_norm(f.evaluator, 1.0, n, cfg).value - 1.0))
                g = make_g(q, a, 1.0, "forward")
                g_max = max(g_max, weighted_sup_norm(g.evaluator, 1.0, n, cfg).value)
                g_zero = max(g_zero, abs(g(q.phi(a))))
                pairs += 1
    ok = f_err <= 1e-6 and g_max <= 1 + 1e-9 and g_zero <= 1e-12
    record(5, ok, f"{pairs} pairs: max |norm f_a - 1| {f_err:.2g}, max norm g {g_max:.12f}, max |g(phi(a))| {g_zero:.2g}")


def test_criterion_06_pointwise_constant_one():
    reps = [pointwise_suite(InstanceSpec(6, n), 100, 50) for n in (1, 2)]
    merged = merge_reports(reps)
    worst = merged.empirical_constants["max_ratio(i,ii)"]
    record(6, merged.passed, f"200 instances x 50 points, violations {len(merged.failures)}, max ratio {worst:.4f}")


def test_criterion_07_canonical_verdicts():
    details, ok = [], True
    # (a) zero operator
    rep = boundedness_report(zero_op(2), P11, SearchConfig(), DYADIC)
    a_ok = bool(np.all(rep.sequence.b1_values == 0) and np.all(rep.sequence.b2_values == 0))
    details.append(f"(a) max criterion {max(rep.sequence.b1_values.max(), rep.sequence.b2_values.max()):.1g}")
    # (b) identity
    rep = boundedness_report(identity_op(2), P11, SearchConfig(), DYADIC, delta_margin=0.0)
    dev = float(np.max(np.abs(rep.sequence.b1_values - 1)))
    b_ok = dev <= 1e-6 and rep.verdict == NONCOMPACT
    details.append(f"(b) max |b1-1| {dev:.2g}, {rep.verdict}")
    # (c) z/2
    rep = boundedness_report(half_op(2), P11, SearchConfig(), DYADIC)
    sel = np.asarray(rep.sequence.js) >= 64
    tail = float(max(rep.sequence.b1_values[sel].max(), rep.sequence.b2_values[sel].max()))
    c_ok = tail < 1e-10 and rep.verdict == COMPACT
    details.append(f"(c) tail max {tail:.2g}, {rep.verdict}")
    # (d) identity into a smaller weight
    rep = boundedness_report(identity_op(1), SpaceParams(1.0, 0.5), SearchConfig(), DYADIC, delta_margin=0.0)
    d_ok = abs(rep.tail.slope - 0.5) <= 0.1 and rep.verdict == UNBOUNDED
    details.append(f"(d) slope {rep.tail.slope:.4f}, {rep.verdict}")
    ok = a_ok and b_ok and c_ok and d_ok
    record(7, ok, "; ".join(details))


def test_criterion_08_one_dimensional_collapse():
    cfg = SearchConfig()
    var_max = rel_max = 0.0
    spec = InstanceSpec(8, 1)
    phases = np.exp(2j * np.pi * np.arange(8) / 8 + 0.3j)
    for t in range(20):
        q = random_instance(spec.trial(t))
        for j in (1, 5, 20):
            vals = [b1_at(q, P11, j, np.array([w]), cfg) for w in phases]
            var_max = max(var_max, float(np.var(vals)))
            up = b1(q, P11, j + 1, cfg).value
            if up > 0:
                rel_max = max(rel_max, abs(b2(q, P11, j, cfg).value - up) / up)
    record(8, var_max <= 1e-10 and rel_max <= 1e-5, f"max xi-variance {var_max:.2g}, max |b2(j)-b1(j+1)|/b1(j+1) {rel_max:.2g}")


def test_criterion_09_essential_bracket():
    cfg = SearchConfig()
    za = essential_bracket(zero_op(2), P11, cfg, DYADIC)
    zb = essential_bracket(identity_op(2), P11, cfg, DYADIC)
    zc = essential_bracket(half_op(2), P11, cfg, DYADIC)
    ok = (
        za.lower == 0 and za.upper_proxy == 0
        and zb.lower >= 1 - 1e-6 and zb.upper_proxy >= 1
        and zc.lower <= 1e-8 and zc.upper_proxy <= 1e-8
    )
    record(
        9,
        ok,
        f"(a) [{za.lower:.2g}, {za.upper_proxy:.2g}] (b) [{zb.lower:.12f}, {zb.upper_proxy:.6f}] "
        f"(c) [{zc.lower:.2g}, {zc.upper_proxy:.2g}]",
    )


def test_criterion_10_reproducible_cli(tmp_path):
    from pathlib import Path

    cfg = Path(__file__).parent / "fixtures" / "half.json"
    outs = [tmp_path / "run1", tmp_path / "run2"]
    codes = [cli_main(["analyze", str(cfg), "--out", str(o)]) for o in outs]
    names = sorted(p.name for p in outs[0].glob("*.csv"))
    same = all((outs[0] / n).read_bytes() == (outs[1] / n).read_bytes() for n in names)
    record(10, codes == [0, 0] and same and len(names) == 3, f"{len(names)} CSV files byte-identical: {same}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
