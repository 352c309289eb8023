from __future__ import annotations

import math

import numpy as np
import pytest
from conftest import half_op, identity_op, rotated_diag, single, zero_op

from ballcomp import criteria
from ballcomp.criteria import (
    COMPACT,
    INCONCLUSIVE,
    NONCOMPACT,
    UNBOUNDED,
    CriterionSequence,
    HypothesisError,
    SelfMapError,
    b1,
    b1_at,
    b2,
    boundedness_report,
    classical_indicators,
    classify,
    compactness_tail,
    condition_check,
    criterion_sequence,
    default_j_min,
    essential_bracket,
    loglog_slope,
    tail_statistics,
)
from ballcomp.funcmodel import PolyFn, PolyMap, SpaceParams, SymbolQuadruple, difference_image
from ballcomp.geometry import random_sphere
from ballcomp.norms import SearchConfig, monomial_norm_closed, weighted_sup_norm
from ballcomp.testfns import make_probe
from ballcomp.verify import InstanceSpec, random_instance

P11 = SpaceParams(1.0, 1.0)
LADDER = (0, 1, 2, 4, 8, 16, 32, 64, 128, 256)
CFG = SearchConfig(radial_points=32, sphere_samples=128, refine_iters=20)


# ---- closed-form criterion values


@pytest.mark.parametrize("n", [1, 2, 3])
def test_identity_criteria_are_one(n):
    seq = criterion_sequence(identity_op(n), P11, CFG, LADDER)
    np.testing.assert_allclose(seq.b1_values, 1.0, atol=1e-6)
    np.testing.assert_allclose(seq.b2_values, 1.0, atol=1e-6)


@pytest.mark.parametrize("n", [1, 2])
def test_half_map_criteria(n):
    seq = criterion_sequence(half_op(n), P11, CFG, LADDER)
    js = np.array(LADDER, dtype=float)
    np.testing.assert_allclose(seq.b1_values, 0.5**js, rtol=1e-6)
    np.testing.assert_allclose(seq.b2_values, 0.5 ** (js + 1), rtol=1e-6)


def test_identity_alpha1_beta2_decay():
    params = SpaceParams(1.0, 2.0)
    q = identity_op(1)
    vals = {j: b1(q, params, j, CFG).value for j in (8, 64, 256)}
    for j, v in vals.items():
        want = monomial_norm_closed(j, 2.0) / monomial_norm_closed(j, 1.0)
        assert v == pytest.approx(want, rel=1e-6)
    assert 64 * vals[64] == pytest.approx(256 * vals[256], rel=0.25)


@pytest.mark.parametrize("n", [2, 3])
def test_rotated_diagonal_map(n):
    # b1 = sup_xi |A* xi|^j = top singular value^j for u = 1, phi = A z
    phi, _ = rotated_diag(n)
    q = single(n, phi)
    for j in (1, 4, 16, 64):
        assert b1(q, P11, j, CFG).value == pytest.approx(0.9**j, rel=1e-8)
        # the pair xi = xi' = top direction already reaches 0.9^(j+1)
        assert b2(q, P11, j, CFG).value >= 0.9 ** (j + 1) * (1 - 1e-8)


def test_zero_difference_annihilation():
    for n in (1, 2):
        q0 = random_instance(InstanceSpec(7, n))
        q = SymbolQuadruple(q0.u, q0.u, q0.phi, q0.phi)
        rep = boundedness_report(q, P11, CFG, LADDER)
        assert np.all(rep.sequence.b1_values == 0) and np.all(rep.sequence.b2_values == 0)
        assert rep.classical.values() == (0.0, 0.0, 0.0)
        assert rep.bracket.lower == 0.0 and rep.bracket.upper_proxy == 0.0
        assert all(c.vacuous for c in rep.conditions)
        assert rep.verdict == COMPACT


def test_scale_covariance_exact_for_two():
    q = random_instance(InstanceSpec(11, 2))
    base = boundedness_report(q, P11, CFG, LADDER)
    scaled = boundedness_report(q.scaled(2.0), P11, CFG, LADDER)
    np.testing.assert_array_equal(scaled.sequence.b1_values, 2 * base.sequence.b1_values)
    np.testing.assert_array_equal(scaled.sequence.b2_values, 2 * base.sequence.b2_values)
    np.testing.assert_array_equal(scaled.classical.values(), 2 * np.array(base.classical.values()))
    assert scaled.bracket.lower == 2 * base.bracket.lower
    assert scaled.bracket.upper_proxy == 2 * base.bracket.upper_proxy
    assert scaled.verdict == base.verdict


def test_scale_covariance_general_lambda():
    q = random_instance(InstanceSpec(12, 1))
    base = criterion_sequence(q, P11, CFG, LADDER)
    scaled = criterion_sequence(q.scaled(0.37), P11, CFG, LADDER)
    np.testing.assert_allclose(scaled.b1_values, 0.37 * base.b1_values, rtol=1e-12)


def test_n1_collapse():
    rng = np.random.default_rng(0)
    for t in range(5):
        q = random_instance(InstanceSpec(t, 1))
        vals = [b1_at(q, P11, 7, np.exp(1j * th), CFG) for th in rng.uniform(0, 2 * np.pi, 6)]
        assert np.var(vals) <= 1e-10
        assert b2(q, P11, 7, CFG).value == pytest.approx(b1(q, P11, 8, CFG).value, rel=1e-6)


def test_probe_image_matches_criterion():
    # the normalized probe's image norm is b1 at the witness direction
    q = random_instance(InstanceSpec(4, 2))
    for j in (2, 16):
        r = b1(q, P11, j, CFG)
        probe = make_probe(j, r.xi, 1.0)
        img = weighted_sup_norm(difference_image(q, probe), 1.0, 2, CFG, hints=[r.numerator.witness]).value
        assert img == pytest.approx(r.value, rel=1e-6)


def test_b1_at_is_below_b1():
    q = random_instance(InstanceSpec(5, 2))
    best = b1(q, P11, 4, CFG).value
    for xi in random_sphere(np.random.default_rng(1), 5, 2):
        assert b1_at(q, P11, 4, xi, CFG) <= best * (1 + 1e-9)


def test_workers_do_not_change_results():
    q = random_instance(InstanceSpec(9, 2))
    a = criterion_sequence(q, P11, CFG, (0, 2, 8), workers=1)
    b = criterion_sequence(q, P11, CFG, (0, 2, 8), workers=4)
    np.testing.assert_array_equal(a.b1_values, b.b1_values)
    np.testing.assert_array_equal(a.b2_values, b.b2_values)


def test_negative_degree_and_bad_ladders():
    with pytest.raises(ValueError):
        b1(identity_op(1), P11, -1)
    with pytest.raises(ValueError):
        criterion_sequence(identity_op(1), P11, CFG, (0, 4, 2))
    with pytest.raises(ValueError):
        CriterionSequence([0, 0], [], [])


# ---- tail statistics


JS = [0, 1, 2, 4, 8, 16, 32, 64, 128, 256]


def test_tail_synthetic():
    js = np.array(JS, dtype=float)
    st = tail_statistics(JS, np.ones(len(JS)))
    assert st.tail_max == 1 and abs(st.slope_b1) < 1e-12 and st.verdict == NONCOMPACT
    inv = np.where(js > 0, 1.0 / np.maximum(js, 1), 1.0)
    st = tail_statistics(JS, inv)
    assert st.slope_b1 == pytest.approx(-1.0, abs=1e-12) and st.verdict == COMPACT
    st = tail_statistics(JS, np.zeros(len(JS)))
    assert st.tail_max == 0 and st.verdict == COMPACT
    st = tail_statistics(JS, np.sqrt(js))
    assert st.verdict == UNBOUNDED and not st.bounded


def test_tail_uses_larger_slope():
    js = np.array(JS, dtype=float)
    st = tail_statistics(JS, 2.0**-js, np.sqrt(np.maximum(js, 1)))
    assert st.slope == st.slope_b2 and st.verdict == UNBOUNDED


def test_tail_needs_four_points():
    with pytest.raises(ValueError):
        tail_statistics([0, 1, 2, 4], np.ones(4), j_min=2)
    assert default_j_min(JS) == 16
    with pytest.raises(ValueError):
        default_j_min([0])


def test_classify_thresholds():
    assert classify(1.0, 1.0, 0.06) == UNBOUNDED
    assert classify(0.0, 0.0, math.nan) == COMPACT
    assert classify(0.1, 1.0, -0.06) == COMPACT
    assert classify(0.6, 1.0, -0.06) == INCONCLUSIVE
    assert classify(1.0, 1.0, 0.0) == NONCOMPACT
    assert classify(0.3, 1.0, 0.0) == INCONCLUSIVE
    assert classify(1.0, 1.0, math.nan) == INCONCLUSIVE


def test_loglog_slope_ignores_zeros():
    assert loglog_slope([1, 2, 4], [0, 0, 0]) != loglog_slope([1, 2, 4], [1, 2, 4])
    assert math.isnan(loglog_slope([1, 2], [0, 1]))
    assert loglog_slope([1, 2, 4, 8], [1, 2, 4, 8]) == pytest.approx(1.0)


def test_compactness_tail_from_sequence():
    seq = criterion_sequence(half_op(1), P11, CFG, LADDER)
    st = compactness_tail(seq, 32)
    assert st.tail_max == pytest.approx(2.0**-32, rel=1e-6) and st.verdict == COMPACT


# ---- conditions


def test_condition_examples():
    q = SymbolQuadruple(PolyFn.constant(2), PolyFn.constant(2), PolyMap.constant([0, 0]), PolyMap.linear(0.5 * np.eye(2)))
    rep = condition_check(q, "forward", CFG)
    assert rep.inf_margin == pytest.approx(1.0, abs=1e-12)
    assert 0 < rep.degenerate_fraction < 0.01  # only the origin is degenerate
    rep = condition_check(half_op(2), "forward", CFG)
    assert rep.vacuous and rep.status == "degenerate: condition vacuous"
    q1 = SymbolQuadruple(PolyFn.constant(1), PolyFn.constant(1), PolyMap.linear([[0.5]]), PolyMap.linear([[-0.5]]))
    for which in ("forward", "backward"):
        # the margin at a is 1 + |a|/2, so the infimum 1 is approached at the degenerate origin
        rep = condition_check(q1, which, CFG)
        assert rep.inf_margin == pytest.approx(1 + abs(rep.argmin[0]) / 2, rel=1e-12)
        assert rep.inf_margin < 1.05
    with pytest.raises(ValueError):
        condition_check(q1, "sideways")


def test_condition_margin_is_a_lower_bound():
    q = random_instance(InstanceSpec(2, 2))
    rep = condition_check(q, "forward", CFG)
    a = rep.argmin
    p, s = q.phi(a), q.psi(a)
    from ballcomp.geometry import mobius

    w = mobius(p, s)
    xi = w / np.linalg.norm(w)
    direct = (1 - np.vdot(p, p).real) / abs(1 - np.vdot(xi, p))
    assert direct == pytest.approx(rep.inf_margin, rel=1e-12)


# ---- classical indicators


def test_classical_examples():
    assert classical_indicators(zero_op(2), P11, CFG).values() == (0.0, 0.0, 0.0)
    q = single(1, PolyMap.identity(1))
    q = SymbolQuadruple(q.u, PolyFn.zero(1), q.phi, PolyMap.constant([0.0]))
    du, dv, dd = classical_indicators(q, P11, CFG).values()
    assert du >= 0.995 and dv == 0.0 and dd == pytest.approx(1.0, abs=1e-9)
    q = SymbolQuadruple(PolyFn.constant(2), PolyFn.constant(2), PolyMap.identity(2), PolyMap.identity(2))
    assert classical_indicators(q, P11, CFG).values() == (0.0, 0.0, 0.0)


# ---- essential bracket and full report


def test_bracket_canonical():
    b = essential_bracket(zero_op(2), P11, CFG, LADDER)
    assert (b.lower, b.upper_proxy) == (0.0, 0.0)
    b = essential_bracket(identity_op(1), P11, CFG, LADDER)
    assert b.lower >= 1 - 1e-6 and b.upper_proxy >= 1
    assert b.upper_proxy == pytest.approx(2.0, abs=1e-6)
    b = essential_bracket(half_op(2), P11, CFG, LADDER)
    assert b.lower <= 1e-12 and b.upper_proxy <= 1e-12
    assert any("screen" in s for s in b.notes)


def test_bracket_screen_rejects_unbounded_single():
    q = SymbolQuadruple(PolyFn.constant(1), PolyFn.constant(1), PolyMap.identity(1), PolyMap.linear([[0.5]]))
    with pytest.raises(HypothesisError, match="not in theorem's hypothesis"):
        essential_bracket(q, SpaceParams(1.0, 0.5), CFG, LADDER)


def test_report_canonical_verdicts():
    assert boundedness_report(zero_op(2), P11, CFG, LADDER).verdict == COMPACT
    rep = boundedness_report(identity_op(1), P11, CFG, LADDER, delta_margin=0.0)
    assert rep.verdict == NONCOMPACT
    assert rep.verdicts == {"boundedness": "bounded-indicated", "compactness": "non-compact-indicated"}
    rep = boundedness_report(half_op(2), P11, CFG, LADDER)
    assert rep.verdict == COMPACT and rep.tail.tail_max == pytest.approx(2.0**-16, rel=1e-6)
    rep = boundedness_report(identity_op(1), SpaceParams(1.0, 0.5), CFG, LADDER, delta_margin=0.0)
    assert rep.verdict == UNBOUNDED and rep.tail.slope == pytest.approx(0.5, abs=0.1)
    assert rep.bracket is None and any("bracket skipped" in s for s in rep.notes)


def test_report_rejects_non_selfmap():
    with pytest.raises(SelfMapError):
        boundedness_report(identity_op(1), P11, CFG, LADDER)


def test_report_flags_weak_conditions(monkeypatch):
    q = random_instance(InstanceSpec(3, 2))
    ladder = (0, 1, 2, 4, 8, 16, 32, 64)
    rep = boundedness_report(q, P11, CFG, ladder)
    assert not any("sufficiency direction" in s for s in rep.notes)
    # raise the floor above every attainable margin (margins are at most 2)
    monkeypatch.setattr(criteria, "CONDITION_FLOOR", 3.0)
    rep = boundedness_report(q, P11, CFG, ladder)
    assert any("forward, backward below" in s and "sufficiency direction" in s for s in rep.notes)
