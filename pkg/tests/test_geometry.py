from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ballcomp.geometry import (
    inner,
    mobius,
    norm,
    proj_pair,
    pseudo_dist,
    random_ball,
    random_sphere,
    zhu_identity_residual,
)

E1 = np.array([1.0, 0.0], dtype=complex)
E2 = np.array([0.0, 1.0], dtype=complex)


def disc_1d(a: complex, z: complex) -> complex:
    # one-variable automorphism written out directly
    return (a - z) / (1 - z * np.conj(a))


@st.composite
def ball_points(draw, n: int, rmax: float = 0.99):
    re = draw(st.lists(st.floats(-1, 1), min_size=n, max_size=n))
    im = draw(st.lists(st.floats(-1, 1), min_size=n, max_size=n))
    r = draw(st.floats(0.0, rmax))
    z = np.array(re) + 1j * np.array(im)
    nz = np.linalg.norm(z)
    return z * (r / nz) if nz > 0 else z


def test_inner_examples():
    assert inner(E1, E1) == 1
    assert inner(np.array([0.3, 0.4j]), np.zeros(2)) == 0
    assert inner(np.array([0.3, 0.4j]), E1) == pytest.approx(0.3)


def test_inner_dimension_mismatch():
    with pytest.raises(ValueError):
        inner(np.ones(2), np.ones(3))


@given(ball_points(3), ball_points(3))
def test_inner_conjugate_symmetric(z, w):
    assert inner(z, w) == pytest.approx(np.conj(inner(w, z)), abs=1e-15)


def test_proj_pair_examples():
    a = np.array([0.3 + 0.1j, -0.2j])
    p, q = proj_pair(a, a)
    np.testing.assert_allclose(p, a, atol=1e-15)
    np.testing.assert_allclose(q, 0, atol=1e-15)
    p, q = proj_pair(E1, E2)
    np.testing.assert_allclose(p, 0)
    np.testing.assert_allclose(q, E2)
    z = np.array([0.3 - 0.2j])
    p, q = proj_pair(np.array([0.5]), z)
    np.testing.assert_allclose(p, z)
    np.testing.assert_allclose(q, 0, atol=1e-16)


def test_proj_pair_zero_center():
    with pytest.raises(ValueError):
        proj_pair(np.zeros(2), E1)


@given(ball_points(3), ball_points(3))
def test_proj_pair_decomposes(a, z):
    if norm(a) == 0:
        return
    p, q = proj_pair(a, z)
    np.testing.assert_allclose(p + q, z, atol=1e-15)
    assert abs(inner(p, q)) < 1e-14


def test_mobius_examples():
    a = np.array([0.3 + 0.2j, -0.1j])
    assert np.all(mobius(a, a) == 0)
    np.testing.assert_allclose(mobius(a, np.zeros(2)), a, atol=1e-16)
    assert complex(mobius(0.5, 0.25)[0]) == pytest.approx(2 / 7, abs=1e-15)
    z = np.array([0.1, 0.7j])
    np.testing.assert_array_equal(mobius(np.zeros(2), z), -z)


def test_mobius_rejects_outside_center():
    with pytest.raises(ValueError):
        mobius(np.array([1.0, 0.0]), E1 * 0.1)


def test_mobius_tiny_center_matches_zero_branch():
    z = np.array([0.2 + 0.1j, -0.3j])
    a = np.array([1e-16, 0.0])
    np.testing.assert_allclose(mobius(a, z), -z, atol=1e-15)


@given(st.complex_numbers(max_magnitude=0.99), st.complex_numbers(max_magnitude=0.99))
def test_mobius_one_dimension_formula(a, z):
    got = complex(mobius(np.array([a]), np.array([z]))[0])
    assert got == pytest.approx(disc_1d(a, z), abs=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_mobius_involution_and_ball(n):
    rng = np.random.default_rng(n)
    a = random_ball(rng, 2000, n, 0.99)
    z = random_ball(rng, 2000, n, 0.99)
    w = mobius(a, z)
    assert np.all(norm(w) < 1.0)
    assert np.max(norm(mobius(a, w) - z)) <= 1e-10


def test_mobius_accepts_boundary_points():
    a = np.array([0.5, 0.2j])
    xi = np.array([0.6, 0.8j])
    out = mobius(a, xi)
    assert norm(out) == pytest.approx(1.0, abs=1e-12)


def test_pseudo_dist_examples():
    z = np.array([0.3, -0.4j])
    assert pseudo_dist(z, z) == 0.0
    assert pseudo_dist(z, np.zeros(2)) == pytest.approx(0.5, abs=1e-15)
    assert pseudo_dist(0.5, 0.25) == pytest.approx(2 / 7, abs=1e-15)


@given(ball_points(2), ball_points(2))
def test_pseudo_dist_symmetric_and_in_unit_interval(z, w):
    d = pseudo_dist(z, w)
    assert 0.0 <= d < 1.0
    assert d == pytest.approx(pseudo_dist(w, z), abs=1e-12)


@given(ball_points(2), ball_points(2), ball_points(2))
def test_pseudo_dist_invariant(b, z, w):
    lhs = pseudo_dist(mobius(b, z), mobius(b, w))
    assert abs(lhs - pseudo_dist(z, w)) <= 1e-9


def test_zhu_examples():
    z = np.array([0.3 + 0.1j, 0.2])
    w = np.array([-0.1, 0.5j])
    assert zhu_identity_residual(np.zeros(2), z, w) == 0.0
    assert zhu_identity_residual(z, z, z) <= 1e-15


@given(ball_points(3), ball_points(3), ball_points(3))
def test_zhu_identity(a, z, w):
    assert zhu_identity_residual(a, z, w) <= 1e-12


def test_random_sampling_shapes():
    rng = np.random.default_rng(0)
    s = random_sphere(rng, 100, 3)
    np.testing.assert_allclose(norm(s), 1.0, atol=1e-12)
    b = random_ball(rng, 100, 3, 0.5)
    assert b.shape == (100, 3) and np.all(norm(b) <= 0.5)
