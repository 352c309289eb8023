"""Complex unit-ball geometry.

All functions treat the last array axis as the coordinate axis of C^n and
broadcast over leading axes, so a batch of points has shape ``(..., n)``.
The Hermitian pairing is linear in the first slot::

    <z, w> = sum_i z_i * conj(w_i)
"""

from __future__ import annotations

import numpy as np

# |a| below this is routed to the a = 0 branch of the automorphism.
DEGENERATE_CENTER = 1e-14


def as_vector(z) -> np.ndarray:
    """Coerce a scalar or sequence to a complex array with a coordinate axis."""
    arr = np.asarray(z, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    return arr


def _check_dims(z: np.ndarray, w: np.ndarray) -> None:
    if z.shape[-1] != w.shape[-1]:
        raise ValueError(f"dimension mismatch: {z.shape[-1]} != {w.shape[-1]}")


def inner(z, w) -> np.ndarray | complex:
    z, w = as_vector(z), as_vector(w)
    _check_dims(z, w)
    out = np.sum(z * np.conj(w), axis=-1)
    return complex(out) if out.ndim == 0 else out


def norm(z) -> np.ndarray | float:
    z = as_vector(z)
    out = np.sqrt(np.sum(z.real**2 + z.imag**2, axis=-1))
    return float(out) if out.ndim == 0 else out


def proj_pair(a, z) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(P_a z, Q_a z)``: the projection of z onto span(a) and its complement."""
    a, z = as_vector(a), as_vector(z)
    _check_dims(a, z)
    aa = np.sum(a * np.conj(a), axis=-1, keepdims=True).real
    if np.any(aa == 0.0):
        raise ValueError("projection onto span(a) undefined for a = 0")
    p = (np.sum(z * np.conj(a), axis=-1, keepdims=True) / aa) * a
    return p, z - p


def mobius(a, z) -> np.ndarray:
    """The involutive automorphism Phi_a exchanging 0 and a.

    ``z`` may lie on the closed ball; the denominator 1 - <z, a> stays away
    from zero as long as |a| < 1.
    """
    a, z = as_vector(a), as_vector(z)
    _check_dims(a, z)
    a, z = np.broadcast_arrays(a, z)
    aa = np.sum(a.real**2 + a.imag**2, axis=-1, keepdims=True)
    if np.any(aa >= 1.0):
        raise ValueError("automorphism center must lie in the open ball")
    za = np.sum(z * np.conj(a), axis=-1, keepdims=True)
    denom = 1.0 - za
    if np.any(denom == 0):
        raise ZeroDivisionError("1 - <z, a> vanished")

    small = np.sqrt(aa) < DEGENERATE_CENTER
    safe_aa = np.where(small, 1.0, aa)
    p = (za / safe_aa) * a
    q = z - p
    s = np.sqrt(1.0 - aa)
    out = (a - p - s * q) / denom
    # tiny a: P_a z + s_a Q_a z = z + O(|a|^2); reduces to -z at a = 0
    out = np.where(small, (a - z) / denom, out)
    # Phi_a(a) = 0 exactly, not just to rounding
    return np.where(np.all(z == a, axis=-1, keepdims=True), 0.0, out)


def pseudo_dist(z, w) -> np.ndarray | float:
    """rho(z, w) = |Phi_w(z)|."""
    out = norm(mobius(w, z))
    return out


def zhu_identity_residual(a, z, w) -> np.ndarray | float:
    r"""Residual of the identity

    1 - <Phi_a(z), Phi_a(w)> = (1-|a|^2)(1-<z,w>) / ((1-<z,a>)(1-<a,w>)).
    """
    a, z, w = as_vector(a), as_vector(z), as_vector(w)
    lhs = 1.0 - inner(mobius(a, z), mobius(a, w))
    aa = np.asarray(inner(a, a)).real
    rhs = (1.0 - aa) * (1.0 - inner(z, w)) / ((1.0 - inner(z, a)) * (1.0 - inner(a, w)))
    out = np.abs(lhs - rhs)
    return float(out) if np.ndim(out) == 0 else out


def random_ball(rng: np.random.Generator, count: int, n: int, rmax: float = 1.0) -> np.ndarray:
    """Uniform samples from the ball of radius ``rmax`` in C^n, shape (count, n)."""
    d = random_sphere(rng, count, n)
    r = rmax * rng.random(count) ** (1.0 / (2 * n))
    return d * r[:, None]


def random_sphere(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    g = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    return g / norm(g)[:, None]
