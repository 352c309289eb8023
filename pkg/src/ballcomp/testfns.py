"""Test functions f_a, g_{phi,psi,a}, the ratios D_{u,phi}, and flat_alpha bounds."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .funcmodel import PolyFn, PolyMap, SpaceParams, SymbolQuadruple, ipow
from .geometry import as_vector, mobius, norm, pseudo_dist, random_ball
from .norms import monomial_norm_closed, pair_monomial_norm_closed

# Below this |Phi_{phi(a)}(psi(a))| the direction xi_a is rounding noise.
DEGENERATE_G = 1e-13

Kind = Literal["f_a", "g_forward", "g_backward", "probe"]


@dataclass(frozen=True)
class TestFunction:
    """A holomorphic function with ||.||_alpha <= 1 and the data that built it."""

    kind: Kind
    base: np.ndarray
    alpha: float
    evaluator: Callable[[np.ndarray], np.ndarray]
    quad: SymbolQuadruple | None = None
    degenerate: bool = False

    __test__ = False  # keep pytest from collecting this class

    def __call__(self, z):
        z = as_vector(z)
        if z.ndim == 1:
            return complex(self.evaluator(z[None, :])[0])
        return self.evaluator(z)


def _f_a_eval(a: np.ndarray, alpha: float):
    scale = (1.0 - float(np.vdot(a, a).real)) ** alpha
    two_alpha = 2.0 * alpha
    integer = float(two_alpha).is_integer()
    ca = np.conj(a)

    def evaluate(z):
        w = 1.0 - z @ ca
        # Re(1 - <z,a>) > 0 on the ball, so the principal branch is continuous
        p = ipow(w, int(two_alpha)) if integer else np.power(w, two_alpha)
        return scale / p

    return evaluate


def make_f_a(a, alpha: float) -> TestFunction:
    """f_a(z) = (1-|a|^2)^alpha / (1-<z,a>)^(2 alpha)."""
    a = as_vector(a)
    if norm(a) >= 1.0:
        raise ValueError("base point must lie in the open ball")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return TestFunction("f_a", a, alpha, _f_a_eval(a, alpha))


def make_g(q: SymbolQuadruple, a, alpha: float, direction: str = "forward") -> TestFunction:
    """g_{phi,psi,a} (forward) or g_{psi,phi,a} (backward).

    Forward: f_{phi(a)}(z) <Phi_{phi(a)}(z), xi_a> with xi_a the unit vector
    along Phi_{phi(a)}(psi(a)); the zero function when that point is 0.
    """
    a = as_vector(a)
    if norm(a) >= 1.0:
        raise ValueError("base point must lie in the open ball")
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    p, s = q.phi(a), q.psi(a)
    if direction == "backward":
        p, s = s, p
    w = mobius(p, s)
    rho = norm(w)
    kind = "g_forward" if direction == "forward" else "g_backward"
    if rho < DEGENERATE_G:
        return TestFunction(kind, a, alpha, lambda z: np.zeros(z.shape[0], dtype=complex), q, True)
    cxi = np.conj(w / rho)
    fp = _f_a_eval(p, alpha)

    def evaluate(z):
        return fp(z) * (mobius(p, z) @ cxi)

    return TestFunction(kind, a, alpha, evaluate, q)


def make_probe(j: int, xi, alpha: float, xi2=None) -> TestFunction:
    """<z,xi>^j [<z,xi2>] divided by its H^inf_alpha norm."""
    xi = as_vector(xi)
    if xi2 is None:
        scale = 1.0 / monomial_norm_closed(j, alpha)

        def evaluate(z):
            return scale * ipow(z @ np.conj(xi), j)

    else:
        xi2 = as_vector(xi2)
        overlap = min(abs(complex(np.vdot(xi2, xi))), 1.0)
        scale = 1.0 / pair_monomial_norm_closed(j, alpha, overlap)

        def evaluate(z):
            return scale * ipow(z @ np.conj(xi), j) * (z @ np.conj(xi2))

    return TestFunction("probe", xi, alpha, evaluate)


def d_ratio(u: PolyFn, phi: PolyMap, params: SpaceParams, z):
    """D_{u,phi}(z) = (1-|z|^2)^beta u(z) / (1-|phi(z)|^2)^alpha."""
    z = as_vector(z)
    pz = np.asarray(norm(phi(z)))
    if np.any(pz >= 1.0):
        raise ValueError("|phi(z)| >= 1: phi is not a self-map of the ball at z")
    zz = np.asarray(norm(z))
    out = (1.0 - zz**2) ** params.beta * u(z) / (1.0 - pz**2) ** params.alpha
    return complex(out) if np.ndim(out) == 0 else out


def flat_alpha_bounds(z, w, alpha: float, dict_size: int = 64, seed: int = 0) -> tuple[float, float]:
    """Two-sided information on flat_alpha(z, w).

    ``lower`` maximizes |(1-|z|^2)^a f(z) - (1-|w|^2)^a f(w)| over the unit-norm
    dictionary {1} U {f_c : c in {z, w} U (dict_size - 2 seeded ball points)}.
    ``upper_scale`` is rho(z, w); the true value is at most a constant times it.
    """
    z, w = as_vector(z), as_vector(w)
    n = z.shape[0]
    rng = np.random.default_rng(seed)
    centers = np.concatenate([z[None], w[None], random_ball(rng, max(dict_size - 2, 0), n, 0.999)])
    pts = np.stack([z, w])
    wz = (1.0 - norm(z) ** 2) ** alpha
    ww = (1.0 - norm(w) ** 2) ** alpha
    best = abs(wz - ww)  # f = 1
    for c in centers:
        vals = _f_a_eval(c, alpha)(pts)
        best = max(best, abs(wz * vals[0] - ww * vals[1]))
    return float(best), float(pseudo_dist(z, w))
