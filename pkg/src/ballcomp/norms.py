"""Weighted sup-norms ``||f||_alpha = sup (1-|z|^2)^alpha |f(z)|`` on the unit ball.

The search is a radial grid (cosine-clustered toward the sphere) times a
direction set, followed by compass refinement of the best grid points. By
the maximum principle only |f| on spheres matters, so every search is a
sup over ``|z| <= r_cap``. Results are lower bounds of the true sup.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .funcmodel import ipow
from .geometry import as_vector
from .sampling import compass_maximize, sphere_directions

# Inequality checks that put a NormEstimate on the larger side divide by this.
DEFAULT_SLACK = 1.05


@dataclass(frozen=True)
class SearchConfig:
    radial_points: int = 64
    sphere_samples: int = 256
    refine_iters: int = 40
    r_cap: float = 1.0 - 1e-6
    seed: int = 0
    # number of grid maxima refined independently
    starts: int = 3
    # outer search over boundary directions (criteria b1/b2); the joint
    # (z, xi) polish runs at most 50 * xi_refine_iters BFGS iterations
    xi_samples: int = 32
    xi_refine_iters: int = 10

    def __post_init__(self):
        if self.radial_points < 16:
            raise ValueError("radial_points must be >= 16")
        if self.sphere_samples < 8:
            raise ValueError("sphere_samples must be >= 8")
        if not (0.99 <= self.r_cap < 1.0):
            raise ValueError("r_cap must lie in [0.99, 1)")
        if self.refine_iters < 0 or self.xi_refine_iters < 0:
            raise ValueError("refinement counts must be >= 0")
        if self.starts < 1 or self.xi_samples < 1:
            raise ValueError("starts and xi_samples must be >= 1")

    def doubled(self) -> SearchConfig:
        """Same search at twice the grid resolution."""
        return self.replace(radial_points=2 * self.radial_points, sphere_samples=2 * self.sphere_samples)

    def replace(self, **changes) -> SearchConfig:
        d = asdict(self)
        d.update(changes)
        return SearchConfig(**d)


@dataclass(frozen=True)
class NormEstimate:
    """Best value found; a lower bound of the true weighted sup-norm."""

    value: float
    witness: np.ndarray
    grid_meta: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class BallGrid:
    """Origin plus ``radial_points`` shells of ``sphere_samples`` directions each."""

    n: int
    cfg: SearchConfig
    points: np.ndarray
    radii: np.ndarray
    angular_step: float

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def weights(self, alpha: float) -> np.ndarray:
        return _weights(self.n, _grid_key(self.cfg), float(alpha))

    def radial_step(self, r: float) -> float:
        R, cap = self.cfg.radial_points, self.cfg.r_cap
        t = (2.0 / math.pi) * math.asin(min(r / cap, 1.0))
        return cap * (math.pi / 2) * math.cos(math.pi * t / 2) / R + cap * (math.pi / 2) ** 2 / (2 * R * R)


def _grid_key(cfg: SearchConfig) -> tuple:
    return (cfg.radial_points, cfg.sphere_samples, cfg.r_cap, cfg.seed)


@lru_cache(maxsize=32)
def _grid(n: int, key: tuple) -> BallGrid:
    R, M, cap, seed = key
    if n >= 2 and M < 64:
        raise ValueError("sphere_samples must be >= 64 for n >= 2")
    # t = i/R makes the radii nested when R doubles
    t = np.arange(1, R + 1) / R
    radii = cap * np.sin(0.5 * np.pi * t)
    dirs = sphere_directions(n, M, seed)
    pts = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, n)
    pts = np.concatenate([np.zeros((1, n), dtype=complex), pts])
    r = np.concatenate([[0.0], np.repeat(radii, M)])
    ang = 2 * np.pi / M if n == 1 else 2.0 * M ** (-1.0 / (2 * n - 1))
    pts.flags.writeable = False
    r.flags.writeable = False
    cfg = SearchConfig(radial_points=R, sphere_samples=M, r_cap=cap, seed=seed)
    return BallGrid(n, cfg, pts, r, ang)


@lru_cache(maxsize=64)
def _weights(n: int, key: tuple, alpha: float) -> np.ndarray:
    r = _grid(n, key).radii
    w = (1.0 - r * r) ** alpha
    w.flags.writeable = False
    return w


def ball_grid(n: int, cfg: SearchConfig) -> BallGrid:
    return _grid(int(n), _grid_key(cfg))


def _pick_starts(values: np.ndarray, points: np.ndarray, k: int, sep: float) -> list[int]:
    order = np.argsort(-values, kind="stable")[: max(8 * k, k)]
    chosen: list[int] = []
    for i in order:
        if not np.isfinite(values[i]):
            continue
        if all(np.linalg.norm(points[i] - points[c]) > sep for c in chosen):
            chosen.append(int(i))
        if len(chosen) == k:
            break
    return chosen


def maximize_on_ball(
    objective: Callable[[np.ndarray], np.ndarray],
    n: int,
    cfg: SearchConfig | None = None,
    *,
    grid_values: np.ndarray | None = None,
    hints: Sequence | None = None,
    refine: bool = True,
) -> NormEstimate:
    """Maximize a non-negative objective over ``|z| <= r_cap``.

    ``grid_values`` may carry the objective already evaluated on
    ``ball_grid(n, cfg).points``; ``hints`` are extra candidate points.
    """
    cfg = cfg or SearchConfig()
    grid = ball_grid(n, cfg)
    pts = grid.points
    vals = objective(pts) if grid_values is None else grid_values
    vals = np.nan_to_num(np.asarray(vals, dtype=float), nan=-np.inf)
    evals = pts.shape[0]
    if hints is not None and len(hints):
        h = np.array([as_vector(p) for p in hints]).reshape(-1, n)
        h = h[np.linalg.norm(h, axis=1) < 1.0]
        if h.shape[0]:
            pts = np.concatenate([pts, h])
            vals = np.concatenate([vals, np.nan_to_num(np.asarray(objective(h), dtype=float), nan=-np.inf)])
            evals += h.shape[0]

    starts = _pick_starts(vals, pts, cfg.starts, sep=grid.angular_step)
    best_i = starts[0] if starts else 0
    best_z, best = pts[best_i], float(vals[best_i])
    if refine and cfg.refine_iters > 0:
        for i in starts:
            z0 = pts[i]
            r0 = float(np.linalg.norm(z0))
            z, val, used = compass_maximize(
                objective,
                z0,
                float(vals[i]),
                0.5 * grid.angular_step,
                cfg.refine_iters,
                radial_step=0.5 * grid.radial_step(r0),
                rmax=cfg.r_cap,
            )
            evals += used
            if val > best:
                best_z, best = z, val
    meta = {
        "radial_points": cfg.radial_points,
        "sphere_samples": cfg.sphere_samples,
        "refine_iters": cfg.refine_iters if refine else 0,
        "r_cap": cfg.r_cap,
        "seed": cfg.seed,
        "evaluations": evals,
    }
    return NormEstimate(max(best, 0.0), np.array(best_z), meta)


def weighted_sup_norm(
    f: Callable[[np.ndarray], np.ndarray],
    alpha: float,
    n: int,
    cfg: SearchConfig | None = None,
    *,
    grid_values: np.ndarray | None = None,
    hints: Sequence | None = None,
    refine: bool = True,
) -> NormEstimate:
    """Lower estimate of ``sup_{z in B} (1-|z|^2)^alpha |f(z)|``.

    ``f`` maps a batch of shape (N, n) to (N,) complex values.
    ``grid_values`` may supply ``f`` already evaluated on the grid points.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    cfg = cfg or SearchConfig()
    grid = ball_grid(n, cfg)

    def objective(z):
        rr = np.sum(z.real**2 + z.imag**2, axis=1)
        return np.maximum(1.0 - rr, 0.0) ** alpha * np.abs(f(z))

    gv = None
    if grid_values is not None:
        gv = grid.weights(alpha) * np.abs(grid_values)
    est = maximize_on_ball(objective, n, cfg, grid_values=gv, hints=hints, refine=refine)
    est.grid_meta["alpha"] = alpha
    return est


def monomial_norm_closed(j: int, alpha: float) -> float:
    """sup_{0<=r<1} r^j (1-r^2)^alpha, which is ||<z,xi>^j||_alpha for every unit xi."""
    if j < 0 or not alpha > 0:
        raise ValueError("need j >= 0 and alpha > 0")
    if j == 0:
        return 1.0
    s = j + 2.0 * alpha
    return math.exp(0.5 * j * math.log(j / s) + alpha * math.log(2.0 * alpha / s))


def monomial_norms_closed(js, alpha: float) -> np.ndarray:
    """Vectorized monomial_norm_closed over an integer array of degrees."""
    j = np.asarray(js, dtype=float)
    if np.any(j < 0) or not alpha > 0:
        raise ValueError("need j >= 0 and alpha > 0")
    s = j + 2.0 * alpha
    safe = np.where(j > 0, j, 1.0)
    out = np.exp(0.5 * j * np.log(safe / s) + alpha * np.log(2.0 * alpha / s))
    return np.where(j > 0, out, 1.0)


def pair_angle_factor(j: int, overlap: float) -> float:
    """max over theta in [0, pi/2] of cos^j(theta) (c cos(theta) + s sin(theta)),
    with c = overlap and s = sqrt(1 - c^2)."""
    if j == 0:
        return 1.0  # max of c cos + s sin is |(c, s)| = 1
    c = min(max(overlap, 0.0), 1.0)
    s = math.sqrt(max(1.0 - c * c, 0.0))
    # stationary point: j tan(t) tan(t0) tan(t) + (j+1) tan(t) - tan(t0) = 0
    t = 2.0 * s / ((j + 1) * c + math.sqrt(((j + 1) * c) ** 2 + 4.0 * j * s * s))
    cos_t = 1.0 / math.sqrt(1.0 + t * t)
    sin_t = t * cos_t
    return math.exp(j * math.log(cos_t)) * (c * cos_t + s * sin_t)


def pair_angle_factors(j: int, overlap: np.ndarray) -> np.ndarray:
    """Vectorized pair_angle_factor."""
    c = np.clip(np.asarray(overlap, dtype=float), 0.0, 1.0)
    if j == 0:
        return np.ones_like(c)
    s = np.sqrt(np.maximum(1.0 - c * c, 0.0))
    t = 2.0 * s / ((j + 1) * c + np.sqrt(((j + 1) * c) ** 2 + 4.0 * j * s * s))
    cos_t = 1.0 / np.sqrt(1.0 + t * t)
    return np.exp(j * np.log(cos_t)) * (c * cos_t + s * t * cos_t)


def pair_monomial_norm_closed(j: int, alpha: float, overlap: float) -> float:
    """||<z,xi>^j <z,xi'>||_alpha for |<xi,xi'>| = overlap, in closed form.

    The radial and angular parts separate: monomial_norm_closed(j+1, alpha)
    times pair_angle_factor(j, overlap).
    """
    if not 0.0 <= overlap <= 1.0:
        raise ValueError("overlap must lie in [0, 1]")
    return monomial_norm_closed(j + 1, alpha) * pair_angle_factor(j, overlap)


def pair_monomial_norm(j: int, alpha: float, overlap: float, cfg: SearchConfig | None = None) -> NormEstimate:
    """Search estimate of ||<z,xi>^j <z,xi'>||_alpha on span(xi, xi') = C^2."""
    if not 0.0 <= overlap <= 1.0:
        raise ValueError("overlap must lie in [0, 1]")
    c = overlap
    s = math.sqrt(max(1.0 - c * c, 0.0))

    def f(z):
        return ipow(z[:, 0], j) * (c * z[:, 0] + s * z[:, 1])

    return weighted_sup_norm(f, alpha, 2, cfg)


@dataclass(frozen=True)
class GammaCoeffs:
    """c_k = Gamma(k + two_alpha) / (k! Gamma(two_alpha)), k = 0..kmax."""

    two_alpha: float
    values: np.ndarray


def gamma_coeffs(two_alpha: float, kmax: int) -> GammaCoeffs:
    if not two_alpha > 0:
        raise ValueError("two_alpha must be positive")
    k = np.arange(1, kmax + 1, dtype=float)
    c = np.concatenate([[1.0], np.cumprod((k - 1.0 + two_alpha) / k)])
    return GammaCoeffs(float(two_alpha), c)


@dataclass(frozen=True)
class AsymptoticsReport:
    alpha: float
    kmax: int
    ks: np.ndarray
    partial_sums: np.ndarray
    partial_ratio: np.ndarray  # S_k / k^(2 alpha)
    t_grid: np.ndarray
    series_ratio: np.ndarray  # (1-t^2)^alpha sum_k c_k k^-alpha t^k
    truncation: np.ndarray  # weight of the last retained term

    @property
    def partial_range(self) -> tuple[float, float]:
        return float(self.partial_ratio.min()), float(self.partial_ratio.max())

    @property
    def series_range(self) -> tuple[float, float]:
        return float(self.series_ratio.min()), float(self.series_ratio.max())


def coeff_asymptotics(alpha: float, kmax: int, a_abs_grid: Sequence[float]) -> AsymptoticsReport:
    """Growth of the binomial coefficients of (1 - w)^(-2 alpha).

    The k = 0 term of the series uses the factor 1 in place of 0^(-alpha).
    """
    if kmax < 50:
        raise ValueError("kmax must be >= 50")
    c = gamma_coeffs(2.0 * alpha, kmax).values
    S = np.cumsum(c)
    ks = 2 ** np.arange(0, int(math.log2(kmax)) + 1)
    ratio = S[ks] / ks.astype(float) ** (2 * alpha)

    k = np.arange(kmax + 1, dtype=float)
    kpow = np.ones_like(k)
    kpow[1:] = k[1:] ** (-alpha)
    t = np.asarray(a_abs_grid, dtype=float)
    if np.any((t < 0) | (t >= 1)):
        raise ValueError("a_abs_grid entries must lie in [0, 1)")
    series = np.empty_like(t)
    trunc = np.empty_like(t)
    for i, ti in enumerate(t):
        if ti == 0.0:
            terms = np.zeros_like(k)
            terms[0] = 1.0
        else:
            terms = c * kpow * np.exp(k * math.log(ti))
        total = terms.sum()
        series[i] = (1.0 - ti * ti) ** alpha * total
        trunc[i] = terms[-1] / total
    return AsymptoticsReport(float(alpha), int(kmax), ks, S[ks], ratio, t, series, trunc)
