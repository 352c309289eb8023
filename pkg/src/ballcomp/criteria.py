"""Criterion sequences, conditions on the symbols, verdicts and the essential bracket.

For a degree j and unit directions xi, xi' the two ratios are

    b1: ||u<phi,xi>^j - v<psi,xi>^j||_beta / ||<z,xi>^j||_alpha
    b2: ||u<phi,xi>^j<phi,xi'> - v<psi,xi>^j<psi,xi'>||_beta / ||<z,xi>^j<z,xi'>||_alpha

each maximized over the directions. Boundedness is read off the growth of
the ladder j -> b(j); compactness off its tail.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

# gtol sits below the finite-difference noise floor, so the final line searches
# routinely stall at the optimum; the result is still checked against the start
warnings.filterwarnings("ignore", message="The line search algorithm did not converge")

from .funcmodel import (
    SpaceParams,
    SymbolQuadruple,
    SymbolValues,
    difference_image,
    ipow,
    validate_selfmap,
)
from .geometry import as_vector, mobius, norm
from .norms import (
    NormEstimate,
    SearchConfig,
    ball_grid,
    maximize_on_ball,
    monomial_norm_closed,
    pair_angle_factors,
    pair_monomial_norm_closed,
    weighted_sup_norm,
)
from .sampling import sphere_directions
from .testfns import DEGENERATE_G, _f_a_eval, make_probe

DEFAULT_LADDER = (0, 1, 2, 4, 8, 16, 32, 64, 128, 256)
SLOPE_TOL = 0.05
TAIL_DROP = 0.5
BRACKET_J_MIN = 64
CONDITION_RMAX = 0.995
FA_RADII = (0.9, 0.99, 0.995)
SCREEN_FACTOR = 4
# step halvings per alternation of the direction search; the final norm
# evaluation refines z again at full depth

UNBOUNDED = "unbounded-indicated"
COMPACT = "bounded + compact-indicated"
NONCOMPACT = "bounded + non-compact-indicated"
INCONCLUSIVE = "bounded + inconclusive-compactness"


class SelfMapError(ValueError):
    """A symbol map failed validation as a self-map of the ball."""


class HypothesisError(ValueError):
    """The single operators fail the finiteness screen of the essential bracket."""


@dataclass(frozen=True)
class RatioEstimate:
    """One criterion value: a searched numerator over an exact denominator."""

    j: int
    value: float
    numerator: NormEstimate
    denominator: float
    xi: np.ndarray
    xi2: np.ndarray | None = None

    def __float__(self) -> float:
        return self.value


# --------------------------------------------------------------------------
# shared grid data for one (quadruple, params, cfg)


class CriterionContext:
    """Symbols evaluated once on the search grid, reused by every ratio."""

    def __init__(self, q: SymbolQuadruple, params: SpaceParams, cfg: SearchConfig | None = None):
        self.q = q
        self.params = params
        self.cfg = cfg or SearchConfig()
        self.n = q.n

    @cached_property
    def grid(self):
        return ball_grid(self.n, self.cfg)

    @cached_property
    def sv(self) -> SymbolValues:
        return self.q.evaluate(self.grid.points)

    @cached_property
    def weights(self) -> np.ndarray:
        return self.grid.weights(self.params.beta)

    @cached_property
    def screen(self) -> tuple[SymbolValues, np.ndarray]:
        """A coarser grid used only to rank directions."""
        c = self.cfg
        coarse = c.replace(
            radial_points=max(16, c.radial_points // SCREEN_FACTOR),
            sphere_samples=max(64, c.sphere_samples // SCREEN_FACTOR),
        )
        g = ball_grid(self.n, coarse)
        return self.q.evaluate(g.points), g.weights(self.params.beta)

    def _terms(self, j: int, xis: np.ndarray, xi2s: np.ndarray | None, sv: SymbolValues | None = None):
        """Grid values of the numerator for a batch of directions, shape (N, K)."""
        sv = self.sv if sv is None else sv
        cx = np.conj(xis).T
        a = sv.u[:, None] * ipow(sv.phi @ cx, j)
        b = sv.v[:, None] * ipow(sv.psi @ cx, j)
        if xi2s is not None:
            cx2 = np.conj(xi2s).T
            a = a * (sv.phi @ cx2)
            b = b * (sv.psi @ cx2)
        return a - b

    def grid_numerators(self, j: int, xis: np.ndarray, xi2s: np.ndarray | None = None):
        """Coarse-grid maxima and their grid points for a batch of directions."""
        sv, w = self.screen
        vals = w[:, None] * np.abs(self._terms(j, xis, xi2s, sv))
        k = np.argmax(vals, axis=0)
        return vals[k, np.arange(vals.shape[1])], sv.points[k]

    def numerator(self, j: int, xi: np.ndarray, xi2: np.ndarray | None = None, hints=None) -> NormEstimate:
        gv = self._terms(j, xi[None, :], None if xi2 is None else xi2[None, :])[:, 0]
        q = self.q

        def f(z):
            return _numerator_values(q.evaluate(z), j, xi, xi2)

        return weighted_sup_norm(f, self.params.beta, self.n, self.cfg, grid_values=gv, hints=hints)


def _numerator_values(s: SymbolValues, j: int, xi: np.ndarray, xi2: np.ndarray | None) -> np.ndarray:
    a = s.u * ipow(s.phi @ np.conj(xi), j)
    b = s.v * ipow(s.psi @ np.conj(xi), j)
    if xi2 is not None:
        a = a * (s.phi @ np.conj(xi2))
        b = b * (s.psi @ np.conj(xi2))
    return a - b


def _overlap(xi: np.ndarray, xi2: np.ndarray) -> np.ndarray:
    return np.minimum(np.abs(np.sum(xi2 * np.conj(xi), axis=-1)), 1.0)


def _pair_denoms(j: int, alpha: float, xis: np.ndarray, xi2s: np.ndarray) -> np.ndarray:
    return monomial_norm_closed(j + 1, alpha) * pair_angle_factors(j, _overlap(xis, xi2s))


def _bfgs_maximize(objective, x0: np.ndarray, value: float, maxiter: int = 500) -> tuple[np.ndarray, float]:
    """Maximize a smooth batched objective of real vectors by BFGS.

    Gradients are central differences evaluated in one batched call.
    Returns the start when no improvement is found.
    """
    k = x0.shape[0]
    scale = value if value > 0 else 1.0
    h = 1e-7
    eye = np.eye(k)

    def f_and_grad(x):
        pts = np.vstack([x, x + h * eye, x - h * eye])
        vals = -np.asarray(objective(pts), dtype=float) / scale
        vals = np.where(np.isfinite(vals), vals, np.inf)
        return vals[0], (vals[1 : k + 1] - vals[k + 1 :]) / (2 * h)

    res = minimize(f_and_grad, x0, jac=True, method="BFGS", options={"gtol": 1e-9, "maxiter": maxiter})
    val = float(objective(res.x[None, :])[0])
    if val > value:
        return res.x, val
    return x0, value


def _normalize_blocks(d: np.ndarray, blocks: int) -> np.ndarray:
    parts = d.reshape(d.shape[0], blocks, -1)
    return (parts / np.linalg.norm(parts, axis=2, keepdims=True)).reshape(d.shape)


class _DirectionSearch:
    """Joint search over (z, directions) for the b1 (pairs=False) or b2 ratio.

    The sup over z and the sup over directions commute, so the search
    alternates: with z fixed the ratio is an explicit function of the
    directions; with the directions fixed it is the usual weighted
    objective in z. Directions are stacked as one vector (xi or xi|xi').
    """

    def __init__(self, ctx: CriterionContext, j: int, pairs: bool):
        self.ctx, self.j, self.pairs = ctx, j, pairs
        self.n = ctx.n
        self.alpha = ctx.params.alpha
        self.beta = ctx.params.beta

    def split(self, d: np.ndarray):
        n = self.n
        return (d[..., :n], d[..., n:]) if self.pairs else (d, None)

    def denoms(self, d: np.ndarray) -> np.ndarray:
        x1, x2 = self.split(d)
        if x2 is None:
            return np.full(d.shape[0], monomial_norm_closed(self.j, self.alpha))
        return _pair_denoms(self.j, self.alpha, x1, x2)

    def screen(self, d: np.ndarray):
        x1, x2 = self.split(d)
        vals, pts = self.ctx.grid_numerators(self.j, x1, x2)
        return vals / self.denoms(d), pts

    def joint(self, rcap: float):
        """Objective of stacked real rows (y, d); z = rcap y / sqrt(1 + |y|^2)."""
        n, j, q, beta = self.n, self.j, self.ctx.q, self.beta
        blocks = 2 if self.pairs else 1
        m = n * blocks

        def objective(x):
            y = x[:, :n] + 1j * x[:, n : 2 * n]
            yy = np.sum(x[:, : 2 * n] ** 2, axis=1)
            z = rcap * y / np.sqrt(1.0 + yy)[:, None]
            d = _normalize_blocks(x[:, 2 * n : 2 * n + m] + 1j * x[:, 2 * n + m :], blocks)
            x1, x2 = self.split(d)
            s = q.evaluate(z)
            a = s.u * ipow(np.sum(s.phi * np.conj(x1), axis=1), j)
            b = s.v * ipow(np.sum(s.psi * np.conj(x1), axis=1), j)
            if x2 is not None:
                a = a * np.sum(s.phi * np.conj(x2), axis=1)
                b = b * np.sum(s.psi * np.conj(x2), axis=1)
            w = np.maximum(1.0 - rcap**2 * yy / (1.0 + yy), 0.0) ** beta
            return w * np.abs(a - b) / self.denoms(d)

        def pack(z, d):
            rr = min(float(np.vdot(z, z).real) / rcap**2, 1.0 - 1e-15)
            y = z / rcap / np.sqrt(1.0 - rr)
            return np.concatenate([y.real, y.imag, d.real, d.imag])

        def unpack(x):
            y = x[:n] + 1j * x[n : 2 * n]
            z = rcap * y / np.sqrt(1.0 + float(np.sum(x[: 2 * n] ** 2)))
            d = _normalize_blocks((x[2 * n : 2 * n + m] + 1j * x[2 * n + m :])[None, :], blocks)[0]
            return z, d

        return objective, pack, unpack

    def polish(self, d: np.ndarray, z: np.ndarray, value: float) -> tuple[np.ndarray, np.ndarray, float]:
        cfg = self.ctx.cfg
        if cfg.xi_refine_iters == 0:
            return d, z, value
        objective, pack, unpack = self.joint(cfg.r_cap)
        x0 = pack(z, d)
        x, val = _bfgs_maximize(objective, x0, float(objective(x0[None, :])[0]), 50 * cfg.xi_refine_iters)
        z, d = unpack(x)
        return d, z, val

    def run(self, warm: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray | None]:
        """Best stacked direction vector and the point where it was found."""
        ctx, cfg, n, j = self.ctx, self.ctx.cfg, self.n, self.j
        blocks = 2 if self.pairs else 1
        cands = [sphere_directions(n * blocks, blocks * cfg.xi_samples, cfg.seed + blocks)]
        eye = np.eye(n, dtype=complex)
        cands.append(np.hstack([eye] * blocks))
        # directions of phi(z), psi(z) where each single term is largest
        sv, w = ctx.screen
        for m, c in ((sv.phi, sv.u), (sv.psi, sv.v)):
            mm = np.linalg.norm(m, axis=1)
            env = w * np.abs(c) * mm**j
            for k in np.argsort(-env, kind="stable")[: max(cfg.starts, 1)]:
                if env[k] > 0 and mm[k] > 0:
                    cands.append(np.tile(m[k] / mm[k], blocks)[None, :])
        cands += [np.asarray(x, dtype=complex).reshape(1, -1) for x in warm]
        cands = _normalize_blocks(np.concatenate(cands), blocks)

        scores, pts = self.screen(cands)
        order = np.argsort(-scores, kind="stable")[: max(cfg.starts, 1)]
        best_d, best, best_z = cands[order[0]], float(scores[order[0]]), None
        if best <= 0.0:
            return best_d, None
        for k in order:
            d, z, val = self.polish(cands[k], pts[k], float(scores[k]))
            if val > best or best_z is None:
                best_d, best, best_z = d, val, z
        return best_d, best_z


def _add_hint(hints, z):
    if z is None:
        return hints
    return [z] if hints is None else list(hints) + [z]


def b1(
    q: SymbolQuadruple,
    params: SpaceParams,
    j: int,
    cfg: SearchConfig | None = None,
    *,
    warm: Sequence[np.ndarray] = (),
    ctx: CriterionContext | None = None,
    hints=None,
) -> RatioEstimate:
    """sup over xi of the single-direction ratio at degree j.

    For n = 1 the ratio does not depend on xi (rotate z), so xi = 1 is used.
    """
    if j < 0:
        raise ValueError("j must be non-negative")
    ctx = ctx or CriterionContext(q, params, cfg)
    n = q.n
    if n == 1:
        xi = np.ones(1, dtype=complex)
    else:
        xi, z = _DirectionSearch(ctx, j, False).run(warm)
        hints = _add_hint(hints, z)
    num = ctx.numerator(j, xi, hints=hints)
    den = monomial_norm_closed(j, params.alpha)
    return RatioEstimate(j, num.value / den, num, den, xi)


def b1_at(q: SymbolQuadruple, params: SpaceParams, j: int, xi, cfg: SearchConfig | None = None) -> float:
    """The b1 ratio at a fixed direction xi (no direction search)."""
    xi = as_vector(xi) / norm(xi)
    num = CriterionContext(q, params, cfg).numerator(j, xi)
    return num.value / monomial_norm_closed(j, params.alpha)


def b2(
    q: SymbolQuadruple,
    params: SpaceParams,
    j: int,
    cfg: SearchConfig | None = None,
    *,
    warm: Sequence[tuple[np.ndarray, np.ndarray]] = (),
    ctx: CriterionContext | None = None,
    hints=None,
) -> RatioEstimate:
    """sup over (xi, xi') of the two-direction ratio at degree j.

    The denominator is the exact pair-monomial norm at |<xi, xi'>|.
    """
    if j < 0:
        raise ValueError("j must be non-negative")
    ctx = ctx or CriterionContext(q, params, cfg)
    n = q.n
    if n == 1:
        xi = xi2 = np.ones(1, dtype=complex)
    else:
        d, z = _DirectionSearch(ctx, j, True).run([np.concatenate(w) for w in warm])
        xi, xi2 = d[:n], d[n:]
        hints = _add_hint(hints, z)
    num = ctx.numerator(j, xi, xi2, hints=hints)
    den = pair_monomial_norm_closed(j, params.alpha, float(_overlap(xi, xi2)))
    return RatioEstimate(j, num.value / den, num, den, xi, xi2)


# --------------------------------------------------------------------------
# ladders


@dataclass(frozen=True)
class CriterionSequence:
    js: list[int]
    b1: list[RatioEstimate]
    b2: list[RatioEstimate]

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.js, self.js[1:])):
            raise ValueError("ladder must be strictly increasing")

    @property
    def b1_values(self) -> np.ndarray:
        return np.array([r.value for r in self.b1])

    @property
    def b2_values(self) -> np.ndarray:
        return np.array([r.value for r in self.b2])

    @property
    def xi_witnesses(self) -> list[np.ndarray]:
        return [r.xi for r in self.b1]


def _check_ladder(ladder: Sequence[int]) -> list[int]:
    js = [int(j) for j in ladder]
    if not js or any(j < 0 for j in js) or any(b <= a for a, b in zip(js, js[1:])):
        raise ValueError("ladder must be a non-empty, strictly increasing list of integers >= 0")
    return js


def _b1_chain(ctx: CriterionContext, js: list[int]) -> list[RatioEstimate]:
    out: list[RatioEstimate] = []
    for j in js:
        prev = out[-1] if out else None
        warm = [prev.xi] if prev is not None else []
        hints = [prev.numerator.witness] if prev is not None else None
        out.append(b1(ctx.q, ctx.params, j, ctx.cfg, warm=warm, ctx=ctx, hints=hints))
    return out


def _b2_chain(ctx: CriterionContext, js: list[int], b1_seed: Sequence[RatioEstimate] = ()) -> list[RatioEstimate]:
    out: list[RatioEstimate] = []
    for j in js:
        prev = out[-1] if out else None
        warm = [(prev.xi, prev.xi2)] if prev is not None else []
        hints = [prev.numerator.witness] if prev is not None else None
        out.append(b2(ctx.q, ctx.params, j, ctx.cfg, warm=warm, ctx=ctx, hints=hints))
    return out


def criterion_sequence(
    q: SymbolQuadruple,
    params: SpaceParams,
    cfg: SearchConfig | None = None,
    ladder: Sequence[int] = DEFAULT_LADDER,
    *,
    workers: int = 1,
    with_b2: bool = True,
) -> CriterionSequence:
    """b1 and b2 over a degree ladder, each chain warm-started from the previous degree."""
    js = _check_ladder(ladder)
    ctx = CriterionContext(q, params, cfg)
    ctx.sv, ctx.screen  # build the shared grid data before any threads start
    if workers > 1 and with_b2:
        with ThreadPoolExecutor(max_workers=2) as pool:
            f1 = pool.submit(_b1_chain, ctx, js)
            f2 = pool.submit(_b2_chain, ctx, js)
            s1, s2 = f1.result(), f2.result()
    else:
        s1 = _b1_chain(ctx, js)
        s2 = _b2_chain(ctx, js) if with_b2 else []
    return CriterionSequence(js, s1, s2)


# --------------------------------------------------------------------------
# tail statistics and verdicts


@dataclass(frozen=True)
class TailStats:
    j_min: int
    tail_js: list[int]
    tail_max: float
    head_max: float
    slope_b1: float
    slope_b2: float
    verdict: str

    @property
    def slope(self) -> float:
        """The larger of the two fitted slopes (nan if neither could be fitted)."""
        s = [x for x in (self.slope_b1, self.slope_b2) if not math.isnan(x)]
        return max(s) if s else math.nan

    @property
    def bounded(self) -> bool:
        return self.verdict != UNBOUNDED


def loglog_slope(js: Sequence[int], values: Sequence[float]) -> float:
    """Least-squares slope of log(value) against log(j) over positive entries."""
    js = np.asarray(js, dtype=float)
    v = np.asarray(values, dtype=float)
    keep = (js > 0) & (v > 0) & np.isfinite(v)
    if keep.sum() < 2:
        return math.nan
    x, y = np.log(js[keep]), np.log(v[keep])
    x = x - x.mean()
    return float(np.dot(x, y - y.mean()) / np.dot(x, x))


def classify(tail_max: float, head_max: float, slope: float) -> str:
    if not math.isnan(slope) and slope > SLOPE_TOL:
        return UNBOUNDED
    if tail_max == 0.0:
        return COMPACT
    if math.isnan(slope):
        return INCONCLUSIVE
    if slope < -SLOPE_TOL and tail_max < TAIL_DROP * head_max:
        return COMPACT
    if abs(slope) <= SLOPE_TOL and tail_max >= TAIL_DROP * head_max:
        return NONCOMPACT
    return INCONCLUSIVE


def default_j_min(js: Sequence[int]) -> int:
    """Start of the top half of the positive part of the ladder."""
    pos = [j for j in js if j > 0]
    if not pos:
        raise ValueError("ladder has no positive degrees")
    return pos[len(pos) // 2]


def tail_statistics(js: Sequence[int], b1_vals, b2_vals=None, j_min: int | None = None) -> TailStats:
    js = [int(j) for j in js]
    b1_vals = np.asarray(b1_vals, dtype=float)
    b2_vals = np.zeros(0) if b2_vals is None else np.asarray(b2_vals, dtype=float)
    j_min = default_j_min(js) if j_min is None else int(j_min)
    mask = np.array([j >= j_min for j in js])
    tail_js = [j for j in js if j >= j_min]
    if len(tail_js) < 4:
        raise ValueError(f"need at least 4 ladder degrees >= {j_min}, got {len(tail_js)}")
    tail_max = float(b1_vals[mask].max())
    head_max = float(b1_vals.max())
    s2 = math.nan
    if b2_vals.size:
        tail_max = max(tail_max, float(b2_vals[mask].max()))
        head_max = max(head_max, float(b2_vals.max()))
        s2 = loglog_slope(tail_js, b2_vals[mask])
    s1 = loglog_slope(tail_js, b1_vals[mask])
    fitted = [x for x in (s1, s2) if not math.isnan(x)]
    verdict = classify(tail_max, head_max, max(fitted) if fitted else math.nan)
    return TailStats(j_min, tail_js, tail_max, head_max, s1, s2, verdict)


def compactness_tail(seq: CriterionSequence, j_min: int | None = None) -> TailStats:
    return tail_statistics(seq.js, seq.b1_values, seq.b2_values if seq.b2 else None, j_min)


# --------------------------------------------------------------------------
# conditions on the symbols


@dataclass(frozen=True)
class ConditionReport:
    which: str  # "forward" uses xi_a; "backward" swaps phi and psi
    inf_margin: float
    argmin: np.ndarray | None
    degenerate_fraction: float
    samples: int

    @property
    def vacuous(self) -> bool:
        return self.degenerate_fraction == 1.0

    @property
    def status(self) -> str:
        if self.vacuous:
            return "degenerate: condition vacuous"
        return f"inf_margin={self.inf_margin:.6g}"


def condition_check(q: SymbolQuadruple, which: str = "forward", cfg: SearchConfig | None = None) -> ConditionReport:
    """Infimum over |a| <= 0.995 of (1-|p|^2) / |1 - <p, xi_a>|.

    forward: p = phi(a), xi_a along Phi_p(psi(a)); backward swaps phi and psi.
    """
    if which not in ("forward", "backward"):
        raise ValueError("which must be 'forward' or 'backward'")
    cfg = (cfg or SearchConfig()).replace(r_cap=CONDITION_RMAX)
    pts = ball_grid(q.n, cfg).points
    sv = q.evaluate(pts)
    p, s = (sv.phi, sv.psi) if which == "forward" else (sv.psi, sv.phi)
    w = mobius(p, s)
    rho = norm(w)
    ok = rho >= DEGENERATE_G
    total = pts.shape[0]
    frac = 1.0 - ok.sum() / total
    if not ok.any():
        return ConditionReport(which, math.nan, None, 1.0, total)
    xi = w[ok] / rho[ok][:, None]
    pp = p[ok]
    num = 1.0 - np.sum(pp.real**2 + pp.imag**2, axis=1)
    den = np.abs(1.0 - np.sum(pp * np.conj(xi), axis=1))
    ratio = num / den
    k = int(np.argmin(ratio))
    return ConditionReport(which, float(ratio[k]), pts[ok][k].copy(), float(frac), total)


# --------------------------------------------------------------------------
# classical indicators


@dataclass(frozen=True)
class ClassicalIndicators:
    d_u_rho: NormEstimate
    d_v_rho: NormEstimate
    d_diff: NormEstimate

    def values(self) -> tuple[float, float, float]:
        return (self.d_u_rho.value, self.d_v_rho.value, self.d_diff.value)


def _classical_parts(s: SymbolValues, params: SpaceParams):
    z = s.points
    wz = np.maximum(1.0 - np.sum(z.real**2 + z.imag**2, axis=1), 0.0) ** params.beta
    pp = 1.0 - np.sum(s.phi.real**2 + s.phi.imag**2, axis=1)
    ps = 1.0 - np.sum(s.psi.real**2 + s.psi.imag**2, axis=1)
    du = wz * s.u / pp**params.alpha
    dv = wz * s.v / ps**params.alpha
    rho = norm(mobius(s.psi, s.phi))
    return du, dv, rho


def classical_indicators(q: SymbolQuadruple, params: SpaceParams, cfg: SearchConfig | None = None) -> ClassicalIndicators:
    """sup |D_{u,phi}| rho(phi,psi), sup |D_{v,psi}| rho(phi,psi), sup |D_{u,phi} - D_{v,psi}|."""
    cfg = cfg or SearchConfig()
    ctx = CriterionContext(q, params, cfg)
    du, dv, rho = _classical_parts(ctx.sv, params)
    pieces = (
        (lambda a, b, r: np.abs(a) * r, np.abs(du) * rho),
        (lambda a, b, r: np.abs(b) * r, np.abs(dv) * rho),
        (lambda a, b, r: np.abs(a - b), np.abs(du - dv)),
    )
    out = []
    for fn, gv in pieces:

        def objective(z, fn=fn):
            return fn(*_classical_parts(q.evaluate(z), params))

        out.append(maximize_on_ball(objective, q.n, cfg, grid_values=gv))
    return ClassicalIndicators(*out)


# --------------------------------------------------------------------------
# essential norm bracket


@dataclass(frozen=True)
class EssentialBracket:
    lower: float
    upper_proxy: float
    j_min: int
    lower_witness_j: int | None
    probe_values: list[tuple[int, str, float]]  # (j, "b1"|"b2", image norm)
    fa_profile: list[tuple[float, float]]  # (|a|, max image norm of f_a)
    notes: list[str] = field(default_factory=list)


HYPOTHESIS_NOTE = (
    "bracket hypothesis read as: uC_phi and vC_psi each bounded; "
    "both single operators are screened here"
)


def _screen(q: SymbolQuadruple, params: SpaceParams, cfg: SearchConfig, js: list[int]) -> list[str]:
    notes = []
    for label, single in (("uC_phi", q.first()), ("vC_psi", q.second())):
        seq = criterion_sequence(single, params, cfg, js, with_b2=False)
        st = tail_statistics(js, seq.b1_values)
        if st.verdict == UNBOUNDED:
            raise HypothesisError(f"operator pair not in theorem's hypothesis: {label} unbounded-indicated")
        notes.append(f"screen {label}: slope={st.slope_b1:.4g}, tail_max={st.tail_max:.6g}")
    return notes


def _fa_profile(q: SymbolQuadruple, params: SpaceParams, cfg: SearchConfig, radii: Sequence[float]):
    """Per radius: the largest image norm of f_a over a few seeded directions of a."""
    ctx = CriterionContext(q, params, cfg)
    dirs = sphere_directions(q.n, 8, cfg.seed + 3)
    out = []
    for r in radii:
        raw = [ctx.sv.image(_f_a_eval(r * d, params.alpha)) for d in dirs]
        k = int(np.argmax([float((ctx.weights * np.abs(v)).max()) for v in raw]))
        img = difference_image(q, _f_a_eval(r * dirs[k], params.alpha))
        est = weighted_sup_norm(img, params.beta, q.n, cfg, grid_values=raw[k])
        out.append((float(r), est.value))
    return out


def essential_bracket(
    q: SymbolQuadruple,
    params: SpaceParams,
    cfg: SearchConfig | None = None,
    ladder: Sequence[int] = DEFAULT_LADDER,
    *,
    j_min: int = BRACKET_J_MIN,
    seq: CriterionSequence | None = None,
    fa_radii: Sequence[float] = FA_RADII,
) -> EssentialBracket:
    """Raw (lower, upper_proxy) for the essential norm.

    lower: largest image norm of the normalized tail probes f_{j,xi} and
    f_{j,xi,xi'} (j >= j_min, per-j witness directions). These families
    tend to 0 uniformly on compact sets, so any compact perturbation loses
    them in the limit. upper_proxy: tail max of b1 plus tail max of b2.
    Images of f_a near the sphere are reported separately in ``fa_profile``.
    """
    cfg = cfg or SearchConfig()
    js = _check_ladder(ladder)
    tail = [j for j in js if j >= j_min]
    if not tail:
        raise ValueError(f"ladder has no degree >= {j_min}")
    notes = _screen(q, params, cfg, js)
    notes.append(HYPOTHESIS_NOTE)
    if seq is None or seq.js != js:
        seq = criterion_sequence(q, params, cfg, js)
    n = q.n
    probes = []
    lower, lower_j = 0.0, None
    for j, r1, r2 in zip(seq.js, seq.b1, seq.b2):
        if j < j_min:
            continue
        for label, r in (("b1", r1), ("b2", r2)):
            probe = make_probe(j, r.xi, params.alpha, r.xi2)
            img = difference_image(q, probe)
            est = weighted_sup_norm(img, params.beta, n, cfg, hints=[r.numerator.witness])
            probes.append((j, label, est.value))
            if est.value > lower:
                lower, lower_j = est.value, j
    mask = [j >= j_min for j in seq.js]
    upper = float(seq.b1_values[mask].max() + seq.b2_values[mask].max())
    fa = _fa_profile(q, params, cfg, fa_radii)
    return EssentialBracket(float(lower), upper, j_min, lower_j, probes, fa, notes)


# --------------------------------------------------------------------------
# full report


@dataclass(frozen=True)
class AnalysisReport:
    params: SpaceParams
    cfg: SearchConfig
    sequence: CriterionSequence
    classical: ClassicalIndicators
    conditions: tuple[ConditionReport, ConditionReport]
    tail: TailStats
    verdict: str
    bracket: EssentialBracket | None
    selfmap_sups: tuple[float, float]
    notes: list[str]

    @property
    def verdicts(self) -> dict[str, str]:
        t = self.tail
        bounded = "bounded-indicated" if t.bounded else "unbounded-indicated"
        if not t.bounded:
            comp = "inconclusive"
        elif t.verdict == COMPACT:
            comp = "compact-indicated"
        elif t.verdict == NONCOMPACT:
            comp = "non-compact-indicated"
        else:
            comp = "inconclusive"
        return {"boundedness": bounded, "compactness": comp}


CONDITION_FLOOR = 1e-3


def boundedness_report(
    q: SymbolQuadruple,
    params: SpaceParams,
    cfg: SearchConfig | None = None,
    ladder: Sequence[int] = DEFAULT_LADDER,
    *,
    delta_margin: float = 1e-3,
    j_min: int | None = None,
    bracket_j_min: int = BRACKET_J_MIN,
    workers: int = 1,
) -> AnalysisReport:
    """Run every criterion for one operator and assemble the verdict."""
    cfg = cfg or SearchConfig()
    js = _check_ladder(ladder)
    sups = []
    for name, m in (("phi", q.phi), ("psi", q.psi)):
        rep = validate_selfmap(m, delta_margin, seed=cfg.seed)
        if not rep.passed:
            raise SelfMapError(
                f"{name} is not a self-map with margin {delta_margin}: sup |{name}| ~ {rep.sup:.6g} at {rep.witness}"
            )
        sups.append(rep.sup)
    notes: list[str] = []
    seq = criterion_sequence(q, params, cfg, js, workers=workers)
    conds = (condition_check(q, "forward", cfg), condition_check(q, "backward", cfg))
    if q.n == 1:
        notes.append("n = 1: conditions on the symbols are not required")
    else:
        weak = [c.which for c in conds if not c.vacuous and c.inf_margin < CONDITION_FLOOR]
        if weak:
            notes.append(
                "conditions " + ", ".join(weak) + f" below {CONDITION_FLOOR:g} on the grid: "
                "the sufficiency direction (finite criteria => bounded) is unsupported"
            )
    classical = classical_indicators(q, params, cfg)
    tail = compactness_tail(seq, j_min)
    bracket = None
    if tail.bounded:
        try:
            bracket = essential_bracket(q, params, cfg, js, j_min=bracket_j_min, seq=seq)
        except (HypothesisError, ValueError) as exc:
            notes.append(f"essential bracket skipped: {exc}")
    else:
        notes.append("essential bracket skipped: operator unbounded-indicated")
    return AnalysisReport(params, cfg, seq, classical, conds, tail, tail.verdict, bracket, tuple(sups), notes)
