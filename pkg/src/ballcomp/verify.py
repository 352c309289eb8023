"""Randomized numerical checks of the inequalities behind the criteria.

Each suite returns a PropertyReport. Failures carry everything needed to
reproduce them (seed, trial index, inputs). Constants hidden behind
"up to a constant" statements are measured and logged, never asserted.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .criteria import (
    COMPACT,
    CriterionContext,
    condition_check,
    criterion_sequence,
    tail_statistics,
)
from .funcmodel import (
    PolyFn,
    PolyMap,
    SpaceParams,
    SymbolQuadruple,
    SymbolValues,
    difference_image,
    validate_selfmap,
)
from .geometry import mobius, norm, pseudo_dist, random_ball, random_sphere, zhu_identity_residual
from .norms import DEFAULT_SLACK, SearchConfig, gamma_coeffs, monomial_norms_closed, weighted_sup_norm
from .sampling import sphere_directions
from .testfns import TestFunction, make_f_a, make_g

SUITE_LADDER = tuple(range(17)) + (32, 64, 128)
TAIL_RADII = (0.9, 0.99, 0.995)
ROUNDING = 1e-12


@dataclass(frozen=True)
class InstanceSpec:
    seed: int = 0
    n: int = 1
    max_degree: int = 2
    shrink: float = 0.9

    def __post_init__(self):
        if self.n < 1 or self.max_degree < 0:
            raise ValueError("need n >= 1 and max_degree >= 0")
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink must lie in (0, 1)")

    def trial(self, t: int) -> InstanceSpec:
        """The spec of trial t: same shape, a seed derived from (seed, t)."""
        child = np.random.SeedSequence([self.seed, t]).generate_state(1)[0]
        return InstanceSpec(int(child), self.n, self.max_degree, self.shrink)


@dataclass
class PropertyReport:
    suite: str
    trials: int
    failures: list[dict] = field(default_factory=list)
    empirical_constants: dict[str, float] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def bump(self, name: str, value: float) -> None:
        """Running max of a named constant."""
        old = self.empirical_constants.get(name, -math.inf)
        self.empirical_constants[name] = max(old, float(value))

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        consts = ", ".join(f"{k}={v:.6g}" for k, v in sorted(self.empirical_constants.items()))
        return f"{self.suite}: {status} trials={self.trials} failures={len(self.failures)} {consts}"


def merge_reports(reports: Sequence[PropertyReport]) -> PropertyReport:
    """Combine reports of the same suite; independent of input order."""
    if not reports:
        raise ValueError("nothing to merge")
    suite = reports[0].suite
    out = PropertyReport(suite, sum(r.trials for r in reports))
    for r in reports:
        out.failures.extend(r.failures)
        for k, v in r.empirical_constants.items():
            out.bump(k, v)
        out.notes.extend(n for n in r.notes if n not in out.notes)
    out.failures.sort(key=lambda f: (f.get("seed", 0), f.get("trial", 0), repr(f)))
    out.notes.sort()
    return out


def _c(z) -> list:
    """JSON-friendly form of a complex scalar or vector."""
    arr = np.atleast_1d(np.asarray(z, dtype=complex))
    return [[float(x.real), float(x.imag)] for x in arr]


# --------------------------------------------------------------------------
# random instances


def _disc(rng: np.random.Generator, size) -> np.ndarray:
    r = np.sqrt(rng.random(size))
    return r * np.exp(2j * np.pi * rng.random(size))


def _multi_indices(n: int, max_degree: int) -> list[tuple[int, ...]]:
    out = [m for m in itertools.product(range(max_degree + 1), repeat=n) if sum(m) <= max_degree]
    return sorted(out, key=lambda m: (sum(m), m))


def _random_poly(rng: np.random.Generator, n: int, idx: list[tuple[int, ...]]) -> PolyFn:
    coef = _disc(rng, len(idx)) / len(idx)
    return PolyFn(n, dict(zip(idx, coef)))


def random_instance(spec: InstanceSpec) -> SymbolQuadruple:
    """Random symbols; phi, psi rescaled so their validated sup is <= shrink."""
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    idx = _multi_indices(n, spec.max_degree)
    u = _random_poly(rng, n, idx)
    v = _random_poly(rng, n, idx)
    maps = []
    for _ in range(2):
        m = PolyMap(tuple(_random_poly(rng, n, idx) for _ in range(n)))
        sup = validate_selfmap(m, 0.0, seed=spec.seed).sup
        if sup > spec.shrink:
            m = m.scale(spec.shrink / sup)
        maps.append(m)
    return SymbolQuadruple(u, v, maps[0], maps[1])


# --------------------------------------------------------------------------
# geometry


def geometry_suite(spec: InstanceSpec, trials: int = 10_000, *, rmax: float = 1.0) -> PropertyReport:
    """Automorphism identities and invariance of rho on seeded random tuples."""
    rep = PropertyReport("geometry", trials)
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    a, z, w, b = (random_ball(rng, trials, n, rmax) for _ in range(4))
    checks = {
        "phi_a(a)": (norm(mobius(a, a)), 1e-12),
        "phi_a(0)-a": (norm(mobius(a, np.zeros_like(a)) - a), 1e-12),
        "involution": (norm(mobius(a, mobius(a, z)) - z), 1e-10),
        "zhu_identity": (zhu_identity_residual(a, z, w), 1e-12),
        "rho_invariance": (np.abs(pseudo_dist(mobius(b, z), mobius(b, w)) - pseudo_dist(z, w)), 1e-9),
    }
    for name, (err, tol) in checks.items():
        err = np.asarray(err, dtype=float)
        rep.bump(f"max_err[{name}]", float(err.max()))
        for t in np.flatnonzero(~(err <= tol))[:20]:
            rep.failures.append(
                {"seed": spec.seed, "trial": int(t), "check": name, "error": float(err[t]), "tol": tol,
                 "a": _c(a[t]), "z": _c(z[t]), "w": _c(w[t]), "b": _c(b[t])}
            )
    return rep


# --------------------------------------------------------------------------
# weighted point differences against rho


def lipschitz_suite(spec: InstanceSpec, trials: int = 10_000, alpha: float = 1.0) -> PropertyReport:
    """|(1-|z|^2)^a f(z) - (1-|w|^2)^a f(w)| against rho(z, w) for unit-norm f.

    f ranges over f = 1 and f_c for random centers c. Half of the pairs are
    close together so that small rho is exercised. C_emp is the largest
    ratio; the suite passes when it is finite and no ratio exceeds ten times
    the median of the top decile.
    """
    rep = PropertyReport("lipschitz", trials)
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    z = random_ball(rng, trials, n, 0.999)
    w = random_ball(rng, trials, n, 0.999)
    near = rng.random(trials) < 0.5
    eps = 10.0 ** rng.uniform(-8, -1, trials)
    w_near = z + eps[:, None] * random_sphere(rng, trials, n) * (1 - norm(z))[:, None]
    w = np.where(near[:, None], w_near, w)
    c = random_ball(rng, trials, n, 0.999)
    const = rng.random(trials) < 0.1  # f = 1 rows

    wz = (1.0 - norm(z) ** 2) ** alpha
    ww = (1.0 - norm(w) ** 2) ** alpha
    cc = (1.0 - norm(c) ** 2) ** alpha
    fz = cc / (1.0 - np.sum(z * np.conj(c), axis=1)) ** (2 * alpha)
    fw = cc / (1.0 - np.sum(w * np.conj(c), axis=1)) ** (2 * alpha)
    fz = np.where(const, 1.0, fz)
    fw = np.where(const, 1.0, fw)
    lhs = np.abs(wz * fz - ww * fw)
    rho = np.asarray(pseudo_dist(z, w))
    keep = rho > 0
    ratio = lhs[keep] / rho[keep]
    if ratio.size == 0:
        rep.notes.append("all pairs coincide")
        return rep
    top = np.sort(ratio)[-max(1, ratio.size // 10):]
    ref = float(np.median(top))
    rep.bump("C_emp", float(ratio.max()))
    rep.bump("top_decile_median", ref)
    if not np.isfinite(ratio).all():
        rep.failures.append({"seed": spec.seed, "check": "finite", "detail": "non-finite ratio"})
    idx = np.flatnonzero(keep)
    for k in np.flatnonzero(ratio > 10.0 * ref)[:20]:
        t = int(idx[k])
        rep.failures.append(
            {"seed": spec.seed, "trial": t, "check": "stability", "ratio": float(ratio[k]), "reference": ref,
             "z": _c(z[t]), "w": _c(w[t]), "center": None if const[t] else _c(c[t])}
        )
    rep.notes.append(f"alpha={alpha}, n={n}, pairs with rho = 0 skipped: {int((~keep).sum())}")
    return rep


# --------------------------------------------------------------------------
# pointwise lower bounds through f_{phi(a)}, g


def _d_values(s: SymbolValues, a: np.ndarray, params: SpaceParams):
    wa = (1.0 - norm(a) ** 2) ** params.beta
    du = wa * s.u / (1.0 - norm(s.phi) ** 2) ** params.alpha
    dv = wa * s.v / (1.0 - norm(s.psi) ** 2) ** params.alpha
    return du, dv


class _StagedNorm:
    """||(uC_phi - vC_psi) h||_beta, evaluated lazily at three levels.

    0: the weighted image at the base point only (a lower bound);
    1: grid search at cfg; 2: grid search at doubled resolution.
    """

    def __init__(self, q: SymbolQuadruple, params: SpaceParams, h: TestFunction, a, cfg: SearchConfig, hints: bool):
        self.q, self.params, self.h, self.a, self.cfg, self.hints = q, params, h, a, cfg, hints
        self._cache: dict[int, float] = {}

    def at(self, level: int) -> float:
        if level not in self._cache:
            if self.h.degenerate:
                val = 0.0
            elif level == 0:
                s = self.q.evaluate(self.a[None, :])
                wa = (1.0 - norm(self.a) ** 2) ** self.params.beta
                val = float(wa * abs(s.image(self.h.evaluator)[0]))
            else:
                cfg = self.cfg if level == 1 else self.cfg.doubled()
                img = difference_image(self.q, self.h.evaluator)
                hints = [self.a] if self.hints else None
                val = weighted_sup_norm(img, self.params.beta, self.q.n, cfg, hints=hints).value
            self._cache[level] = val
        return self._cache[level]


def _staged_check(lhs: float, terms: Sequence[_StagedNorm], slack: float, start: int) -> tuple[bool, list[float]]:
    """True if lhs <= slack * sum(terms) at some level (the last level decides)."""
    levels = [start] if start > 0 else [0]
    levels += [lv for lv in (1, 2) if lv > levels[0]]
    sums = []
    for lv in levels:
        rhs = sum(t.at(lv) for t in terms)
        sums.append(rhs)
        if lhs <= slack * rhs + ROUNDING * (1.0 + lhs):
            return True, sums
    return False, sums


def pointwise_suite(
    spec: InstanceSpec,
    trials: int = 200,
    points: int = 50,
    *,
    params: SpaceParams = SpaceParams(1.0, 1.0),
    cfg: SearchConfig | None = None,
    slack: float = DEFAULT_SLACK,
    use_hints: bool = True,
    instance: SymbolQuadruple | None = None,
    base_points: np.ndarray | None = None,
    base_rmax: float = 0.99,
) -> PropertyReport:
    """|D_{u,phi}(a)| rho <= ||T f_{phi(a)}|| + ||T g_{phi,psi,a}|| and its swap, constant 1.

    Right-hand norms are computed lazily: first the weighted image at a,
    then the grid search, then the grid search at doubled resolution; a
    row fails only if all of them are too small. The third inequality
    (with min) has an unspecified constant; its ratio is logged as
    C_emp(iii) from the same staged values.
    """
    cfg = cfg or SearchConfig()
    rep = PropertyReport("pointwise", trials)
    start = 0 if use_hints else 1
    for t in range(trials):
        ts = spec.trial(t)
        q = instance if instance is not None else random_instance(ts)
        n = q.n
        rng = np.random.default_rng(ts.seed + 1)
        A = random_ball(rng, points, n, base_rmax) if base_points is None else np.asarray(base_points, dtype=complex)
        s = q.evaluate(A)
        du, dv = _d_values(s, A, params)
        rho = np.asarray(pseudo_dist(s.phi, s.psi))
        worst = 0.0
        for i, a in enumerate(A):
            fp = _StagedNorm(q, params, make_f_a(s.phi[i], params.alpha), a, cfg, use_hints)
            fs = _StagedNorm(q, params, make_f_a(s.psi[i], params.alpha), a, cfg, use_hints)
            gf = _StagedNorm(q, params, make_g(q, a, params.alpha, "forward"), a, cfg, use_hints)
            gb = _StagedNorm(q, params, make_g(q, a, params.alpha, "backward"), a, cfg, use_hints)
            for label, lhs, terms in (
                ("i", abs(du[i]) * rho[i], (fp, gf)),
                ("ii", abs(dv[i]) * rho[i], (fs, gb)),
            ):
                ok, sums = _staged_check(float(lhs), terms, slack, start)
                if sums[-1] > 0:
                    worst = max(worst, float(lhs) / sums[-1])
                if not ok:
                    rep.failures.append(
                        {"seed": ts.seed, "trial": t, "point": i, "inequality": label, "lhs": float(lhs),
                         "rhs_levels": sums, "slack": slack, "a": _c(a)}
                    )
            lhs3 = abs(du[i] - dv[i])
            rhs3 = fp.at(start) + fs.at(start) + min(gf.at(start), gb.at(start))
            if rhs3 > 0:
                rep.bump("C_emp(iii)", lhs3 / rhs3)
            elif lhs3 > ROUNDING:
                rhs3 = fp.at(2) + fs.at(2) + min(gf.at(2), gb.at(2))
                rep.bump("C_emp(iii)", lhs3 / rhs3 if rhs3 > 0 else math.inf)
        rep.bump("max_ratio(i,ii)", worst)
    c3 = rep.empirical_constants.get("C_emp(iii)", 0.0)
    if not math.isfinite(c3):
        rep.failures.append({"seed": spec.seed, "check": "C_emp(iii) finite", "value": c3})
    rep.notes.append(
        f"levels: {'point at a, ' if use_hints else ''}grid, doubled grid; slack={slack}; "
        f"C_emp(iii) from level {start} values"
    )
    return rep


# --------------------------------------------------------------------------
# test-function images against the criteria


def _a_grid(n: int, seed: int, radii: Sequence[float] = (0.0, 0.5, 0.9, 0.99, 0.995), dirs: int = 8) -> np.ndarray:
    d = sphere_directions(n, dirs, seed)
    pts = [np.zeros(n, dtype=complex)] + [r * x for r in radii if r > 0 for x in d]
    return np.array(pts)


def _image_sup(q, params, cfg, make: Callable[[np.ndarray], TestFunction], A: np.ndarray) -> float:
    """max over base points of the image norm: grid maxima first, full search on the best three."""
    ctx = CriterionContext(q, params, cfg)
    scored = []
    for a in A:
        h = make(a)
        if h.degenerate:
            continue
        raw = ctx.sv.image(h.evaluator)
        scored.append((float((ctx.weights * np.abs(raw)).max()), a, h, raw))
    if not scored:
        return 0.0
    scored.sort(key=lambda x: -x[0])
    best = scored[0][0]
    for _, a, h, raw in scored[:3]:
        est = weighted_sup_norm(difference_image(q, h.evaluator), params.beta, q.n, cfg, grid_values=raw, hints=[a])
        best = max(best, est.value)
    return best


def explicit_f_a_constant(alpha: float, kmax: int = 20_000, grid: int = 400) -> float:
    """sup_t (1-t^2)^alpha sum_k c_k t^k ||<z,xi>^k||_alpha.

    Expanding f_a in powers of <z, a/|a|> bounds ||T f_a|| by this constant
    times sup_j b1(j). The sup is the larger of a grid maximum over
    t in [0, 0.999] and the t -> 1 limit 2^a (2a/e)^a Gamma(a) / Gamma(2a).
    """
    c = gamma_coeffs(2.0 * alpha, kmax).values
    m = monomial_norms_closed(np.arange(kmax + 1), alpha)
    ts = np.linspace(0.0, 0.999, grid)
    k = np.arange(kmax + 1)
    vals = [(1 - t * t) ** alpha * np.sum(c * m * np.exp(k * math.log(t))) if t > 0 else 1.0 for t in ts]
    limit = math.exp(
        alpha * math.log(2.0) + alpha * math.log(2.0 * alpha / math.e) + math.lgamma(alpha) - math.lgamma(2.0 * alpha)
    )
    return float(max(max(vals), limit))


def test_function_suite(
    spec: InstanceSpec,
    trials: int = 100,
    *,
    params: SpaceParams = SpaceParams(1.0, 1.0),
    cfg: SearchConfig | None = None,
    ladder: Sequence[int] = SUITE_LADDER,
    margin: float = 0.1,
) -> PropertyReport:
    """sup_a ||T f_a|| and sup_a ||T g_a|| against the criterion suprema.

    The g parts are checked only on instances whose corresponding condition
    margin is at least ``margin``. A ratio is a failure only if it is not
    finite: zero criteria with a non-zero image contradict the bound.
    """
    cfg = cfg or SearchConfig()
    rep = PropertyReport("test_functions", trials)
    k_alpha = explicit_f_a_constant(params.alpha)
    rep.empirical_constants["explicit_constant(i)"] = k_alpha
    skipped = {"forward": 0, "backward": 0}
    for t in range(trials):
        ts = spec.trial(t)
        q = random_instance(ts)
        seq = criterion_sequence(q, params, cfg, ladder)
        s1 = float(seq.b1_values.max())
        s12 = s1 + float(seq.b2_values.max())
        A = _a_grid(q.n, ts.seed)
        lhs1 = _image_sup(q, params, cfg, lambda a: make_f_a(a, params.alpha), A)
        rows = [("i", lhs1, s1)]
        for label, which in (("ii", "forward"), ("iii", "backward")):
            cond = condition_check(q, which, cfg)
            if cond.vacuous or cond.inf_margin < margin:
                skipped[which] += 1
                continue
            lhs = _image_sup(q, params, cfg, lambda a, w=which: make_g(q, a, params.alpha, w), A)
            rows.append((label, lhs, s12))
        for label, lhs, rhs in rows:
            if rhs > 0:
                ratio = lhs / rhs
            else:
                ratio = 0.0 if lhs <= ROUNDING else math.inf
            rep.bump(f"C_emp({label})", ratio)
            if label == "i" and ratio > DEFAULT_SLACK * k_alpha:
                rep.notes.append(f"trial {t}: part i ratio {ratio:.6g} above explicit constant (ladder sup)")
            if not math.isfinite(ratio):
                rep.failures.append({"seed": ts.seed, "trial": t, "part": label, "lhs": lhs, "rhs": rhs})
    rep.notes.append(f"g parts skipped (margin < {margin}): forward {skipped['forward']}, backward {skipped['backward']}")
    rep.notes.append("sup over a: |a| in {0, 0.5, 0.9, 0.99, 0.995} x 8 directions; sup over j: ladder " + str(list(ladder)))
    return rep


# --------------------------------------------------------------------------
# tail of f_a images against the truncated expansion


def _series_tail_bound(r: float, alpha: float, b1_head: np.ndarray, tail_sup: float) -> float:
    """(1-r^2)^alpha [sum_{k<=N} c_k r^k B(k) m(k) + T sum_{k>N} c_k r^k m(k)], m = monomial norms."""
    N = b1_head.size - 1
    kmax = max(N + 1, int(math.ceil(math.log(1e-20) / math.log(r))) + 200) if r > 0 else N + 1
    kmax = min(kmax, 2_000_000)
    c = gamma_coeffs(2.0 * alpha, kmax).values
    m = monomial_norms_closed(np.arange(kmax + 1), alpha)
    k = np.arange(kmax + 1)
    rk = np.exp(k * math.log(r)) if r > 0 else (k == 0).astype(float)
    terms = c * rk * m
    head = float(np.sum(terms[: N + 1] * b1_head))
    tail = float(np.sum(terms[N + 1 :])) * tail_sup
    return (1.0 - r * r) ** alpha * (head + tail)


def tail_suite(
    spec: InstanceSpec,
    trials: int = 20,
    a_ladder: Sequence[float] = TAIL_RADII,
    *,
    params: SpaceParams = SpaceParams(1.0, 1.0),
    cfg: SearchConfig | None = None,
    n_head: int = 16,
    tail_ladder: Sequence[int] = (32, 64, 128),
    instance: SymbolQuadruple | None = None,
) -> PropertyReport:
    """m(r) = max_{|a| = r} ||T f_a|| against the truncated expansion bound.

    Head degrees k <= n_head use b1(k); the tail uses T = max of b1 over
    ``tail_ladder``. With exact b1 the bound holds with constant 1; b1 is
    searched from below, so an exceedance beyond the slack is re-checked
    with b1 at doubled resolution before it counts. For compact-indicated
    instances m(r) must not increase along the ladder beyond its first radius.
    Finite ladders stand in for the limits in |a| and j.
    """
    cfg = cfg or SearchConfig()
    radii = [float(r) for r in a_ladder]
    if any(b <= a for a, b in zip(radii, radii[1:])) or not all(0 < r < 1 for r in radii):
        raise ValueError("a_ladder must increase within (0, 1)")
    rep = PropertyReport("tail", trials)
    js = list(range(n_head + 1)) + [j for j in tail_ladder if j > n_head]
    for t in range(trials):
        ts = spec.trial(t)
        q = instance if instance is not None else random_instance(ts)
        seq = criterion_sequence(q, params, cfg, js, with_b2=False)
        vals = seq.b1_values
        head, tail_sup = vals[: n_head + 1], float(vals[n_head + 1 :].max()) if len(js) > n_head + 1 else 0.0
        dirs = sphere_directions(q.n, 8, ts.seed)
        m = []
        for r in radii:
            m.append(_image_sup(q, params, cfg, lambda a: make_f_a(a, params.alpha), r * dirs))
        bounds = [_series_tail_bound(r, params.alpha, head, tail_sup) for r in radii]
        for r, mr, br in zip(radii, m, bounds):
            ratio = mr / br if br > 0 else (0.0 if mr <= ROUNDING else math.inf)
            rep.bump("C_emp", ratio)
            if mr > DEFAULT_SLACK * br + ROUNDING:
                fine = cfg.doubled()
                seq2 = criterion_sequence(q, params, fine, js, with_b2=False)
                v2 = np.maximum(vals, seq2.b1_values)
                tail2 = float(v2[n_head + 1 :].max()) if len(js) > n_head + 1 else 0.0
                br2 = _series_tail_bound(r, params.alpha, v2[: n_head + 1], tail2)
                if mr > DEFAULT_SLACK * br2 + ROUNDING:
                    rep.failures.append(
                        {"seed": ts.seed, "trial": t, "check": "bound", "r": r, "m": mr, "bound": br2}
                    )
        try:
            verdict = tail_statistics(js, vals).verdict
        except ValueError:
            verdict = "n/a"
        if verdict == COMPACT:
            for i in range(1, len(radii) - 1):
                if m[i + 1] > DEFAULT_SLACK * m[i] + ROUNDING:
                    rep.failures.append(
                        {"seed": ts.seed, "trial": t, "check": "monotone", "radii": radii, "m": m}
                    )
                    break
        rep.notes.append(f"trial {t}: verdict={verdict}, m={['%.6g' % x for x in m]}")
    rep.notes.append(f"limits replaced by |a| in {radii} and degrees {js}")
    return rep
