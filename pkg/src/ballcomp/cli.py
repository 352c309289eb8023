"""Command-line entry point: ``ballcomp analyze | verify | asymptotics``."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .criteria import (
    BRACKET_J_MIN,
    DEFAULT_LADDER,
    AnalysisReport,
    SelfMapError,
    boundedness_report,
)
from .funcmodel import PolyFn, PolyMap, SpaceParams, SymbolQuadruple, ipow
from .norms import SearchConfig, coeff_asymptotics, monomial_norm_closed, weighted_sup_norm
from .verify import (
    SUITE_LADDER,
    InstanceSpec,
    PropertyReport,
    geometry_suite,
    lipschitz_suite,
    merge_reports,
    pointwise_suite,
    tail_suite,
    test_function_suite,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

SUITES = ("geometry", "lipschitz", "pointwise", "test_functions", "tail")
SUITE_ALIASES = {
    "lemma21": "lipschitz",
    "lemma22": "pointwise",
    "lemma23": "test_functions",
    "lemma31": "tail",
}
DEFAULT_TRIALS = {"geometry": 10_000, "lipschitz": 10_000, "pointwise": 200, "test_functions": 100, "tail": 20}

INSTANCE_KEYS = ("n", "alpha", "beta", "u", "v", "phi", "psi")
ANALYZE_OPTIONAL = ("search", "ladder", "delta_margin", "j_min", "bracket_j_min")
VERIFY_KEYS = (
    "seed",
    "dims",
    "max_degree",
    "shrink",
    "alpha",
    "beta",
    "search",
    "trials",
    "points",
    "slack",
    "use_hints",
    "instance",
    "base_points",
    "base_rmax",
)
SEARCH_KEYS = tuple(f.name for f in fields(SearchConfig))


class ConfigError(ValueError):
    """Malformed input; ``line`` points into the config text when known."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        super().__init__(message)
        self.line = line
        self.col = col


# --------------------------------------------------------------------------
# config parsing


@dataclass
class Source:
    path: str
    text: str

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.text.encode("utf-8")).hexdigest()

    def line_of(self, key: str) -> int | None:
        """First line mentioning ``"key"``; a best-effort anchor for messages."""
        needle = json.dumps(key)
        for k, line in enumerate(self.text.splitlines(), start=1):
            if needle in line:
                return k
        return None

    def error(self, message: str, key: str | None = None) -> ConfigError:
        return ConfigError(message, self.line_of(key) if key else None)


def load_source(path: str) -> tuple[Source, dict]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}") from exc
    src = Source(path, text)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, exc.lineno, exc.colno) from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object", 1)
    return src, data


def _check_keys(src: Source, obj: dict, allowed: Sequence[str], required: Sequence[str], where: str) -> None:
    for key in obj:
        if key not in allowed:
            raise src.error(f"unknown key {key!r} in {where}", key)
    for key in required:
        if key not in obj:
            raise src.error(f"missing key {key!r} in {where}")


def _number(src: Source, value: Any, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise src.error(f"{key!r} must be a number", key)
    return float(value)


def _integer(src: Source, value: Any, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise src.error(f"{key!r} must be an integer", key)
    return value


def _complex(src: Source, value: Any, key: str) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if (
        isinstance(value, list)
        and len(value) == 2
        and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)
    ):
        return complex(value[0], value[1])
    raise src.error(f"coefficient {key!r} must be [re, im] or a number", key)


def parse_poly(src: Source, table: Any, n: int, name: str) -> PolyFn:
    """A table {"i1 ... in": [re, im]} as a polynomial in n variables."""
    if not isinstance(table, dict):
        raise src.error(f"{name!r} must be an object mapping multi-indices to [re, im]", name)
    coeffs: dict[tuple[int, ...], complex] = {}
    for key, value in table.items():
        parts = key.split()
        try:
            idx = tuple(int(p) for p in parts)
        except ValueError:
            raise src.error(f"bad multi-index {key!r} in {name!r}", key) from None
        if len(idx) != n or any(e < 0 for e in idx):
            raise src.error(f"multi-index {key!r} in {name!r} needs {n} non-negative integers", key)
        if idx in coeffs:
            raise src.error(f"duplicate multi-index {key!r} in {name!r}", key)
        coeffs[idx] = _complex(src, value, key)
    return PolyFn(n, coeffs)


def parse_map(src: Source, comps: Any, n: int, name: str) -> PolyMap:
    if not isinstance(comps, list) or len(comps) != n:
        raise src.error(f"{name!r} must be a list of {n} component tables", name)
    return PolyMap(tuple(parse_poly(src, c, n, f"{name}[{k}]") for k, c in enumerate(comps)))


def parse_instance(src: Source, data: dict) -> tuple[SymbolQuadruple, SpaceParams]:
    n = _integer(src, data["n"], "n")
    if n < 1:
        raise src.error("'n' must be >= 1", "n")
    alpha = _number(src, data["alpha"], "alpha")
    beta = _number(src, data["beta"], "beta")
    if not (alpha > 0 and beta > 0):
        raise src.error("'alpha' and 'beta' must be positive", "alpha")
    q = SymbolQuadruple(
        parse_poly(src, data["u"], n, "u"),
        parse_poly(src, data["v"], n, "v"),
        parse_map(src, data["phi"], n, "phi"),
        parse_map(src, data["psi"], n, "psi"),
    )
    return q, SpaceParams(alpha, beta)


def parse_search(src: Source, obj: Any, seed: int | None = None) -> SearchConfig:
    if obj is None:
        obj = {}
    if not isinstance(obj, dict):
        raise src.error("'search' must be an object", "search")
    _check_keys(src, obj, SEARCH_KEYS, (), "'search'")
    kw: dict[str, Any] = {}
    for key, value in obj.items():
        kw[key] = _number(src, value, key) if key == "r_cap" else _integer(src, value, key)
    if seed is not None:
        kw["seed"] = seed
    try:
        return SearchConfig(**kw)
    except ValueError as exc:
        raise src.error(f"search: {exc}", "search") from exc


def parse_ladder(text: str) -> list[int]:
    try:
        js = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad ladder {text!r}: expected comma-separated integers") from None
    return _valid_ladder(js)


def _valid_ladder(js: list[int]) -> list[int]:
    if not js or any(j < 0 for j in js) or any(b <= a for a, b in zip(js, js[1:])):
        raise ConfigError("ladder must be a non-empty, strictly increasing list of integers >= 0")
    return js


@dataclass
class AnalyzeConfig:
    source: Source
    quad: SymbolQuadruple
    params: SpaceParams
    search: SearchConfig
    ladder: list[int]
    delta_margin: float = 1e-3
    j_min: int | None = None
    bracket_j_min: int = BRACKET_J_MIN


def parse_analyze(path: str, *, seed: int | None = None, ladder: list[int] | None = None) -> AnalyzeConfig:
    src, data = load_source(path)
    _check_keys(src, data, INSTANCE_KEYS + ANALYZE_OPTIONAL, INSTANCE_KEYS, "config")
    try:
        q, params = parse_instance(src, data)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    cfg = parse_search(src, data.get("search"), seed)
    if ladder is None:
        raw = data.get("ladder", list(DEFAULT_LADDER))
        if not isinstance(raw, list) or not all(isinstance(j, int) and not isinstance(j, bool) for j in raw):
            raise src.error("'ladder' must be a list of integers", "ladder")
        try:
            ladder = _valid_ladder(raw)
        except ConfigError as exc:
            raise src.error(str(exc), "ladder") from None
    out = AnalyzeConfig(src, q, params, cfg, ladder)
    if "delta_margin" in data:
        out.delta_margin = _number(src, data["delta_margin"], "delta_margin")
        if out.delta_margin < 0:
            raise src.error("'delta_margin' must be >= 0", "delta_margin")
    if "j_min" in data:
        out.j_min = _integer(src, data["j_min"], "j_min")
    if "bracket_j_min" in data:
        out.bracket_j_min = _integer(src, data["bracket_j_min"], "bracket_j_min")
    return out


@dataclass
class VerifyConfig:
    source: Source
    seed: int = 0
    dims: list[int] = field(default_factory=lambda: [1, 2])
    max_degree: int = 2
    shrink: float = 0.9
    params: SpaceParams = SpaceParams(1.0, 1.0)
    search: SearchConfig = field(default_factory=SearchConfig)
    trials: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_TRIALS))
    points: int = 50
    slack: float = 1.05
    use_hints: bool = True
    instance: SymbolQuadruple | None = None
    base_points: np.ndarray | None = None
    base_rmax: float = 0.99

    def spec(self, n: int) -> InstanceSpec:
        return InstanceSpec(self.seed, n, self.max_degree, self.shrink)


def parse_verify(path: str, *, seed: int | None = None) -> VerifyConfig:
    src, data = load_source(path)
    _check_keys(src, data, VERIFY_KEYS, (), "config")
    out = VerifyConfig(src)
    if "seed" in data:
        out.seed = _integer(src, data["seed"], "seed")
    if seed is not None:
        out.seed = seed
    if "dims" in data:
        dims = data["dims"]
        if not isinstance(dims, list) or not dims or not all(isinstance(d, int) and d >= 1 for d in dims):
            raise src.error("'dims' must be a non-empty list of positive integers", "dims")
        out.dims = dims
    if "max_degree" in data:
        out.max_degree = _integer(src, data["max_degree"], "max_degree")
    if "shrink" in data:
        out.shrink = _number(src, data["shrink"], "shrink")
    alpha = _number(src, data.get("alpha", 1.0), "alpha")
    beta = _number(src, data.get("beta", 1.0), "beta")
    if not (alpha > 0 and beta > 0):
        raise src.error("'alpha' and 'beta' must be positive", "alpha")
    out.params = SpaceParams(alpha, beta)
    out.search = parse_search(src, data.get("search"), out.seed)
    if "trials" in data:
        t = data["trials"]
        if not isinstance(t, dict):
            raise src.error("'trials' must be an object", "trials")
        _check_keys(src, t, SUITES, (), "'trials'")
        for k, v in t.items():
            if _integer(src, v, k) < 1:
                raise src.error(f"trials for {k!r} must be >= 1", k)
            out.trials[k] = v
    if "points" in data:
        out.points = _integer(src, data["points"], "points")
    if "slack" in data:
        out.slack = _number(src, data["slack"], "slack")
    if "use_hints" in data:
        if not isinstance(data["use_hints"], bool):
            raise src.error("'use_hints' must be true or false", "use_hints")
        out.use_hints = data["use_hints"]
    if "base_rmax" in data:
        out.base_rmax = _number(src, data["base_rmax"], "base_rmax")
    if "instance" in data:
        inst = data["instance"]
        if not isinstance(inst, dict):
            raise src.error("'instance' must be an object", "instance")
        keys = ("n", "u", "v", "phi", "psi")
        _check_keys(src, inst, keys, keys, "'instance'")
        try:
            q, _ = parse_instance(src, dict(inst, alpha=1.0, beta=1.0))
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc
        out.instance = q
        out.dims = [q.n]
    if "base_points" in data:
        if out.instance is None:
            raise src.error("'base_points' needs a fixed 'instance'", "base_points")
        pts = data["base_points"]
        n = out.instance.n
        if not isinstance(pts, list) or not pts:
            raise src.error("'base_points' must be a non-empty list of points", "base_points")
        rows = []
        for p in pts:
            if not isinstance(p, list) or len(p) != n:
                raise src.error(f"each base point needs {n} coordinates [re, im]", "base_points")
            rows.append([_complex(src, c, "base_points") for c in p])
        arr = np.array(rows, dtype=complex)
        if np.any(np.linalg.norm(arr, axis=1) >= 1.0):
            raise src.error("base points must lie in the open unit ball", "base_points")
        out.base_points = arr
    return out


def parse_suites(text: str) -> list[str]:
    names = [s.strip() for s in text.split(",") if s.strip()]
    if not names:
        raise ConfigError("empty suite list")
    out = []
    for name in names:
        key = SUITE_ALIASES.get(name, name)
        if key not in SUITES:
            known = ", ".join(sorted(SUITES + tuple(SUITE_ALIASES)))
            raise ConfigError(f"unknown suite {name!r} (known: {known})")
        if key not in out:
            out.append(key)
    return out


# --------------------------------------------------------------------------
# output


def fmt(x: float) -> str:
    """Locale-free 17-significant-digit text, round-trip exact."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def header_line(seed: int, sha: str) -> str:
    return f"# ballcomp {__version__} seed={seed} config_sha256={sha}"


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(comment: str, header: Sequence[str], rows: Sequence[Sequence[str]], notes: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    buf.write(comment + "\n")
    for note in notes:
        buf.write(f"# {note}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _vec_cols(v: np.ndarray | None, n: int) -> list[str]:
    if v is None:
        return ["nan"] * (2 * n)
    v = np.asarray(v, dtype=complex)
    return [fmt(x) for x in v.real] + [fmt(x) for x in v.imag]


def criteria_csv(rep: AnalysisReport, n: int, comment: str) -> str:
    header = ["j", "b1"]
    header += [f"b1_xi_re_{k + 1}" for k in range(n)] + [f"b1_xi_im_{k + 1}" for k in range(n)]
    header += ["b2", "denom1", "denom2"]
    rows = []
    seq = rep.sequence
    for j, r1, r2 in zip(seq.js, seq.b1, seq.b2):
        rows.append([str(j), fmt(r1.value), *_vec_cols(r1.xi, n), fmt(r2.value), fmt(r1.denominator), fmt(r2.denominator)])
    return csv_text(comment, header, rows)


def conditions_csv(rep: AnalysisReport, n: int, comment: str) -> str:
    header = ["which", "inf_margin"]
    header += [f"argmin_re_{k + 1}" for k in range(n)] + [f"argmin_im_{k + 1}" for k in range(n)]
    header += ["degenerate_fraction", "samples", "status"]
    rows = []
    for c in rep.conditions:
        rows.append([c.which, fmt(c.inf_margin), *_vec_cols(c.argmin, n), fmt(c.degenerate_fraction), str(c.samples), c.status])
    notes = ["n = 1: conditions not required"] if n == 1 else []
    return csv_text(comment, header, rows, notes)


def bracket_csv(rep: AnalysisReport, comment: str) -> str:
    header = ["quantity", "j", "radius", "value"]
    b = rep.bracket
    if b is None:
        return csv_text(comment, header, [], ["bracket skipped; see report.txt"])
    rows = [
        ["lower", "" if b.lower_witness_j is None else str(b.lower_witness_j), "", fmt(b.lower)],
        ["upper_proxy", str(b.j_min), "", fmt(b.upper_proxy)],
    ]
    rows += [[f"probe_{kind}", str(j), "", fmt(v)] for j, kind, v in b.probe_values]
    rows += [["f_a", "", fmt(r), fmt(v)] for r, v in b.fa_profile]
    return csv_text(comment, header, rows, [f"tail from j >= {b.j_min}"])


def report_text(rep: AnalysisReport, cfg: AnalyzeConfig, seed: int) -> str:
    p, t = rep.params, rep.tail
    lines = [
        header_line(seed, cfg.source.sha256),
        f"config: {cfg.source.path}",
        f"n={cfg.quad.n} alpha={fmt(p.alpha)} beta={fmt(p.beta)}",
        f"ladder: {' '.join(map(str, rep.sequence.js))}",
        f"verdict: {rep.verdict}",
        f"boundedness: {rep.verdicts['boundedness']}",
        f"compactness: {rep.verdicts['compactness']}",
        "",
        "[criteria]",
        f"sup b1 = {fmt(rep.sequence.b1_values.max())}",
        f"sup b2 = {fmt(rep.sequence.b2_values.max())}",
        f"tail j >= {t.j_min}: max = {fmt(t.tail_max)} head max = {fmt(t.head_max)}",
        f"log-log slope b1 = {fmt(t.slope_b1)} b2 = {fmt(t.slope_b2)}",
        "",
        "[classical indicators]",
    ]
    names = ("sup |D_u| rho", "sup |D_v| rho", "sup |D_u - D_v|")
    lines += [f"{k} = {fmt(v)}" for k, v in zip(names, rep.classical.values())]
    lines += ["", "[conditions]"]
    lines += [f"{c.which}: {c.status}" for c in rep.conditions]
    lines += ["", "[essential norm bracket]"]
    if rep.bracket is None:
        lines.append("skipped")
    else:
        b = rep.bracket
        lines += [f"lower = {fmt(b.lower)}", f"upper_proxy = {fmt(b.upper_proxy)}"]
        lines += [f"note: {s}" for s in b.notes]
    lines += [
        "",
        "[self-maps]",
        f"sup |phi| = {fmt(rep.selfmap_sups[0])}",
        f"sup |psi| = {fmt(rep.selfmap_sups[1])}",
        f"delta_margin = {fmt(cfg.delta_margin)}",
        "",
        "[notes]",
        "limits in j and |a| are replaced by the finite ladders above",
    ]
    lines += rep.notes
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# commands


def worker_count() -> int:
    raw = os.environ.get("BALLCOMP_THREADS", "0").strip() or "0"
    try:
        k = int(raw)
    except ValueError:
        raise ConfigError(f"BALLCOMP_THREADS must be an integer, got {raw!r}") from None
    if k < 0:
        raise ConfigError("BALLCOMP_THREADS must be >= 0")
    return k if k > 0 else (os.cpu_count() or 1)


def cmd_analyze(args: argparse.Namespace) -> int:
    ladder = parse_ladder(args.ladder) if args.ladder else None
    cfg = parse_analyze(args.config, seed=args.seed, ladder=ladder)
    workers = worker_count()
    try:
        rep = boundedness_report(
            cfg.quad,
            cfg.params,
            cfg.search,
            cfg.ladder,
            delta_margin=cfg.delta_margin,
            j_min=cfg.j_min,
            bracket_j_min=cfg.bracket_j_min,
            workers=workers,
        )
    except (SelfMapError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    out = Path(args.out)
    seed = cfg.search.seed
    comment = header_line(seed, cfg.source.sha256)
    n = cfg.quad.n
    atomic_write(out / "criteria.csv", criteria_csv(rep, n, comment))
    atomic_write(out / "conditions.csv", conditions_csv(rep, n, comment))
    atomic_write(out / "bracket.csv", bracket_csv(rep, comment))
    atomic_write(out / "report.txt", report_text(rep, cfg, seed))
    print(f"verdict: {rep.verdict}")
    print(f"wrote {out / 'report.txt'}, criteria.csv, conditions.csv, bracket.csv")
    return EXIT_OK


def _json_default(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def run_suite(name: str, cfg: VerifyConfig) -> PropertyReport:
    trials = cfg.trials[name]
    reports = []
    for n in cfg.dims:
        spec = cfg.spec(n)
        if name == "geometry":
            r = geometry_suite(spec, trials)
        elif name == "lipschitz":
            r = lipschitz_suite(spec, trials, cfg.params.alpha)
        elif name == "pointwise":
            r = pointwise_suite(
                spec,
                trials,
                cfg.points,
                params=cfg.params,
                cfg=cfg.search,
                slack=cfg.slack,
                use_hints=cfg.use_hints,
                instance=cfg.instance,
                base_points=cfg.base_points,
                base_rmax=cfg.base_rmax,
            )
        elif name == "test_functions":
            r = test_function_suite(spec, trials, params=cfg.params, cfg=cfg.search, ladder=SUITE_LADDER)
        else:
            r = tail_suite(spec, trials, params=cfg.params, cfg=cfg.search, instance=cfg.instance)
        r.notes.append(f"n = {n}: {r.summary()}")
        reports.append(r)
    return merge_reports(reports)


def cmd_verify(args: argparse.Namespace) -> int:
    suites = parse_suites(args.suites)
    cfg = parse_verify(args.config, seed=args.seed)
    out = Path(args.out)
    status = EXIT_OK
    for name in suites:
        rep = run_suite(name, cfg)
        doc = {
            "tool": "ballcomp",
            "version": __version__,
            "seed": cfg.seed,
            "config_sha256": cfg.source.sha256,
            "suite": rep.suite,
            "passed": rep.passed,
            "trials": rep.trials,
            "dims": cfg.dims,
            "empirical_constants": rep.empirical_constants,
            "failures": rep.failures,
            "notes": rep.notes,
        }
        atomic_write(out / f"verify_{name}.json", json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n")
        print(rep.summary())
        if not rep.passed:
            status = EXIT_FAIL
            for f in rep.failures[: args.max_listed]:
                print("  counterexample: " + json.dumps(f, sort_keys=True, default=_json_default))
            hidden = len(rep.failures) - args.max_listed
            if hidden > 0:
                print(f"  ... {hidden} more in {out / f'verify_{name}.json'}")
    return status


def asymptotic_js(jmax: int) -> list[int]:
    js = [0, 1, 2, 3]
    k = 4
    while k < jmax:
        js.append(k)
        k *= 2
    js.append(jmax)
    return sorted(set(j for j in js if j <= jmax))


def cmd_asymptotics(args: argparse.Namespace) -> int:
    alpha, jmax = args.alpha, args.jmax
    if not alpha > 0:
        raise ConfigError("--alpha must be positive")
    if jmax < 0:
        raise ConfigError("--jmax must be >= 0")
    n = args.n
    cfg = SearchConfig(seed=args.seed)
    xi = np.zeros(n, dtype=complex)
    xi[0] = 1.0
    comment = f"# ballcomp {__version__} seed={args.seed} alpha={fmt(alpha)} jmax={jmax} n={n}"

    mono = []
    for j in asymptotic_js(jmax):
        closed = monomial_norm_closed(j, alpha)
        est = weighted_sup_norm(lambda z, j=j: ipow(z @ np.conj(xi), j), alpha, n, cfg).value
        rel = abs(est - closed) / closed
        mono.append([str(j), fmt(closed), fmt(est), fmt(rel), fmt(j**alpha * closed)])
    mono_header = ["j", "closed", "grid", "rel_error", "j_pow_alpha_times_closed"]

    kmax = max(args.kmax, 50)
    rep = coeff_asymptotics(alpha, kmax, args.radii)
    coef = [[str(int(k)), fmt(s), fmt(r)] for k, s, r in zip(rep.ks, rep.partial_sums, rep.partial_ratio)]
    coef_header = ["k", "S_k", "S_k_over_k_pow_2alpha"]
    series = [[fmt(t), fmt(s), fmt(tr)] for t, s, tr in zip(rep.t_grid, rep.series_ratio, rep.truncation)]
    series_header = ["t", "series_ratio", "last_term_weight"]

    tables = [
        ("monomials.csv", mono_header, mono),
        ("coefficients.csv", coef_header, coef),
        ("series.csv", series_header, series),
    ]
    for fname, header, rows in tables:
        text = csv_text(comment, header, rows)
        if args.out:
            atomic_write(Path(args.out) / fname, text)
        sys.stdout.write(f"\n[{fname}]\n" + text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ballcomp", description="Criteria for differences of weighted composition operators on the unit ball")
    p.add_argument("--version", action="version", version=f"ballcomp {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="criteria, verdict and essential norm bracket for one operator")
    pa.add_argument("config", help="instance config (JSON)")
    pa.add_argument("--out", default=".", help="output directory (default: current)")
    pa.add_argument("--ladder", default=None, help="comma-separated degrees, overrides the config")
    pa.add_argument("--seed", type=int, default=None, help="search seed, overrides the config")
    pa.set_defaults(func=cmd_analyze)

    pv = sub.add_parser("verify", help="property suites over seeded random instances")
    pv.add_argument("config", help="suite config (JSON)")
    pv.add_argument("--suites", default=",".join(SUITES), help="comma-separated suites; lemma21/22/23/31 are aliases")
    pv.add_argument("--out", default=".", help="output directory for verify_<suite>.json")
    pv.add_argument("--seed", type=int, default=None)
    pv.add_argument("--max-listed", type=int, default=10, help="counterexamples printed per failing suite")
    pv.set_defaults(func=cmd_verify)

    ps = sub.add_parser("asymptotics", help="monomial norm and coefficient-sum tables")
    ps.add_argument("--alpha", type=float, required=True)
    ps.add_argument("--jmax", type=int, required=True)
    ps.add_argument("--n", type=int, default=1, help="dimension for the grid estimates")
    ps.add_argument("--kmax", type=int, default=1024, help="coefficient table length")
    ps.add_argument("--radii", type=float, nargs="+", default=[0.0, 0.5, 0.9, 0.99, 0.999])
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--out", default=None, help="also write the tables as CSV here")
    ps.set_defaults(func=cmd_asymptotics)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        where = getattr(args, "config", None) or "ballcomp"
        if exc.line is not None:
            where += f":{exc.line}" + (f":{exc.col}" if exc.col is not None else "")
        print(f"{where}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
