"""Polynomial symbols, self-maps and the probe functions built from them.

Evaluators throughout the package are plain callables taking a batch of
points of shape ``(N, n)`` and returning ``(N,)`` complex values. Objects in
this module also accept a single point of shape ``(n,)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping, Sequence

import numpy as np

from .geometry import as_vector, norm

MultiIndex = tuple[int, ...]
Evaluator = Callable[[np.ndarray], np.ndarray]


def _batch(z, n: int) -> tuple[np.ndarray, tuple[int, ...]]:
    z = as_vector(z)
    if z.shape[-1] != n:
        raise ValueError(f"dimension mismatch: expected {n}, got {z.shape[-1]}")
    return z.reshape(-1, n), z.shape[:-1]


def monomial_table(z: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    """Values of the monomials ``z**e`` for each row ``e`` of ``exponents``.

    ``z`` has shape (N, n), ``exponents`` (T, n); the result is (N, T).
    Powers are built by repeated multiplication, so 0**0 = 1 and no complex
    logarithm is ever taken.
    """
    N, n = z.shape
    T = exponents.shape[0]
    if T == 0:
        return np.zeros((N, 0), dtype=complex)
    dmax = int(exponents.max(initial=0))
    pw = np.empty((dmax + 1, N, n), dtype=complex)
    pw[0] = 1.0
    for k in range(1, dmax + 1):
        pw[k] = pw[k - 1] * z
    out = np.ones((N, T), dtype=complex)
    for i in range(n):
        out *= pw[exponents[:, i], :, i].T
    return out


def ipow(w: np.ndarray, j: int) -> np.ndarray:
    """Integer power by repeated squaring."""
    w = np.asarray(w, dtype=complex)
    result = np.ones_like(w)
    base = w
    while j > 0:
        if j & 1:
            result = result * base
        j >>= 1
        if j:
            base = base * base
    return result


@dataclass(frozen=True)
class PolyFn:
    """A holomorphic polynomial C^n -> C stored as multi-index -> coefficient."""

    n: int
    coeffs: Mapping[MultiIndex, complex] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        clean = {}
        for key, c in dict(self.coeffs).items():
            idx = tuple(int(e) for e in key)
            if len(idx) != self.n or any(e < 0 for e in idx):
                raise ValueError(f"bad multi-index {key!r} for dimension {self.n}")
            c = complex(c)
            if c != 0:
                clean[idx] = clean.get(idx, 0) + c
        object.__setattr__(self, "coeffs", MappingProxyType(dict(sorted(clean.items()))))

    @classmethod
    def constant(cls, n: int, c: complex = 1.0) -> PolyFn:
        return cls(n, {(0,) * n: c})

    @classmethod
    def zero(cls, n: int) -> PolyFn:
        return cls(n, {})

    @classmethod
    def coordinate(cls, n: int, i: int, c: complex = 1.0) -> PolyFn:
        idx = [0] * n
        idx[i] = 1
        return cls(n, {tuple(idx): c})

    @property
    def degree(self) -> int:
        return max((sum(k) for k in self.coeffs), default=0)

    def scale(self, lam: complex) -> PolyFn:
        return PolyFn(self.n, {k: lam * c for k, c in self.coeffs.items()})

    def __call__(self, z):
        zb, shape = _batch(z, self.n)
        if not self.coeffs:
            out = np.zeros(zb.shape[0], dtype=complex)
        else:
            exps = np.array(list(self.coeffs), dtype=int)
            out = monomial_table(zb, exps) @ np.array(list(self.coeffs.values()))
        return complex(out[0]) if shape == () else out.reshape(shape)


@dataclass(frozen=True)
class PolyMap:
    """A polynomial map C^n -> C^m given by m component polynomials."""

    components: tuple[PolyFn, ...]
    _exps: np.ndarray = field(init=False, repr=False, compare=False)
    _coef: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("a map needs at least one component")
        if len({c.n for c in comps}) != 1:
            raise ValueError("components disagree on dimension")
        object.__setattr__(self, "components", comps)
        exps, coef = _stack(comps)
        object.__setattr__(self, "_exps", exps)
        object.__setattr__(self, "_coef", coef)

    @classmethod
    def identity(cls, n: int) -> PolyMap:
        return cls(tuple(PolyFn.coordinate(n, i) for i in range(n)))

    @classmethod
    def constant(cls, c: Sequence[complex]) -> PolyMap:
        c = as_vector(c)
        n = c.shape[0]
        return cls(tuple(PolyFn.constant(n, ci) for ci in c))

    @classmethod
    def linear(cls, matrix, offset=None) -> PolyMap:
        """z -> A z + b."""
        A = np.atleast_2d(np.asarray(matrix, dtype=complex))
        m, n = A.shape
        b = np.zeros(m, dtype=complex) if offset is None else as_vector(offset)
        comps = []
        for r in range(m):
            terms = {(0,) * n: b[r]}
            for i in range(n):
                idx = [0] * n
                idx[i] = 1
                terms[tuple(idx)] = A[r, i]
            comps.append(PolyFn(n, terms))
        return cls(tuple(comps))

    @property
    def n(self) -> int:
        return self.components[0].n

    @property
    def m(self) -> int:
        return len(self.components)

    @property
    def degree(self) -> int:
        return max(c.degree for c in self.components)

    def scale(self, lam: complex) -> PolyMap:
        return PolyMap(tuple(c.scale(lam) for c in self.components))

    def __call__(self, z):
        zb, shape = _batch(z, self.n)
        out = monomial_table(zb, self._exps) @ self._coef
        return out.reshape(shape + (self.m,))


def _stack(polys: Sequence[PolyFn]) -> tuple[np.ndarray, np.ndarray]:
    """Union of monomials of ``polys`` and the (T, len(polys)) coefficient matrix."""
    n = polys[0].n
    keys = sorted({k for p in polys for k in p.coeffs})
    exps = np.array(keys, dtype=int).reshape(len(keys), n)
    coef = np.zeros((len(keys), len(polys)), dtype=complex)
    pos = {k: i for i, k in enumerate(keys)}
    for col, p in enumerate(polys):
        for k, c in p.coeffs.items():
            coef[pos[k], col] = c
    return exps, coef


@dataclass(frozen=True)
class SpaceParams:
    """Weight exponents of the source space (alpha) and target space (beta)."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("alpha and beta must be positive")


@dataclass(frozen=True)
class SymbolValues:
    """u, v, phi, psi evaluated on a batch of points."""

    points: np.ndarray
    u: np.ndarray
    v: np.ndarray
    phi: np.ndarray
    psi: np.ndarray

    def image(self, f: Evaluator) -> np.ndarray:
        """Values of (uC_phi - vC_psi) f on ``points``."""
        return self.u * f(self.phi) - self.v * f(self.psi)


@dataclass(frozen=True)
class SymbolQuadruple:
    """The data (u, v, phi, psi) of the operator uC_phi - vC_psi."""

    u: PolyFn
    v: PolyFn
    phi: PolyMap
    psi: PolyMap
    _exps: np.ndarray = field(init=False, repr=False, compare=False)
    _coef: np.ndarray = field(init=False, repr=False, compare=False)
    _cols: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.u.n
        if not (self.v.n == n and self.phi.n == n and self.psi.n == n):
            raise ValueError("symbols disagree on dimension")
        if self.phi.m != n or self.psi.m != n:
            raise ValueError("phi and psi must map C^n to C^n")
        polys = (self.u, self.v) + self.phi.components + self.psi.components
        # equal symbols share one column, so u = v, phi = psi cancel exactly
        unique: list[PolyFn] = []
        cols = []
        for p in polys:
            k = next((i for i, w in enumerate(unique) if dict(w.coeffs) == dict(p.coeffs)), None)
            if k is None:
                k = len(unique)
                unique.append(p)
            cols.append(k)
        exps, coef = _stack(unique)
        object.__setattr__(self, "_exps", exps)
        object.__setattr__(self, "_coef", coef)
        object.__setattr__(self, "_cols", np.array(cols))

    @property
    def n(self) -> int:
        return self.u.n

    def evaluate(self, z) -> SymbolValues:
        zb, _ = _batch(z, self.n)
        vals = (monomial_table(zb, self._exps) @ self._coef)[:, self._cols]
        n = self.n
        return SymbolValues(zb, vals[:, 0], vals[:, 1], vals[:, 2 : 2 + n], vals[:, 2 + n :])

    def scaled(self, lam: complex) -> SymbolQuadruple:
        return SymbolQuadruple(self.u.scale(lam), self.v.scale(lam), self.phi, self.psi)

    def swapped(self) -> SymbolQuadruple:
        """(v, u, psi, phi): the operator vC_psi - uC_phi, which is the negative."""
        return SymbolQuadruple(self.v, self.u, self.psi, self.phi)

    def first(self) -> SymbolQuadruple:
        """The single operator uC_phi, written as a difference with v = 0."""
        return SymbolQuadruple(self.u, PolyFn.zero(self.n), self.phi, self.phi)

    def second(self) -> SymbolQuadruple:
        """The single operator vC_psi, written with u = 0."""
        return SymbolQuadruple(PolyFn.zero(self.n), self.v, self.psi, self.psi)


def _unit(xi, name: str = "xi") -> np.ndarray:
    xi = as_vector(xi)
    if abs(norm(xi) - 1.0) > 1e-12:
        raise ValueError(f"{name} must be a unit vector, |{name}| = {norm(xi)!r}")
    return xi


def slice_power(phi: PolyMap, xi, j: int) -> Evaluator:
    """z -> <phi(z), xi>^j."""
    xi = _unit(xi)
    if j < 0:
        raise ValueError("j must be non-negative")

    def evaluate(z):
        return ipow(phi(z) @ np.conj(xi), j)

    return evaluate


def probe_values(sv: SymbolValues, j: int, xi: np.ndarray, xi2: np.ndarray | None = None) -> np.ndarray:
    """u<phi,xi>^j[<phi,xi2>] - v<psi,xi>^j[<psi,xi2>] from precomputed symbols."""
    cx = np.conj(xi)
    a = sv.u * ipow(sv.phi @ cx, j)
    b = sv.v * ipow(sv.psi @ cx, j)
    if xi2 is not None:
        cx2 = np.conj(xi2)
        a = a * (sv.phi @ cx2)
        b = b * (sv.psi @ cx2)
    return a - b


def diff_probe(q: SymbolQuadruple, j: int, xi, xi2=None) -> Evaluator:
    """The criterion numerator as a pointwise evaluator.

    Without ``xi2``: z -> u<phi,xi>^j - v<psi,xi>^j. With ``xi2`` both terms
    pick up the extra factor <phi,xi2> (resp. <psi,xi2>).
    """
    xi = _unit(xi)
    if xi.shape[0] != q.n:
        raise ValueError("dimension mismatch between xi and the symbols")
    if xi2 is not None:
        xi2 = _unit(xi2, "xi2")
        if xi2.shape[0] != q.n:
            raise ValueError("dimension mismatch between xi2 and the symbols")

    def evaluate(z):
        return probe_values(q.evaluate(z), j, xi, xi2)

    return evaluate


def difference_image(q: SymbolQuadruple, f: Evaluator) -> Evaluator:
    """(uC_phi - vC_psi) f as a pointwise evaluator."""

    def evaluate(z):
        return q.evaluate(z).image(f)

    return evaluate


@dataclass(frozen=True)
class SelfMapReport:
    passed: bool
    sup: float
    witness: np.ndarray
    delta_margin: float

    def __bool__(self) -> bool:
        return self.passed


def validate_selfmap(
    phi: PolyMap,
    delta_margin: float = 1e-3,
    *,
    samples: int = 2048,
    refine_iters: int = 40,
    seed: int = 0,
) -> SelfMapReport:
    """Estimate sup_{|z|<=1} |phi(z)| on the unit sphere and compare with 1 - delta_margin.

    |phi|^2 is plurisubharmonic, so the sup over the closed ball is attained
    on the sphere. A failed bound is reported, not raised.
    """
    from .sampling import compass_maximize, sphere_directions

    if delta_margin < 0:
        raise ValueError("delta_margin must be >= 0")
    n = phi.n
    dirs = sphere_directions(n, samples, seed)

    def objective(z):
        return norm(phi(z))

    vals = objective(dirs)
    order = np.argsort(-vals, kind="stable")[:4]
    best_z, best = dirs[order[0]], float(vals[order[0]])
    step = np.pi / samples if n == 1 else samples ** (-1.0 / (2 * n - 1))
    for k in order:
        z, val, _ = compass_maximize(objective, dirs[k], float(vals[k]), step, refine_iters, on_sphere=True)
        if val > best:
            best_z, best = z, val
    # rounding slack so that |z| = 1 maps like the identity pass at margin 0
    passed = best <= 1.0 - delta_margin + 1e-12
    return SelfMapReport(bool(passed), best, best_z, delta_margin)
