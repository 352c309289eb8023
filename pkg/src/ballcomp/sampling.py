"""Deterministic direction sets and compass-search refinement on C^n."""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

Objective = Callable[[np.ndarray], np.ndarray]


@lru_cache(maxsize=64)
def _sphere_directions(n: int, count: int, seed: int) -> np.ndarray:
    if n == 1:
        theta = 2.0 * np.pi * np.arange(count) / count
        return np.exp(1j * theta)[:, None]
    # Scrambled Sobol points pushed through the Gaussian quantile give a
    # low-discrepancy cloud whose normalization is uniform on the sphere.
    # Prefixes are stable in `count`, so doubling nests the sets.
    m = max(1, int(np.ceil(np.log2(count))))
    u = qmc.Sobol(d=2 * n, scramble=True, seed=seed).random_base2(m)[:count]
    g = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
    z = g[:, :n] + 1j * g[:, n:]
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def sphere_directions(n: int, count: int, seed: int = 0) -> np.ndarray:
    """Unit vectors in C^n, shape (count, n).

    n = 1 gives equally spaced phases; n >= 2 a seeded Sobol direction set.
    """
    out = _sphere_directions(int(n), int(count), int(seed))
    out.flags.writeable = False
    return out


def _compass_moves(n: int) -> np.ndarray:
    eye = np.eye(n, dtype=complex)
    return np.concatenate([eye, -eye, 1j * eye, -1j * eye])


def _renormalize_blocks(cand: np.ndarray, blocks: int) -> np.ndarray:
    parts = cand.reshape(cand.shape[0], blocks, -1)
    parts = parts / np.linalg.norm(parts, axis=2, keepdims=True)
    return parts.reshape(cand.shape)


def compass_maximize(
    objective: Objective,
    start: np.ndarray,
    value: float,
    step: float,
    rounds: int,
    *,
    radial_step: float | None = None,
    rmax: float = 1.0,
    on_sphere: bool = False,
    blocks: int = 1,
    max_moves: int = 2000,
    ftol: float = 0.0,
) -> tuple[np.ndarray, float, int]:
    """Compass search in polar form z = r d.

    Angular candidates move d along the 4n real coordinate directions and
    renormalize, keeping r fixed; radial candidates scale r by +-radial_step.
    Radial curvature near the sphere is much stiffer than angular curvature,
    so each family keeps its own step level: a family whose best candidate
    fails to improve halves its step, a family that wins the move doubles it
    (never above the initial step). A family stops once its step has
    dropped by 2**rounds; the whole search stops when both have, or after
    ``max_moves`` accepted moves. With ``on_sphere`` only angular moves are
    made, and ``blocks`` > 1 treats the vector as that many equal-length
    unit vectors normalized separately (a point of a product of spheres).
    A move gaining less than ``ftol`` relative is taken but still shrinks
    the step, which stops slow creeping along flat ridges.

    Returns (best point, best value, number of objective evaluations).
    """
    z = np.array(start, dtype=complex)
    n = z.shape[0]
    moves = _compass_moves(n)
    s0 = {"a": float(step), "r": float(step if radial_step is None else radial_step)}
    level = {"a": 0, "r": rounds if on_sphere else 0}
    best = float(value)
    evals = 0
    accepted = 0
    while (level["a"] < rounds or level["r"] < rounds) and accepted < max_moves:
        r = float(np.linalg.norm(z))
        sa = s0["a"] * 0.5 ** level["a"]
        sr = s0["r"] * 0.5 ** level["r"]
        groups = []
        if r == 0.0:
            # no direction at the origin: one family of plain coordinate moves
            groups.append(("o", min(sa, sr) * moves))
        else:
            d = z / r
            if level["a"] < rounds:
                if on_sphere:
                    cand = _renormalize_blocks(z[None, :] + sa * moves, blocks)
                    groups.append(("a", cand))
                else:
                    cand = d[None, :] + sa * moves
                    cand = cand / np.linalg.norm(cand, axis=1, keepdims=True)
                    groups.append(("a", r * cand))
            if level["r"] < rounds:
                rs = np.array([r + sr, r - sr])
                rs = rs[(rs >= 0.0) & (rs <= rmax)]
                groups.append(("r", rs[:, None] * d[None, :]))
        allc = np.concatenate([g[1] for g in groups])
        if allc.shape[0] == 0:
            break
        vals = np.asarray(objective(allc), dtype=float)
        vals = np.where(np.isnan(vals), -np.inf, vals)
        evals += allc.shape[0]
        pos = 0
        winner = None
        top = best
        for kind, cand in groups:
            gv = vals[pos : pos + cand.shape[0]]
            pos += cand.shape[0]
            k = int(np.argmax(gv)) if gv.size else -1
            # strict improvement keeps the first-found witness on ties
            if k >= 0 and gv[k] > best:
                if gv[k] > top:
                    top = float(gv[k])
                    winner = (kind, cand[k])
            elif kind == "o":
                level["a"] += 1
                level["r"] += 1
            else:
                level[kind] += 1
        if winner is not None:
            kind, z = winner
            small = top - best <= ftol * abs(best)
            best = top
            if kind == "o":
                pass
            elif small:
                level[kind] += 1
            else:
                level[kind] = max(level[kind] - 1, 0)
            accepted += 1
    return z, best, evals
