from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ballcomp.funcmodel import PolyFn, PolyMap, SpaceParams, SymbolQuadruple
from ballcomp.norms import SearchConfig

settings.register_profile(
    "ballcomp",
    deadline=None,
    max_examples=60,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ballcomp")


def single(n: int, phi: PolyMap, u: PolyFn | None = None) -> SymbolQuadruple:
    """uC_phi written as a difference with v = 0."""
    u = u if u is not None else PolyFn.constant(n, 1.0)
    return SymbolQuadruple(u, PolyFn.zero(n), phi, phi)


def identity_op(n: int) -> SymbolQuadruple:
    return single(n, PolyMap.identity(n))


def half_op(n: int) -> SymbolQuadruple:
    return single(n, PolyMap.linear(0.5 * np.eye(n)))


def zero_op(n: int) -> SymbolQuadruple:
    phi = PolyMap.linear(0.5 * np.eye(n))
    return SymbolQuadruple(PolyFn.zero(n), PolyFn.zero(n), phi, phi)


def rotated_diag(n: int, top: float = 0.9, rest: float = 0.5, seed: int = 3) -> tuple[PolyMap, np.ndarray]:
    """U diag(top, rest, ...) U* and the unitary U."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    U, _ = np.linalg.qr(g)
    d = np.full(n, rest)
    d[0] = top
    return PolyMap.linear(U @ np.diag(d) @ U.conj().T), U


@pytest.fixture
def unit11() -> SpaceParams:
    return SpaceParams(1.0, 1.0)


@pytest.fixture
def fast_cfg() -> SearchConfig:
    return SearchConfig(radial_points=32, sphere_samples=128, refine_iters=20)


# one line per acceptance criterion, shown in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
