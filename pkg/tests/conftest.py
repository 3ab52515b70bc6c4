import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bidegree import kernels  # noqa: E402

_IMPLS = {
    "numpy": (kernels._greedy_projection_np, kernels._expected_degrees_np, kernels._edge_variances_np),
    "numba": (kernels._greedy_projection_nb, kernels._expected_degrees_nb, kernels._edge_variances_nb),
}


@pytest.fixture(params=sorted(_IMPLS))
def backend(request, monkeypatch):
    """Route every kernel through one implementation for the duration of a test."""
    g, e, w = _IMPLS[request.param]
    monkeypatch.setattr(kernels, "greedy_projection", g)
    monkeypatch.setattr(kernels, "expected_degrees", e)
    monkeypatch.setattr(kernels, "edge_variances", w)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


_CRITERIA: list[str] = []


@pytest.fixture
def criterion(request):
    """Record a one-line verdict for an acceptance criterion.

    Usage: ``criterion(ok, "detail")`` records the line and returns ``ok``.
    """

    def record(ok: bool, detail: str) -> bool:
        _CRITERIA.append(f"{'PASS' if ok else 'FAIL'}  {request.node.name}: {detail}")
        print(_CRITERIA[-1])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
