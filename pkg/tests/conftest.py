"""Shared fixtures: a session grid cache and the acceptance criterion report."""

from __future__ import annotations

import hashlib
import os
from collections import OrderedDict
from pathlib import Path

import numpy as np
import pytest

from pmdimer import Scenario, SignalGrid

_REPORT: dict[int, tuple[str, bool, str]] = {}


class GridCache:
    """Signal grids computed once per session and spilled to disk.

    Only the most recent ``keep`` grids stay in memory.  Set
    ``PMDIMER_TEST_CACHE`` to a directory to keep grids between runs.
    """

    def __init__(self, directory=None, keep=4):
        self.memory = OrderedDict()
        self.directory = Path(directory) if directory else None
        self.keep = keep

    def _key(self, sc: Scenario) -> str:
        text = repr((sc.system, sc.pulses, sc.propagation, sc.n_t21, sc.dt21))
        return hashlib.sha256(text.encode()).hexdigest()[:24]

    def __call__(self, sc: Scenario) -> SignalGrid:
        key = self._key(sc)
        if key in self.memory:
            self.memory.move_to_end(key)
            return self.memory[key]
        path = self.directory / f"{key}.npz" if self.directory else None
        if path is not None and path.exists():
            with np.load(path) as z:
                grid = SignalGrid(z["t21"], z["tau"], z["values"], float(z["omega_21"]),
                                  float(z["phi_21"]), {"norm_drift": float(z["norm_drift"])})
        else:
            grid = sc.signal_grid()
            if path is not None:
                path.parent.mkdir(parents=True, exist_ok=True)
                np.savez(path, t21=grid.t21, tau=grid.tau, values=grid.values,
                         omega_21=grid.omega_21, phi_21=grid.phi_21,
                         norm_drift=grid.diagnostics["norm_drift"])
        self.memory[key] = grid
        while len(self.memory) > self.keep:
            self.memory.popitem(last=False)
        return grid


@pytest.fixture(scope="session")
def grids(tmp_path_factory):
    directory = os.environ.get("PMDIMER_TEST_CACHE") or tmp_path_factory.mktemp("grids")
    return GridCache(directory)


@pytest.fixture(scope="session")
def report():
    def record(number: int, title: str, ok: bool, detail: str = ""):
        _REPORT[number] = (title, bool(ok), detail)
    return record


def pytest_terminal_summary(terminalreporter):
    if not _REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_REPORT):
        title, ok, detail = _REPORT[number]
        terminalreporter.write_line(
            f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}")
