"""Shared fixtures: the bundled maps and the fixed seed list."""

from __future__ import annotations

from fractions import Fraction
from importlib import resources
from itertools import product
from pathlib import Path

import numpy as np
import pytest

from nonadapt.interval_maps import load_map, verify_right_periodic
from nonadapt.sft import Sft

SEEDS = tuple(range(20))


def scenario_dir() -> Path:
    return Path(str(resources.files("nonadapt") / "scenarios"))


def bundled_map(name: str):
    fmap, c = load_map(scenario_dir() / f"{name}_map.yaml")
    return fmap, verify_right_periodic(fmap, c)


def all_sfts(J: int):
    """Every valid SFT on ``J`` symbols (no stranded symbols)."""
    for bits in product((0, 1), repeat=J * J):
        A = np.array(bits).reshape(J, J)
        if A.any(axis=1).all() and A.any(axis=0).all():
            yield Sft(A.tolist())


def three_sigma(freqs) -> float:
    freqs = np.asarray(freqs, dtype=float)
    return 3 * freqs.std(ddof=1) / np.sqrt(len(freqs))


@pytest.fixture(scope="session")
def doubling():
    return bundled_map("doubling")


@pytest.fixture(scope="session")
def three_branch():
    return bundled_map("three_branch")


@pytest.fixture(scope="session")
def golden():
    return bundled_map("golden_mean")


@pytest.fixture(scope="session")
def period2():
    return bundled_map("period2")


GOLDEN = Sft([[1, 1], [1, 0]])
PERIOD2 = Sft([[0, 1, 1], [1, 0, 0], [1, 0, 0]])
HALF = Fraction(1, 2)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
