import numpy as np
import pytest

from svrcfa.array import ArrayGeometry
from svrcfa.svr import (
    SvrHyperparams,
    build_training_set,
    default_c_bound,
    epsilon_from_snr,
    solve_dual,
    train_svr,
)


@pytest.fixture(scope="session")
def geom3():
    return ArrayGeometry.from_spacing(3)


@pytest.fixture(scope="session")
def reference_train(geom3):
    return build_training_set(geom3)


@pytest.fixture(scope="session")
def reference_hp(reference_train):
    return SvrHyperparams(default_c_bound(reference_train.targets_deg), epsilon_from_snr(10.0))


@pytest.fixture(scope="session")
def reference_solution(reference_train, reference_hp):
    return solve_dual(reference_train, reference_hp, record_history=True)


@pytest.fixture(scope="session")
def reference_model(reference_train, reference_hp):
    return train_svr(reference_train, reference_hp)


@pytest.fixture
def rng():
    return np.random.default_rng(20211)


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, name: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {name} -- {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
