import numpy as np
import pytest

from csgsor.linalg import BlockSystem, CsrMatrix

_ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    _ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_spd(rng, n, shift=None):
    A = rng.standard_normal((n, n))
    return A @ A.T + (n if shift is None else shift) * np.eye(n)


def random_sym(rng, n):
    A = rng.standard_normal((n, n))
    return 0.5 * (A + A.T)


def csr(dense) -> CsrMatrix:
    return CsrMatrix.from_scipy(np.asarray(dense, dtype=float))


def random_system(rng, n, psd_t=False):
    W = random_spd(rng, n)
    if psd_t:
        B = rng.standard_normal((n, max(1, n // 2)))
        T = B @ B.T
    else:
        T = random_sym(rng, n)
    return BlockSystem(csr(W), csr(T), rng.standard_normal(n), rng.standard_normal(n))


def dense_block(W, T):
    W, T = np.asarray(W), np.asarray(T)
    return np.block([[W, -T], [T, W]])


@pytest.fixture
def rng():
    return np.random.default_rng(20121)
