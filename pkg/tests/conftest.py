import numpy as np
import pytest

from pskg.initiator import InitiatorMatrix, derive_marginals

CORE_ROWS = [[0.4532, 0.2622], [0.2622, 0.0225]]
_A, _B = 0.0861, 0.0231
STAR4_ROWS = [
    [_A, _A, _A, _A],
    [_A, _A, _B, _B],
    [_A, _B, _A, _B],
    [_A, _B, _B, _A],
]
# Any P with row sums (0.55, 0.45) reproduces the load-balancing example.
SPLIT_ROWS = [[0.30, 0.25], [0.25, 0.20]]


@pytest.fixture
def core_P():
    return InitiatorMatrix(CORE_ROWS)


@pytest.fixture
def star4_P():
    return InitiatorMatrix(STAR4_ROWS)


@pytest.fixture
def split_marg():
    return derive_marginals(InitiatorMatrix(SPLIT_ROWS))


@pytest.fixture
def uniform_P():
    return InitiatorMatrix(np.full((2, 2), 0.25))


_ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def acceptance_log(request):
    """Record ``(criterion, label, ok, detail)`` lines, echoed now and in the terminal summary."""
    store = request.config.stash.setdefault(_ACCEPTANCE_KEY, {})

    def record(criterion: int, label: str, ok: bool, detail: str = "") -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {label}" + (f" ({detail})" if detail else "")
        print(line)
        store.setdefault(criterion, []).append((ok, line))
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_ACCEPTANCE_KEY, None)
    if not store:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(store):
        lines = store[crit]
        verdict = "PASS" if all(ok for ok, _ in lines) else "FAIL"
        tr.write_line(f"criterion {crit}: {verdict}")
        for _, line in lines:
            tr.write_line(f"    {line}")
