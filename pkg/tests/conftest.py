import pytest
from hypothesis import HealthCheck, settings

from htncode.network import CodeNetwork
from htncode.tiling import TilingParams, build_tiling

settings.register_profile(
    "default", deadline=None, max_examples=30, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def t54():
    return build_tiling(TilingParams(5, 4, 1))


@pytest.fixture(scope="session")
def t54_2():
    return build_tiling(TilingParams(5, 4, 2))


@pytest.fixture(scope="session")
def t45():
    return build_tiling(TilingParams(4, 5, 1))


@pytest.fixture(scope="session")
def t45_2():
    return build_tiling(TilingParams(4, 5, 2))


@pytest.fixture(scope="session")
def htn_open(t54):
    return CodeNetwork.build(t54, "a4112", "hadamard4")


@pytest.fixture(scope="session")
def happy_open(t45):
    return CodeNetwork.build(t45, "pentagon513", "identity", d=2)


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(number, ok: bool, detail: str):
        ACCEPTANCE[str(number)] = (bool(ok), detail)
        print(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE, key=lambda k: (int(k.split("-")[0]), k)):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
