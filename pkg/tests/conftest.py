import numpy as np
import pytest

from ergomix.tower import ConstructionParams, StageSpec, build_word


def brute_word(h1, spacer_lists):
    """Reference word by literal array concatenation."""
    word = np.ones(h1 + 1, dtype=np.uint8)
    for s in spacer_lists:
        parts = []
        for count in s:
            parts.append(word)
            parts.append(np.zeros(int(count), dtype=np.uint8))
        word = np.concatenate(parts)
    return word


@pytest.fixture(scope="session")
def small_word():
    # h1 = 1, one algebraic stage r = 7, q = 3, H = 7
    return build_word(ConstructionParams(h1=1, stages=(StageSpec(7, q=3, H=7),)))


@pytest.fixture(scope="session")
def three_stage_algebraic():
    return build_word(ConstructionParams(h1=1, stages=(StageSpec(7), StageSpec(11), StageSpec(13))))


@pytest.fixture(scope="session")
def three_stage_stochastic():
    stages = tuple(StageSpec(r, scheme="stochastic") for r in (7, 11, 13))
    return build_word(ConstructionParams(h1=1, stages=stages, seed=42))


ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the test body sets ``rec.detail``."""

    class Record:
        detail = ""

    rec = Record()
    name = request.node.name
    yield rec
    failed = getattr(request.node, "rep_call", None)
    ok = failed is not None and failed.passed
    ACCEPTANCE[name] = (ok, rec.detail)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
