import pytest

from fibmaps.numerics import PrecisionContext
from fibmaps.renorm import build_hierarchy
from fibmaps.unimodal import cubic_family, fibonacci_map, locate_fibonacci_parameter, quadratic_family

DEEP_BITS = 256
DEEP_DEPTH = 19  # kneading depth behind the 15-level hierarchy


@pytest.fixture(scope="session")
def deep_map():
    f, _ = fibonacci_map("quadratic", 0.0, DEEP_DEPTH, DEEP_BITS)
    return f


@pytest.fixture(scope="session")
def deep_parameter():
    return fibonacci_map("quadratic", 0.0, DEEP_DEPTH, DEEP_BITS)[1]


@pytest.fixture(scope="session")
def hier15(deep_map):
    return build_hierarchy(deep_map, 15)


@pytest.fixture(scope="session")
def hier10(deep_map):
    return build_hierarchy(deep_map, 10)


@pytest.fixture(scope="session")
def cubic_map():
    ctx = PrecisionContext(DEEP_BITS)
    fam = cubic_family(0.01)
    return locate_fibonacci_parameter(fam, 14, ctx).make_map(fam, ctx)


@pytest.fixture(scope="session")
def cubic_hier10(cubic_map):
    return build_hierarchy(cubic_map, 10)


@pytest.fixture(scope="session")
def affine_hier10(deep_map):
    return build_hierarchy(deep_map.conjugate(0.5, 0.1, name="affine"), 10)


@pytest.fixture(scope="session")
def small_map():
    ctx = PrecisionContext(128)
    fam = quadratic_family()
    return locate_fibonacci_parameter(fam, 12, ctx).make_map(fam, ctx)


# one PASS/FAIL line per acceptance criterion, printed after the run
_CRITERIA: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when == "teardown":
        return
    number, title = mark.args
    if rep.failed or rep.when == "call":
        prev = _CRITERIA.get(number, (title, "PASS"))[1]
        status = "FAIL" if rep.failed or prev == "FAIL" else "PASS"
        _CRITERIA[number] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, status = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {title}")
