"""Shared fixtures and the acceptance summary printed after the run."""
import pytest

_RESULTS: dict = {}
_TITLES: dict = {}
_NOTES: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    n, title = marker.args
    _TITLES[n] = title
    ok = call.excinfo is None
    _RESULTS.setdefault(n, []).append((item.name, ok))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_RESULTS):
        runs = _RESULTS[n]
        ok = all(flag for _, flag in runs)
        failed = [name for name, flag in runs if not flag]
        line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {_TITLES[n]}"
        if failed:
            line += f"  (failing: {', '.join(failed)})"
        tr.write_line(line)
        for note in _NOTES.get(n, []):
            tr.write_line(f"    {note}")


@pytest.fixture
def note(request):
    """Record a reported (not asserted) quantity under the test's criterion."""
    marker = request.node.get_closest_marker("criterion")
    key = marker.args[0] if marker else None

    def add(text):
        _NOTES.setdefault(key, []).append(text)
    return add


@pytest.fixture(scope="session")
def sphere2():
    from maglab.spaces import sphere_profile
    return sphere_profile(2)


@pytest.fixture(scope="session")
def geodesic2():
    from maglab.spaces import sphere_profile
    return sphere_profile(2, "geodesic")


@pytest.fixture(scope="session")
def padic2():
    from maglab.spaces import padic_profile
    return padic_profile(2)


@pytest.fixture(scope="session")
def twopoint():
    from maglab.spaces import two_point_homogeneous_profile
    return two_point_homogeneous_profile()
