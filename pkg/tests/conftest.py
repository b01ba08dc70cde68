import pytest

from bubbletree.family import FamilyPresentation, germ_ring

R = germ_ring()


def column(*entries):
    return FamilyPresentation.from_rows(R, [[e] for e in entries])


def matrix(rows):
    return FamilyPresentation.from_rows(R, rows)


CORPUS = {
    "xyz": column("x", "y", "z"),
    "xyz2": column("x", "y", "z^2"),
    "xyz3": column("x", "y", "z^3"),
    "xyz4": column("x", "y", "z^4"),
    "height2_m3": column("x", "y^2+z^3", "y*z^2"),
    "height2_m4": column("x", "y^2+z^4", "y*z^2"),
    "height2_m5": column("x", "y^2+z^5", "y*z^2"),
    "section": matrix([["0", "x"], ["x", "y"], ["y", "z"], ["z^3", "0"]]),
    "cubic": column("x^3", "y^3+z^4", "z^4*(x^2+y^2)"),
    "double": matrix([["x", "z"], ["y", "z"], ["z", "x"], ["0", "y"]]),
}


@pytest.fixture(scope="session")
def corpus():
    return CORPUS


# criterion number -> (title, passed); filled by the acceptance module
CRITERIA = {}


@pytest.hookimpl(tryfirst=True, hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    setattr(item, "rep_" + rep.when, rep)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        title, ok = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {title}")
