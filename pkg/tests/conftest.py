import sys

import pytest

from thetaforge import build_p1_bundle, load_geometry

# F2: (-2)-curve E and fibre f; c1 . E = 0 produces z^0 terms in zJ
F2_DOC = {
    "name": "f2",
    "basis": [
        {"name": "1", "degree": 0},
        {"name": "F", "degree": 1},
        {"name": "H", "degree": 1},
        {"name": "pt", "degree": 2},
    ],
    "structconst": [[1, 2, 3, "1/1"], [2, 2, 3, "2/1"]],
    "toricdivisors": [
        ["0", "1", "0", "0"],
        ["0", "1", "0", "0"],
        ["0", "-2", "1", "0"],
        ["0", "0", "1", "0"],
    ],
    "moripairings": [[1, 0], [1, 0], [-2, 1], [0, 1]],
    "D": ["0", "0", "2", "0"],
    "point": 3,
}


def p2_doc(D=("0/1", "3/1", "0/1"), name="p2-custom"):
    return {
        "name": name,
        "basis": [
            {"name": "1", "degree": 0},
            {"name": "p", "degree": 1},
            {"name": "p^2", "degree": 2},
        ],
        "structconst": [[1, 1, 2, "1/1"]],
        "toricdivisors": [["0", "1", "0"]] * 3,
        "moripairings": [[1], [1], [1]],
        "D": list(D),
        "point": 2,
    }


@pytest.fixture(scope="session")
def p2():
    return load_geometry("p2")


@pytest.fixture(scope="session")
def p1xp1():
    return load_geometry("p1xp1")


@pytest.fixture(scope="session")
def f1():
    return load_geometry("f1")


@pytest.fixture(scope="session")
def P2(p2):
    return build_p1_bundle(p2)


@pytest.fixture(scope="session")
def P11(p1xp1):
    return build_p1_bundle(p1xp1)


@pytest.fixture(params=["p2", "p1xp1", "f1"], scope="session")
def builtin(request):
    return load_geometry(request.param)


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("THETAFORGE_CACHE", str(tmp_path / "cache"))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
