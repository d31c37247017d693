import functools
import sys
from pathlib import Path

import pytest

from brdlab.languages import noedge01, rado, triangle_free

sys.path.insert(0, str(Path(__file__).parent / "oracles"))


@pytest.fixture(scope="session")
def RADO():
    return rado()


@pytest.fixture(scope="session")
def TF():
    return triangle_free()


@pytest.fixture(scope="session")
def NE01():
    return noedge01()


@functools.lru_cache(maxsize=None)
def prefix(name: str, depth: int, seed: int = 0):
    """Strong diary prefixes are costly; share them across test modules."""
    from brdlab.languages import builtin
    from brdlab.strong_diary import build_prefix

    return build_prefix(builtin(name), depth, seed)


@functools.lru_cache(maxsize=None)
def lsv(depth: int):
    from brdlab.strong_diary import lsv_pathological

    return lsv_pathological(depth)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
