import sys
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import settings, strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from coopshare.model import ValuationTable  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def fixture_dir():
    return FIXTURE_DIR


def _monotonize(n, samples):
    vals = list(samples)
    vals[0] = Fraction(0)
    for mask in range(1, 1 << n):
        for p in range(n):
            if mask >> p & 1:
                vals[mask] = max(vals[mask], vals[mask & ~(1 << p)])
    return ValuationTable(n, vals)


@st.composite
def monotone_tables(draw, min_n=1, max_n=4):
    n = draw(st.integers(min_n, max_n))
    rat = st.builds(Fraction, st.integers(0, 6), st.sampled_from([1, 2, 3]))
    samples = draw(st.lists(rat, min_size=1 << n, max_size=1 << n))
    return _monotonize(n, samples)


@st.composite
def games(draw, min_n=1, max_n=4, tables=None):
    from coopshare.model import Game

    v = draw(tables if tables is not None else monotone_tables(min_n, max_n))
    order = draw(st.permutations(list(range(v.n))))
    return Game.new(v, order)


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """record(k, title, checks): log one PASS/FAIL line, then assert every check.

    ``checks`` is a list of (description, bool). Lines are printed as the
    test runs (visible with -s) and again in the terminal summary.
    """
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def record(k, title, checks):
        failed = [d for d, ok in checks if not ok]
        line = f"{'PASS' if not failed else 'FAIL'} criterion {k}: {title}"
        if failed:
            line += " (failed: " + "; ".join(failed) + ")"
        lines.append(line)
        print(line)
        assert not failed, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
