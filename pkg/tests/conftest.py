import itertools
import math

import pytest

ACCEPTANCE_LINES: list[str] = []


def naive_morrey(values, dim, level, u, p):
    """Every sub-cube of K_J summed from scratch, with floor division for ancestors."""
    side = 2 ** level
    cells = list(itertools.product(range(side), repeat=dim))
    vals = dict(zip(cells, values))
    best = 0.0
    for nu in range(level + 1):
        w = 2 ** nu
        for origin in itertools.product(range(side // w), repeat=dim):
            s = sum(vals[k] ** p for k in cells if all(c // w == o for c, o in zip(k, origin)))
            best = max(best, (w ** dim) ** (1 / u - 1 / p) * s ** (1 / p))
    return best


def naive_morrey_supported(entries, u, p, extra_levels=3):
    """Sup over all dyadic cubes meeting the support, up to a generous level."""
    pts = list(entries)
    span = max(max(abs(c) for c in k) for k in pts)
    top = max(1, span).bit_length() + extra_levels
    best = 0.0
    dim = len(pts[0])
    for j in range(top + 1):
        w = 2 ** j
        groups = {}
        for k, v in entries.items():
            key = tuple(math.floor(c / w) for c in k)
            groups[key] = groups.get(key, 0.0) + v ** p
        for s in groups.values():
            best = max(best, (w ** dim) ** (1 / u - 1 / p) * s ** (1 / p))
    return best


@pytest.fixture
def report_acceptance():
    def record(number, ok, detail):
        ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
