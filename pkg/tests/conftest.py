from fractions import Fraction

import numpy as np
import pytest

from twostage_maxscore.dataset import Dataset

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_dataset(d, y, x, z=None):
    d = np.asarray(d)
    z = np.zeros(len(d)) if z is None else z
    return Dataset(d, y, z, x)


def cell_oracle_argmax(z, g, d, tau, grid_points):
    """Exact argmax of the score for k + p = 2 by threshold-cell enumeration.

    For b11 = s the indicator s*z_i + g_i*t > 0 changes only at the ratios
    r_i = -s*z_i/g_i. Sorting the distinct ratios splits the line into open
    cells and the breakpoints themselves; the score is constant on each piece.
    Every grid point is assigned to its piece with exact rational arithmetic
    and the score is evaluated once per occupied piece.
    Returns (max numerator, sorted list of (s, grid index) maximizers).
    """
    zf = [Fraction(float(v)) for v in z]
    gf = [Fraction(float(v)) for v in g]
    tf = [Fraction(float(v)) for v in grid_points]
    sign = [2 * int(di) - 1 for di in d]
    best, arg = None, []
    for s in (-1, 1):
        ratios = sorted({-s * zi / gi for zi, gi in zip(zf, gf) if gi != 0})
        pieces: dict[tuple, list[int]] = {}
        for j, t in enumerate(tf):
            below = sum(1 for r in ratios if r < t)
            on = any(r == t for r in ratios)
            pieces.setdefault((below, on), []).append(j)
        for members in pieces.values():
            t = tf[members[0]]
            val = sum(
                sg
                for sg, zi, gi, ti in zip(sign, zf, gf, tau)
                if ti == 1 and s * zi + gi * t > 0
            )
            for j in members:
                if best is None or val > best:
                    best, arg = val, [(s, j)]
                elif val == best:
                    arg.append((s, j))
    return best, sorted(arg)
