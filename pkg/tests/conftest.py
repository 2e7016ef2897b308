import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def fixtures_dir():
    return FIXTURES


import time

_START = time.monotonic()

TITLES = {
    1: "planar optimum matches the quoted configuration and ratios",
    2: "brute-force grid finds nothing better than the optimiser",
    3: "power and current scaling exponents",
    4: "field solver agrees with Biot-Savart quadrature",
    5: "quadrupole eigenstructure and tensor invariants",
    6: "device power and gradient numbers",
    7: "atom-number model",
    8: "time-of-flight thermometry round trip",
    9: "gradient linear in drive current",
    10: "CLI determinism and suite runtime",
}


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if not RESULTS:
        return
    elapsed = time.monotonic() - _START
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(TITLES):
        if n not in RESULTS:
            tr.write_line(f"criterion {n:2d}: NOT RUN  {TITLES[n]}")
            continue
        ok, detail = RESULTS[n]
        if n == 10:
            ok = ok and elapsed < 300
            detail = f"{detail}; suite runtime {elapsed:.1f} s (limit 300 s)"
        tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {TITLES[n]}: {detail}")
