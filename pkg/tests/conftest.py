import math

import pytest

from casimirlab import spectra


def piston_pair(a=1.0, L=10.0, omega_top=2400.0):
    """Wall at a versus wall at L/2 in a Dirichlet box [0, L]."""
    count = lambda ell: int(math.ceil(omega_top * ell / math.pi)) + 2
    moved = spectra.union_spectrum(spectra.interval_spectrum(a, "dirichlet", count(a)),
                                   spectra.interval_spectrum(L - a, "dirichlet", count(L - a)))
    half = spectra.interval_spectrum(L / 2, "dirichlet", count(L / 2))
    centred = spectra.union_spectrum(half, half)
    return moved, centred


@pytest.fixture(scope="session")
def piston():
    return piston_pair()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[n])
