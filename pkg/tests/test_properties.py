import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from casimirlab import certifier as ct
from casimirlab import cutoffs as co
from casimirlab import reference_models as rm
from casimirlab import regularization as reg
from casimirlab import spectra
from casimirlab.certifier import BodyGeometry, Configuration
from casimirlab.errors import InvalidArgumentError
from casimirlab.spectra import ModeSpectrum

positive = st.floats(0.05, 50.0, allow_nan=False)
freqs = st.lists(st.floats(0.0, 100.0, allow_nan=False), min_size=1, max_size=30)


def explicit(ws, mults=None):
    ws = np.array(ws, float)
    mults = np.ones(ws.size, int) if mults is None else np.array(mults)
    return ModeSpectrum(ws, mults, complete=True)


@given(freqs)
def test_spectrum_is_sorted_and_idempotent(ws):
    s = explicit(ws)
    assert np.all(np.diff(s.omega) >= 0)
    again = ModeSpectrum(s.omega, s.multiplicity, complete=True)
    assert again == s


@given(freqs, st.floats(0, 10), st.floats(0, 10))
def test_massive_shifts_compose(ws, m1, m2):
    s = explicit(ws)
    twice = spectra.massive_spectrum(spectra.massive_spectrum(s, m1), m2)
    once = spectra.massive_spectrum(s, m1 + m2)
    assert np.allclose(twice.omega, once.omega, rtol=1e-12, atol=1e-12)


@given(freqs, freqs, st.lists(positive, min_size=2, max_size=6, unique=True))
def test_difference_sweep_antisymmetric(wa, wb, grid):
    a, b = explicit(wa), explicit(wb)
    g = np.sort(grid)
    cut = co.CutoffSpec.erfc()
    ab = reg.difference_sweep(a, b, cut, g)
    ba = reg.difference_sweep(b, a, cut, g)
    assert np.array_equal(ab.values, -ba.values)


@given(freqs, freqs, st.floats(-3, 3), st.floats(-3, 3))
def test_combination_sweep_is_linear(wa, wb, ca, cb):
    a, b = explicit(wa), explicit(wb)
    g = np.geomspace(0.5, 40, 5)
    cut = co.CutoffSpec.erfc()
    combo = reg.combination_sweep([(ca, a), (cb, b)], cut, g).values
    parts = (ca * reg.combination_sweep([(1.0, a)], cut, g).values
             + cb * reg.combination_sweep([(1.0, b)], cut, g).values)
    assert np.allclose(combo, parts, rtol=1e-12, atol=1e-12 * (1 + np.abs(parts).max()))


@given(freqs, st.lists(positive, min_size=2, max_size=10, unique=True))
def test_erfc_sum_nondecreasing_in_cutoff(ws, grid):
    s = explicit(ws)
    vals = [reg.erfc_regularized_sum(s, om) for om in sorted(grid)]
    assert all(y >= x - 1e-12 * max(1.0, abs(x)) for x, y in zip(vals, vals[1:]))


@settings(max_examples=500, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=12))
def test_cauchy_schwarz_on_piecewise_potentials(values):
    edges = np.linspace(0.0, 1.0, len(values) + 1)
    avg = rm.average_potential(rm.piecewise_constant(edges, values), 1.0, 64 * len(values))
    assert avg.v2_bar >= avg.v_bar ** 2
    masses = rm.solve_masses(avg)
    assert masses.m1_squared >= masses.m2_squared


body = st.one_of(
    st.builds(BodyGeometry.sphere, positive, st.booleans()),
    st.builds(BodyGeometry.box, st.lists(positive, min_size=3, max_size=3), st.booleans()),
    st.builds(BodyGeometry.plate, positive))
config = st.builds(Configuration, st.lists(body, min_size=1, max_size=4).map(tuple),
                   st.just(BodyGeometry.ir_box((100.0, 100.0, 100.0))))


@given(config, st.data())
def test_rigid_motion_leaves_every_slot_identical(cfg, data):
    i = data.draw(st.integers(0, len(cfg.bodies) - 1))
    dim = len(cfg.bodies[i].position) or 1
    shift = data.draw(st.lists(st.floats(-10, 10), min_size=dim, max_size=dim))
    cert = ct.certify_finiteness(cfg, ct.rigid_motion(cfg, i, shift))
    assert cert.certified
    assert all(d == 0.0 for s in cert.delta_slots.values() for d in s.differences)


@given(config, config)
def test_certification_is_symmetric(a, b):
    assert ct.certify_finiteness(a, b).certified == ct.certify_finiteness(b, a).certified


@given(positive, st.booleans())
def test_shell_parity(r, start_as_shell):
    a = BodyGeometry.sphere(r, thin_shell=start_as_shell)
    b = BodyGeometry.sphere(r, thin_shell=not start_as_shell)
    shell, solid = (a, b) if start_as_shell else (b, a)
    for name, value in shell.entries().items():
        if name in ct.ODD_IN_K:
            assert value == 0.0
        elif name != "volume":
            assert value == solid.entries()[name]


@given(st.integers(1, 60), st.floats(1e-3, 1e3))
def test_post_one_over_s(n, z):
    assert co.post_invert(co.rational_transform(), z, n) == 1.0


@given(st.floats(0.1, 5.0), st.floats(0.1, 5.0))
def test_cutoff_family_validates(a, b):
    # any convex mixture of catalog profiles is a valid cutoff
    lam = a / (a + b)
    cut = co.CutoffSpec.custom(lambda x: lam * np.exp(-x) + (1 - lam) * np.exp(-x * x))
    assert cut(0.0) == pytest.approx(1.0, abs=1e-12)


@given(st.floats(2.2, 4.0))
def test_cutoff_growing_past_one_is_rejected(k):
    # slope at 0 is k - 2, so f rises above 1
    with pytest.raises(InvalidArgumentError):
        co.CutoffSpec.custom(lambda x: np.exp(-x) * (1 + (k - 1) * x * np.exp(-x)))
