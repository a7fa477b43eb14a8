import math

import numpy as np
import pytest

from casimirlab import heat_kernel as hk
from casimirlab import regularization as reg
from casimirlab import spectra
from casimirlab.cutoffs import CutoffSpec
from casimirlab.errors import ConditioningError, InvalidArgumentError, TruncationError
from casimirlab.spectra import ModeSpectrum

SUM_EXP_MINUS_N2_TO_40 = 0.38631860241332607652  # mpmath, 40 digits


def test_heat_trace_truncated_integers():
    s = ModeSpectrum(np.arange(1, 41, dtype=float), np.ones(40, int))
    assert hk.heat_trace(s, 1.0) == pytest.approx(SUM_EXP_MINUS_N2_TO_40, rel=1e-15)


def test_heat_trace_single_zero_mode():
    s = ModeSpectrum(np.array([0.0]), np.array([1]), complete=True)
    for t in (1e-3, 1.0, 1e3):
        assert hk.heat_trace(s, t) == 1.0


def test_heat_trace_decays_without_zero_modes():
    s = ModeSpectrum(np.array([1.0, 2.0, 3.0]), np.ones(3, int), complete=True)
    vals = hk.heat_trace(s, np.array([1.0, 10.0, 100.0]))
    assert np.all(np.diff(vals) < 0) and vals[-1] < 1e-40


def test_heat_trace_truncation_reports_minimum_t():
    s = spectra.interval_spectrum(1.0, "dirichlet", 10)
    with pytest.raises(TruncationError) as info:
        hk.heat_trace(s, 1e-5)
    t_min = 30 / (10 * math.pi) ** 2
    assert f"{t_min:.6g}" in str(info.value)


def test_heat_trace_is_completely_monotone_on_grid():
    s = spectra.interval_spectrum(2.0, "neumann", 3000)
    t = np.geomspace(1e-4, 1.0, 60)
    K = hk.heat_trace(s, t)
    assert np.all(np.diff(K) < 0)
    # convexity on a uniform grid
    tu = np.linspace(1e-3, 1.0, 80)
    assert np.all(np.diff(hk.heat_trace(s, tu), 2) > 0)


@pytest.mark.parametrize("L", [1.0, math.pi, 2 * math.pi])
def test_sdw_dirichlet_interval(L):
    fit = hk.sdw_fit(spectra.interval_spectrum(L, "dirichlet", 4000), 1, 1)
    assert fit.coefficient(0) == pytest.approx(L, rel=1e-4)
    assert fit.coefficient(0.5) == pytest.approx(-math.sqrt(math.pi), rel=1e-3)
    assert fit.fit_residual >= 0 and len(fit.coefficients) == 2


@pytest.mark.parametrize("L", [1.0, math.pi, 2 * math.pi])
def test_sdw_periodic_interval_has_no_boundary_term(L):
    fit = hk.sdw_fit(spectra.interval_spectrum(L, "periodic", 4000), 1, 1)
    assert fit.coefficient(0) == pytest.approx(L, rel=1e-6)
    assert abs(fit.coefficient(0.5)) < 1e-6


def test_sdw_massive_periodic_mass_slot():
    # K = exp(-m^2 t) K_free, so the t^1 coefficient is -m^2 L
    L, m2 = 2 * math.pi, 1.0
    s = spectra.massive_spectrum(spectra.interval_spectrum(L, "periodic", 4000), m2)
    fit = hk.sdw_fit(s, 1, 2)
    assert fit.coefficient(1) == pytest.approx(-m2 * L, rel=1e-4)


def test_sdw_free_operator_has_zero_mass_slot():
    fit = hk.sdw_fit(spectra.interval_spectrum(3.0, "periodic", 4000), 1, 2)
    assert abs(fit.coefficient(1)) < 1e-8


def test_sdw_preconditions():
    s = spectra.interval_spectrum(1.0, "dirichlet", 4000)
    with pytest.raises(InvalidArgumentError):
        hk.sdw_fit(s, 1, 3)
    with pytest.raises(InvalidArgumentError):
        hk.sdw_fit(s, 1, 1, t_grid=np.geomspace(1e-4, 1e-2, 3))


def test_sdw_narrow_window_is_ill_conditioned():
    s = spectra.interval_spectrum(1.0, "dirichlet", 4000)
    with pytest.raises(ConditioningError):
        hk.sdw_fit(s, 1, 2, t_grid=np.linspace(1e-3, 1.0001e-3, 24))


def test_divergence_fit_dirichlet_interval():
    L = math.pi
    s = spectra.interval_spectrum(L, "dirichlet", 3000)
    g = np.geomspace(5, 250, 16)
    cut = CutoffSpec.erfc()
    fit = hk.divergence_fit(reg.combination_sweep([(1.0, s)], cut, g), 1)
    assert fit.power_coefficients[0] > 0
    assert abs(fit.log_coefficient) < 1e-6
    # the model predicts the sum at twice the top cutoff
    big = spectra.interval_spectrum(L, "dirichlet", 6000)
    Om = 2 * g[-1]
    model = (fit.power_coefficients[0] * Om ** 2 + fit.power_coefficients[1] * Om
             + fit.log_coefficient * math.log(Om ** 2) + fit.constant)
    assert model == pytest.approx(reg.erfc_regularized_sum(big, Om), rel=1e-9)


def test_divergence_fit_zero_sweep():
    g = np.geomspace(1, 100, 10)
    fit = hk.divergence_fit(reg.RegularizedSweep(g, np.zeros(10), CutoffSpec.erfc()), 1)
    assert np.all(fit.power_coefficients == 0) and fit.log_coefficient == 0 and fit.constant == 0


def test_divergence_fit_needs_decade_and_a_half():
    g = np.geomspace(1, 20, 10)
    with pytest.raises(InvalidArgumentError):
        hk.divergence_fit(reg.RegularizedSweep(g, np.zeros(10), CutoffSpec.erfc()), 1)


@pytest.fixture(scope="module")
def massive_periodic():
    return spectra.massive_spectrum(spectra.interval_spectrum(2 * math.pi, "periodic", 16000), 1.0)


def test_log_coefficient_is_cutoff_independent(massive_periodic):
    g = np.geomspace(10, 400, 20)
    fits = {c.name: hk.divergence_fit(reg.combination_sweep([(1.0, massive_periodic)], c, g), 1)
            for c in (CutoffSpec.erfc(), CutoffSpec.exponential(), CutoffSpec.gaussian())}
    logs = [f.log_coefficient for f in fits.values()]
    # m^2 L / (4 pi) = 1/2
    for v in logs:
        assert v == pytest.approx(0.5, rel=1e-3)
    lead = [f.power_coefficients[0] for f in fits.values()]
    assert max(lead) / min(lead) > 1.1


def test_sweep_tracks_sdw_volume_coefficient():
    ratios = []
    g = np.geomspace(5, 200, 16)
    for L in (1.0, 2.0, 4.0):
        s = spectra.interval_spectrum(L, "dirichlet", int(1300 * L))
        a0 = hk.sdw_fit(s, 1, 1).coefficient(0)
        c = hk.divergence_fit(reg.combination_sweep([(1.0, s)], CutoffSpec.erfc(), g), 1)
        ratios.append(c.power_coefficients[0] / a0)
    assert max(ratios) / min(ratios) - 1 < 0.05


def test_dominant_term():
    a = spectra.interval_spectrum(1.0, "dirichlet", 2000)
    b = spectra.interval_spectrum(1.5, "dirichlet", 3000)
    g = np.geomspace(5, 200, 16)
    fit = hk.divergence_fit(reg.difference_sweep(a, b, CutoffSpec.erfc(), g), 1)
    assert fit.dominant_term(g[-1]) == "Omega^2"
