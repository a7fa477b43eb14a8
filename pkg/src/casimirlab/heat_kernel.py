"""Heat-kernel traces, small-t Seeley-DeWitt fits and the large-Omega
divergence structure of regularized sums."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._fitting import LinearFit, scaled_lstsq
from .errors import InvalidArgumentError, TruncationError
from .regularization import RegularizedSweep, divergence_basis, fit_divergences, DEFAULT_CORRECTIONS
from .spectra import ModeSpectrum

# exp(-30) ~ 1e-13: heat-trace terms beyond the trusted modes are negligible
SAFE_EXPONENT = 30.0
# exp(-pi^2 / 0.3) ~ 5e-15: Poisson-summation corrections are negligible
T_MAX_FACTOR = 0.3
MASS_T_FACTOR = 0.05
DEFAULT_T_POINTS = 24
# extra t^{i/2} columns fitted beyond the requested order to absorb the
# first neglected terms of the expansion; their coefficients are not reported
DEFAULT_NUISANCE_TERMS = 4


def min_safe_t(spectrum: ModeSpectrum) -> float:
    if spectrum.complete:
        return 0.0
    top = spectrum.trusted_omega_max
    return math.inf if top == 0 else SAFE_EXPONENT / top ** 2


def heat_trace(spectrum: ModeSpectrum, t):
    """K(t) = sum_n mult_n exp(-omega_n^2 t); scalar or array ``t``."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(~(t_arr > 0)):
        raise InvalidArgumentError("heat-trace time must be positive")
    t_min = min_safe_t(spectrum)
    if len(spectrum) and t_arr.size and float(t_arr.min()) < t_min:
        raise TruncationError(
            f"spectrum {spectrum.label!r} (trusted up to omega={spectrum.trusted_omega_max:.6g}) "
            f"is too short for t={float(t_arr.min()):.6g}; minimum usable t is {t_min:.6g}")
    w, m = spectrum.trusted()
    sq = w * w
    out = np.exp(-np.multiply.outer(t_arr.reshape(-1), sq)) @ m.astype(float)
    return float(out[0]) if t_arr.ndim == 0 else out.reshape(t_arr.shape)


def default_t_grid(spectrum: ModeSpectrum, points: int = DEFAULT_T_POINTS) -> np.ndarray:
    """Log grid between the truncation limit and the onset of finite-size effects."""
    w = spectrum.trusted()[0]
    base = spectrum.base_omega[:spectrum.uv_valid_count]
    nonzero = base[base > 0]
    if nonzero.size == 0:
        raise InvalidArgumentError("spectrum has no nonzero modes to set a time window")
    t_max = T_MAX_FACTOR / float(nonzero[0]) ** 2
    if spectrum.mass_shift != 0.0:
        # keep the exp(-m^2 t) series short
        t_max = min(t_max, MASS_T_FACTOR / abs(spectrum.mass_shift))
    t_min = min_safe_t(spectrum)
    if spectrum.complete:
        t_min = t_max * 1e-4
    if not t_min < t_max / 10:
        needed = int(math.ceil(len(w) * math.sqrt(10 * t_min / t_max)))
        raise TruncationError(
            f"spectrum {spectrum.label!r} is too short for a small-t window "
            f"(t_min={t_min:.3g}, t_max={t_max:.3g}); about {needed} modes needed",
            required=needed)
    return np.geomspace(t_min, t_max, points)


@dataclass(frozen=True)
class SdwExpansion:
    dimension_d: int
    coefficients: np.ndarray
    fit_residual: float
    t_window: tuple
    standard_errors: np.ndarray = field(repr=False, default=None)
    condition_number: float = math.nan
    exponents: tuple = ()

    def __post_init__(self):
        if not self.fit_residual >= 0:
            raise InvalidArgumentError("fit residual must be >= 0")

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def coefficient(self, half_index: float) -> float:
        """a_{half_index}, e.g. ``coefficient(0.5)`` for the boundary term."""
        return float(self.coefficients[int(round(2 * half_index))])

    def records(self):
        return [{"index": i / 2, "exponent_of_t": e, "coefficient": float(c),
                 "standard_error": float(s)}
                for i, (e, c, s) in enumerate(zip(self.exponents, self.coefficients,
                                                  self.standard_errors))]


def sdw_fit(spectrum: ModeSpectrum, d: int, N: int, t_grid=None,
            nuisance_terms: int = DEFAULT_NUISANCE_TERMS) -> SdwExpansion:
    """Fit (4 pi t)^{d/2} K(t) against t^{i/2}, i = 0..N.

    ``nuisance_terms`` extra powers are fitted and discarded so that the
    first omitted terms of the asymptotic series do not bias the reported
    coefficients.
    """
    d, N = int(d), int(N)
    if d < 1:
        raise InvalidArgumentError("d must be >= 1")
    if not 0 <= N <= d + 1:
        raise InvalidArgumentError(f"expansion order N={N} must satisfy 0 <= N <= d+1={d + 1}")
    t = default_t_grid(spectrum) if t_grid is None else np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 2 * (N + 1):
        raise InvalidArgumentError(f"t grid needs >= {2 * (N + 1)} points")
    total = N + 1 + int(nuisance_terms)
    if t.size < total + 1:
        total = N + 1
    y = heat_trace(spectrum, t) * (4 * math.pi * t) ** (d / 2)
    cols = [t ** (i / 2) for i in range(total)]
    labels = [f"t^{i}/2" for i in range(total)]
    fit = scaled_lstsq(cols, labels, y,
                       hint="; narrow the t window or lower N")
    exps = tuple(i / 2 for i in range(N + 1))
    return SdwExpansion(d, fit.coefficients[:N + 1].copy(), fit.residual_norm,
                        (float(t.min()), float(t.max())), fit.standard_errors[:N + 1].copy(),
                        fit.condition_number, exps)


@dataclass(frozen=True)
class DivergenceFit:
    dimension_d: int
    power_coefficients: np.ndarray
    log_coefficient: float
    constant: float
    power_errors: np.ndarray = field(repr=False, default=None)
    log_error: float = math.nan
    constant_error: float = math.nan
    fit: LinearFit = field(repr=False, default=None)

    def __post_init__(self):
        if len(self.power_coefficients) != self.dimension_d + 1:
            raise InvalidArgumentError("need d+1 power coefficients")

    @property
    def powers(self) -> tuple:
        return tuple(self.dimension_d + 1 - i for i in range(self.dimension_d + 1))

    def coefficient(self, label: str) -> float:
        return self.fit[label]

    def dominant_term(self, omega_max: float) -> str:
        """Divergent term (power or log) with the largest size at ``omega_max``."""
        cols, labels = divergence_basis(np.array([omega_max]), self.dimension_d)
        sizes = [abs(self.fit[lab]) * abs(float(c[0]))
                 for c, lab in zip(cols[:self.dimension_d + 2], labels)]
        return labels[int(np.argmax(sizes))]

    def records(self):
        out = []
        for p, c, s in zip(self.powers, self.power_coefficients, self.power_errors):
            out.append({"term": f"Omega^{p}", "coefficient": float(c), "standard_error": float(s)})
        out.append({"term": "ln(Omega^2)", "coefficient": self.log_coefficient,
                    "standard_error": self.log_error})
        out.append({"term": "1", "coefficient": self.constant,
                    "standard_error": self.constant_error})
        return out


def divergence_fit(sweep: RegularizedSweep, d: int | None = None,
                   corrections=DEFAULT_CORRECTIONS) -> DivergenceFit:
    """Fit S(Omega) to sum_i c_i Omega^{d+1-i} + c_log ln(Omega^2) + c_0.

    Decaying terms in ``corrections`` are included when the grid has room for
    them; they soak up the leading Omega^-2 tail and sharpen the log term.
    """
    d = sweep.dimension_d if d is None else int(d)
    fit = fit_divergences(sweep, d, corrections, min_decades=1.5, min_samples=d + 5)
    _, labels = divergence_basis(sweep.omega_grid[:1], d)
    powers = np.array([fit[lab] for lab in labels[:d + 1]])
    perr = np.array([fit.stderr(lab) for lab in labels[:d + 1]])
    return DivergenceFit(d, powers, fit["ln(Omega^2)"], fit["1"], perr,
                         fit.stderr("ln(Omega^2)"), fit.stderr("1"), fit)
