"""Regularized mode sums S(Omega) = sum_n omega_n f(omega_n / Omega), their
differences between two spectra, and extraction of the finite part.

The Casimir energy under hbar = c = 1 is half of these sums; every function
here works with the raw sum.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, special

from ._fitting import LinearFit, scaled_lstsq
from .cutoffs import CutoffSpec, eval_cutoff
from .errors import (
    InvalidArgumentError,
    NonConvergenceError,
    QuadratureError,
    TruncationError,
)
from .spectra import ModeSpectrum

SQRT_PI = math.sqrt(math.pi)
# decaying corrections added to the divergence basis when the grid allows:
# (power of Omega, multiplied by ln(Omega^2)?)
DEFAULT_CORRECTIONS = ((-2, False), (-2, True))
NEGLIGIBLE = 1e-6


# ---------------------------------------------------------------------------
# exact identities, checked by quadrature


def _tail(c: float, U: float) -> float:
    """int_U^inf u^-2 exp(-c u^2) du in closed form."""
    if c == 0:
        return 1.0 / U
    x = math.sqrt(c) * U
    return math.exp(-x * x) / U * (1.0 - SQRT_PI * x * special.erfcx(x))


def _quad_panels(func, edges, what):
    pieces = []
    for a, b in zip(edges[:-1], edges[1:]):
        val, err, info, *msg = integrate.quad(func, a, b, epsabs=1e-16, epsrel=1e-13,
                                              limit=200, full_output=1)
        if msg and not math.isfinite(val):
            raise QuadratureError(f"{what}: quadrature failed on [{a:.3g}, {b:.3g}]: {msg[0]}")
        if msg and err > 1e-11 * max(1.0, abs(val)):
            raise QuadratureError(
                f"{what}: no convergence on [{a:.3g}, {b:.3g}] (error estimate {err:.3g}, "
                f"{info['neval']} evaluations): {msg[0]}")
        pieces.append(val)
    return math.fsum(pieces)


def _geometric_edges(lo, hi, first=0.0):
    edges = [first] if first < lo else []
    x = lo
    while x < hi:
        edges.append(x)
        x *= 2.0
    edges.append(hi)
    return edges


def lemma1_integral(omega: float, omega_star: float) -> float:
    """(1/sqrt(4 pi)) int_0^inf t^-3/2 (exp(-omega_star^2 t) - exp(-omega^2 t)) dt
    by panel quadrature in u = sqrt(t) plus a closed-form tail."""
    a, b = float(omega_star) ** 2, float(omega) ** 2
    if a == b:
        return 0.0
    lo_c, hi_c = min(a, b), max(a, b)
    start = 0.25 / math.sqrt(hi_c)
    U = 8.0 / math.sqrt(lo_c) if lo_c > 0 else 8.0 / math.sqrt(hi_c)
    U = max(U, 2 * start)

    sign = 1.0 if a < b else -1.0
    gap = hi_c - lo_c

    def integrand(u):
        if u == 0.0:
            return b - a
        return -sign * math.exp(-lo_c * u * u) * math.expm1(-gap * u * u) / (u * u)

    body = _quad_panels(integrand, _geometric_edges(start, U), "frequency-difference integral")
    return (body + _tail(a, U) - _tail(b, U)) / SQRT_PI


def verify_lemma1(omega: float, omega_star: float) -> float:
    """|(omega - omega_star) - quadrature of the heat-kernel representation|."""
    if omega < 0 or omega_star < 0:
        raise InvalidArgumentError("frequencies must be >= 0")
    return abs((omega - omega_star) - lemma1_integral(omega, omega_star))


def erfc_identity_rhs(omega: float, Omega: float) -> float:
    """(Omega/sqrt(pi)) exp(-omega^2/Omega^2) - (1/sqrt(4 pi)) int_{Omega^-2}^inf t^-3/2 exp(-omega^2 t) dt."""
    c = float(omega) ** 2
    lo = 1.0 / Omega
    if c == 0:
        integral = _tail(0.0, lo)
    else:
        U = max(8.0 / math.sqrt(c), 2 * lo)
        body = _quad_panels(lambda u: math.exp(-c * u * u) / (u * u),
                            _geometric_edges(lo, U, first=lo), "erfc identity integral")
        integral = body + _tail(c, U)
    return Omega / SQRT_PI * math.exp(-c / (Omega * Omega)) - integral / SQRT_PI


def verify_erfc_identity(omega: float, Omega: float) -> float:
    """|omega erfc(omega/Omega) - RHS|, with the RHS integral done by quadrature."""
    if omega < 0 or not Omega > 0:
        raise InvalidArgumentError("need omega >= 0 and Omega > 0")
    return abs(omega * special.erfc(omega / Omega) - erfc_identity_rhs(omega, Omega))


# ---------------------------------------------------------------------------
# regularized sums


def _check_truncation(spectrum: ModeSpectrum, cutoff: CutoffSpec, Omega: float):
    if spectrum.complete:
        return
    need = cutoff.tail_point * Omega
    have = spectrum.trusted_omega_max
    if have >= need:
        return
    n = max(spectrum.uv_valid_count, 1)
    if have > 0 and math.isfinite(need):
        required = int(math.ceil(n * (need / have) ** spectrum.dimension_d))
    else:
        required = None
    raise TruncationError(
        f"spectrum {spectrum.label!r} is trusted only up to omega={have:.6g}, but cutoff "
        f"{cutoff.name!r} at Omega={Omega:.6g} needs modes up to {need:.6g}"
        + (f" (about {required} modes)" if required else ""), required=required)


def f_regularized_sum(spectrum: ModeSpectrum, cutoff: CutoffSpec, Omega: float) -> float:
    """sum_n mult_n omega_n f(omega_n / Omega) over the trusted modes."""
    if not Omega > 0:
        raise InvalidArgumentError(f"Omega must be positive, got {Omega!r}")
    if len(spectrum) == 0:
        return 0.0
    _check_truncation(spectrum, cutoff, Omega)
    w, m = spectrum.trusted()
    return float(np.dot(m * w, eval_cutoff(cutoff, w / Omega)))


_ERFC = None


def erfc_regularized_sum(spectrum: ModeSpectrum, Omega: float) -> float:
    """sum_n mult_n omega_n erfc(omega_n / Omega)."""
    global _ERFC
    if _ERFC is None:
        _ERFC = CutoffSpec.erfc()
    return f_regularized_sum(spectrum, _ERFC, Omega)


# ---------------------------------------------------------------------------
# sweeps


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float).reshape(-1)
    if grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise InvalidArgumentError("Omega grid must be strictly increasing and positive")
    return grid


@dataclass(frozen=True, eq=False)
class RegularizedSweep:
    omega_grid: np.ndarray
    values: np.ndarray
    cutoff: CutoffSpec
    spectrum_labels: str = ""
    dimension_d: int = 1

    def __post_init__(self):
        grid = _check_grid(self.omega_grid)
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if values.shape != grid.shape:
            raise InvalidArgumentError("sweep values and Omega grid differ in length")
        object.__setattr__(self, "omega_grid", grid)
        object.__setattr__(self, "values", values)


def combination_sweep(terms: Sequence[tuple[float, ModeSpectrum]], cutoff: CutoffSpec,
                      omega_grid, jobs: int = 1, label: str = "") -> RegularizedSweep:
    """Sweep of sum_j weight_j S_j(Omega) for a weighted set of spectra."""
    if not terms:
        raise InvalidArgumentError("empty combination")
    dims = {s.dimension_d for _, s in terms}
    if len(dims) != 1:
        raise InvalidArgumentError(f"spectra have different dimensions {sorted(dims)}")
    grid = _check_grid(omega_grid)

    def point(Omega):
        return sum(float(wt) * f_regularized_sum(s, cutoff, Omega) for wt, s in terms)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(point, grid))
    else:
        values = [point(O) for O in grid]
    label = label or " ".join(f"{wt:+g}*[{s.label}]" for wt, s in terms)
    return RegularizedSweep(grid, np.array(values), cutoff, label, dims.pop())


def difference_sweep(spectrum_a: ModeSpectrum, spectrum_b: ModeSpectrum, cutoff: CutoffSpec,
                     omega_grid, jobs: int = 1) -> RegularizedSweep:
    """Delta S(Omega) = S_a(Omega) - S_b(Omega) on the grid."""
    if spectrum_a.dimension_d != spectrum_b.dimension_d:
        raise InvalidArgumentError(
            f"dimension mismatch: {spectrum_a.dimension_d} vs {spectrum_b.dimension_d}")
    grid = _check_grid(omega_grid)

    def point(Omega):
        return (f_regularized_sum(spectrum_a, cutoff, Omega)
                - f_regularized_sum(spectrum_b, cutoff, Omega))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(point, grid))
    else:
        values = [point(O) for O in grid]
    return RegularizedSweep(grid, np.array(values), cutoff,
                            f"{spectrum_a.label} - {spectrum_b.label}", spectrum_a.dimension_d)


def auto_omega_grid(spectra: Sequence[ModeSpectrum], cutoff: CutoffSpec, decades: float = 1.5,
                    points: int = 16) -> np.ndarray:
    """Log grid whose top is the largest Omega every spectrum can support."""
    top = min((s.trusted_omega_max for s in spectra if len(s) and not s.complete),
              default=0.0) / cutoff.tail_point * (1 - 1e-9)
    if not top > 0:
        raise InvalidArgumentError("spectra too short to support any cutoff scale")
    return np.geomspace(top / 10 ** decades, top, points)


# ---------------------------------------------------------------------------
# divergence-structure fits


def divergence_basis(omega, d: int, corrections=()):
    """Columns Omega^(d+1) .. Omega^1, ln(Omega^2), 1 and optional decaying terms."""
    omega = np.asarray(omega, dtype=float)
    cols, labels = [], []
    for i in range(d + 1):
        p = d + 1 - i
        cols.append(omega ** p)
        labels.append(f"Omega^{p}")
    cols.append(np.log(omega ** 2))
    labels.append("ln(Omega^2)")
    cols.append(np.ones_like(omega))
    labels.append("1")
    for p, with_log in corrections:
        cols.append(omega ** float(p) * (np.log(omega ** 2) if with_log else 1.0))
        labels.append(f"Omega^{p}" + (" ln(Omega^2)" if with_log else ""))
    return cols, labels


def fit_divergences(sweep: RegularizedSweep, d: int, corrections=DEFAULT_CORRECTIONS,
                    min_decades: float = 1.0, min_samples: int | None = None) -> LinearFit:
    d = int(d)
    n = sweep.omega_grid.size
    min_samples = d + 4 if min_samples is None else min_samples
    span = math.log10(sweep.omega_grid[-1] / sweep.omega_grid[0]) if n > 1 else 0.0
    hint = (f"; try >= {max(min_samples, d + 8)} log-spaced points over "
            f">= {max(min_decades, 1.5):g} decades")
    if n < min_samples or span < min_decades - 1e-12:
        raise InvalidArgumentError(
            f"sweep has {n} samples over {span:.2f} decades; need >= {min_samples} "
            f"over >= {min_decades:g}")
    base_cols = d + 3
    if n < base_cols + len(corrections) + 2:
        corrections = ()
    cols, labels = divergence_basis(sweep.omega_grid, d, corrections)
    return scaled_lstsq(cols, labels, sweep.values, hint=hint)


@dataclass(frozen=True)
class ExtrapolationResult:
    finite_part: float
    error_estimate: float
    converged: bool
    divergent_slots: list
    fit: LinearFit = field(repr=False, default=None)
    threshold: float = NEGLIGIBLE

    @property
    def energy(self) -> float:
        """Casimir energy difference, half the finite part of the raw sum."""
        return 0.5 * self.finite_part


def extrapolate_finite_part(sweep: RegularizedSweep, d: int | None = None,
                            threshold: float = NEGLIGIBLE,
                            corrections=DEFAULT_CORRECTIONS) -> ExtrapolationResult:
    """Fit the divergence structure and read off the Omega -> inf constant.

    Converged means every divergent term (positive powers and the log)
    contributes less than ``threshold * max|values|`` anywhere on the grid.
    """
    d = sweep.dimension_d if d is None else int(d)
    fit = fit_divergences(sweep, d, corrections, min_decades=1.0, min_samples=d + 4)
    grid = sweep.omega_grid
    scale = float(np.max(np.abs(sweep.values)))
    cols, labels = divergence_basis(grid, d)
    slots, converged = [], True
    for col, label in zip(cols[:d + 2], labels[:d + 2]):
        c = fit[label]
        slots.append((label, c))
        if abs(c) * float(np.max(np.abs(col))) > threshold * scale:
            converged = False
    finite = fit["1"]
    err = fit.stderr("1")
    err = 0.0 if not math.isfinite(err) else err
    if grid.size > len(fit.labels) + 1:
        sub = RegularizedSweep(grid[1:], sweep.values[1:], sweep.cutoff,
                               sweep.spectrum_labels, sweep.dimension_d)
        try:
            alt = fit_divergences(sub, d, corrections if len(fit.labels) > d + 3 else (),
                                  min_decades=0.0, min_samples=1)
            err += abs(alt["1"] - finite)
        except Exception:
            pass
    return ExtrapolationResult(finite, err, converged, slots, fit, threshold)


# ---------------------------------------------------------------------------
# regular resummation of index-paired differences


class Resummation(str, enum.Enum):
    ERFC_EXTRAPOLATE = "erfc-extrapolate"
    ABEL = "abel"
    RIESZ = "riesz"


@dataclass(frozen=True)
class ResummationResult:
    value: float
    error_estimate: float
    method: str

    def __float__(self):
        return self.value


def _paired(a: ModeSpectrum, b: ModeSpectrum):
    wa, wb = a.expanded(), b.expanded()
    n = min(wa.size, wb.size)
    return wa[:n] - wb[:n], 0.5 * (wa[:n] + wb[:n])


def parse_method(method) -> tuple[Resummation, int]:
    if isinstance(method, Resummation):
        return method, 2
    text = str(method).strip().lower()
    order = 2
    if text.startswith("riesz"):
        if ":" in text:
            order = int(text.split(":", 1)[1])
        elif "(" in text:
            order = int(text[text.index("(") + 1:text.index(")")])
        text = "riesz"
    aliases = {"erfc": "erfc-extrapolate", "erfcextrapolate": "erfc-extrapolate"}
    try:
        return Resummation(aliases.get(text, text)), order
    except ValueError:
        raise InvalidArgumentError(f"unknown resummation method {method!r}") from None


def _neville_zero(x, y):
    """Successive polynomial extrapolations to x = 0 using the first k points."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    n = x.size
    estimates = [y[0]]
    P = [y.copy()]
    for k in range(1, n):
        prev = P[-1]
        cur = (x[k:] * prev[:-1] - x[:-k] * prev[1:]) / (x[k:] - x[:-k])
        P.append(cur)
        estimates.append(cur[0])
    return estimates


def resum_difference(spectrum_a: ModeSpectrum, spectrum_b: ModeSpectrum, method="abel",
                     order: int | None = None, rtol: float = 1e-3) -> ResummationResult:
    """Resum sum_n (omega_a,n - omega_b,n) with modes paired by sorted index.

    Only meaningful once the difference is known to be finite (certificate or
    a converged sweep); that is the caller's responsibility.

    * ``erfc-extrapolate``: erfc sweep plus divergence fit.
    * ``abel``: sum Delta_n exp(-eps wbar_n), wbar the pair mean, extrapolated
      eps -> 0 by repeated polynomial (Richardson) extrapolation.
    * ``riesz`` (order k): sum Delta_n (1 - wbar_n / W)_+^k with W doubled
      up to the largest paired frequency.
    """
    kind, default_order = parse_method(method)
    order = default_order if order is None else int(order)
    if spectrum_a == spectrum_b:
        return ResummationResult(0.0, 0.0, kind.value)
    if kind is Resummation.ERFC_EXTRAPOLATE:
        cutoff = CutoffSpec.erfc()
        grid = auto_omega_grid([spectrum_a, spectrum_b], cutoff, decades=1.5, points=16)
        res = extrapolate_finite_part(difference_sweep(spectrum_a, spectrum_b, cutoff, grid),
                                      spectrum_a.dimension_d)
        if not res.converged:
            raise NonConvergenceError(
                "erfc sweep of the difference still carries divergent terms: "
                + ", ".join(f"{k}={v:.3g}" for k, v in res.divergent_slots))
        return ResummationResult(res.finite_part, res.error_estimate, kind.value)

    delta, wbar = _paired(spectrum_a, spectrum_b)
    if delta.size < 16:
        raise NonConvergenceError("too few paired modes to resum")
    top = float(wbar[-1])
    if kind is Resummation.ABEL:
        eps = 40.0 / top * 2.0 ** np.arange(7)
        A = np.array([np.dot(delta, np.exp(-e * wbar)) for e in eps])
        est = _neville_zero(eps, A)
        diffs = np.abs(np.diff(est))
        k = int(np.argmin(diffs)) + 1
        value, err = float(est[k]), float(diffs[k - 1])
    else:
        if order < 0:
            raise InvalidArgumentError("Riesz order must be >= 0")
        W = top / 2.0 ** np.arange(8)[::-1]
        R = np.array([np.dot(delta, np.clip(1.0 - wbar / w, 0.0, None) ** order) for w in W])
        value, err = float(R[-1]), float(abs(R[-1] - R[-2]))
    # divergent partial results keep changing by a fixed fraction of their size
    if not (err <= rtol * abs(value) or err <= 1e-12):
        raise NonConvergenceError(
            f"{kind.value} partial results show no Cauchy behaviour "
            f"(last change {err:.3g} vs value {value:.6g})")
    return ResummationResult(value, err, kind.value if kind is not Resummation.RIESZ
                             else f"riesz({order})")
