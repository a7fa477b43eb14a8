"""Reference problems with constant potentials that match the divergent
heat-kernel terms of an operator -laplacian + V(x).

In 1+1 dimensions a single constant V_bar (the spatial mean) suffices.  In
3+1 dimensions two masses with m1^2 + m2^2 = 2 V_bar and
m1^4 + m2^4 = 2 mean(V^2) match the volume, int V and int V^2 terms when
the two reference energies are weighted by 1/2 each.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .certifier import SLOT_ENTRIES
from .errors import ConfigError, ImaginaryFrequencyError, InvalidArgumentError, QuadratureError
from .spectra import (
    BoundaryCondition,
    ModeSpectrum,
    OperatorSpec1D,
    box_spectrum_3d,
    interval_spectrum,
    massive_spectrum,
)

MIN_QUADRATURE_POINTS = 64
# relative slack for mean(V^2) >= V_bar^2 after rounding
CAUCHY_SCHWARZ_RTOL = 1e-12


@dataclass(frozen=True)
class AveragedPotential:
    v_bar: float
    v2_bar: float
    volume: float

    def __post_init__(self):
        vb, v2 = float(self.v_bar), float(self.v2_bar)
        if not (math.isfinite(vb) and math.isfinite(v2)):
            raise InvalidArgumentError("potential averages must be finite")
        if not self.volume > 0:
            raise InvalidArgumentError("volume must be positive")
        if v2 < vb * vb:
            if vb * vb - v2 > CAUCHY_SCHWARZ_RTOL * max(v2, vb * vb, 1e-300):
                raise InvalidArgumentError(
                    f"mean(V^2)={v2!r} < mean(V)^2={vb * vb!r} violates Cauchy-Schwarz")
            v2 = vb * vb
        object.__setattr__(self, "v_bar", vb)
        object.__setattr__(self, "v2_bar", v2)
        object.__setattr__(self, "volume", float(self.volume))

    @property
    def variance(self) -> float:
        return self.v2_bar - self.v_bar ** 2


@dataclass(frozen=True)
class MassPair:
    m1_squared: float
    m2_squared: float

    def __post_init__(self):
        if self.m1_squared < self.m2_squared:
            raise InvalidArgumentError("m1_squared must be >= m2_squared")

    @property
    def tachyonic(self) -> bool:
        return self.m2_squared < 0


def _midpoints(length: float, n: int) -> np.ndarray:
    h = length / n
    return (np.arange(n) + 0.5) * h


def average_potential(V: Callable, domain, quadrature_points: int = 256) -> AveragedPotential:
    """Composite-midpoint means of V and V^2 over [0, L] or a box [0, L1]x[0, L2]x[0, L3].

    ``domain`` is a length or a sequence of 1 or 3 lengths; V takes one
    array per coordinate.  With ``quadrature_points`` equal to the
    finite-difference grid size, the nodes are the periodic grid's cell
    centres, so V_bar equals the discrete operator's mean potential.
    """
    n = int(quadrature_points)
    if n < MIN_QUADRATURE_POINTS:
        raise InvalidArgumentError(f"quadrature_points must be >= {MIN_QUADRATURE_POINTS}")
    lengths = [float(domain)] if np.isscalar(domain) else [float(x) for x in domain]
    if len(lengths) not in (1, 3) or any(not x > 0 for x in lengths):
        raise InvalidArgumentError("domain must be a positive length or three box lengths")
    axes = [_midpoints(x, n) for x in lengths]
    grids = np.meshgrid(*axes, indexing="ij") if len(axes) > 1 else axes
    try:
        values = np.broadcast_to(np.asarray(V(*grids), dtype=float), grids[0].shape)
    except Exception as exc:
        raise QuadratureError(f"potential could not be evaluated: {exc}") from exc
    if not np.all(np.isfinite(values)):
        raise QuadratureError("potential is not finite at every quadrature node")
    return AveragedPotential(float(np.mean(values)), float(np.mean(values * values)),
                             math.prod(lengths))


def average_on_grid(spec: OperatorSpec1D) -> AveragedPotential:
    """Means of the potential exactly as seen by the discretized operator."""
    v = spec.potential_values()
    return AveragedPotential(float(np.mean(v)), float(np.mean(v * v)), spec.length)


def reference_operator_1d(avg: AveragedPotential, L: float, count: int,
                          grid_points: int | None = None) -> ModeSpectrum:
    """Periodic spectrum of -d^2/dx^2 + V_bar: sqrt((2 pi n / L)^2 + V_bar), n = 0..count-1,
    with multiplicity 2 for n >= 1.

    With ``grid_points`` the lattice dispersion (4/h^2) sin^2(pi n / N) of the
    periodic finite-difference Laplacian replaces (2 pi n / L)^2, so the
    reference shares the discretization of a matching
    :func:`~casimirlab.spectra.schrodinger_spectrum_1d` operator.
    """
    if avg.v_bar < 0:
        raise ImaginaryFrequencyError(
            f"V_bar = {avg.v_bar!r} < 0 gives an imaginary zero mode", avg.v_bar)
    if grid_points is None:
        free = interval_spectrum(L, BoundaryCondition.PERIODIC, count)
        label = f"reference V_bar={avg.v_bar:.6g} L={L:g}"
    else:
        N = int(grid_points)
        if int(count) > N // 2 + 1:
            raise InvalidArgumentError(f"count {count} exceeds the {N // 2 + 1} lattice momenta")
        if count < 1:
            raise InvalidArgumentError("count must be >= 1")
        h = L / N
        n = np.arange(int(count))
        k = (2.0 / h) * np.sin(math.pi * n / N)
        mult = np.where(n > 0, 2, 1)
        if N % 2 == 0 and count == N // 2 + 1:
            mult[-1] = 1
        free = ModeSpectrum(k, mult, 1, min(int(count), N // 4 // 2 + 1))
        label = f"reference V_bar={avg.v_bar:.6g} L={L:g} N={N}"
    return massive_spectrum(free, avg.v_bar).with_label(label)


def solve_masses(avg: AveragedPotential) -> MassPair:
    """Roots of y^2 - 2 V_bar y + (2 V_bar^2 - mean(V^2)) = 0."""
    s = math.sqrt(max(avg.v2_bar - avg.v_bar ** 2, 0.0))
    return MassPair(avg.v_bar + s, avg.v_bar - s)


def reference_pair_3d(box: Sequence[float], masses: MassPair,
                      omega_max: float) -> tuple[ModeSpectrum, ModeSpectrum]:
    """Periodic-box spectra of -laplacian + m1^2 and -laplacian + m2^2."""
    if masses.tachyonic:
        raise ImaginaryFrequencyError(
            f"m2^2 = {masses.m2_squared!r} < 0: reference would have imaginary frequencies",
            masses.m2_squared)
    free = box_spectrum_3d(box, BoundaryCondition.PERIODIC, omega_max)
    return (massive_spectrum(free, masses.m1_squared).with_label(f"m^2={masses.m1_squared:.6g}"),
            massive_spectrum(free, masses.m2_squared).with_label(f"m^2={masses.m2_squared:.6g}"))


# ---------------------------------------------------------------------------
# slot maps for combination checks (boundaryless periodic box)


def potential_slot_map(volume: float, int_v: float, int_v2: float, d: int = 3) -> dict:
    """Slot integrals of -laplacian + V on a periodic box: only volume, int V, int V^2."""
    out = {}
    for i in range(int(d) + 2):
        out[i] = {name: 0.0 for name in SLOT_ENTRIES[i]}
    out[0]["volume"] = float(volume)
    if 2 in out:
        out[2]["int V dV"] = float(int_v)
    if 4 in out:
        out[4]["int V^2 dV"] = float(int_v2)
    return out


def target_slot_map(avg: AveragedPotential, d: int = 3) -> dict:
    return potential_slot_map(avg.volume, avg.v_bar * avg.volume, avg.v2_bar * avg.volume, d)


def mass_slot_map(volume: float, m_squared: float, d: int = 3) -> dict:
    return potential_slot_map(volume, m_squared * volume, m_squared ** 2 * volume, d)


def reference_slot_maps(avg: AveragedPotential, masses: MassPair, d: int = 3) -> list:
    return [mass_slot_map(avg.volume, masses.m1_squared, d),
            mass_slot_map(avg.volume, masses.m2_squared, d)]


# ---------------------------------------------------------------------------
# named potentials


def potential_from_config(rec: Mapping, length: float) -> Callable:
    """Potential V(x) on [0, length] from a config table.

    kinds: ``constant`` (value), ``sin2`` (amplitude, harmonic: V =
    amplitude sin^2(2 pi harmonic x / L)), ``polynomial`` (coefficients,
    lowest order first), ``piecewise`` (edges, values), ``table`` (x, V,
    linearly interpolated).
    """
    rec = dict(rec)
    kind = str(rec.get("kind", "")).lower()
    try:
        if kind == "constant":
            c = float(rec["value"])
            return lambda x: np.full_like(np.asarray(x, float), c)
        if kind == "sin2":
            amp, k = float(rec.get("amplitude", 1.0)), float(rec.get("harmonic", 1.0))
            return lambda x: amp * np.sin(2 * math.pi * k * np.asarray(x, float) / length) ** 2
        if kind == "polynomial":
            coeffs = [float(c) for c in rec["coefficients"]]
            return lambda x: np.polynomial.polynomial.polyval(np.asarray(x, float), coeffs)
        if kind == "piecewise":
            edges = np.asarray(rec["edges"], float)
            values = np.asarray(rec["values"], float)
            return piecewise_constant(edges, values)
        if kind == "table":
            xs, vs = np.asarray(rec["x"], float), np.asarray(rec["V"], float)
            if xs.size < 2 or np.any(np.diff(xs) <= 0):
                raise ConfigError("tabulated potential needs increasing x values")
            return lambda x: np.interp(np.asarray(x, float), xs, vs)
    except KeyError as exc:
        raise ConfigError(f"potential of kind {kind!r} is missing {exc.args[0]!r}") from None
    raise ConfigError(f"unknown potential kind {kind!r} "
                      "(constant, sin2, polynomial, piecewise, table)")


def piecewise_constant(edges, values) -> Callable:
    """V(x) = values[j] for edges[j] <= x < edges[j+1]."""
    edges, values = np.asarray(edges, float), np.asarray(values, float)
    if edges.size != values.size + 1 or np.any(np.diff(edges) <= 0):
        raise InvalidArgumentError("piecewise potential needs len(values)+1 increasing edges")

    def V(x):
        idx = np.clip(np.searchsorted(edges, np.asarray(x, float), side="right") - 1,
                      0, values.size - 1)
        return values[idx]

    return V
