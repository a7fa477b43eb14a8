"""Operator spectra: analytic interval/box spectra and finite-difference
Schrodinger spectra, all returned as :class:`ModeSpectrum` values.

Frequencies are square roots of eigenvalues of ``-d^2/dx^2 + V`` (natural
units, so frequency and wavenumber share units of inverse length).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import linalg

from .errors import (
    ImaginaryFrequencyError,
    InvalidArgumentError,
    ResourceLimitError,
    UVValidityError,
)

DEFAULT_MODE_CAP = 5_000_000
# fraction of the finite-difference spectrum trusted as a continuum stand-in
UV_VALID_FRACTION = 4


class BoundaryCondition(str, enum.Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    PERIODIC = "periodic"

    @classmethod
    def parse(cls, value) -> "BoundaryCondition":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise InvalidArgumentError(f"unknown boundary condition {value!r}") from None


@dataclass(frozen=True, eq=False)
class ModeSpectrum:
    """Sorted angular frequencies with integer multiplicities.

    ``omega`` holds the effective frequencies.  A constant mass shift applied
    through :func:`massive_spectrum` is kept separately in ``mass_shift`` so
    that successive shifts compose exactly: the effective frequency is
    ``sqrt(base_omega**2 + mass_shift)``.

    ``complete=True`` marks a spectrum that has no modes beyond the stored
    ones (a finite-dimensional operator), so cutoff sums need no truncation
    check.
    """

    base_omega: np.ndarray
    multiplicity: np.ndarray
    dimension_d: int = 1
    uv_valid_count: int | None = None
    label: str = ""
    mass_shift: float = 0.0
    complete: bool = False
    omega: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        w = np.asarray(self.base_omega, dtype=float).reshape(-1)
        m = np.asarray(self.multiplicity).reshape(-1)
        if w.shape != m.shape:
            raise InvalidArgumentError("omega and multiplicity lengths differ")
        if m.size and (not np.all(m == np.round(m)) or m.min() < 1):
            raise InvalidArgumentError("multiplicities must be positive integers")
        m = m.astype(np.int64)
        if w.size and (not np.all(np.isfinite(w)) or w.min() < 0):
            raise InvalidArgumentError("frequencies must be finite and >= 0")
        if np.any(np.diff(w) < 0):
            order = np.argsort(w, kind="stable")
            w, m = w[order], m[order]
        if int(self.dimension_d) < 1:
            raise InvalidArgumentError("dimension_d must be a positive integer")
        n_valid = w.size if self.uv_valid_count is None else int(self.uv_valid_count)
        if not 0 <= n_valid <= w.size:
            raise InvalidArgumentError(
                f"uv_valid_count={n_valid} exceeds the {w.size} stored modes")
        shift = float(self.mass_shift)
        if shift != 0.0:
            sq = w * w + shift
            if sq.size and sq.min() < 0:
                i = int(np.argmin(sq))
                raise ImaginaryFrequencyError(
                    f"mode omega^2 = {sq[i]!r} < 0 after mass shift {shift!r}", sq[i])
            eff = np.sqrt(sq)
        else:
            eff = w.copy()
        for arr in (w, m, eff):
            arr.flags.writeable = False
        object.__setattr__(self, "base_omega", w)
        object.__setattr__(self, "multiplicity", m)
        object.__setattr__(self, "dimension_d", int(self.dimension_d))
        object.__setattr__(self, "uv_valid_count", n_valid)
        object.__setattr__(self, "mass_shift", shift)
        object.__setattr__(self, "complete", bool(self.complete))
        object.__setattr__(self, "omega", eff)

    def __len__(self):
        return self.omega.size

    def __eq__(self, other):
        if not isinstance(other, ModeSpectrum):
            return NotImplemented
        return (np.array_equal(self.omega, other.omega)
                and np.array_equal(self.multiplicity, other.multiplicity)
                and self.dimension_d == other.dimension_d
                and self.uv_valid_count == other.uv_valid_count)

    __hash__ = None

    @property
    def total_modes(self) -> int:
        return int(self.multiplicity.sum())

    @property
    def trusted_omega_max(self) -> float:
        """Largest frequency inside the UV-valid part (0 for an empty spectrum)."""
        if self.uv_valid_count == 0:
            return 0.0
        return float(self.omega[self.uv_valid_count - 1])

    def trusted(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.uv_valid_count
        return self.omega[:n], self.multiplicity[:n]

    def expanded(self) -> np.ndarray:
        """Frequencies repeated by multiplicity (trusted part only)."""
        w, m = self.trusted()
        return np.repeat(w, m)

    def with_label(self, label: str) -> "ModeSpectrum":
        return ModeSpectrum(self.base_omega, self.multiplicity, self.dimension_d,
                            self.uv_valid_count, label, self.mass_shift, self.complete)


def _from_pairs(omega, mult, d, label, uv_valid_count=None) -> ModeSpectrum:
    return ModeSpectrum(np.asarray(omega, float), np.asarray(mult, np.int64), d,
                        uv_valid_count, label)


def _axis_wavenumbers(length: float, bc: BoundaryCondition, k_max: float | None = None,
                      count: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """1D wavenumbers and multiplicities, either the first `count` or all <= k_max."""
    if bc is BoundaryCondition.PERIODIC:
        step = 2.0 * math.pi / length
        start = 0
    else:
        step = math.pi / length
        start = 1 if bc is BoundaryCondition.DIRICHLET else 0
    if count is None:
        count = int(math.floor(k_max / step + 1e-9)) + 1 - start
        count = max(count, 0)
    n = np.arange(start, start + count, dtype=float)
    k = n * step
    mult = np.ones(count, dtype=np.int64)
    if bc is BoundaryCondition.PERIODIC:
        mult[n > 0] = 2
    return k, mult


def interval_spectrum(L: float, bc, count: int, label: str | None = None) -> ModeSpectrum:
    """Exact spectrum of ``-d^2/dx^2`` on ``[0, L]``.

    Dirichlet gives ``n pi / L`` for ``n = 1..count``, Neumann the same for
    ``n = 0..count-1`` and Periodic ``2 pi n / L`` for ``n = 0..count-1`` with
    the ``+-n`` degeneracy folded into multiplicity 2.
    """
    bc = BoundaryCondition.parse(bc)
    if not L > 0:
        raise InvalidArgumentError(f"interval length must be positive, got {L!r}")
    if int(count) < 1:
        raise InvalidArgumentError(f"mode count must be >= 1, got {count!r}")
    k, mult = _axis_wavenumbers(float(L), bc, count=int(count))
    return _from_pairs(k, mult, 1, label or f"interval L={L:g} {bc.value}")


def _group_degenerate(sq: np.ndarray, mult: np.ndarray, rtol=1e-12):
    order = np.argsort(sq, kind="stable")
    sq, mult = sq[order], mult[order]
    if sq.size == 0:
        return sq, mult
    # start a new group whenever the gap exceeds rounding noise
    gap = np.diff(sq) > rtol * np.maximum(sq[1:], 1e-300)
    starts = np.concatenate([[0], np.nonzero(gap)[0] + 1])
    return sq[starts], np.add.reduceat(mult, starts)


def box_spectrum(lengths: Sequence[float], bc, omega_max: float,
                 max_modes: int = DEFAULT_MODE_CAP, label: str | None = None) -> ModeSpectrum:
    """All modes of a rectangular box with ``omega <= omega_max``.

    ``bc`` is either one boundary condition for every axis or a sequence with
    one entry per axis (e.g. periodic transverse directions with Dirichlet
    plates).
    """
    lengths = [float(x) for x in lengths]
    if not lengths or any(not x > 0 for x in lengths):
        raise InvalidArgumentError(f"box lengths must be positive, got {lengths}")
    if not omega_max > 0:
        raise InvalidArgumentError(f"omega_max must be positive, got {omega_max!r}")
    if isinstance(bc, (str, BoundaryCondition)):
        bcs = [BoundaryCondition.parse(bc)] * len(lengths)
    else:
        bcs = [BoundaryCondition.parse(b) for b in bc]
        if len(bcs) != len(lengths):
            raise InvalidArgumentError("need one boundary condition per box axis")
    d = len(lengths)
    # Weyl estimate of the total mode count, checked before enumerating
    unit_ball = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
    estimate = unit_ball * math.prod(lengths) * (omega_max / (2 * math.pi)) ** d
    if estimate > max_modes:
        raise ResourceLimitError(
            f"box enumeration up to omega_max={omega_max:g} needs ~{estimate:.3g} modes, "
            f"above the cap max_modes={max_modes}", cap=max_modes)
    w2max = omega_max * omega_max * (1 + 1e-15)
    sq = np.zeros(1)
    mult = np.ones(1, dtype=np.int64)
    for L_i, bc_i in zip(lengths, bcs):
        k, m = _axis_wavenumbers(L_i, bc_i, k_max=omega_max)
        total = sq[:, None] + (k * k)[None, :]
        keep = total <= w2max
        sq = total[keep]
        mult = (mult[:, None] * m[None, :])[keep]
        if mult.sum() > max_modes:
            raise ResourceLimitError(
                f"box enumeration exceeded the cap max_modes={max_modes}", cap=max_modes)
    sq, mult = _group_degenerate(sq, mult)
    name = label or "box " + "x".join(f"{x:g}" for x in lengths) + " " + "/".join(
        b.value for b in bcs)
    return _from_pairs(np.sqrt(sq), mult, d, name)


def box_spectrum_3d(lengths, bc, omega_max: float, max_modes: int = DEFAULT_MODE_CAP,
                    label: str | None = None) -> ModeSpectrum:
    if len(lengths) != 3:
        raise InvalidArgumentError("box_spectrum_3d needs exactly three lengths")
    return box_spectrum(lengths, bc, omega_max, max_modes=max_modes, label=label)


@dataclass(frozen=True)
class OperatorSpec1D:
    """``-d^2/dx^2 + V(x)`` on ``[0, length]`` discretized on ``grid_points`` nodes."""

    length: float
    potential: Callable[[np.ndarray], np.ndarray]
    bc: BoundaryCondition = BoundaryCondition.PERIODIC
    grid_points: int = 512

    def __post_init__(self):
        object.__setattr__(self, "bc", BoundaryCondition.parse(self.bc))
        if not self.length > 0:
            raise InvalidArgumentError(f"length must be positive, got {self.length!r}")
        if int(self.grid_points) < 16:
            raise InvalidArgumentError(f"grid_points must be >= 16, got {self.grid_points}")
        object.__setattr__(self, "grid_points", int(self.grid_points))

    def nodes(self) -> np.ndarray:
        """Grid nodes.  Periodic and Neumann grids are cell centred, so the
        node mean of V equals its composite-midpoint average."""
        N, L = self.grid_points, self.length
        if self.bc is BoundaryCondition.DIRICHLET:
            h = L / (N + 1)
            return h * np.arange(1, N + 1)
        h = L / N
        return h * (np.arange(N) + 0.5)

    @property
    def spacing(self) -> float:
        N = self.grid_points
        return self.length / (N + 1 if self.bc is BoundaryCondition.DIRICHLET else N)

    def potential_values(self) -> np.ndarray:
        x = self.nodes()
        v = np.broadcast_to(np.asarray(self.potential(x), dtype=float), x.shape)
        if not np.all(np.isfinite(v)):
            raise InvalidArgumentError("potential is not finite on the grid")
        return np.array(v)


def _fd_eigenvalues(spec: OperatorSpec1D, count: int) -> np.ndarray:
    N, h = spec.grid_points, spec.spacing
    v = spec.potential_values()
    diag = 2.0 / h**2 + v
    off = np.full(N - 1, -1.0 / h**2)
    if spec.bc is BoundaryCondition.NEUMANN:
        diag[0] -= 1.0 / h**2
        diag[-1] -= 1.0 / h**2
    if spec.bc is BoundaryCondition.PERIODIC:
        mat = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
        mat[0, -1] = mat[-1, 0] = -1.0 / h**2
        return linalg.eigh(mat, eigvals_only=True, subset_by_index=[0, count - 1])
    return linalg.eigh_tridiagonal(diag, off, eigvals_only=True, select="i",
                                   select_range=(0, count - 1))


def schrodinger_spectrum_1d(spec: OperatorSpec1D, count: int,
                            label: str | None = None) -> ModeSpectrum:
    """Lowest ``count`` frequencies of the finite-difference operator.

    Only the lowest ``grid_points / 4`` eigenvalues are accepted; above that
    the lattice dispersion departs visibly from the continuum.
    """
    count = int(count)
    if count < 1:
        raise InvalidArgumentError(f"count must be >= 1, got {count}")
    limit = spec.grid_points // UV_VALID_FRACTION
    if count > limit:
        raise UVValidityError(
            f"count={count} exceeds the UV-valid limit grid_points/4 = {limit}")
    lam = np.sort(_fd_eigenvalues(spec, count))
    # eigenvalues within round-off of zero are zero modes, not bound states
    noise = 64 * np.finfo(float).eps * (4.0 / spec.spacing**2
                                        + np.abs(spec.potential_values()).max())
    lam[np.abs(lam) <= noise] = 0.0
    if lam[0] < 0:
        raise ImaginaryFrequencyError(
            f"eigenvalue lambda_0 = {lam[0]!r} < 0 has no real frequency", lam[0])
    omega, mult = np.sqrt(lam), np.ones(count, dtype=np.int64)
    return _from_pairs(omega, mult, 1,
                       label or f"schrodinger L={spec.length:g} {spec.bc.value} N={spec.grid_points}")


def massive_spectrum(base: ModeSpectrum, m_squared: float) -> ModeSpectrum:
    """Shift every ``omega**2`` by ``m_squared`` (``-laplacian + m^2``)."""
    m_squared = float(m_squared)
    return ModeSpectrum(base.base_omega, base.multiplicity, base.dimension_d,
                        base.uv_valid_count, base.label or "massive",
                        base.mass_shift + m_squared, base.complete)


def union_spectrum(*parts: ModeSpectrum, label: str = "") -> ModeSpectrum:
    """Disjoint union of spectra (e.g. the two chambers of a piston).

    The trusted region of the union stops at the smallest trusted maximum of
    the parts.
    """
    if not parts:
        raise InvalidArgumentError("union of no spectra")
    dims = {p.dimension_d for p in parts}
    if len(dims) != 1:
        raise InvalidArgumentError(f"cannot join spectra of dimensions {sorted(dims)}")
    w = np.concatenate([p.omega for p in parts])
    m = np.concatenate([p.multiplicity for p in parts])
    order = np.argsort(w, kind="stable")
    w, m = w[order], m[order]
    if w.size:
        starts = np.concatenate([[0], np.nonzero(np.diff(w) > 0)[0] + 1])
        w, m = w[starts], np.add.reduceat(m, starts)
    # above the lowest trusted maximum some part may be missing modes
    cut = min((p.trusted_omega_max for p in parts if len(p) and not p.complete),
              default=math.inf)
    n_valid = int(np.searchsorted(w, cut, side="right"))
    complete = all(p.complete and p.uv_valid_count == len(p) for p in parts)
    return ModeSpectrum(w, m, dims.pop(), n_valid, label or " + ".join(p.label for p in parts),
                        complete=complete)
