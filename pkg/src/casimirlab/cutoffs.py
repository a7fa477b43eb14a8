"""Cutoff functions f(x), x = omega/Omega, written as weighted erfc profiles

    f(x) = int_0^inf g(xi) erfc(x / xi) dxi,     int_0^inf g(xi) dxi = 1,

together with the weight moments that rescale divergence coefficients and the
Post-Widder inversion that recovers g from f.

Laplace-side convention: with chi = xi**-2 and h(chi) = g(chi**-1/2) / chi,

    G(s) = -sqrt(pi) f'(sqrt(s)) = int_0^inf h(chi) exp(-s chi) dchi,

so G is the Laplace transform of a nonnegative function whenever g >= 0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import mpmath
import numpy as np
from scipy import integrate, special

from .errors import (
    DivergentMomentError,
    InvalidArgumentError,
    NumericalError,
    QuadratureError,
    UnsupportedCutoffError,
)

DELTA_WIDTH = 1e-3
NORMALIZATION_TOL = 1e-9
_GL_ORDER = 48
_MP_DPS = 60
# erfc/exp tails are treated as zero beyond this value of f
TAIL_LEVEL = 2e-17


def _gl_nodes(edges: Sequence[float], order: int = _GL_ORDER):
    x, w = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        half = 0.5 * (b - a)
        nodes.append(a + half * (x + 1))
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


class WeightFunction:
    """Nonnegative weight g(xi) on (0, inf) with unit mass.

    Either an analytic callable (with a support interval and optional
    breakpoints for quadrature) or a table ``(xi, g)`` interpolated linearly
    and integrated by the trapezoid rule.  ``normalization_checked`` is set
    once the unit-mass invariant has been verified.
    """

    def __init__(self, func: Optional[Callable] = None, *, support=(0.0, math.inf),
                 breakpoints: Sequence[float] = (), table=None, label: str = "",
                 info: Optional[dict] = None, check: bool = True):
        if (func is None) == (table is None):
            raise InvalidArgumentError("give exactly one of func or table")
        self.label = label
        self.info = dict(info or {})
        self.func = func
        if table is not None:
            xi, g = (np.asarray(a, dtype=float) for a in table)
            if xi.ndim != 1 or xi.shape != g.shape or xi.size < 2:
                raise InvalidArgumentError("weight table needs matching 1D xi and g columns")
            if np.any(np.diff(xi) <= 0) or xi[0] < 0:
                raise InvalidArgumentError("weight table xi must be increasing and >= 0")
            self.table = (xi, g)
            self.support = (float(xi[0]), float(xi[-1]))
            self.breakpoints = ()
        else:
            lo, hi = float(support[0]), float(support[1])
            if not 0 <= lo < hi:
                raise InvalidArgumentError(f"bad weight support {support}")
            self.table = None
            self.support = (lo, hi)
            self.breakpoints = tuple(sorted(float(b) for b in breakpoints if lo < b < hi))
        self._build_nodes()
        self.normalization_checked = False
        if check:
            self.check()

    # construction helpers -------------------------------------------------
    @classmethod
    def delta(cls, center: float = 1.0, width: float = DELTA_WIDTH) -> "WeightFunction":
        """Narrow Gaussian standing in for a point mass at ``center``."""
        if not center > 12 * width:
            raise InvalidArgumentError("delta weight must sit well inside (0, inf)")
        norm = 1.0 / (width * math.sqrt(2 * math.pi))
        return cls(lambda xi: norm * np.exp(-0.5 * ((xi - center) / width) ** 2),
                   support=(center - 12 * width, center + 12 * width),
                   breakpoints=np.linspace(center - 4 * width, center + 4 * width, 9),
                   label=f"delta@{center:g}")

    @classmethod
    def uniform(cls, a: float, b: float) -> "WeightFunction":
        if not 0 <= a < b:
            raise InvalidArgumentError("uniform weight needs 0 <= a < b")
        height = 1.0 / (b - a)
        return cls(lambda xi: np.where((xi >= a) & (xi <= b), height, 0.0),
                   support=(a, b), label=f"uniform[{a:g},{b:g}]")

    @classmethod
    def from_table(cls, xi, g, label="table", info=None) -> "WeightFunction":
        return cls(table=(xi, g), label=label, info=info)

    # evaluation -----------------------------------------------------------
    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        if self.table is not None:
            tx, tg = self.table
            return np.interp(xi, tx, tg, left=0.0, right=0.0)
        lo, hi = self.support
        out = np.asarray(self.func(np.clip(xi, lo, hi if math.isfinite(hi) else None)),
                         dtype=float)
        return np.where((xi >= lo) & (xi <= hi), out, 0.0)

    def _effective_upper(self) -> float:
        lo, hi = self.support
        if math.isfinite(hi):
            return hi
        start = max(lo, *self.breakpoints, 1.0) if self.breakpoints else max(lo, 1.0)
        peak = max(abs(float(self(np.array([start]))[0])), 1e-300)
        xi = start
        while xi < 1e8:
            xi *= 2.0
            vals = np.abs(self(np.array([xi, 1.5 * xi])))
            if np.all(vals * xi <= 1e-18 * max(peak, 1.0)):
                return xi
        return 1e8

    def _build_nodes(self):
        if self.table is not None:
            xi, g = self.table
            w = np.empty_like(xi)
            dx = np.diff(xi)
            w[0], w[-1] = dx[0] / 2, dx[-1] / 2
            w[1:-1] = (dx[:-1] + dx[1:]) / 2
            self._nodes, self._node_mass = xi, w * g
            self._tail_mass = 0.0
            return
        lo, hi = self.support
        top = self._effective_upper()
        edges = [lo, *self.breakpoints, top]
        fine = []
        for a, b in zip(edges[:-1], edges[1:]):
            if a > 0 and b / a > 4:
                pts = np.geomspace(a, b, int(math.ceil(math.log(b / a) / math.log(2))) + 1)
            else:
                pts = np.linspace(a, b, 9)
            fine.extend(pts[:-1])
        fine.append(top)
        nodes, w = _gl_nodes(fine)
        self._nodes, self._node_mass = nodes, w * self(nodes)
        self._tail_mass = 0.0
        if top < hi:
            tail, _ = integrate.quad(lambda t: float(self(np.array([t]))[0]), top, hi,
                                     limit=200)
            self._tail_mass = tail

    @property
    def mass(self) -> float:
        return float(math.fsum(self._node_mass) + self._tail_mass)

    def check(self):
        """Verify unit mass (to 1e-9) and nonnegativity on the node grid."""
        if np.min(self(self._nodes)) < 0:
            raise InvalidArgumentError(f"weight {self.label!r} is negative on its grid")
        if self.table is not None:
            total = self.mass
        else:
            total = self._quad(lambda xi: self(xi))
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise InvalidArgumentError(
                f"weight {self.label!r} integrates to {total!r}, not 1 (tol {NORMALIZATION_TOL})")
        self.normalization_checked = True
        return total

    def _quad(self, integrand, upper=None) -> float:
        lo, hi = self.support
        hi = hi if upper is None else upper
        edges = [lo, *self.breakpoints]
        pieces = []
        scalar = lambda t: float(np.asarray(integrand(np.array([t])))[0])
        for a, b in zip(edges, edges[1:] + [hi]):
            val, err = integrate.quad(scalar, a, b, limit=400, epsabs=1e-14, epsrel=1e-12)
            if not math.isfinite(val):
                raise QuadratureError(f"weight quadrature failed on [{a}, {b}]")
            pieces.append(val)
        return math.fsum(pieces)

    def integrate_against(self, kernel) -> np.ndarray:
        """``int g(xi) kernel(xi) dxi`` on the internal node table; ``kernel``
        maps an array of xi to an array (broadcasting over leading axes)."""
        return kernel(self._nodes) @ self._node_mass

    def tabulate(self):
        """(xi, g) columns suitable for CSV output."""
        if self.table is not None:
            return self.table
        return self._nodes, self(self._nodes)


@dataclass(frozen=True)
class WeightMoments:
    powers: tuple
    moments: tuple
    log_moment: float


def weight_moments(weight: WeightFunction, d: int) -> WeightMoments:
    """Moments ``int g xi**(d+1-i)`` for ``i = 0..d`` and ``int g ln(xi)``.

    These convert the erfc divergence coefficients into those of the cutoff
    built from ``weight``: power terms scale by the moments, the log term
    picks up a constant shift ``2 * log_moment`` but keeps its coefficient.
    """
    d = int(d)
    if d < 1:
        raise InvalidArgumentError("d must be >= 1")
    powers = tuple(d + 1 - i for i in range(d + 1))
    if weight.table is not None or math.isfinite(weight.support[1]):
        moments = tuple(float(weight.integrate_against(lambda xi, p=p: xi ** p))
                        for p in powers)
        log_m = float(weight.integrate_against(
            lambda xi: np.log(np.where(xi > 0, xi, 1.0))))
        return WeightMoments(powers, moments, log_m)
    moments = tuple(_infinite_moment(weight, p) for p in powers)
    log_m = _infinite_moment(weight, None)
    return WeightMoments(powers, moments, log_m)


def _infinite_moment(weight: WeightFunction, power) -> float:
    if power is None:
        f = lambda xi: weight(xi) * np.log(np.maximum(xi, 1e-300))
        name = "log moment"
    else:
        f = lambda xi: weight(xi) * xi ** power
        name = f"moment of power {power}"
    start = max(weight.support[0], *(weight.breakpoints or (0.0,)), 1.0)
    body = weight._quad(f, upper=start)
    blocks = []
    a = start
    scalar = lambda t: float(np.asarray(f(np.array([t])))[0])
    for _ in range(48):
        val, _err = integrate.quad(scalar, a, 2 * a, limit=200, epsabs=0, epsrel=1e-12)
        blocks.append(val)
        a *= 2
    total = math.fsum([body, *blocks])
    last, prev = abs(blocks[-1]), abs(blocks[-2])
    if last > 1e-12 * max(abs(total), 1e-300) and last > 0.7 * prev:
        raise DivergentMomentError(
            f"{name} of weight {weight.label!r} diverges: integrand tail does not decay "
            f"(dyadic block at xi~{a:.3g} contributes {blocks[-1]:.3g})")
    return total


# ---------------------------------------------------------------------------
# cutoffs


class CutoffKind(str, enum.Enum):
    PURE_ERFC = "erfc"
    EXPONENTIAL = "exp"
    GAUSSIAN = "gauss"
    WEIGHTED_ERFC = "weighted"
    CUSTOM = "custom"


def _erfc_G(n, s):
    return 2 * (-1) ** n * mpmath.exp(-s)


def _exp_G(n, s):
    # d^n/ds^n exp(-sqrt(s)), reverse-Bessel-polynomial form
    r = mpmath.sqrt(s)
    if n == 0:
        return mpmath.sqrt(mpmath.pi) * mpmath.exp(-r)
    total = mpmath.mpf(0)
    for k in range(n):
        coeff = mpmath.factorial(n - 1 + k) / (mpmath.factorial(k) * mpmath.factorial(n - 1 - k))
        total += coeff / mpmath.mpf(2) ** (n + k) * r ** (-(n + k))
    return mpmath.sqrt(mpmath.pi) * (-1) ** n * mpmath.exp(-r) * total


def _gauss_G(n, s):
    # 2 sqrt(pi) d^n/ds^n [ s^(1/2) exp(-s) ] by Leibniz
    total = mpmath.mpf(0)
    for k in range(n + 1):
        falling = mpmath.rf(mpmath.mpf(0.5) - k + 1, k)  # (1/2)(1/2-1)...(1/2-k+1)
        total += mpmath.binomial(n, k) * falling * s ** (mpmath.mpf(0.5) - k) * (-1) ** (n - k)
    return 2 * mpmath.sqrt(mpmath.pi) * total * mpmath.exp(-s)


def _weighted_G_factory(weight: WeightFunction):
    keep = (weight._node_mass != 0) & (weight._nodes > 0)
    log_xi = np.log(weight._nodes[keep])
    inv_xi2 = weight._nodes[keep] ** -2.0
    log_m = np.log(2.0 * np.abs(weight._node_mass[keep]))
    signs = np.sign(weight._node_mass[keep])
    norm = weight.mass

    def provider(n, s):
        # G^(n)(s) = (-1)^n int 2 g(xi) xi^(-1-2n) exp(-s/xi^2) dxi, summed in log space
        logs = log_m - (1 + 2 * n) * log_xi - float(s) * inv_xi2
        lse, sign = special.logsumexp(logs, b=signs, return_sign=True)
        if sign == 0:
            return mpmath.mpf(0)
        return (-1) ** n * int(sign) * mpmath.exp(mpmath.mpf(float(lse))) / norm

    return provider


@dataclass(frozen=True)
class CutoffSpec:
    """A cutoff f(omega/Omega) with f(0) = 1, f nonincreasing, f(inf) = 0.

    ``derivative_provider(n, s)`` returns the n-th derivative of the
    Laplace-side function G at s (an mpmath number); catalog kinds ship a
    closed form.
    """

    kind: CutoffKind
    weight: Optional[WeightFunction] = None
    func: Optional[Callable] = None
    derivative_provider: Optional[Callable] = None
    name: str = ""
    tail_point: float = field(default=math.nan, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", CutoffKind(self.kind))
        if self.kind is CutoffKind.WEIGHTED_ERFC and self.weight is None:
            raise InvalidArgumentError("weighted cutoff needs a weight function")
        if self.kind is CutoffKind.CUSTOM and self.func is None:
            raise InvalidArgumentError("custom cutoff needs an evaluator")
        if not self.name:
            object.__setattr__(self, "name", self.kind.value)
        if self.derivative_provider is None:
            provider = {CutoffKind.PURE_ERFC: _erfc_G, CutoffKind.EXPONENTIAL: _exp_G,
                        CutoffKind.GAUSSIAN: _gauss_G}.get(self.kind)
            if self.kind is CutoffKind.WEIGHTED_ERFC:
                provider = _weighted_G_factory(self.weight)
            object.__setattr__(self, "derivative_provider", provider)
        self._validate()
        if math.isnan(self.tail_point):
            object.__setattr__(self, "tail_point", self._find_tail_point())

    # factories
    @classmethod
    def erfc(cls):
        return cls(CutoffKind.PURE_ERFC, tail_point=6.0)

    @classmethod
    def exponential(cls):
        return cls(CutoffKind.EXPONENTIAL, tail_point=39.0)

    @classmethod
    def gaussian(cls):
        return cls(CutoffKind.GAUSSIAN, tail_point=6.3)

    @classmethod
    def weighted(cls, weight: WeightFunction, name: str = ""):
        return cls(CutoffKind.WEIGHTED_ERFC, weight=weight,
                   name=name or f"weighted:{weight.label}")

    @classmethod
    def custom(cls, func, derivative_provider=None, name="custom"):
        return cls(CutoffKind.CUSTOM, func=func, derivative_provider=derivative_provider,
                   name=name)

    def __call__(self, x):
        return eval_cutoff(self, x)

    def _validate(self):
        f0 = float(np.asarray(eval_cutoff(self, np.array([0.0])))[0])
        if abs(f0 - 1.0) > 1e-12:
            raise InvalidArgumentError(f"cutoff {self.name!r} has f(0) = {f0!r} != 1")
        grid = np.concatenate([[0.0], np.geomspace(1e-3, 20.0, 99)])
        vals = np.asarray(eval_cutoff(self, grid), dtype=float)
        if np.any(np.diff(vals) > 1e-14):
            raise InvalidArgumentError(f"cutoff {self.name!r} is not monotone nonincreasing")
        if not vals[-1] < 1e-6:
            raise InvalidArgumentError(f"cutoff {self.name!r} has f(20) = {vals[-1]!r} >= 1e-6")

    def _find_tail_point(self) -> float:
        x = 1.0
        while x < 1e6:
            if float(np.asarray(eval_cutoff(self, np.array([x])))[0]) <= TAIL_LEVEL:
                return x
            x *= 1.25
        return math.inf

    def laplace_derivative(self, n: int, s):
        if self.derivative_provider is None:
            raise UnsupportedCutoffError(
                f"cutoff {self.name!r} has no analytic derivative provider; high-order "
                "finite differences are refused")
        return self.derivative_provider(n, s)


def eval_cutoff(cutoff: CutoffSpec, x):
    """Evaluate f(x) elementwise; scalars in, scalar out."""
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise InvalidArgumentError("cutoff argument must be >= 0")
    kind = cutoff.kind
    if kind is CutoffKind.PURE_ERFC:
        out = special.erfc(x)
    elif kind is CutoffKind.EXPONENTIAL:
        out = np.exp(-x)
    elif kind is CutoffKind.GAUSSIAN:
        out = np.exp(-x * x)
    elif kind is CutoffKind.WEIGHTED_ERFC:
        out = _weighted_eval(cutoff.weight, x)
    else:
        out = np.asarray(cutoff.func(x), dtype=float)
        if not np.all(np.isfinite(out)):
            raise NumericalError(f"custom cutoff {cutoff.name!r} returned non-finite values")
    return float(out) if scalar else out


def _weighted_eval(weight: WeightFunction, x: np.ndarray, chunk: int = 4096) -> np.ndarray:
    nodes, mass = weight._nodes, weight._node_mass
    keep = mass != 0
    nodes, mass = nodes[keep], mass[keep]
    norm = math.fsum(mass) + weight._tail_mass
    flat = x.reshape(-1)
    out = np.empty_like(flat)
    safe = np.where(nodes > 0, nodes, 1.0)
    for i in range(0, flat.size, chunk):
        part = flat[i:i + chunk]
        vals = special.erfc(part[:, None] / safe[None, :])
        vals[:, nodes <= 0] = np.where(part[:, None] == 0, 1.0, 0.0)
        out[i:i + chunk] = (vals @ mass + weight._tail_mass) / norm
    return out.reshape(x.shape)


CATALOG = {"erfc": CutoffSpec.erfc, "exp": CutoffSpec.exponential, "gauss": CutoffSpec.gaussian}


def cutoff_from_name(name: str) -> CutoffSpec:
    """Catalog lookup: ``erfc``, ``exp``, ``gauss`` or ``weighted:<csv file>``."""
    name = str(name).strip()
    if name in CATALOG:
        return CATALOG[name]()
    if name.startswith("weighted:"):
        from .io import read_weight_csv
        weight = read_weight_csv(name.split(":", 1)[1])
        return CutoffSpec.weighted(weight, name=name)
    raise InvalidArgumentError(f"unknown cutoff {name!r}; expected erfc, exp, gauss or weighted:<file>")


# ---------------------------------------------------------------------------
# Post-Widder inversion


def rational_transform(shift: float = 0.0, power: int = 1) -> Callable:
    """Derivative provider for G(s) = (s + shift)^-power, the transform of
    z^(power-1) exp(-shift z) / (power-1)!."""
    power = int(power)
    if power < 1:
        raise InvalidArgumentError("power must be >= 1")

    def provider(n, s):
        base = mpmath.mpf(s) + mpmath.mpf(shift)
        return (-1) ** n * mpmath.rf(power, n) * base ** (-(power + n))

    return provider


def post_invert(G_derivs: Callable, z: float, n: int) -> float:
    """n-th Post approximant ``(-1)^n/n! (n/z)^(n+1) G^(n)(n/z)`` of the
    inverse Laplace transform of G at ``z``.

    Evaluated in extended precision so that exactly representable identities
    (G = 1/s gives 1 for every n) survive the huge prefactors.
    """
    n = int(n)
    if n < 1:
        raise InvalidArgumentError(f"Post order must be >= 1, got {n}")
    if not z > 0:
        raise InvalidArgumentError(f"Post inversion point must be positive, got {z!r}")
    with mpmath.workdps(_MP_DPS):
        s = mpmath.mpf(n) / mpmath.mpf(z)
        try:
            deriv = G_derivs(n, s)
        except UnsupportedCutoffError:
            raise
        except Exception as exc:  # provider bugs surface with order and point
            raise NumericalError(
                f"derivative provider failed at order n={n}, s={mpmath.nstr(s, 17)}: {exc}"
            ) from exc
        value = (-1) ** n / mpmath.factorial(n) * s ** (n + 1) * mpmath.mpf(deriv)
        return float(value)


DEFAULT_XI_GRID = np.geomspace(0.02, 60.0, 900)


SIGNED_MASS_TOL = 1e-3


def recover_weight(cutoff: CutoffSpec, z_grid=None, n: int = 40, clip="auto",
                   roundtrip_x=None) -> WeightFunction:
    """Recover g(xi) on ``z_grid`` (xi values) from the cutoff by Post inversion.

    The approximant is computed in the Laplace variable chi = xi**-2 and
    mapped back with g(xi) = h(xi**-2) / xi**2.  Negative dips of the finite-n
    approximant are clipped before renormalizing.  With ``clip="auto"`` the
    clipping is skipped when the negative part carries more than 0.1% of the
    absolute mass: the cutoff then has no nonnegative weight at all (the
    Gaussian e^{-x^2} is such a case) and the signed approximant is returned
    with ``info["signed"] = True``.  Raw values and the round-trip sup error
    of f on [0.1, 10] are kept in ``weight.info``.
    """
    n = int(n)
    if n < 10:
        raise InvalidArgumentError(f"recover_weight needs n >= 10, got {n}")
    if cutoff.derivative_provider is None:
        raise UnsupportedCutoffError(
            f"cutoff {cutoff.name!r} has no analytic derivative provider; Post inversion "
            "needs exact high-order derivatives")
    xi = np.asarray(DEFAULT_XI_GRID if z_grid is None else z_grid, dtype=float)
    if xi.ndim != 1 or xi.size < 2 or np.any(xi <= 0) or np.any(np.diff(xi) <= 0):
        raise InvalidArgumentError("z_grid must be increasing positive values")
    raw = np.array([post_invert(cutoff.laplace_derivative, 1.0 / (x * x), n) / (x * x)
                    for x in xi])
    raw_pos = WeightFunction(table=(xi, np.clip(raw, 0.0, None)), check=False).mass
    raw_neg = WeightFunction(table=(xi, np.clip(-raw, 0.0, None)), check=False).mass
    if clip == "auto":
        clip = raw_neg <= SIGNED_MASS_TOL * (raw_pos + raw_neg)
    g = np.clip(raw, 0.0, None) if clip else raw.copy()
    trap = WeightFunction(table=(xi, g), check=False)
    mass = trap.mass
    if not mass > 0:
        raise NumericalError(f"Post approximant of {cutoff.name!r} has no positive mass")
    g = g / mass
    info = {"n": n, "raw": raw, "raw_mass": WeightFunction(table=(xi, raw), check=False).mass,
            "clipped": bool(clip), "signed": bool(np.any(g < 0)), "source": cutoff.name}
    weight = WeightFunction(table=(xi, g), label=f"post[{cutoff.name},n={n}]", info=info,
                            check=not info["signed"])
    xs = np.linspace(0.1, 10.0, 200) if roundtrip_x is None else np.asarray(roundtrip_x)
    recon = _weighted_eval(weight, xs)
    weight.info["roundtrip_error"] = float(np.max(np.abs(recon - eval_cutoff(cutoff, xs))))
    return weight
