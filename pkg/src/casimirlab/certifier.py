"""Finiteness certificates for Casimir energy differences.

Each Seeley-DeWitt coefficient a_{i/2} is a species-dependent linear
combination of a few geometric integrals whose numerical weights are not
needed here: a difference of two configurations is certified finite when,
for every i = 0..d+1, each of those integrals separately takes the same
value in both.  Bodies are described by their precomputed integrals, so
positions never enter.

Slot contents (flat space, smooth boundaries):

=====  ==============================================================
i/2    integrals
=====  ==============================================================
0      volume
1/2    boundary area
1      int K dA, int V dV
3/2    int K^2 dA, int K_ij K^ij dA, int_boundary V dA
2      int K^3 dA, int tr(K^2) K dA, int tr(K^3) dA, int V^2 dV,
       int V K dA, int K_ii:jj dA, int K_ij:ij dA, int V_;n dA
=====  ==============================================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, InvalidArgumentError, InvalidComparisonError

EXACT_TOLERANCE = 0.0
NUMERIC_TOLERANCE = 1e-12
MAX_SLOT_INDEX = 4  # i = 4, a_2: the table above stops here

SLOT_ENTRIES = {
    0: ("volume",),
    1: ("area",),
    2: ("int K dA", "int V dV"),
    3: ("int K^2 dA", "int K_ij K^ij dA", "int_bdy V dA"),
    4: ("int K^3 dA", "int tr(K^2) K dA", "int tr(K^3) dA", "int V^2 dV",
        "int V K dA", "int K_ii:jj dA", "int K_ij:ij dA", "int V_;n dA"),
}
# entries that change sign with the normal and cancel between the two sides
# of a thin shell
ODD_IN_K = frozenset({"int K dA", "int K^3 dA", "int tr(K^2) K dA", "int tr(K^3) dA",
                      "int V K dA", "int K_ii:jj dA", "int K_ij:ij dA", "int V_;n dA"})


def slot_name(i: int) -> str:
    return str(Fraction(i, 2))


def _triple(values, n, what):
    vals = tuple(float(v) for v in values)
    if len(vals) != n:
        raise InvalidArgumentError(f"{what} needs {n} values, got {len(vals)}")
    if not all(math.isfinite(v) for v in vals):
        raise InvalidArgumentError(f"{what} must be finite")
    return vals


@dataclass(frozen=True)
class BodyGeometry:
    """Geometric integrals of one body (one-sided values for thin shells)."""

    volume: float = 0.0
    surface_area: float = 0.0
    k_integral: float = 0.0
    k2_integrals: tuple = (0.0, 0.0)
    k3_integrals: tuple = (0.0, 0.0, 0.0)
    potential_integrals: tuple = (0.0, 0.0)
    is_thin_shell: bool = False
    label: str = ""
    # (int_bdy V dA, int V K dA)
    boundary_potential_integrals: tuple = (0.0, 0.0)
    # (int K_ii:jj dA, int K_ij:ij dA, int V_;n dA)
    derivative_integrals: tuple = (0.0, 0.0, 0.0)
    spherical: bool = False
    exact: bool = False
    position: tuple = field(default=(), compare=False)

    def __post_init__(self):
        for name in ("volume", "surface_area", "k_integral"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise InvalidArgumentError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.volume < 0:
            raise InvalidArgumentError(f"body {self.label!r}: volume must be >= 0")
        if self.surface_area < 0:
            raise InvalidArgumentError(f"body {self.label!r}: surface area must be >= 0")
        if self.volume == 0 and not self.is_thin_shell and self.surface_area == 0:
            raise InvalidArgumentError(f"body {self.label!r} has neither volume nor boundary")
        object.__setattr__(self, "k2_integrals", _triple(self.k2_integrals, 2, "k2_integrals"))
        object.__setattr__(self, "k3_integrals", _triple(self.k3_integrals, 3, "k3_integrals"))
        object.__setattr__(self, "potential_integrals",
                           _triple(self.potential_integrals, 2, "potential_integrals"))
        object.__setattr__(self, "boundary_potential_integrals",
                           _triple(self.boundary_potential_integrals, 2,
                                   "boundary_potential_integrals"))
        object.__setattr__(self, "derivative_integrals",
                           _triple(self.derivative_integrals, 3, "derivative_integrals"))
        object.__setattr__(self, "position", tuple(float(x) for x in self.position))

    def raw_entries(self) -> dict:
        """Stored integrals keyed by slot entry name, before shell rules."""
        return {
            "volume": self.volume,
            "area": self.surface_area,
            "int K dA": self.k_integral,
            "int V dV": self.potential_integrals[0],
            "int K^2 dA": self.k2_integrals[0],
            "int K_ij K^ij dA": self.k2_integrals[1],
            "int_bdy V dA": self.boundary_potential_integrals[0],
            "int K^3 dA": self.k3_integrals[0],
            "int tr(K^2) K dA": self.k3_integrals[1],
            "int tr(K^3) dA": self.k3_integrals[2],
            "int V^2 dV": self.potential_integrals[1],
            "int V K dA": self.boundary_potential_integrals[1],
            "int K_ii:jj dA": self.derivative_integrals[0],
            "int K_ij:ij dA": self.derivative_integrals[1],
            "int V_;n dA": self.derivative_integrals[2],
        }

    def entries(self) -> dict:
        """Slot contributions with the thin-shell cancellation applied."""
        out = self.raw_entries()
        if self.is_thin_shell:
            for name in ODD_IN_K:
                out[name] = 0.0
        return out

    # closed-form constructors ------------------------------------------------

    @classmethod
    def sphere(cls, radius: float, thin_shell: bool = True, label: str = "",
               position=(0.0, 0.0, 0.0)) -> "BodyGeometry":
        """Ball or spherical shell of radius r in three dimensions (K = 2/r)."""
        r = float(radius)
        if not r > 0:
            raise InvalidArgumentError(f"sphere radius must be positive, got {radius!r}")
        area = 4 * math.pi * r * r
        return cls(
            volume=0.0 if thin_shell else 4 * math.pi * r ** 3 / 3,
            surface_area=area,
            k_integral=8 * math.pi * r,
            k2_integrals=(16 * math.pi, 8 * math.pi),
            k3_integrals=(32 * math.pi / r, 16 * math.pi / r, 8 * math.pi / r),
            is_thin_shell=thin_shell,
            label=label or f"{'shell' if thin_shell else 'ball'} r={r:g}",
            spherical=True, exact=True, position=position)

    @classmethod
    def box(cls, lengths: Sequence[float], thin_shell: bool = False, label: str = "",
            position=None) -> "BodyGeometry":
        """Rectangular box in len(lengths) dimensions; flat faces, edges ignored."""
        lengths = [float(x) for x in lengths]
        if not lengths or any(not x > 0 for x in lengths):
            raise InvalidArgumentError("box lengths must be positive")
        area = 2.0 * sum(math.prod(lengths[:j] + lengths[j + 1:]) for j in range(len(lengths)))
        return cls(volume=0.0 if thin_shell else math.prod(lengths), surface_area=area,
                   is_thin_shell=thin_shell, label=label or "box " + "x".join(f"{x:g}" for x in lengths),
                   exact=True, position=position if position is not None else (0.0,) * len(lengths))

    @classmethod
    def plate(cls, area: float, label: str = "", position=(0.0,)) -> "BodyGeometry":
        """Flat thin plate of the given one-sided area (or a point wall in 1D)."""
        if not area > 0:
            raise InvalidArgumentError("plate area must be positive")
        return cls(volume=0.0, surface_area=float(area), is_thin_shell=True,
                   label=label or f"plate A={area:g}", exact=True, position=position)

    @classmethod
    def ir_box(cls, lengths: Sequence[float]) -> "BodyGeometry":
        return cls.box(lengths, label="IR box " + "x".join(f"{float(x):g}" for x in lengths))

    def invariant_key(self) -> tuple:
        return tuple(self.raw_entries().items()) + (self.is_thin_shell,)


@dataclass(frozen=True)
class Configuration:
    bodies: tuple
    ir_box: BodyGeometry
    te_tm_paired: bool = False
    dimension_d: int = 3

    def __post_init__(self):
        object.__setattr__(self, "bodies", tuple(self.bodies))
        if not isinstance(self.ir_box, BodyGeometry):
            raise InvalidArgumentError("configuration needs an IR box")
        d = int(self.dimension_d)
        if not 1 <= d <= MAX_SLOT_INDEX - 1:
            raise InvalidArgumentError(
                f"dimension_d={d}: slot tables cover a_0..a_2, i.e. d = 1..{MAX_SLOT_INDEX - 1}")
        object.__setattr__(self, "dimension_d", d)
        if self.te_tm_paired:
            bad = [b.label for b in self.bodies if b.is_thin_shell and not b.spherical]
            if bad:
                raise InvalidArgumentError(
                    "TE/TM pairing cancels area terms only for spherical shells; "
                    f"non-spherical shells: {bad}")

    @property
    def required_slots(self) -> tuple:
        return tuple(range(self.dimension_d + 2))


SlotMap = dict  # slot index i -> {entry name: value}


def slot_invariants(config: Configuration) -> SlotMap:
    """Per-slot totals over the IR box and all bodies."""
    parts = [config.ir_box.entries()] + [b.entries() for b in config.bodies]
    out = {}
    for i in config.required_slots:
        out[i] = {name: sum(p[name] for p in parts) for name in SLOT_ENTRIES[i]}
    if config.te_tm_paired and 1 in out:
        out[1] = {name: 0.0 for name in out[1]}
    return out


@dataclass(frozen=True)
class SlotDelta:
    names: tuple
    differences: tuple
    all_zero: bool


@dataclass(frozen=True)
class FinitenessCertificate:
    delta_slots: dict
    certified: bool
    required_slots: tuple
    narrative: tuple
    tolerance: float = 0.0
    warnings: tuple = ()

    def __post_init__(self):
        expect = all(self.delta_slots[i].all_zero for i in self.required_slots)
        if expect != self.certified:
            raise InvalidArgumentError("certified flag disagrees with slot verdicts")

    @property
    def failing_slots(self) -> list:
        return [slot_name(i) for i in self.required_slots if not self.delta_slots[i].all_zero]

    def records(self):
        out = []
        for i in self.required_slots:
            s = self.delta_slots[i]
            for name, diff in zip(s.names, s.differences):
                out.append({"slot": slot_name(i), "integral": name, "difference": diff,
                            "zero": abs(diff) <= self.tolerance})
        return out

    def report(self) -> str:
        lines = [f"certified: {'true' if self.certified else 'false'}",
                 f"tolerance: {self.tolerance!r}"]
        lines += list(self.narrative)
        lines += [f"warning: {w}" for w in self.warnings]
        return "\n".join(lines) + "\n"


def _certificate(deltas: dict, required, tol, narrative, warnings=()) -> FinitenessCertificate:
    slots = {}
    for i in required:
        names = tuple(deltas[i])
        diffs = tuple(float(deltas[i][n]) for n in names)
        slots[i] = SlotDelta(names, diffs, all(abs(x) <= tol for x in diffs))
    certified = all(slots[i].all_zero for i in required)
    return FinitenessCertificate(slots, certified, tuple(required), tuple(narrative), tol,
                                 tuple(warnings))


def _rules(config: Configuration, i: int) -> list:
    notes = []
    if i == 1 and config.te_tm_paired:
        notes.append("TE/TM pairing cancels the area term (spherical symmetry assumed)")
    if any(b.is_thin_shell for b in config.bodies):
        if i == 0:
            notes.append("thin shells take up no volume")
        names = [n for n in SLOT_ENTRIES.get(i, ()) if n in ODD_IN_K]
        if names:
            notes.append(f"thin shells drop odd-in-K terms ({', '.join(names)})")
    return notes


def delta_slots(config_a: Configuration, config_b: Configuration,
                tolerance: float | None = None) -> FinitenessCertificate:
    """Slot-wise differences a - b, packaged with per-slot verdicts."""
    if config_a.dimension_d != config_b.dimension_d:
        raise InvalidComparisonError(
            f"dimensions differ: {config_a.dimension_d} vs {config_b.dimension_d}")
    if config_a.ir_box.invariant_key() != config_b.ir_box.invariant_key():
        raise InvalidComparisonError(
            "the IR box differs between the two configurations; it must be held fixed")
    if config_a.te_tm_paired != config_b.te_tm_paired:
        raise InvalidComparisonError("te_tm_paired differs between the configurations")
    if tolerance is None:
        bodies = (config_a.ir_box, config_b.ir_box) + config_a.bodies + config_b.bodies
        tolerance = EXACT_TOLERANCE if all(b.exact for b in bodies) else NUMERIC_TOLERANCE
    sa, sb = slot_invariants(config_a), slot_invariants(config_b)
    deltas = {i: {n: sa[i][n] - sb[i][n] for n in sa[i]} for i in sa}
    narrative = []
    for i in config_a.required_slots:
        diffs = deltas[i]
        nonzero = {n: v for n, v in diffs.items() if abs(v) > tolerance}
        rules = sorted(set(_rules(config_a, i)) | set(_rules(config_b, i)))
        status = "zero" if not nonzero else "NONZERO " + ", ".join(
            f"{n}={v:.17g}" for n, v in nonzero.items())
        narrative.append(f"slot {slot_name(i)}: {status}"
                         + (f" [{'; '.join(rules)}]" if rules else ""))
    return _certificate(deltas, config_a.required_slots, tolerance, narrative)


def certify_finiteness(config_a: Configuration, config_b: Configuration,
                       tolerance: float | None = None) -> FinitenessCertificate:
    """Certified iff every integral in slots i = 0..d+1 agrees between a and b."""
    return delta_slots(config_a, config_b, tolerance)


def rigid_motion(config: Configuration, body_index: int, displacement=None) -> Configuration:
    """Move one body without deforming it; all slot invariants are unchanged."""
    if not 0 <= int(body_index) < len(config.bodies):
        raise InvalidArgumentError(
            f"body index {body_index} out of range for {len(config.bodies)} bodies")
    body = config.bodies[body_index]
    pos = np.asarray(body.position if body.position else (0.0,), dtype=float)
    shift = np.ones_like(pos) if displacement is None else np.asarray(displacement, float)
    if shift.shape != pos.shape:
        raise InvalidArgumentError("displacement does not match the body position dimension")
    moved = replace(body, position=tuple(pos + shift))
    bodies = list(config.bodies)
    bodies[body_index] = moved
    return replace(config, bodies=tuple(bodies))


def _as_slot_map(obj) -> SlotMap:
    if isinstance(obj, Configuration):
        return slot_invariants(obj)
    if isinstance(obj, Mapping):
        return {int(k): dict(v) for k, v in obj.items()}
    raise InvalidArgumentError(f"expected a Configuration or slot map, got {type(obj).__name__}")


def combination_check(target, references: Sequence, weights: Sequence[float],
                      tolerance: float = NUMERIC_TOLERANCE) -> FinitenessCertificate:
    """Compare target slots with sum_j w_j (reference j slots); weights sum to 1."""
    weights = [float(w) for w in weights]
    if len(weights) != len(references) or not references:
        raise InvalidArgumentError("need one weight per reference")
    if abs(math.fsum(weights) - 1.0) > 1e-12:
        raise InvalidArgumentError(f"weights must sum to 1, got {math.fsum(weights)!r}")
    tmap = _as_slot_map(target)
    rmaps = [_as_slot_map(r) for r in references]
    for r in rmaps:
        if set(r) != set(tmap):
            raise InvalidArgumentError("reference slot maps do not share the target's slots")
    deltas = {}
    for i, entries in tmap.items():
        deltas[i] = {}
        for name, value in entries.items():
            combo = math.fsum(w * r[i].get(name, 0.0) for w, r in zip(weights, rmaps))
            deltas[i][name] = value - combo
    required = tuple(sorted(tmap))
    narrative = []
    for i in required:
        bad = {n: v for n, v in deltas[i].items() if abs(v) > tolerance}
        narrative.append(f"slot {slot_name(i)}: " + ("matched" if not bad else "MISMATCH " + ", ".join(
            f"{n}={v:.17g}" for n, v in bad.items())))
    warnings = []
    if any(r != tmap for r in rmaps):
        warnings.append("references differ from the target: the weighted combination is an "
                        "analytically continued difference and need not be a physical "
                        "energy difference")
    return _certificate(deltas, required, tolerance, narrative, warnings)


# ---------------------------------------------------------------------------
# configuration records (parsed TOML tables)

_BODY_FIELDS = {"volume", "surface_area", "k_integral", "k2_integrals", "k3_integrals",
                "potential_integrals", "is_thin_shell", "label",
                "boundary_potential_integrals", "derivative_integrals", "spherical", "position"}


def body_from_dict(rec: Mapping) -> BodyGeometry:
    rec = dict(rec)
    kind = str(rec.pop("kind", "custom")).lower()
    try:
        if kind == "sphere":
            return BodyGeometry.sphere(rec.pop("radius"), thin_shell=bool(rec.pop("thin_shell", True)),
                                       label=rec.pop("label", ""),
                                       position=tuple(rec.pop("position", (0.0, 0.0, 0.0))))
        if kind == "box":
            return BodyGeometry.box(rec.pop("lengths"), thin_shell=bool(rec.pop("thin_shell", False)),
                                    label=rec.pop("label", ""), position=rec.pop("position", None))
        if kind == "plate":
            return BodyGeometry.plate(rec.pop("area"), label=rec.pop("label", ""),
                                      position=tuple(rec.pop("position", (0.0,))))
        if kind == "custom":
            unknown = set(rec) - _BODY_FIELDS
            if unknown:
                raise ConfigError(f"unknown body fields {sorted(unknown)}")
            return BodyGeometry(**rec)
    except KeyError as exc:
        raise ConfigError(f"body of kind {kind!r} is missing field {exc.args[0]!r}") from None
    except TypeError as exc:
        raise ConfigError(f"bad body record: {exc}") from None
    raise ConfigError(f"unknown body kind {kind!r} (sphere, box, plate, custom)")


def configuration_from_dict(rec: Mapping) -> Configuration:
    """Build a configuration from a parsed table::

        dimension_d = 3
        te_tm_paired = false
        [ir_box]
        lengths = [20, 20, 20]
        [[bodies]]
        kind = "sphere"
        radius = 1.0
    """
    rec = dict(rec)
    if "ir_box" not in rec:
        raise ConfigError("configuration needs an [ir_box] table")
    box = dict(rec["ir_box"])
    if "lengths" in box and "kind" not in box:
        ir = BodyGeometry.ir_box(box["lengths"])
    else:
        box.setdefault("kind", "custom")
        ir = body_from_dict(box)
    bodies = tuple(body_from_dict(b) for b in rec.get("bodies", ()))
    try:
        return Configuration(bodies, ir, bool(rec.get("te_tm_paired", False)),
                             int(rec.get("dimension_d", 3)))
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc)) from None
