"""Command-line front end.

    casimirlab <experiment> --config exp.toml [--out DIR] [--format text|csv|jsonl] [--jobs N]

Each experiment reads one TOML file.  Everything is parsed and validated
before any computation, and files are written only after the whole
experiment succeeded, so a failing run leaves no partial artifacts.  The
output directory defaults to ``$CASIMIRLAB_OUT`` or ``./casimirlab-out``.

Exit status: 0 success, 1 bad arguments or config, 2 numerical failure,
3 resource limit.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import certifier, cutoffs, heat_kernel, io, reference_models, regularization, spectra
from .errors import CasimirLabError, ConfigError

EXPERIMENTS = ("identity-check", "sweep", "heat-fit", "div-fit", "certify", "refmodel",
               "cutoff-invert", "piston")
FORMATS = ("text", "csv", "jsonl")
OUT_ENV = "CASIMIRLAB_OUT"
DEFAULT_OUT = "casimirlab-out"

DEFAULT_TOLERANCES = {
    "identity": 1e-9,
    "negligible": regularization.NEGLIGIBLE,
    "resum_rtol": 1e-3,
    "certify": None,
    "combination": certifier.NUMERIC_TOLERANCE,
    "bounded_ratio": 2.0,
}
_MISSING = object()


@dataclass
class ExperimentConfig:
    kind: str
    params: dict
    output: Path
    seed: int = 0
    fmt: str = "text"
    jobs: int = 1
    base_dir: Path = field(default_factory=Path)


@dataclass
class Artifact:
    name: str
    text: str


class Params:
    """Typed access to a config table; unread keys are reported as errors."""

    def __init__(self, rec, where: str, base_dir: Path = Path(".")):
        if not isinstance(rec, dict):
            raise ConfigError(f"{where}: expected a table, got {type(rec).__name__}")
        self.rec, self.where, self.base_dir = rec, where, base_dir
        self.used: set = set()

    def has(self, key) -> bool:
        return key in self.rec

    def raw(self, key, default=_MISSING):
        self.used.add(key)
        if key not in self.rec:
            if default is _MISSING:
                raise ConfigError(f"{self.where}: missing key {key!r}")
            return default
        return self.rec[key]

    def get(self, key, kind=float, default=_MISSING, check=None, why=""):
        v = self.raw(key, default)
        if v is default and default is not _MISSING:
            return v
        try:
            if kind is bool:
                if not isinstance(v, bool):
                    raise TypeError
                out = v
            elif kind is int:
                if isinstance(v, bool) or float(v) != int(v):
                    raise TypeError
                out = int(v)
            elif kind is float:
                if isinstance(v, bool):
                    raise TypeError
                out = float(v)
            elif kind is str:
                if not isinstance(v, str):
                    raise TypeError
                out = v
            elif kind == "floats":
                out = [float(x) for x in v]
            else:
                out = kind(v)
        except (TypeError, ValueError):
            raise ConfigError(f"{self.where}: {key!r} has invalid value {v!r}") from None
        if check is not None and not check(out):
            raise ConfigError(f"{self.where}: {key!r} = {v!r} is out of range"
                              + (f" ({why})" if why else ""))
        return out

    def sub(self, key, default=_MISSING) -> "Params":
        v = self.raw(key, default)
        if v is None:
            return None
        return Params(v, f"{self.where}.{key}", self.base_dir)

    def path(self, key) -> Path:
        p = Path(self.get(key, str))
        return p if p.is_absolute() else self.base_dir / p

    def done(self):
        extra = sorted(set(self.rec) - self.used)
        if extra:
            raise ConfigError(f"{self.where}: unknown keys {extra}")


def _positive(x):
    return x > 0


# ---------------------------------------------------------------------------
# config fragments


def parse_spectrum(p: Params):
    """Return a zero-argument builder for the spectrum described by ``p``."""
    kind = p.get("kind", str)
    if kind == "interval":
        L = p.get("L", float, check=_positive)
        bc = spectra.BoundaryCondition.parse(p.get("bc", str, "dirichlet"))
        count = p.get("count", int, check=_positive)
        m2 = p.get("mass_squared", float, 0.0)
        build = lambda: _massive(spectra.interval_spectrum(L, bc, count), m2)
    elif kind == "box":
        lengths = p.get("lengths", "floats", check=lambda v: v and all(x > 0 for x in v))
        bc = spectra.BoundaryCondition.parse(p.get("bc", str, "dirichlet"))
        omega_max = p.get("omega_max", float, check=_positive)
        cap = p.get("max_modes", int, spectra.DEFAULT_MODE_CAP, check=_positive)
        m2 = p.get("mass_squared", float, 0.0)
        build = lambda: _massive(spectra.box_spectrum(lengths, bc, omega_max, max_modes=cap), m2)
    elif kind == "schrodinger":
        L = p.get("L", float, check=_positive)
        bc = spectra.BoundaryCondition.parse(p.get("bc", str, "periodic"))
        n = p.get("grid_points", int, 512, check=lambda v: v >= 16, why="need >= 16")
        count = p.get("count", int, n // 4, check=_positive)
        V = parse_potential(p.sub("potential"), L)
        build = lambda: spectra.schrodinger_spectrum_1d(spectra.OperatorSpec1D(L, V, bc, n), count)
    elif kind == "reference":
        L = p.get("L", float, check=_positive)
        n = p.get("grid_points", int, None)
        count = p.get("count", int, check=_positive)
        qp = p.get("quadrature_points", int, n or 256)
        V = parse_potential(p.sub("potential"), L)
        build = lambda: reference_models.reference_operator_1d(
            reference_models.average_potential(V, L, qp), L, count, grid_points=n)
    elif kind == "explicit":
        omega = p.get("omega", "floats")
        mult = p.get("multiplicity", "floats", [1.0] * len(omega))
        d = p.get("d", int, 1, check=_positive)
        complete = p.get("complete", bool, True)
        build = lambda: spectra.ModeSpectrum(np.array(omega), np.array(mult), d, complete=complete)
    elif kind == "file":
        path = p.path("path")
        build = lambda: io.read_spectrum_csv(path)
    elif kind == "union":
        parts_raw = p.raw("parts")
        if not isinstance(parts_raw, list) or not parts_raw:
            raise ConfigError(f"{p.where}: 'parts' must be a non-empty array of tables")
        parts = [parse_spectrum(Params(r, f"{p.where}.parts[{i}]", p.base_dir))
                 for i, r in enumerate(parts_raw)]
        build = lambda: spectra.union_spectrum(*[b() for b in parts])
    else:
        raise ConfigError(f"{p.where}: unknown spectrum kind {kind!r} "
                          "(interval, box, schrodinger, reference, explicit, file, union)")
    label = p.get("label", str, "")
    p.done()
    return (lambda: build().with_label(label)) if label else build


def _massive(s, m2):
    return spectra.massive_spectrum(s, m2) if m2 != 0.0 else s


def parse_potential(p: Params, L: float):
    rec = dict(p.rec)
    p.used.update(rec)
    if rec.get("kind") == "csv":
        xs, vs = io.read_potential_csv(p.path("path"))
        rec = {"kind": "table", "x": xs, "V": vs}
    return reference_models.potential_from_config(rec, L)


def parse_cutoff(p: Params, key="cutoff", default="erfc"):
    name = p.get(key, str, default)
    if name.startswith("weighted:"):
        path = name.split(":", 1)[1]
        if not Path(path).is_absolute():
            name = "weighted:" + str(p.base_dir / path)
    if name not in cutoffs.CATALOG and not name.startswith("weighted:"):
        raise ConfigError(f"{p.where}: unknown cutoff {name!r}")
    return name


def parse_grid(p: Params, key: str):
    """Explicit list, or a table {min, max, points}; None if absent."""
    if not p.has(key):
        return None
    v = p.raw(key)
    if isinstance(v, list):
        try:
            grid = np.array([float(x) for x in v])
        except (TypeError, ValueError):
            raise ConfigError(f"{p.where}: {key!r} must be numbers") from None
    else:
        q = Params(v, f"{p.where}.{key}")
        lo = q.get("min", float, check=_positive)
        hi = q.get("max", float, check=_positive)
        n = q.get("points", int, 16, check=lambda x: x >= 2)
        q.done()
        grid = np.geomspace(lo, hi, n)
    if grid.size < 2 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ConfigError(f"{p.where}: {key!r} must be strictly increasing and positive")
    return grid


def parse_tolerances(p: Params) -> dict:
    tol = dict(DEFAULT_TOLERANCES)
    if p.has("tolerances"):
        q = p.sub("tolerances")
        for key in list(q.rec):
            if key not in tol:
                raise ConfigError(f"{q.where}: unknown tolerance {key!r} "
                                  f"(known: {', '.join(sorted(tol))})")
            tol[key] = q.get(key, float, check=lambda x: x >= 0)
    return tol


def _map(func, items, jobs):
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(func, items))
    return [func(x) for x in items]


# ---------------------------------------------------------------------------
# experiments: each parses its table, then returns a runner producing artifacts


def plan_identity_check(p: Params, cfg: ExperimentConfig, tol):
    w_lo, w_hi = p.get("omega_range", "floats", [1e-2, 1e2])
    c_lo, c_hi = p.get("cutoff_range", "floats", [1e-2, 1e2])
    n = p.get("points", int, 20, check=lambda v: v >= 1)
    if not (0 < w_lo <= w_hi and 0 < c_lo <= c_hi):
        raise ConfigError("identity-check: ranges must be positive and ordered")
    p.done()

    def run():
        ws, cs = np.geomspace(w_lo, w_hi, n), np.geomspace(c_lo, c_hi, n)
        pairs = [(w, c) for w in ws for c in cs]
        res = _map(lambda wc: (regularization.verify_lemma1(*wc),
                               regularization.verify_erfc_identity(*wc)), pairs, cfg.jobs)
        records = [{"omega": w, "omega_cutoff": c, "lemma1_residual": r1, "erfc_residual": r2}
                   for (w, c), (r1, r2) in zip(pairs, res)]
        worst1 = max(r[0] for r in res)
        worst2 = max(r[1] for r in res)
        summary = [{"check": "lemma1", "max_residual": worst1, "tolerance": tol["identity"],
                    "passed": worst1 < tol["identity"]},
                   {"check": "erfc_identity", "max_residual": worst2,
                    "tolerance": tol["identity"], "passed": worst2 < tol["identity"]}]
        return [("identity-check", records), ("summary", summary)], []

    return run


def _extrapolation_records(res: regularization.ExtrapolationResult):
    out = [{"term": lab, "coefficient": c, "standard_error": s}
           for lab, c, s in zip(res.fit.labels, res.fit.coefficients, res.fit.standard_errors)]
    out.append({"term": "finite_part", "coefficient": res.finite_part,
                "standard_error": res.error_estimate, "converged": res.converged,
                "energy": res.energy, "condition_number": res.fit.condition_number,
                "residual_norm": res.fit.residual_norm})
    return out


def _resum_records(a, b, methods, tol):
    out = []
    for m in methods:
        r = regularization.resum_difference(a, b, m, rtol=tol["resum_rtol"])
        out.append({"method": r.method, "value": r.value, "error_estimate": r.error_estimate,
                    "energy": 0.5 * r.value})
    return out


def _parse_methods(p: Params, default):
    methods = p.raw("resum", default)
    if not isinstance(methods, list) or not all(isinstance(m, str) for m in methods):
        raise ConfigError(f"{p.where}: 'resum' must be a list of method names")
    for m in methods:
        regularization.parse_method(m)
    return methods


def plan_sweep(p: Params, cfg: ExperimentConfig, tol):
    if p.has("spectrum_a"):
        build_a = parse_spectrum(p.sub("spectrum_a"))
        build_b = parse_spectrum(p.sub("spectrum_b"))
    else:
        build_a, build_b = parse_spectrum(p.sub("spectrum")), None
    cut_name = parse_cutoff(p)
    grid = parse_grid(p, "omega")
    decades = p.get("decades", float, 1.5, check=_positive)
    points = p.get("points", int, 16, check=lambda v: v >= 2)
    extrapolate = p.get("extrapolate", bool, True)
    methods = _parse_methods(p, [])
    if methods and build_b is None:
        raise ConfigError("sweep: resummation needs spectrum_a and spectrum_b")
    p.done()

    def run():
        cut = cutoffs.cutoff_from_name(cut_name)
        a = build_a()
        b = build_b() if build_b else None
        pool = [a, b] if b is not None else [a]
        g = grid if grid is not None else regularization.auto_omega_grid(pool, cut, decades, points)
        if b is None:
            sw = regularization.combination_sweep([(1.0, a)], cut, g, jobs=cfg.jobs)
        else:
            sw = regularization.difference_sweep(a, b, cut, g, jobs=cfg.jobs)
        tables = []
        if extrapolate:
            res = regularization.extrapolate_finite_part(sw, threshold=tol["negligible"])
            tables.append(("sweep", _extrapolation_records(res)))
        if methods:
            tables.append(("resum", _resum_records(a, b, methods, tol)))
        return tables, [Artifact("sweep.csv", io.sweep_csv(sw))]

    return run


def plan_heat_fit(p: Params, cfg: ExperimentConfig, tol):
    build = parse_spectrum(p.sub("spectrum"))
    d = p.get("d", int, None)
    N = p.get("N", int, 1, check=lambda v: v >= 0)
    t_grid = parse_grid(p, "t")
    nuisance = p.get("nuisance_terms", int, heat_kernel.DEFAULT_NUISANCE_TERMS,
                     check=lambda v: v >= 0)
    p.done()

    def run():
        s = build()
        dim = s.dimension_d if d is None else d
        t = heat_kernel.default_t_grid(s) if t_grid is None else t_grid
        fit = heat_kernel.sdw_fit(s, dim, N, t, nuisance_terms=nuisance)
        K = heat_kernel.heat_trace(s, t)
        recs = fit.records()
        recs.append({"index": "fit", "residual_norm": fit.fit_residual,
                     "condition_number": fit.condition_number,
                     "t_min": fit.t_window[0], "t_max": fit.t_window[1]})
        return [("heat-fit", recs)], [Artifact("trace.csv", io.trace_csv(t, K))]

    return run


def plan_div_fit(p: Params, cfg: ExperimentConfig, tol):
    if p.has("spectrum_a"):
        build_a = parse_spectrum(p.sub("spectrum_a"))
        build_b = parse_spectrum(p.sub("spectrum_b"))
    else:
        build_a, build_b = parse_spectrum(p.sub("spectrum")), None
    names = p.raw("cutoffs", ["erfc"])
    if not isinstance(names, list) or not names:
        raise ConfigError("div-fit: 'cutoffs' must be a non-empty list")
    names = [parse_cutoff(Params({"cutoff": n}, p.where, p.base_dir)) for n in names]
    grid = parse_grid(p, "omega")
    if grid is None:
        raise ConfigError("div-fit: an 'omega' grid is required")
    d = p.get("d", int, None)
    p.done()

    def run():
        a = build_a()
        b = build_b() if build_b else None
        recs, files = [], []
        logs = []
        for name in names:
            cut = cutoffs.cutoff_from_name(name)
            if b is None:
                sw = regularization.combination_sweep([(1.0, a)], cut, grid, jobs=cfg.jobs)
            else:
                sw = regularization.difference_sweep(a, b, cut, grid, jobs=cfg.jobs)
            fit = heat_kernel.divergence_fit(sw, d)
            logs.append(fit.log_coefficient)
            for r in fit.records():
                recs.append({"cutoff": name, **r})
            files.append(Artifact(f"sweep_{_safe(name)}.csv", io.sweep_csv(sw)))
        scale = max(abs(x) for x in logs)
        spread = (max(logs) - min(logs)) / scale if scale > 0 else 0.0
        recs.append({"cutoff": "all", "term": "log_relative_spread", "coefficient": spread})
        return [("div-fit", recs)], files

    return run


def _safe(name: str) -> str:
    return "".join(c if c.isalnum() else "_" for c in Path(name).name)


def plan_certify(p: Params, cfg: ExperimentConfig, tol):
    cfg_a = certifier.configuration_from_dict(p.raw("a"))
    cfg_b = certifier.configuration_from_dict(p.raw("b"))
    p.done()

    def run():
        cert = certifier.certify_finiteness(cfg_a, cfg_b, tol["certify"])
        recs = cert.records()
        recs.append({"slot": "verdict", "integral": "certified", "difference": 0.0,
                     "zero": cert.certified})
        return [("certify", recs)], [Artifact("certificate.txt", cert.report())]

    return run


def plan_refmodel(p: Params, cfg: ExperimentConfig, tol):
    dim = p.get("dimension_d", int, 1, check=lambda v: v in (1, 3), why="1 or 3")
    if dim == 1:
        L = p.get("L", float, check=_positive)
        n = p.get("grid_points", int, 1024, check=lambda v: v >= 64)
        count = p.get("count", int, n // 4, check=lambda v: 0 < v <= n // 4)
        decades = p.get("decades", float, 1.0, check=_positive)
        points = p.get("points", int, 16, check=lambda v: v >= 3)
    else:
        box = p.get("lengths", "floats", check=lambda v: len(v) == 3 and all(x > 0 for x in v))
        n = p.get("quadrature_points", int, 64, check=lambda v: v >= 64)
        L = box[0]
    V = parse_potential(p.sub("potential"), L)
    p.done()

    def run():
        recs, files = [], []
        if dim == 1:
            spec = spectra.OperatorSpec1D(L, V, spectra.BoundaryCondition.PERIODIC, n)
            avg = reference_models.average_on_grid(spec)
            a = spectra.schrodinger_spectrum_1d(spec, count)
            ref = reference_models.reference_operator_1d(avg, L, count // 2 + 1, grid_points=n)
            cut = cutoffs.CutoffSpec.erfc()
            g = regularization.auto_omega_grid([a, ref], cut, decades, points)
            sw = regularization.difference_sweep(a, ref, cut, g, jobs=cfg.jobs)
            sup = float(np.max(np.abs(sw.values)))
            mid = float(abs(sw.values[len(sw.values) // 2]))
            recs.append({"quantity": "sweep_sup", "value": sup})
            recs.append({"quantity": "sweep_midpoint", "value": mid})
            recs.append({"quantity": "bounded", "value": sup < tol["bounded_ratio"] * mid})
            files.append(Artifact("sweep.csv", io.sweep_csv(sw)))
        else:
            def V3(x, y, z):
                return V(x)
            avg = reference_models.average_potential(V3, box, n)
        masses = reference_models.solve_masses(avg)
        recs = [{"quantity": "v_bar", "value": avg.v_bar},
                {"quantity": "v2_bar", "value": avg.v2_bar},
                {"quantity": "m1_squared", "value": masses.m1_squared},
                {"quantity": "m2_squared", "value": masses.m2_squared},
                {"quantity": "tachyonic", "value": masses.tachyonic}] + recs
        if dim == 3:
            cert = certifier.combination_check(
                reference_models.target_slot_map(avg),
                reference_models.reference_slot_maps(avg, masses), [0.5, 0.5],
                tol["combination"])
            recs.append({"quantity": "slots_matched", "value": cert.certified})
            files.append(Artifact("combination.txt", cert.report()))
        return [("refmodel", recs)], files

    return run


def plan_cutoff_invert(p: Params, cfg: ExperimentConfig, tol):
    name = parse_cutoff(p)
    n = p.get("n", int, 40, check=lambda v: v >= 10)
    xi = parse_grid(p, "xi")
    clip = p.raw("clip", "auto")
    if clip not in ("auto", True, False):
        raise ConfigError("cutoff-invert: 'clip' must be \"auto\", true or false")
    p.done()

    def run():
        cut = cutoffs.cutoff_from_name(name)
        w = cutoffs.recover_weight(cut, xi, n=n, clip=clip)
        xs, g = w.tabulate()
        recs = [{"cutoff": name, "n": n, "roundtrip_error": w.info["roundtrip_error"],
                 "clipped": w.info["clipped"], "signed": w.info["signed"],
                 "raw_mass": w.info["raw_mass"]}]
        return [("cutoff-invert", recs)], [Artifact("weight.csv", io.weight_csv(xs, g))]

    return run


def zeta_piston_energy(a: float, L: float) -> float:
    """Zeta-regularized energy of [0,a] + [a,L] minus [0,L/2] + [L/2,L] (Dirichlet)."""
    return -(math.pi / 24.0) * (1.0 / a + 1.0 / (L - a) - 4.0 / L)


def plan_piston(p: Params, cfg: ExperimentConfig, tol):
    a = p.get("a", float, 1.0, check=_positive)
    L = p.get("L", float, 10.0, check=lambda v: v > a, why="need L > a")
    cut_name = parse_cutoff(p)
    grid = parse_grid(p, "omega")
    methods = _parse_methods(p, ["erfc-extrapolate", "abel", "riesz:2"])
    p.done()
    short = min(a, L - a, L / 2)

    def run():
        cut = cutoffs.cutoff_from_name(cut_name)
        g = grid if grid is not None else np.geomspace(10.0 / short, 400.0 / short, 16)
        need = cut.tail_point * g[-1]
        count = lambda ell: int(math.ceil(need * ell / math.pi)) + 2
        left = spectra.interval_spectrum(a, "dirichlet", count(a))
        right = spectra.interval_spectrum(L - a, "dirichlet", count(L - a))
        half = spectra.interval_spectrum(L / 2, "dirichlet", count(L / 2))
        moved = spectra.union_spectrum(left, right, label=f"piston a={a:g}")
        centred = spectra.union_spectrum(half, half, label="piston centred")
        sw = regularization.difference_sweep(moved, centred, cut, g, jobs=cfg.jobs)
        res = regularization.extrapolate_finite_part(sw, 1, threshold=tol["negligible"])
        oracle = zeta_piston_energy(a, L)
        recs = _extrapolation_records(res)
        recs.append({"term": "zeta_oracle_energy", "coefficient": oracle,
                     "relative_error": abs(res.energy - oracle) / abs(oracle)})
        tables = [("piston", recs)]
        if methods:
            tables.append(("resum", _resum_records(moved, centred, methods, tol)))
        return tables, [Artifact("sweep.csv", io.sweep_csv(sw))]

    return run


PLANNERS = {
    "identity-check": plan_identity_check,
    "sweep": plan_sweep,
    "heat-fit": plan_heat_fit,
    "div-fit": plan_div_fit,
    "certify": plan_certify,
    "refmodel": plan_refmodel,
    "cutoff-invert": plan_cutoff_invert,
    "piston": plan_piston,
}


# ---------------------------------------------------------------------------
# driver


def load_config(kind: str, path, out, fmt="text", jobs=1) -> ExperimentConfig:
    if kind not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {kind!r}")
    if fmt not in FORMATS:
        raise ConfigError(f"unknown format {fmt!r}")
    if int(jobs) < 1:
        raise ConfigError("--jobs must be >= 1")
    params = io.load_toml(path) if path is not None else {}
    declared = params.pop("experiment", kind)
    if declared != kind:
        raise ConfigError(f"config declares experiment {declared!r}, not {kind!r}")
    seed = params.pop("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    if out is None:
        out = os.environ.get(OUT_ENV) or DEFAULT_OUT
    base = Path(path).parent if path is not None else Path(".")
    return ExperimentConfig(kind, params, Path(out), seed, fmt, int(jobs), base)


def plan(config: ExperimentConfig):
    """Validate the whole config; returns the runner for the experiment."""
    p = Params(dict(config.params), config.kind, config.base_dir)
    tol = parse_tolerances(p)
    runner = PLANNERS[config.kind](p, config, tol)
    return runner


def run(config: ExperimentConfig) -> list[Artifact]:
    """Validate, compute and render; nothing touches the disk."""
    runner = plan(config)
    np.random.seed(config.seed)
    tables, files = runner()
    out = []
    for name, records in tables:
        out.append(Artifact(f"{name}.{io.extension(config.fmt)}",
                            io.render_records(records, config.fmt, title=name)))
    return out + files


def write_artifacts(out_dir: Path, artifacts: list[Artifact]):
    out_dir.mkdir(parents=True, exist_ok=True)
    for art in artifacts:
        (out_dir / art.name).write_text(art.text, encoding="utf-8", newline="")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="casimirlab",
        description="Regularized mode sums, heat-kernel fits and finiteness certificates.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="experiment TOML file")
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
        sp.add_argument("--format", default="text", choices=FORMATS)
        sp.add_argument("--jobs", type=int, default=1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        config = load_config(args.experiment, args.config, args.out, args.format, args.jobs)
        artifacts = run(config)
        write_artifacts(config.output, artifacts)
    except CasimirLabError as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error [OSError]: {exc}", file=sys.stderr)
        return 1
    for art in artifacts:
        print(config.output / art.name)
    return 0


if __name__ == "__main__":
    sys.exit(main())
