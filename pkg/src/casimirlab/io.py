"""Plain-text serialization: CSV tables, TOML metadata and report records.

Floats are written with 17 significant digits so every double survives a
round trip bit for bit.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
import sys
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .spectra import ModeSpectrum


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def fmt_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    if v is None:
        return ""
    return str(v)


# ---------------------------------------------------------------------------
# TOML


def load_toml(path) -> dict:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file {str(path)!r} not found") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {str(path)!r}: {exc}") from None


def _toml_scalar(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        s = fmt_float(v)
        if s in ("nan", "inf", "-inf"):
            return s
        return s if any(c in s for c in ".en") else s + ".0"
    return json.dumps(str(v))


def dumps_toml(record: Mapping) -> str:
    """Flat key = value TOML (scalars and lists of scalars), keys sorted."""
    lines = []
    for key in sorted(record):
        v = record[key]
        if isinstance(v, (list, tuple)):
            lines.append(f"{key} = [{', '.join(_toml_scalar(x) for x in v)}]")
        else:
            lines.append(f"{key} = {_toml_scalar(v)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# CSV tables


def _write_text(path, text: str):
    Path(path).write_text(text, encoding="utf-8", newline="")


def table_csv(header: Iterable[str], rows: Iterable[Iterable]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(header))
    for row in rows:
        w.writerow([fmt_value(v) for v in row])
    return buf.getvalue()


def read_table_csv(path, header: tuple) -> list[np.ndarray]:
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            got = next(reader, None)
            if got is None or tuple(h.strip() for h in got) != tuple(header):
                raise ConfigError(f"{str(path)!r}: expected header {','.join(header)}")
            rows = [r for r in reader if r]
    except FileNotFoundError:
        raise ConfigError(f"file {str(path)!r} not found") from None
    try:
        cols = list(zip(*rows)) if rows else [()] * len(header)
        return [np.array([float(x) for x in c]) for c in cols]
    except ValueError as exc:
        raise ConfigError(f"{str(path)!r}: {exc}") from None


def spectrum_sidecar_path(path) -> Path:
    return Path(path).with_suffix(".toml")


def spectrum_csv(spectrum: ModeSpectrum) -> tuple[str, str]:
    body = table_csv(("omega", "multiplicity"), zip(spectrum.omega, spectrum.multiplicity))
    meta = dumps_toml({"dimension_d": spectrum.dimension_d,
                       "uv_valid_count": spectrum.uv_valid_count,
                       "label": spectrum.label, "complete": spectrum.complete})
    return body, meta


def write_spectrum_csv(spectrum: ModeSpectrum, path):
    body, meta = spectrum_csv(spectrum)
    _write_text(path, body)
    _write_text(spectrum_sidecar_path(path), meta)


def read_spectrum_csv(path) -> ModeSpectrum:
    omega, mult = read_table_csv(path, ("omega", "multiplicity"))
    side = spectrum_sidecar_path(path)
    meta = load_toml(side) if side.exists() else {}
    return ModeSpectrum(omega, mult.astype(np.int64), int(meta.get("dimension_d", 1)),
                        meta.get("uv_valid_count"), str(meta.get("label", Path(path).stem)),
                        complete=bool(meta.get("complete", False)))


def sweep_csv(sweep) -> str:
    return table_csv(("omega_cutoff", "value"), zip(sweep.omega_grid, sweep.values))


def read_sweep_csv(path):
    return read_table_csv(path, ("omega_cutoff", "value"))


def weight_csv(xi, g) -> str:
    return table_csv(("xi", "g"), zip(xi, g))


def read_weight_csv(path):
    """Tabulated weight g(xi) as a :class:`~casimirlab.cutoffs.WeightFunction`."""
    from .cutoffs import WeightFunction

    xi, g = read_table_csv(path, ("xi", "g"))
    return WeightFunction.from_table(xi, g, label=Path(path).name)


def trace_csv(t, K) -> str:
    return table_csv(("t", "K"), zip(np.atleast_1d(t), np.atleast_1d(K)))


def read_potential_csv(path):
    return read_table_csv(path, ("x", "V"))


# ---------------------------------------------------------------------------
# report records


def _json_value(v) -> str:
    if isinstance(v, Mapping):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(v[k])}"
                               for k in sorted(v)) + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        s = fmt_float(v)
        return s if math.isfinite(float(v)) else json.dumps(s)
    if v is None:
        return "null"
    return json.dumps(str(v))


def records_jsonl(records: Iterable[Mapping]) -> str:
    return "".join(_json_value(r) + "\n" for r in records)


def records_csv(records: list[Mapping]) -> str:
    keys = sorted({k for r in records for k in r})
    return table_csv(keys, ([r.get(k) for k in keys] for r in records))


def records_text(records: list[Mapping], title: str = "") -> str:
    lines = [title] if title else []
    for r in records:
        lines.append("  ".join(f"{k}={fmt_value(r[k]) if not isinstance(r[k], (list, tuple, dict)) else _json_value(r[k])}"
                               for k in sorted(r)))
    return "\n".join(lines) + "\n"


def render_records(records: list[Mapping], fmt: str, title: str = "") -> str:
    if fmt == "jsonl":
        return records_jsonl(records)
    if fmt == "csv":
        return records_csv(records)
    if fmt == "text":
        return records_text(records, title)
    raise ConfigError(f"unknown output format {fmt!r} (text, csv, jsonl)")


def extension(fmt: str) -> str:
    return {"text": "txt", "csv": "csv", "jsonl": "jsonl"}[fmt]
