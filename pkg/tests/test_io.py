import math

import numpy as np
import pytest

from casimirlab import io, spectra
from casimirlab.cutoffs import CutoffSpec
from casimirlab.errors import ConfigError
from casimirlab.regularization import combination_sweep


def test_fmt_float_round_trips():
    for x in (0.1, 1 / 3, math.pi * 1e-300, -2.5e17, 5e-324):
        assert float(io.fmt_float(x)) == x
    assert io.fmt_float(math.inf) == "inf" and io.fmt_float(math.nan) == "nan"


def test_spectrum_round_trip_bit_exact(tmp_path):
    s = spectra.massive_spectrum(spectra.interval_spectrum(math.pi, "periodic", 50), 0.3)
    s = s.with_label("massive ring")
    path = tmp_path / "s.csv"
    io.write_spectrum_csv(s, path)
    back = io.read_spectrum_csv(path)
    assert np.array_equal(back.omega, s.omega)
    assert np.array_equal(back.multiplicity, s.multiplicity)
    assert back.uv_valid_count == s.uv_valid_count and back.label == "massive ring"
    assert path.read_text().splitlines()[0] == "omega,multiplicity"


def test_sweep_csv_round_trip(tmp_path):
    s = spectra.interval_spectrum(1.0, "dirichlet", 400)
    sw = combination_sweep([(1.0, s)], CutoffSpec.erfc(), np.geomspace(1, 50, 7))
    path = tmp_path / "sweep.csv"
    path.write_text(io.sweep_csv(sw))
    omega, values = io.read_sweep_csv(path)
    assert np.array_equal(omega, sw.omega_grid) and np.array_equal(values, sw.values)


def test_weight_csv(tmp_path):
    xi = np.linspace(1.0, 2.0, 101)
    path = tmp_path / "w.csv"
    path.write_text(io.weight_csv(xi, np.ones_like(xi)))
    w = io.read_weight_csv(path)
    assert w.mass == pytest.approx(1.0, abs=1e-12)


def test_bad_tables(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("x,y\n1,2\n")
    with pytest.raises(ConfigError):
        io.read_sweep_csv(p)
    p.write_text("omega_cutoff,value\n1,abc\n")
    with pytest.raises(ConfigError):
        io.read_sweep_csv(p)
    with pytest.raises(ConfigError):
        io.read_sweep_csv(tmp_path / "missing.csv")


def test_records_are_byte_stable():
    recs = [{"b": 0.1, "a": 1, "c": True, "d": "x"}, {"a": 2, "b": 1e-20, "c": False, "d": "y"}]
    j = io.records_jsonl(recs)
    assert j.splitlines()[0] == '{"a": 1, "b": 0.10000000000000001, "c": true, "d": "x"}'
    assert io.records_jsonl(list(recs)) == j
    assert io.records_csv(recs).splitlines()[0] == "a,b,c,d"
    assert "a=1  b=0.10000000000000001" in io.records_text(recs, "t")


def test_render_unknown_format():
    with pytest.raises(ConfigError):
        io.render_records([], "xml")


def test_toml_helpers(tmp_path):
    text = io.dumps_toml({"b": [1.5, 2], "a": "x", "c": 3.0})
    p = tmp_path / "m.toml"
    p.write_text(text)
    assert io.load_toml(p) == {"a": "x", "b": [1.5, 2], "c": 3.0}
    p.write_text("a = [")
    with pytest.raises(ConfigError):
        io.load_toml(p)
