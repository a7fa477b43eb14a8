import json
from pathlib import Path

import pytest

from casimirlab import cli

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
RUNS = [("identity-check", "identity_check.toml"), ("sweep", "sweep_interval.toml"),
        ("heat-fit", "heat_fit.toml"), ("div-fit", "div_fit_massive.toml"),
        ("certify", "certify_spheres.toml"), ("refmodel", "refmodel_sin2.toml"),
        ("refmodel", "refmodel_3d.toml"), ("cutoff-invert", "cutoff_invert.toml"),
        ("piston", "piston.toml")]


def run_cli(tmp_path, kind, config, *extra, out="out"):
    target = tmp_path / out
    code = cli.main([kind, "--config", str(config), "--out", str(target), *extra])
    return code, target


def write(tmp_path, text, name="c.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


@pytest.mark.parametrize("kind,name", RUNS)
def test_every_subcommand_is_deterministic(tmp_path, kind, name):
    code, out1 = run_cli(tmp_path, kind, CONFIGS / name, "--format", "jsonl", out="one")
    assert code == 0
    code, out2 = run_cli(tmp_path, kind, CONFIGS / name, "--format", "jsonl", out="two")
    assert code == 0
    files = sorted(p.name for p in out1.iterdir())
    assert files and files == sorted(p.name for p in out2.iterdir())
    for f in files:
        assert (out1 / f).read_bytes() == (out2 / f).read_bytes()


def test_piston_report(tmp_path):
    code, out = run_cli(tmp_path, "piston", CONFIGS / "piston.toml", "--format", "jsonl")
    assert code == 0
    recs = [json.loads(line) for line in (out / "piston.jsonl").read_text().splitlines()]
    text = json.dumps(recs)
    assert "oracle" in text


def test_certificate_text(tmp_path):
    code, out = run_cli(tmp_path, "certify", CONFIGS / "certify_spheres.toml")
    assert code == 0
    report = (out / "certificate.txt").read_text()
    assert report.startswith("certified: true")
    assert "slot 1/2" in report


def test_sweep_csv_artifact(tmp_path):
    code, out = run_cli(tmp_path, "sweep", CONFIGS / "sweep_interval.toml", "--format", "csv")
    assert code == 0
    assert (out / "sweep.csv").read_text().splitlines()[0] == "omega_cutoff,value"


def test_heat_fit_jsonl_has_one_record_per_coefficient(tmp_path):
    code, out = run_cli(tmp_path, "heat-fit", CONFIGS / "heat_fit.toml", "--format", "jsonl")
    assert code == 0
    lines = (out / "heat-fit.jsonl").read_text().splitlines()
    recs = [json.loads(x) for x in lines]
    coeffs = [r for r in recs if "standard_error" in r]
    assert len(coeffs) >= 2


@pytest.mark.parametrize("text", [
    'experiment = "sweep"\nbogus = 1\n',
    'experiment = "heat-fit"\nd = 1\nN = 1\n[spectrum]\nkind = "interval"\nL = -1\ncount = 10\n',
    'experiment = "sweep"\ncutoff = "lorentz"\n',
    'experiment = "piston"\na = [\n',
    'experiment = "certify"\n',
    'experiment = "piston"\nseed = "x"\n',
])
def test_malformed_config_exits_1_without_artifacts(tmp_path, text):
    code, out = run_cli(tmp_path, text.split('"')[1], write(tmp_path, text))
    assert code == 1
    assert not out.exists()


def test_wrong_experiment_key(tmp_path):
    code, out = run_cli(tmp_path, "sweep", write(tmp_path, 'experiment = "piston"\n'))
    assert code == 1 and not out.exists()


def test_missing_config_file(tmp_path):
    code, out = run_cli(tmp_path, "sweep", tmp_path / "nope.toml")
    assert code == 1 and not out.exists()


def test_truncation_exits_2(tmp_path):
    text = """experiment = "heat-fit"
d = 1
N = 1
[spectrum]
kind = "interval"
L = 1.0
bc = "dirichlet"
count = 5
"""
    code, out = run_cli(tmp_path, "heat-fit", write(tmp_path, text))
    assert code == 2 and not out.exists()


def test_imaginary_frequency_exits_2(tmp_path):
    text = """experiment = "heat-fit"
d = 1
N = 1
[spectrum]
kind = "interval"
L = 1.0
bc = "dirichlet"
count = 4000
mass_squared = -100.0
"""
    code, out = run_cli(tmp_path, "heat-fit", write(tmp_path, text))
    assert code == 2 and not out.exists()


def test_resource_cap_exits_3(tmp_path, capsys):
    text = """experiment = "heat-fit"
d = 3
N = 1
[spectrum]
kind = "box"
lengths = [1.0, 1.0, 1.0]
bc = "periodic"
omega_max = 500.0
max_modes = 1000
"""
    code, out = run_cli(tmp_path, "heat-fit", write(tmp_path, text))
    assert code == 3 and not out.exists()
    assert "1000" in capsys.readouterr().err


def test_output_directory_from_environment(tmp_path, monkeypatch):
    target = tmp_path / "from-env"
    monkeypatch.setenv(cli.OUT_ENV, str(target))
    assert cli.main(["certify", "--config", str(CONFIGS / "certify_spheres.toml")]) == 0
    assert (target / "certificate.txt").exists()


def test_tolerance_override(tmp_path):
    text = (CONFIGS / "identity_check.toml").read_text().replace("identity = 1e-9",
                                                                 "identity = 0.0")
    text = text.replace("points = 20", "points = 4")
    code, out = run_cli(tmp_path, "identity-check", write(tmp_path, text), "--format", "jsonl")
    assert code == 0
    body = (out / "summary.jsonl").read_text()
    assert '"passed": false' in body


def test_bad_flags():
    assert cli.main(["sweep", "--format", "xml"]) == 1
    assert cli.main(["nonsense"]) == 1
    assert cli.main(["sweep", "--jobs", "0", "--config", str(CONFIGS / "sweep_interval.toml")]) == 1


def test_jobs_do_not_change_results(tmp_path):
    _, a = run_cli(tmp_path, "sweep", CONFIGS / "sweep_interval.toml", "--jobs", "1", out="a")
    _, b = run_cli(tmp_path, "sweep", CONFIGS / "sweep_interval.toml", "--jobs", "4", out="b")
    for f in a.iterdir():
        assert f.read_bytes() == (b / f.name).read_bytes()
