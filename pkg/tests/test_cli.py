import json
import math
import subprocess
import sys

import numpy as np
import pytest

from bandgap_lab.cli import main

FREE = {"a": [1.0], "b": [0.0]}
P2 = {"a": [1.0, 1.0], "b": [1.0, -1.0]}
R15 = {"kind": "rank-one", "amplitude": 1.5}
RB = {"kind": "random-banded", "bandwidth": 2, "length": 8, "amplitude": 1.0}


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        path = tmp_path / name
        path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(path)
    return write


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bands_free_and_period_two(files, tmp_path, capsys):
    code, out, _ = run(capsys, "bands", "--spec", files("free.json", FREE), "--out-dir", tmp_path / "a")
    assert code == 0
    assert json.loads(out)["edges"] == pytest.approx([-2.0, 2.0], abs=1e-10)
    code, out, _ = run(capsys, "bands", "--spec", files("p2.json", P2), "--out-dir", tmp_path / "b")
    s5 = math.sqrt(5)
    assert json.loads(out)["edges"] == pytest.approx([-s5, -1, 1, s5], abs=1e-8)
    assert json.loads((tmp_path / "b" / "bands.json").read_text())["gaps"][0]["width"] == pytest.approx(2.0)


def test_malformed_json_exits_two(files, tmp_path, capsys):
    code, _, err = run(capsys, "bands", "--spec", files("bad.json", '{"a": [1,\n'), "--out-dir", tmp_path)
    assert code == 2
    assert "bad.json:2" in err and "malformed JSON" in err


@pytest.mark.parametrize("spec, msg", [
    ({"a": [1.0]}, "missing"),
    ({"a": [1.0, -1.0], "b": [0, 0]}, "positive"),
])
def test_invalid_spec_fields_exit_two(files, tmp_path, capsys, spec, msg):
    code, _, err = run(capsys, "bands", "--spec", files("s.json", spec), "--out-dir", tmp_path)
    assert code == 2 and msg in err


def test_missing_file_exits_two(tmp_path, capsys):
    code, _, err = run(capsys, "bands", "--spec", tmp_path / "nope.json", "--out-dir", tmp_path)
    assert code == 2 and "cannot read" in err


def test_size_cap_from_environment(files, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("BANDGAP_LAB_MAX_N", "500")
    code, _, err = run(capsys, "spectrum", "--spec", files("f.json", FREE), "--pert", files("r.json", R15),
                       "--out-dir", tmp_path)
    assert code == 2 and "BANDGAP_LAB_MAX_N" in err


def test_numerical_failure_exits_three(files, tmp_path, capsys, monkeypatch):
    from bandgap_lab import cli
    from bandgap_lab.errors import NumericalFailure

    def boom(*_a, **_k):
        raise NumericalFailure("QR iteration exceeded 40 sweeps")

    monkeypatch.setattr(cli, "discrete_spectrum", boom)
    code, _, err = run(capsys, "spectrum", "--spec", files("f.json", FREE), "--pert", files("r.json", R15),
                       "--out-dir", tmp_path)
    assert code == 3 and "numerical failure" in err


def test_spectrum_rank_one(files, tmp_path, capsys):
    code, out, _ = run(capsys, "spectrum", "--spec", files("f.json", FREE), "--pert", files("r.json", R15),
                       "--out-dir", tmp_path)
    assert code == 0
    entries = json.loads(out)["entries"]
    assert len(entries) == 1 and entries[0]["re"] == pytest.approx(2.5, abs=1e-6)
    rows = (tmp_path / "spectrum.csv").read_text().splitlines()
    assert rows[0] == "re,im,multiplicity,stable,drift" and len(rows) == 2
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "spectrum" and set(manifest["input_fingerprints"]) == {"spec", "pert"}
    assert manifest["params"]["n2"] == 2000 and manifest["wall_time"] > 0


def test_spectrum_zero_scale_is_empty(files, tmp_path, capsys):
    code, out, _ = run(capsys, "spectrum", "--spec", files("f.json", P2), "--pert", files("r.json", RB),
                       "--scale", 0, "--n1", 500, "--n2", 1000, "--out-dir", tmp_path)
    assert code == 0 and json.loads(out)["entries"] == []


def _outputs(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.name != "manifest.json"}


def _manifest_without_time(d):
    m = json.loads((d / "manifest.json").read_text())
    m.pop("wall_time")
    return m


def test_same_seed_gives_identical_files(files, tmp_path, capsys):
    spec, pert = files("p.json", P2), files("r.json", RB)
    for name in ("one", "two"):
        assert run(capsys, "spectrum", "--spec", spec, "--pert", pert, "--seed", 17, "--n1", 400, "--n2", 800,
                   "--out-dir", tmp_path / name)[0] == 0
    assert _outputs(tmp_path / "one") == _outputs(tmp_path / "two")
    assert _manifest_without_time(tmp_path / "one") == _manifest_without_time(tmp_path / "two")
    assert json.loads((tmp_path / "one" / "spectrum.json").read_text())["perturbation"]["seed"] == 17


def test_lt_verify_norm_column_is_monotone_and_jobs_do_not_matter(files, tmp_path, capsys):
    spec, pert = files("p.json", P2), files("r.json", RB)
    args = ["lt-verify", "--spec", spec, "--pert", pert, "--count", 2, "--seed", 3, "--n1", 300, "--n2", 600,
            "--p", 1, "--eps", 0.5]
    assert run(capsys, *args, "--out-dir", tmp_path / "serial")[0] == 0
    assert run(capsys, *args, "--jobs", 2, "--out-dir", tmp_path / "par")[0] == 0
    assert _outputs(tmp_path / "serial") == _outputs(tmp_path / "par")
    rows = [r.split(",") for r in (tmp_path / "serial" / "lt_verify.csv").read_text().splitlines()[1:]]
    assert len(rows) == 8
    for inst in ("0", "1"):
        norms = [float(r[3]) for r in rows if r[0] == inst]
        assert norms == sorted(norms) and norms[0] > 0
        assert all(math.isfinite(float(r[6])) for r in rows)
    seeds = json.loads((tmp_path / "serial" / "manifest.json").read_text())["seeds"]["perturbations"]
    assert seeds == [3, 4]


def test_det_grid_is_finite_off_the_bands(files, tmp_path, capsys):
    code, out, _ = run(capsys, "det", "--spec", files("p.json", P2), "--pert", files("r.json", RB), "--p", 2,
                       "--re-min", -3, "--re-max", 3, "--im-min", 0.1, "--im-max", 2, "--grid-n", 9,
                       "--out-dir", tmp_path)
    assert code == 0
    summary = json.loads(out)
    assert summary["n_samples"] == 81 and summary["all_finite"] and summary["k"] == 2
    data = np.loadtxt(tmp_path / "det.csv", delimiter=",", skiprows=1)
    assert np.all(np.isfinite(data[:, 3]))


def test_disk_verify_random_and_family(files, tmp_path, capsys):
    code, out, _ = run(capsys, "disk-verify", "--count", 10, "--seed", 2, "--out-dir", tmp_path / "r")
    assert code == 0 and json.loads(out)["violations"] == 0
    fam = [{"zeros": [[0.9, 0], [0, 0.99]]}, {"zeros": [], "atoms": [[1, 0]], "weights": [-1.0]}]
    code, out, _ = run(capsys, "disk-verify", "--family", files("fam.json", fam), "--eps", "0.5",
                       "--out-dir", tmp_path / "f")
    assert code == 0 and json.loads(out)["n_reports"] == 2


def test_joukowski_file_has_no_nan(tmp_path, capsys):
    code, _, _ = run(capsys, "joukowski", "--grid-n", 50, "--out-dir", tmp_path)
    assert code == 0
    data = np.loadtxt(tmp_path / "joukowski.csv", delimiter=",", skiprows=1)
    assert data.shape == (2500, 6) and np.all(np.isfinite(data))


def test_console_script_entry_point(tmp_path):
    spec = tmp_path / "f.json"
    spec.write_text(json.dumps(FREE))
    out = subprocess.run([sys.executable, "-m", "bandgap_lab.cli", "bands", "--spec", str(spec),
                          "--out-dir", str(tmp_path)], capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["n_bands"] == 1
    bad = subprocess.run([sys.executable, "-m", "bandgap_lab.cli", "bands"], capture_output=True, text=True)
    assert bad.returncode == 2
