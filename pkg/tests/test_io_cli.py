import json
import subprocess
import sys

import numpy as np
import pytest

from symclone.cli import main
from symclone.io import (
    histogram_to_csv,
    matrix_from_json,
    matrix_to_json,
    quaternions_from_json,
    quaternions_to_json,
    samples_to_csv,
)
from symclone.reference import CLONE_MAP, ROTATION_GENERATOR, SHEAR_GENERATOR


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# --- io --------------------------------------------------------------------

def test_matrix_json_keeps_ints():
    obj = matrix_to_json(CLONE_MAP, label="m")
    assert obj["dim"] == 6 and obj["label"] == "m"
    assert all(isinstance(v, int) for row in obj["rows"] for v in row)
    back = matrix_from_json(json.loads(json.dumps(obj)))
    assert back.dtype.kind == "i" and np.array_equal(back, CLONE_MAP)


def test_matrix_json_float_roundtrip():
    M = np.random.default_rng(0).normal(size=(4, 4))
    back = matrix_from_json(json.loads(json.dumps(matrix_to_json(M))))
    assert np.array_equal(back, M)


def test_matrix_json_rejects_bad():
    with pytest.raises(ValueError):
        matrix_from_json({"dim": 3, "rows": [[1, 0], [0, 1]]})
    with pytest.raises(ValueError):
        matrix_to_json(np.ones((2, 3)))


def test_quaternion_json():
    q = np.array([[1.0, 0, 0, 0], [0, 1.0, 0, 0]])
    assert np.array_equal(quaternions_from_json(quaternions_to_json(q)), q)
    with pytest.raises(ValueError):
        quaternions_from_json([1, 2, 3])


def test_csv_writers():
    text = samples_to_csv({"source": np.array([[1.0, 2.0]])})
    assert text == "subsystem,q,p\nsource,1,2\n"
    h = histogram_to_csv([0, 1, 2], [0, 1], np.array([[3], [4]]), "t").splitlines()
    assert h[0] == "subsystem,q_lo,q_hi,p_lo,p_hi,count"
    assert h[2] == "t,1,2,0,1,4"


# --- cli -------------------------------------------------------------------

def test_version(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0 and json.loads(out)["version"]


def test_check_suite(capsys):
    code, out, _ = run(capsys, "--check")
    rep = json.loads(out)
    assert code == 0 and rep["passed"]


def test_no_command_is_usage_error(capsys):
    assert run(capsys)[0] == 2


def test_make_map_default(capsys):
    code, out, _ = run(capsys, "make-map")
    assert code == 0
    assert np.array_equal(np.array(json.loads(out)["rows"]), CLONE_MAP)


def test_make_map_identity_F_rejected(capsys):
    code, _, err = run(capsys, "make-map", "--F", "1,0;0,1")
    assert code == 2 and "antisymplectic" in err


def test_make_map_choices_file(capsys, tmp_path):
    f = tmp_path / "c.json"
    f.write_text(json.dumps({"second_pair": [[-1, 0, -2, 1], [0, 1, -3, 1]],
                             "third_seeds": ["e3'", "g3'"], "third_pair": [[1, 0], [0, 1]]}))
    code, out, _ = run(capsys, "make-map", "--choices-file", str(f))
    rep = json.loads(out)
    assert code == 0 and rep["checks"]["cloning"]


def test_decompose_default_matches_tables(capsys):
    code, out, _ = run(capsys, "decompose")
    rep = json.loads(out)
    assert code == 0
    assert np.max(np.abs(np.array(rep["X"]) - SHEAR_GENERATOR)) < 2e-3
    assert np.max(np.abs(np.array(rep["Y"]) - ROTATION_GENERATOR)) < 2e-3
    assert rep["reconstruction_error"] <= 1e-10


def test_decompose_tau_scales(capsys):
    _, out, _ = run(capsys, "decompose", "--tau", "2")
    rep = json.loads(out)
    assert np.allclose(np.array(rep["h1"]) * 2, rep["X"])


def test_decompose_polar_reports_table_mismatch(capsys):
    code, out, _ = run(capsys, "decompose", "--method", "polar")
    rep = json.loads(out)
    assert rep["checks"]["reconstruction"] and rep["checks"]["shear_spd"]
    assert not rep["checks"]["reference_tables"]
    assert code == 1


def test_decompose_identity_and_random(capsys, tmp_path):
    f = tmp_path / "id.json"
    f.write_text(json.dumps(matrix_to_json(np.eye(4, dtype=int))))
    code, out, _ = run(capsys, "decompose", "--map", str(f))
    rep = json.loads(out)
    assert code == 0 and np.max(np.abs(rep["X"])) == 0 and np.max(np.abs(rep["Y"])) == 0
    from symclone.symplectic import random_symplectic
    g = tmp_path / "r.json"
    g.write_text(json.dumps(matrix_to_json(random_symplectic(6, 0.5, 3).matrix)))
    code, out, _ = run(capsys, "decompose", "--map", str(g))
    assert code == 0 and json.loads(out)["reconstruction_error"] <= 1e-10


def test_decompose_rejects_non_symplectic(capsys, tmp_path):
    f = tmp_path / "bad.json"
    f.write_text(json.dumps(matrix_to_json(2 * np.eye(2, dtype=int))))
    assert run(capsys, "decompose", "--map", str(f))[0] == 2


def test_evolve_endpoint(capsys):
    code, out, err = run(capsys, "evolve", "--steps", "20")
    assert code == 0
    last = [float(v) for v in out.strip().splitlines()[-1].split(",")]
    assert last[0] == 2.0
    assert np.allclose(last[1:], [1, 1, 1, 1, 1, -1], atol=1e-9)
    assert json.loads(err)["checks"]["endpoint"]


def test_evolve_zero_is_flat(capsys):
    code, out, _ = run(capsys, "evolve", "--x0", "0,0,0,0,0,0", "--steps", "3")
    rows = [list(map(float, r.split(",")))[1:] for r in out.strip().splitlines()[1:]]
    assert code == 0 and np.all(np.array(rows) == 0)


def test_evolve_from_generators_file(capsys, tmp_path):
    _, out, _ = run(capsys, "decompose")
    f = tmp_path / "gen.json"
    f.write_text(out)
    code, out, _ = run(capsys, "evolve", "--generators", str(f), "--steps", "5")
    assert code == 0


def test_thermal_alpha_2(capsys):
    code, out, _ = run(capsys, "thermal", "--alpha", "2")
    rep = json.loads(out)
    assert code == 0
    assert rep["closed_form"]["delta_s"] == 32 and rep["closed_form"]["delta_t"] == 19
    assert rep["subsystems"]["target"]["kl_from_ideal"] > 0


def test_thermal_near_zero_temperature(capsys):
    _, out, _ = run(capsys, "thermal", "--alpha", "1e8")
    rep = json.loads(out)
    A = np.array(rep["subsystems"]["source"]["exponent_matrix"])
    assert np.max(np.abs(A - np.eye(2))) < 1e-6


def test_sample_outputs(capsys, tmp_path):
    code, out, _ = run(capsys, "sample", "--seed", "7", "--n", "20000",
                       "--samples-out", str(tmp_path / "s.csv"), "--hist-out", str(tmp_path / "h.csv"))
    rep = json.loads(out)
    assert code == 0
    for name in ("source", "target", "machine"):
        assert set(rep["subsystems"][name]["sample"]) >= {"mean_q", "mean_p", "std_q", "std_p", "rho", "n"}
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "subsystem,q,p" and len(lines) == 1 + 3 * 20000
    assert (tmp_path / "h.csv").read_text().startswith("subsystem,q_lo")


def test_sample_requires_seed_and_n(capsys):
    assert run(capsys, "sample")[0] == 2
    assert run(capsys, "sample", "--seed", "1", "--n", "1")[0] == 2


def test_sample_deterministic_bytes(capsys):
    a = run(capsys, "sample", "--seed", "3", "--n", "5000")[1]
    b = run(capsys, "sample", "--seed", "3", "--n", "5000", "--chunk-size", "5000")[1]
    c = run(capsys, "sample", "--seed", "3", "--n", "5000")[1]
    assert a == c
    assert json.loads(b)["n"] == 5000


def test_optics_channels(capsys, tmp_path):
    sig = tmp_path / "sig.csv"
    sig.write_text("t,re,im\n0,1,2\n1,0.5,-1\n")
    code, out, err = run(capsys, "optics", "--signal-file", str(sig))
    assert code == 0
    rows = out.strip().splitlines()
    assert rows[1] == "0,1,2,1,2,1,-2"
    assert json.loads(err)["checks"]["conjugation_antisymplectic"]


def test_optics_offset_and_pumps(capsys, tmp_path):
    geo = tmp_path / "geo.json"
    code, _, _ = run(capsys, "optics", "--delta", "0.01", "--pumps", "2,3i", "--raw-gains",
                     "--geometry-out", str(geo))
    rep = json.loads(geo.read_text())
    assert code == 0 and rep["status"]["clone"] == "approximate"
    assert rep["gains"]["clone"] == {"re": 0.0, "im": 6.0}


@pytest.mark.parametrize("demo", ["su2", "torus"])
def test_group_demos(capsys, demo):
    code, out, _ = run(capsys, "group", "--demo", demo, "--n", "50")
    rep = json.loads(out)
    assert code == 0 and all(rep["checks"].values())


def test_no_overwrite_without_force(capsys, tmp_path):
    f = tmp_path / "m.json"
    assert run(capsys, "make-map", "--out", str(f))[0] == 0
    first = f.read_text()
    code, _, err = run(capsys, "make-map", "--out", str(f))
    assert code == 2 and "--force" in err
    assert run(capsys, "make-map", "--out", str(f), "--force")[0] == 0
    assert f.read_text() == first


def test_out_dir_env(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("SYMCLONE_OUT_DIR", str(tmp_path / "outs"))
    assert run(capsys, "make-map", "--out", "map.json")[0] == 0
    assert (tmp_path / "outs" / "map.json").exists()


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "symclone", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "version" in res.stdout
