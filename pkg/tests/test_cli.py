import json
import subprocess
import sys

import numpy as np
import pytest

from projlab import Subspace
from projlab.cli import main

PLANE = {"A": {"d": 2, "basis": [1.0, 0.0]}, "B": {"d": 2, "basis": [0.6, 0.8]}}
SHARED = {
    "A": {"d": 3, "basis": [1.0, 0.0, 0.0, 0.0, 0.0, 1.0]},
    "B": {"d": 3, "basis": [0.6, 0.8, 0.0, 0.0, 0.0, 1.0]},
}


@pytest.fixture
def cfg(tmp_path):
    def write(obj, name="cfg.json"):
        path = tmp_path / name
        path.write_text(json.dumps(obj))
        return str(path)

    return write


def call(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_angles_inline(capsys, cfg):
    code, out, _ = call(capsys, "angles", "--config", cfg(PLANE))
    data = json.loads(out)
    assert code == 0
    assert data["cosines"] == pytest.approx([0.6]) and data["friedrichs_cos"] == pytest.approx(0.6)


def test_angles_nested(capsys, cfg):
    code, out, _ = call(capsys, "angles", "--config", cfg({"A": PLANE["A"], "B": PLANE["A"]}))
    assert code == 0 and json.loads(out)["degenerate_nested"] is True


def test_mismatched_dims(capsys, cfg):
    code, _, err = call(capsys, "angles", "--config", cfg({"A": PLANE["A"], "B": SHARED["B"]}))
    assert code == 2 and "dimension" in err


@pytest.mark.parametrize("bad", [
    {"A": {"d": 2, "basis": [1.001, 0.0]}, "B": PLANE["B"]},
    {"generator": {"d": 2}},
    {"A": PLANE["A"], "B": PLANE["B"], "generator": {"d": 2, "angles": [0.5]}},
])
def test_invalid_configs(capsys, cfg, bad):
    assert call(capsys, "verify", "--config", cfg(bad))[0] == 2


def test_missing_and_malformed_files(capsys, tmp_path):
    assert call(capsys, "angles", "--config", str(tmp_path / "nope.json"))[0] == 2
    (tmp_path / "x.json").write_text("{not json")
    assert call(capsys, "angles", "--config", str(tmp_path / "x.json"))[0] == 2


def test_spectrum(capsys, cfg):
    code, out, _ = call(capsys, "spectrum", "--config", cfg(PLANE))
    vals = sorted(c["value"] for c in json.loads(out)["spectra"]["avg_PA_PB"]["clusters"])
    assert code == 0 and vals == pytest.approx([0.2, 0.8])


def test_run_map_csv(capsys, cfg):
    code, out, _ = call(capsys, "run", "--config", cfg(PLANE | {"start": [1.0, 0.0]}),
                        "--method", "MAP", "--max-iter", "10", "--floor", "1e-300")
    rows = out.strip().splitlines()
    assert code == 0 and rows[0] == "k,error,ratio,method" and len(rows) == 12
    assert all(float(r.split(",")[2]) == pytest.approx(0.36, abs=1e-12) for r in rows[2:])


def test_run_one_step(capsys, cfg, tmp_path):
    orth = {"A": PLANE["A"], "B": {"d": 2, "basis": [0.0, 1.0]}, "start": [0.0, 1.0]}
    code, _, _ = call(capsys, "run", "--config", cfg(orth), "--method", "MAP", "--out", str(tmp_path / "o"))
    rates = json.loads((tmp_path / "o" / "rates.json").read_text())
    assert code == 0 and rates["stopped_reason"]["MAP"] == "converged_one_step"


def test_run_start_in_intersection(capsys, cfg):
    assert call(capsys, "run", "--config", cfg(SHARED | {"start": [0.0, 0.0, 1.0]}))[0] == 3


def test_run_writes_files(capsys, cfg, tmp_path):
    out = tmp_path / "out"
    assert call(capsys, "run", "--config", cfg(PLANE), "--out", str(out))[0] == 0
    assert {p.name for p in out.iterdir()} == {"rates.json", "trace.csv", "trace_MAP.csv", "trace_MSP.csv"}


def test_compare(capsys, cfg):
    code, out, _ = call(capsys, "compare", "--config", cfg(PLANE | {"start": "mu_minus"}), "-K", "5")
    data = json.loads(out)
    assert code == 0 and data["verdict"] == "MSP_WINS"


def test_verify_plane(capsys, cfg):
    code, out, _ = call(capsys, "verify", "--config", cfg(PLANE))
    data = json.loads(out)
    assert code == 0 and data["pass"] and all(c["pass"] for c in data["checks"].values())


def test_verify_low_region_with_mu_minus(capsys, cfg):
    low = {"instance": {"generator": {"d": 4, "angles": [float(np.arccos(0.3))], "seed": 2}}, "start": "mu_minus"}
    code, out, err = call(capsys, "verify", "--config", cfg(low))
    assert code == 0 and "NoSuchStart" in err
    assert "NoSuchStart" in json.loads(out)["checks"]["msp_beats_map_start"]["note"]


def test_sweep(capsys, cfg, tmp_path):
    spec = {"sweep": {"d": 4, "angle_sets": [[float(np.arccos(0.3))], [float(np.arccos(0.8))]],
                      "starts": ["mu_minus"], "seeds": [1], "K": 30}}
    code, out, _ = call(capsys, "sweep", "--config", cfg(spec), "--jobs", "2")
    rows = out.strip().splitlines()
    assert code == 0 and rows[0] == "cos_f,start_kind,verdict,lambda,mu"
    assert [r.split(",")[2] for r in rows[1:]] == ["MAP_WINS", "MSP_WINS"]
    again = call(capsys, "sweep", "--config", cfg(spec))[1]
    assert again == out
    call(capsys, "sweep", "--config", cfg(spec), "--out", str(tmp_path / "s"))
    assert len(json.loads((tmp_path / "s" / "sweep.json").read_text())["reports"]) == 2


def test_empty_sweep(capsys, cfg):
    spec = {"d": 4, "angle_sets": [], "starts": ["A"], "seeds": [1]}
    assert call(capsys, "sweep", "--config", cfg(spec))[0] == 2


def test_gen_round_trip(capsys, cfg, tmp_path):
    gen = {"generator": {"d": 7, "angles": [0.0, 0.4, 1.0], "seed": 3}}
    code, out, _ = call(capsys, "gen", "--config", cfg(gen))
    inst = json.loads(out)
    A = Subspace.from_dict(inst["A"])
    from projlab import subspaces_with_angles

    A0, _ = subspaces_with_angles(7, [0.0, 0.4, 1.0], 3)
    assert code == 0 and np.array_equal(A.basis, A0.basis)
    # re-ingesting the emitted instance gives the same angles
    code, out2, _ = call(capsys, "angles", "--config", cfg(inst, "inst.json"))
    assert code == 0 and json.loads(out2)["cosines"][1] == pytest.approx(np.cos(0.4))


def test_seed_env_overrides_config(capsys, cfg, monkeypatch):
    gen = {"generator": {"d": 5, "angles": [0.4], "seed": 3}}
    monkeypatch.setenv("PROJLAB_SEED", "11")
    inst = json.loads(call(capsys, "gen", "--config", cfg(gen))[1])
    assert inst["generated_from"]["seed"] == 11
    inst = json.loads(call(capsys, "gen", "--config", cfg(gen), "--seed", "4")[1])
    assert inst["generated_from"]["seed"] == 4


def test_module_entry_point(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(PLANE))
    res = subprocess.run([sys.executable, "-m", "projlab", "angles", "--config", str(path)],
                         capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["f"] == 1
