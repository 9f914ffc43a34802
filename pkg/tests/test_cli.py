import json

import pytest

from mmqi.cli import fmt, run

HEADER = "draw,N,M,direction_seed,qfi,budget,margin"


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if code == 0 else None), err


def write_cfg(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_fmt():
    assert fmt(0.1) == "0.1"
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(2.0) == "2"
    assert fmt(-0.0) == "0"


def test_qfi_noon(capsys, tmp_path):
    code, rep, _ = call(capsys, "qfi", "--config", write_cfg(tmp_path, {"N": 4, "M": 2, "state": {"kind": "noon"}}))
    assert code == 0
    assert rep["outputs"] == {"qfi": 16.0, "particle_budget": 4.0, "witness": "ENTANGLED"}
    assert list(rep) == ["task", "inputs", "outputs", "warnings", "versions", "seed"]


def test_qfi_coherent_pole(capsys, tmp_path):
    cfg = {"N": 3, "M": 1, "state": {"kind": "coherent", "z": 1.0}}
    code, rep, _ = call(capsys, "qfi", "--config", write_cfg(tmp_path, cfg))
    assert rep["outputs"]["qfi"] == 0
    assert rep["outputs"]["witness"] == "SEPARABLE_CONSISTENT"


def test_qfi_random_separable(capsys, tmp_path):
    cfg = {"N": 3, "M": 2, "state": {"kind": "random_separable", "seed": 7, "n_components": 1000}}
    code, rep, _ = call(capsys, "qfi", "--config", write_cfg(tmp_path, cfg))
    assert code == 0 and rep["outputs"]["qfi"] <= 3 + 1e-8


def test_qfi_fluctuating_n(capsys, tmp_path):
    cfg = {"P": {"1": 0.5, "3": 0.5}, "M": 1, "state": {"kind": "coherent", "z": 0.5}}
    code, rep, _ = call(capsys, "qfi", "--config", write_cfg(tmp_path, cfg))
    assert rep["outputs"]["qfi"] == pytest.approx(2.0)
    assert rep["outputs"]["particle_budget"] == pytest.approx(2.0)


def test_qfi_distinguishable(capsys, tmp_path):
    cfg = {"N": 3, "M": 2, "representation": "distinguishable", "state": {"kind": "noon", "mode": 1}}
    code, rep, _ = call(capsys, "qfi", "--config", write_cfg(tmp_path, cfg))
    assert rep["outputs"]["qfi"] == pytest.approx(9.0)


@pytest.mark.parametrize(
    "cfg",
    [
        {"N": 2, "P": {"1": 1.0}, "state": {"kind": "noon"}},
        {"N": 2, "state": {"kind": "coherent", "z": 2}},
        {"N": 2, "bogus": 1, "state": {"kind": "noon"}},
        {"P": {"1": 0.3}, "state": {"kind": "noon"}},
        {"N": 2, "state": {"kind": "noon"}, "generator": {"direction": [1, 1, 0]}},
        {"N": 2},
    ],
)
def test_config_errors(capsys, tmp_path, cfg):
    code, _, err = call(capsys, "qfi", "--config", write_cfg(tmp_path, cfg))
    assert code == 2
    assert "config error" in err


def test_invalid_json(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert call(capsys, "qfi", "--config", str(path))[0] == 2


def test_schema_violation_writes_nothing(capsys, tmp_path):
    out = tmp_path / "p.csv"
    code = run(["pattern", "--z", "1.5", "--out", str(out)])
    capsys.readouterr()
    assert code == 2
    assert list(tmp_path.iterdir()) == []


def test_numeric_error_exit(capsys, tmp_path):
    cfg = {"N": 4, "M": 1, "state": {"kind": "noon"}}
    code, _, err = call(capsys, "sensitivity", "--config", write_cfg(tmp_path, cfg))
    assert code == 3
    assert "estimator_sensitivity" in err and "<Jx>" in err


def test_io_error_exit(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = call(capsys, "reproduce-fig3", "--outdir", str(blocker / "sub"))
    assert code == 4
    assert "I/O error" in err


def test_bound_sweep(capsys, tmp_path):
    out = tmp_path / "sweep.csv"
    code, rep, _ = call(capsys, "bound-sweep", "--draws", "10", "--seed", "3", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == HEADER
    assert len(lines) == 11
    margins = [float(line.split(",")[-1]) for line in lines[1:]]
    assert max(margins) <= 1e-8
    assert rep["outputs"]["bound_holds"] is True


def test_bound_sweep_controls(capsys, tmp_path):
    out = tmp_path / "sweep.csv"
    code, rep, _ = call(capsys, "bound-sweep", "--draws", "4", "--noon-controls", "2", "--out", str(out))
    lines = out.read_text().splitlines()
    assert lines[0] == HEADER and len(lines) == 7
    flagged = rep["outputs"]["entangled"]
    assert [f["draw"] for f in flagged] == [4, 5]
    assert all(f["entangled"] is True and f["margin"] > 0 for f in flagged)
    assert rep["outputs"]["separable_max_margin"] <= 1e-8


def test_bound_sweep_distinguishable(capsys, tmp_path):
    out = tmp_path / "sweep.csv"
    code, rep, _ = call(
        capsys, "bound-sweep", "--representation", "distinguishable", "--draws", "6", "--out", str(out)
    )
    assert code == 0 and rep["outputs"]["max_margin"] <= 1e-8


def test_pattern_outputs(capsys, tmp_path):
    out = tmp_path / "fig.csv"
    code, rep, _ = call(capsys, "pattern", "--out", str(out), "--grid", "20000")
    assert code == 0
    summary = json.loads((tmp_path / "fig.json").read_text())
    assert list(summary) == ["nu2", "eta2", "ratio", "p_max", "p_min"]
    assert summary["eta2"] == pytest.approx(0.3276, abs=1e-4)
    assert out.read_text().splitlines()[0] == "x,p"
    assert rep["warnings"][0]["code"] == "W_OPERATIONAL_WITNESS_MULTIMODE"


def test_pattern_zeta_one_density_model(capsys, tmp_path):
    z = 0.7
    out = tmp_path / "two.csv"
    code, rep, _ = call(
        capsys, "pattern", "--zeta", "1", "--z", str(z), "--model", "density", "--grid", "20000", "--out", str(out)
    )
    assert rep["outputs"]["nu2"] == pytest.approx(4 * z * (1 - z), abs=1e-4)


def test_sensitivity_snl(capsys, tmp_path):
    code, rep, _ = call(capsys, "sensitivity", "--N", "4", "--m", "1000")
    assert rep["outputs"]["shot_noise_ratio"] == pytest.approx(1.0, abs=1e-9)
    assert rep["inputs"]["state"] == {"kind": "coherent", "z": 0.5}


def test_sensitivity_empirical(capsys):
    code, rep, _ = call(capsys, "sensitivity", "--theta", "0.05", "--repeats", "200", "--seed", "5")
    out = rep["outputs"]
    assert abs(out["empirical_delta2_theta"] - out["delta2_theta"]) < 5 * out["empirical_standard_error"]


def test_reproduce_fig3(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    code, rep, _ = call(capsys, "reproduce-fig3", "--outdir", str(a), "--grid", "20000")
    assert code == 0
    call(capsys, "reproduce-fig3", "--outdir", str(b), "--grid", "20000")
    names = ["pattern.csv", "summary.json", "witness_comparison.json"]
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes()
    summary = json.loads((a / "summary.json").read_text())
    assert summary["ratio"] == pytest.approx(0.985, abs=0.02)
    wc = json.loads((a / "witness_comparison.json").read_text())
    assert wc["operational_xi"] < 1
    assert wc["xi_squared"] >= 1
    assert wc["qfi_max"] <= wc["particle_budget"] + 1e-8
    assert wc["warnings"][0]["code"] == "W_OPERATIONAL_WITNESS_MULTIMODE"


def test_files_are_readable(tmp_path, capsys):
    out = tmp_path / "s.csv"
    run(["bound-sweep", "--draws", "1", "--out", str(out)])
    capsys.readouterr()
    assert out.stat().st_mode & 0o044
