import csv
import io
import json
import math

import pytest

from htncode.cli import EX_USAGE, main, parse_bulk, parse_interval, parse_range, UsageError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_nonhyperbolic_exits_one(capsys):
    code, out, err = run(capsys, "tiling", "--p", "4", "--q", "4", "--layers", "1")
    assert code == 1 and "NonHyperbolic" in err and not out


def test_tiling_json_counts(capsys):
    code, out, _ = run(capsys, "tiling", "--p", "7", "--q", "3", "--layers", "2")
    data = json.loads(out)
    assert code == 0
    assert data["bulkLegCount"] > data["boundaryLegCount"] and not data["isometryPossible"]
    code, out, _ = run(capsys, "tiling")
    data = json.loads(out)
    assert data["bulkLegCount"] < data["boundaryLegCount"] and data["isometryPossible"]


def test_tiling_dot(capsys):
    code, out, _ = run(capsys, "tiling", "--format", "dot")
    assert code == 0 and out.startswith("graph")


def test_rg_balanced_alpha(capsys):
    code, out, _ = run(capsys, "rg", "--alpha", "0.7071")
    data = json.loads(out)
    assert code == 0
    assert data["lambda"] == pytest.approx(1.0, abs=1e-6)
    assert data["predictedLambda"] == pytest.approx(1.0, abs=1e-6)


def test_rg_alpha_sweep_csv(capsys):
    code, out, _ = run(capsys, "rg", "--alpha-sweep", "0.1:0.9:0.2")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [float(r["alpha"]) for r in rows] == [0.1, 0.3, 0.5, 0.7, 0.9]
    for r in rows:
        a = float(r["alpha"])
        assert float(r["lambda"]) == pytest.approx(math.sqrt(2 * a * math.sqrt(1 - a * a)), abs=1e-8)
        assert float(r["delta"]) == pytest.approx(-math.log(float(r["lambda"])) / math.log(2 + math.sqrt(3)))


def test_rg_happy(capsys):
    code, out, _ = run(capsys, "rg", "--happy", "--tensor", "pentagon513", "--d", "2")
    assert code == 0 and json.loads(out)["pass"]


def test_verify_default(capsys):
    code, out, _ = run(capsys, "verify", "--tensor", "a4112", "--edge", "hadamard4")
    data = json.loads(out)
    assert code == 0 and data["pass"]
    assert data["code"]["wPrimePass"] and data["code"]["cyclicInvariance"]
    assert "hadamard4" in data["passingEdges"]
    assert data["edges"]["hadamard4"]["unitary"] and not data["edges"]["identity"]["uPrimePass"]
    assert data["signSlipH4"]["unitary"] is False


def test_verify_happy(capsys):
    code, out, _ = run(capsys, "verify", "--tensor", "pentagon513", "--p", "4", "--q", "5")
    data = json.loads(out)
    assert code == 0 and data["code"]["perfect"] and data["edge"] == "identity"


def test_verify_counting_failure_exits_two(capsys):
    code, out, _ = run(capsys, "verify", "--tensor", "pentagon513", "--p", "7", "--q", "3", "--layers", "2")
    assert code == 1 or (code == 2 and not json.loads(out)["pass"])


def test_byte_identical_reruns(capsys):
    args = ("rg", "--alpha", "0.3")
    first = run(capsys, *args)[1]
    assert first == run(capsys, *args)[1]
    args = ("reconstruct", "--region", "3..11")
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        ["tiling", "--bogus"],
        ["tiling", "--tensor", "nope"],
        ["rg", "--alpha", "2"],
        ["reconstruct"],
        ["reconstruct", "--region", "zz"],
        ["entropy", "--region", "0..3", "--bulk", "open"],
        ["rg", "--alpha-sweep", "1:0:0.1"],
        ["tiling", "--jobs", "0"],
    ],
)
def test_usage_errors_exit_64(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EX_USAGE and err


def test_config_file_merges_under_flags(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"p": 7, "q": 3, "layers": 2}))
    code, out, _ = run(capsys, "tiling", "--config", str(cfg))
    assert json.loads(out)["p"] == 7
    code, out, _ = run(capsys, "tiling", "--config", str(cfg), "--p", "8")
    assert json.loads(out)["p"] == 8
    cfg.write_text(json.dumps({"nope": 1}))
    assert run(capsys, "tiling", "--config", str(cfg))[0] == EX_USAGE


def test_out_file(capsys, tmp_path):
    target = tmp_path / "t.json"
    code, out, _ = run(capsys, "tiling", "--out", str(target))
    assert code == 0 and not out
    assert json.loads(target.read_text())["q"] == 4


def test_reconstruct_json_and_dot(capsys, tmp_path):
    dot = tmp_path / "w.dot"
    code, out, _ = run(capsys, "reconstruct", "--region", "0..37", "--layers", "2", "--dot", str(dot))
    data = json.loads(out)
    assert code == 0 and data["residual"]
    assert not set(data["residual"]) & set(data["complementWedge"])
    assert "gold" in dot.read_text()


def test_reconstruct_happy_mode(capsys):
    code, out, _ = run(capsys, "reconstruct", "--tensor", "pentagon513", "--p", "4", "--q", "5", "--region", "0..5")
    assert code == 0 and json.loads(out)["moveSet"] == "happy"


def test_erasures(capsys, tmp_path):
    dot = tmp_path / "e.dot"
    code, out, _ = run(capsys, "erasures", "--sites", "0,1,2", "--dot", str(dot))
    data = json.loads(out)
    assert code == 0 and data["erased"] == [0, 1, 2]
    assert dot.read_text().startswith("graph")
    assert run(capsys, "erasures", "--sites", "99")[0] == 1


def test_entropy_region_and_rt(capsys):
    code, out, _ = run(capsys, "entropy", "--region", "0..4", "--rt", "--decompose")
    data = json.loads(out)
    assert code == 0
    assert data["entropy_over_log4"] == pytest.approx(data["cutLength"])
    assert abs(data["decomposition"]["gap"]) < 1e-8


def test_entropy_sweep_csv(capsys):
    code, out, _ = run(capsys, "entropy", "--sweep", "--max-len", "2")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 40
    for r in rows:
        assert float(r["S_A"]) == pytest.approx(int(r["cutLength"]) * math.log(4))


def test_entropy_state_out_respects_cap(capsys, tmp_path):
    # The dense boundary state of a layer-one patch has 4^20 entries.
    target = tmp_path / "state.json"
    code, _, err = run(capsys, "entropy", "--region", "0..2", "--state-out", str(target))
    assert code == 1 and "CapExceeded" in err
    assert not target.exists()


def test_jobs_do_not_change_output(capsys):
    one = run(capsys, "rg", "--alpha-sweep", "0.1:0.5:0.1", "--jobs", "1")[1]
    two = run(capsys, "rg", "--alpha-sweep", "0.1:0.5:0.1", "--jobs", "2")[1]
    assert one == two


def test_dim_cap_exceeded_exits_one(capsys, monkeypatch):
    monkeypatch.delenv("HTN_DIM_CAP", raising=False)
    code, _, err = run(capsys, "entropy", "--region", "0..9", "--dim-cap", "16")
    assert code == 1 and "CapExceeded" in err


def test_correlators_csv(capsys):
    code, out, _ = run(capsys, "correlators", "--p", "4", "--q", "5", "--tensor", "pentagon513", "--bulk", "z0")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 25 * 24 // 2
    assert max(abs(float(r["re"])) for r in rows) <= 1e-10


def test_state_dep_and_push(capsys):
    code, out, _ = run(capsys, "state-dep", "--scenario", "both")
    data = json.loads(out)
    assert code == 0 and data["pass"]
    assert data["XZ"]["cutLength"] == data["ZX"]["cutLength"]
    code, out, _ = run(capsys, "push", "--scenario", "both")
    data = json.loads(out)
    assert code == 0 and all(data[s][op]["verified"] for s in ("XZ", "ZX") for op in ("X", "Z"))


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0


def test_parsers():
    assert parse_interval("18..1", 20).legs == frozenset({18, 19, 0, 1})
    with pytest.raises(UsageError):
        parse_interval("0..20", 20)
    assert parse_range("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_bulk("open", 4) is None
    assert parse_bulk("z2", 4)[2] == 1
    with pytest.raises(UsageError):
        parse_bulk("x9", 4)
    with pytest.raises(UsageError):
        parse_bulk("alpha:0.3", 2)
