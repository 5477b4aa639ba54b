import io
import json

import pytest

from src.main import run
from src.utils.config import Config


def _run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def e5_path(data_dir):
    return str(data_dir / "ulmer_d5_q3.json")


@pytest.fixture
def e5_spectrum_path(tmp_path, e5_spectrum):
    path = tmp_path / "e5_spectrum.json"
    path.write_text(json.dumps(e5_spectrum.to_json()), encoding="utf-8")
    return str(path)


def test_places():
    code, out, _ = _run("places", "--q", "3", "--max-degree", "2")
    assert code == 0
    doc = json.loads(out)
    assert [c["count"] for c in doc["counts"]] == [4, 3]
    assert len(doc["places"]) == 7
    assert doc["places"][0]["kind"] == "infinite"


def test_places_as_csv():
    code, out, _ = _run("places", "--q", "3", "--max-degree", "1", "--csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "kind,degree,generator,coefficients"
    assert len(lines) == 5


def test_lpoly(e5_path):
    code, out, _ = _run("lpoly", "--curve", e5_path, "--degree", "4")
    assert code == 0
    doc = json.loads(out)
    assert doc["coeffs"] == [1, 0, 0, 0, -81]
    assert doc["epsilon"] == -1
    assert doc["rank"] == 1
    assert doc["exact_turns"] == [["0/1", 1], ["1/4", 1], ["1/2", 1], ["3/4", 1]]


def test_race(e5_path):
    code, out, _ = _run("race", "--curve", e5_path, "--degree", "4", "--max-X", "6")
    assert code == 0
    doc = json.loads(out)
    rows = doc["rows"]
    assert [r["X"] for r in rows] == [1, 2, 3, 4, 5, 6]
    assert rows[0]["T_direct"] == pytest.approx(1 / 3)
    assert [r["sign"] for r in rows[:4]] == [1, 0, 0, 1]
    assert {r["source"] for r in rows} == {"counted"}
    assert doc["mean_variance"]["variance_corrected"] == pytest.approx(1.6005, abs=1e-4)


def test_density_from_spectrum_file(e5_spectrum_path):
    code, out, _ = _run("density", "--spectrum", e5_spectrum_path)
    assert code == 0
    doc = json.loads(out)
    assert doc["method"] == "exact-periodic"
    assert doc["interval"] == ["1/2", "1/1"]
    assert doc["period"] == 4


def test_limitlaw_on_spectrum_file(e5_spectrum_path):
    code, out, _ = _run("limitlaw", "--spectrum", e5_spectrum_path, "--samples", "20000", "--seed", "1")
    assert code == 0
    doc = json.loads(out)
    assert doc["seed"] == 1
    assert doc["delta_mc"] == pytest.approx(0.75, abs=0.02)
    assert doc["delta_cf"] == pytest.approx(0.75, abs=0.02)
    assert "berry_esseen" in doc


def test_limitlaw_synthetic_without_inversion():
    code, out, _ = _run("limitlaw", "--synthetic", "25", "12", "0", "--samples", "5000", "--no-cf")
    assert code == 0
    doc = json.loads(out)
    assert doc["delta_cf"] is None
    assert 0.0 <= doc["delta_mc"] <= 1.0


def test_ulmer_as_csv():
    code, out, _ = _run("ulmer", "--p", "3", "--d", "5", "--csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "p,k,d,n,rank,L_degree,period,delta_low,delta_high,error"
    assert lines[1] == "3,1,5,2,1,4,4,1/2,1/1,"


def test_ulmer_with_theorems():
    code, out, _ = _run("ulmer", "--p", "3", "--k", "5", "--d", "5", "--check-theorems")
    assert code == 0
    doc = json.loads(out)
    assert doc["delta"]["value"] == "1/2"
    statuses = {r["regime"]: r["status"] for r in doc["theorem_report"]["results"]}
    assert statuses["unbiased"] == "holds"


def test_schema():
    code, out, _ = _run("schema", "curve")
    assert code == 0
    assert "family" in json.loads(out)["properties"]


def test_missing_argument_is_a_config_error():
    code, out, err = _run("places", "--q", "3")
    assert code == 1
    assert out == ""
    assert json.loads(err)["error"] == "ConfigError"


def test_invalid_run_configuration():
    code, _, err = _run("places", "--q", "3", "--max-degree", "1", "--threads", "0")
    assert code == 1
    assert json.loads(err)["error"] == "ConfigError"


def test_unknown_schema():
    code, _, err = _run("schema", "nothing")
    assert code == 1
    assert "unknown schema" in json.loads(err)["message"]


def test_work_bound_exit_code(e5_path):
    code, _, err = _run("lpoly", "--curve", e5_path, "--degree", "4", "--max-residue-field", "3")
    assert code == 2
    record = json.loads(err)
    assert record["error"] == "WorkBoundExceeded"
    assert record["bound"] == "max_residue_field"


def test_config_file_and_save(tmp_path, monkeypatch):
    monkeypatch.setattr(Config, "OUTPUT_DIR", str(tmp_path / "out"))
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"output_format": "csv", "seed": 3}), encoding="utf-8")
    code, out, _ = _run("places", "--q", "5", "--max-degree", "1", "--config", str(config), "--save", "f5")
    assert code == 0
    saved = tmp_path / "out" / "f5.csv"
    assert saved.read_text(encoding="utf-8") == out


def test_missing_config_file(tmp_path):
    code, _, err = _run("places", "--q", "3", "--max-degree", "1", "--config", str(tmp_path / "none.json"))
    assert code == 1
    assert json.loads(err)["error"] == "ConfigError"
