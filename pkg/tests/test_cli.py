import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from conftest import p2_doc
from thetaforge.cache import CacheWarning, ResultCache, cache_key
from thetaforge.cli import main
from thetaforge.geometry import load_geometry

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_compute_g(capsys):
    code, out, _ = run(capsys, "compute-g", "p2", "--order", "3")
    assert code == 0
    doc = json.loads(out)
    assert doc["coefficients"]["[1]"] == "2/1"
    assert doc["manifest"]["geometry"] == "p2"


def test_unknown_geometry(capsys):
    code, _, err = run(capsys, "compute-g", "nowhere", "--order", "3")
    assert code == 2
    assert "unknown geometry" in err


def test_order_zero(capsys):
    code, _, err = run(capsys, "compute-g", "p2", "--order", "0")
    assert code == 3
    assert "order too small" in err


def test_theta_csv(capsys):
    code, out, _ = run(capsys, "theta", "p2", "--order", "6", "--format", "csv")
    assert code == 0
    rows = csv_rows(out)
    assert len(rows) == 6
    assert rows[0] == {"beta": "[1]", "D.beta": "3", "n": "2", "theta_coeff": "2/1", "N_n1": "1/1"}
    assert out.startswith("# tool:")


def test_theta_json_same_data(capsys):
    _, out_csv, _ = run(capsys, "theta", "p2", "--order", "6", "--format", "csv")
    _, out_json, _ = run(capsys, "theta", "p2", "--order", "6", "--format", "json")
    rows = [{k: str(v) for k, v in r.items()} for r in json.loads(out_json)["rows"]]
    assert rows == csv_rows(out_csv)


def test_non_log_cy(capsys, tmp_path):
    path = tmp_path / "conic.json"
    path.write_text(json.dumps(p2_doc(D=("0", "2", "0"), name="conic")))
    code, _, err = run(capsys, "theta", str(path), "--order", "3")
    assert code == 2
    with pytest.warns(Warning):
        code, out, _ = run(capsys, "theta", str(path), "--order", "3", "--experimental")
    assert code == 0
    assert json.loads(out)["manifest"]["experimental"] is True


def test_two_point_table(capsys):
    code, out, _ = run(capsys, "two-point-table", "p2", "--order", "4", "--format", "csv")
    assert code == 0
    rows = {(r["beta"], r["k"], r["p"]): r["value"] for r in csv_rows(out)}
    assert rows[("[1]", "2", "1")] == "1/1"
    assert rows[("[1]", "1", "2")] == "4/1"


def test_two_point_formal(capsys):
    _, out, _ = run(capsys, "two-point-table", "p2", "--order", "2", "--format", "csv", "--mode", "formal")
    rows = csv_rows(out)
    assert {r["mode"] for r in rows} == {"formal"}
    assert rows[-1]["value"] == "25/1"


def test_missing_geometry_file(capsys):
    code, _, _ = run(capsys, "two-point-table", "/does/not/exist.json", "--order", "2")
    assert code == 2


def test_local_and_mirror_map(capsys):
    code, out, _ = run(capsys, "local-invariants", "p2", "--order", "2")
    assert code == 0
    assert [r["local_value"] for r in json.loads(out)["rows"]] == ["-2/1", "5/1"]
    code, out, _ = run(capsys, "mirror-map", "p2", "--order", "2")
    assert json.loads(out)["inverse"]["0"] == {"[1]": "1/1", "[2]": "-6/1"}


@pytest.mark.parametrize("geom,order", [("p2", "6"), ("p1xp1", "5")])
def test_verify(capsys, geom, order):
    code, out, err = run(capsys, "verify", geom, "--order", order)
    assert code == 0
    assert json.loads(out)["passed"] is True
    assert "all checks passed" in err


def test_verify_fails_on_poisoned_cache(capsys, tmp_path):
    cache_dir = tmp_path / "poison"
    X = load_geometry("p2")
    key = cache_key(X.source_hash, "local", 3, "degree||0.1.0")
    ResultCache(cache_dir).put(key, {"[1]": "-2/1", "[2]": "6/1", "[3]": "-32/1"})
    code, out, err = run(capsys, "verify", "p2", "--order", "3", "--cache-dir", str(cache_dir))
    assert code == 1
    assert "FAIL sign_correspondence" in err


def test_corrupted_cache_recovers(capsys, tmp_path):
    cache_dir = tmp_path / "c"
    args = ["theta", "p2", "--order", "4", "--format", "csv", "--cache-dir", str(cache_dir)]
    _, first, _ = run(capsys, *args)
    for f in cache_dir.rglob("*.json"):
        f.write_text("{not json")
    with pytest.warns(CacheWarning):
        code, second, _ = run(capsys, *args)
    assert code == 0 and first == second
    code, _, _ = run(capsys, "verify", "p2", "--order", "4", "--cache-dir", str(cache_dir))
    assert code == 0


def test_deterministic_and_cache_transparent(tmp_path):
    outs = []
    for i, cache in enumerate(["cold", "cold", "other"]):
        dest = tmp_path / f"out{i}.csv"
        main(["two-point-table", "p1xp1", "--order", "3", "--format", "csv",
              "--cache-dir", str(tmp_path / cache), "-o", str(dest)])
        outs.append(dest.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_no_cache_flag(tmp_path):
    dest = tmp_path / "g.json"
    main(["compute-g", "p2", "--order", "6", "--no-cache", "--cache-dir", str(tmp_path / "x"), "-o", str(dest)])
    assert not (tmp_path / "x").exists()
    assert json.loads(dest.read_text())["coefficients"]["[2]"] == "15/1"


def test_env_var_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("THETAFORGE_CACHE", str(tmp_path / "env"))
    main(["compute-g", "p2", "--order", "3", "-o", str(tmp_path / "g.json")])
    assert list((tmp_path / "env").rglob("*.json"))


PROVENANCE = json.loads((GOLDEN / "provenance.json").read_text())


@pytest.mark.parametrize("name", sorted(PROVENANCE["files"]))
def test_golden(tmp_path, name):
    argv = PROVENANCE["files"][name].split()[1:]
    dest = tmp_path / name
    assert main(argv + ["-o", str(dest)]) == 0
    assert dest.read_text() == (GOLDEN / name).read_text()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "thetaforge", "compute-g", "p2", "--order", "3", "--no-cache"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["coefficients"]["[1]"] == "2/1"
