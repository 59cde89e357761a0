import csv
import json

import numpy as np
import pytest

from apx.cli import CHECK_HELP, main
from apx.harness.checks import CHECK_IDS


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write_config(tmp_path, checks, **extra):
    cfg = {"schema_version": 1, "seed": 7, "checks": checks,
           "output": {"directory": str(tmp_path / "out"), "formats": ["csv", "json"]}, **extra}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


# ---------------------------------------------------------------- classify-weight

def test_classify_sqrt_weight(capsys):
    code, out, _ = run_cli(capsys, "classify-weight", "--family", "power", "--x0", "0", "--alpha", "0.5",
                           "--p", "2")
    assert code == 0
    rep = json.loads(out)
    assert rep["A_p"]["in_class"] is True
    assert rep["A_p"]["value"] == pytest.approx(1.5, abs=2e-3)
    assert rep["admissible"] is True


def test_classify_unit_weight(capsys):
    code, out, _ = run_cli(capsys, "classify-weight", "--family", "power", "--alpha", "0", "--p", "2")
    assert code == 0
    assert json.loads(out)["A_p"]["value"] == pytest.approx(1.0, rel=1e-10)


def test_classify_outside_class(capsys):
    code, out, _ = run_cli(capsys, "classify-weight", "--family", "power", "--alpha", "1.5", "--p", "2")
    assert code == 0
    rep = json.loads(out)
    assert rep["A_p"]["in_class"] is False and rep["admissible"] is False


def test_classify_nonintegrable_exponent(capsys):
    code, out, err = run_cli(capsys, "classify-weight", "--family", "power", "--alpha", "-1.5")
    assert code == 3
    assert out == ""
    assert "integrab" in err


def test_classify_parse_error(capsys):
    code, _, _ = run_cli(capsys, "classify-weight", "--alpha", "half")
    assert code == 2


def test_classify_descriptor_json(capsys):
    desc = json.dumps({"family": "product", "factors": [[0.0, 0.5], [1.0, -0.25]]})
    code, out, _ = run_cli(capsys, "classify-weight", "--descriptor", desc, "--p", "2")
    assert code == 0
    assert json.loads(out)["A_p"]["in_class"] is True


# ---------------------------------------------------------------- run

def test_run_empty_checks(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "run", str(write_config(tmp_path, [])))
    assert code == 0 and out == ""
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["checks"] == [] and summary["exit_code"] == 0
    assert summary["metadata"]["seed"] == 7


def test_run_jackson_on_low_degree_polynomial(tmp_path, capsys):
    poly = {"family": "trig_poly", "a0": 0.5, "a": [1.0, 0.0, 0.0, 0.25], "b": [0.0, 0.3]}
    path = write_config(tmp_path, [{"check_id": "jackson", "name": "pi4", "functions": [poly],
                                    "n_list": [4, 8, 16], "orders": {"r": 1}}])
    code, out, _ = run_cli(capsys, "run", str(path))
    assert code == 0
    assert out.split() == ["bounded", "pi4"]
    csv_files = sorted((tmp_path / "out").glob("*.csv"))
    assert [f.name for f in csv_files] == ["00_pi4.csv"]
    rows = list(csv.DictReader(csv_files[0].open()))
    assert next(iter(rows[0])) == "check_id"
    ratios = [float(r["ratio"]) for r in rows]
    assert len(ratios) == 3 and max(ratios) < 1e-8
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    entry = summary["checks"][0]
    assert entry["verdict"] == "bounded" and entry["csv"] == "00_pi4.csv"
    assert entry["constants"]["C1"]["value"] == pytest.approx(2 ** 0.5 * 2 * np.pi)


def test_run_out_flag_and_only(tmp_path, capsys):
    path = write_config(tmp_path, [
        {"check_id": "nikolskii", "p": 2, "q": 2, "n_list": [4], "params": {"count": 1}},
        {"check_id": "bernstein", "p": 2, "n_list": [4], "orders": {"r": [1]}, "params": {"count": 1}},
    ])
    target = tmp_path / "elsewhere"
    code, out, _ = run_cli(capsys, "run", str(path), "--out", str(target), "--only", "bernstein")
    assert code == 0
    assert len(out.splitlines()) == 1
    assert len(list(target.glob("*.csv"))) == 1


def test_run_rejects_inverted_exponents(tmp_path, capsys):
    path = write_config(tmp_path, [{"check_id": "nikolskii", "p": 1, "q": 2, "n_list": [4]}])
    code, _, err = run_cli(capsys, "run", str(path))
    assert code == 2 and err


@pytest.mark.parametrize("body", [
    "{not json",
    json.dumps({"schema_version": 2, "checks": []}),
    json.dumps({"schema_version": 1, "checks": [{"check_id": "nope"}]}),
    json.dumps({"schema_version": 1, "checks": [], "extra": 1}),
    json.dumps({"schema_version": 1, "checks": [{"check_id": "jackson", "weight": "missing"}]}),
    json.dumps({"schema_version": 1, "weights": [{"id": "a", "family": "constant"},
                                                 {"id": "a", "family": "constant"}], "checks": []}),
])
def test_run_config_errors(tmp_path, capsys, body):
    path = tmp_path / "bad.json"
    path.write_text(body)
    code, _, err = run_cli(capsys, "run", str(path))
    assert code == 2
    assert err.startswith("apx:")


def test_run_missing_file(tmp_path, capsys):
    assert run_cli(capsys, "run", str(tmp_path / "absent.json"))[0] == 2


def test_run_bad_weight_exponent_in_config(tmp_path, capsys):
    path = write_config(tmp_path, [], weights=[{"id": "w", "family": "power", "alpha": -2.0}])
    assert run_cli(capsys, "run", str(path))[0] == 3


# ---------------------------------------------------------------- list / constants

def test_list_checks(capsys):
    code, out, _ = run_cli(capsys, "list-checks")
    assert code == 0
    assert [line.split()[0] for line in out.splitlines()] == list(CHECK_IDS)
    assert set(CHECK_HELP) == set(CHECK_IDS)


def test_print_constants(capsys):
    code, out, _ = run_cli(capsys, "print-constants", "--family", "constant", "--p", "2")
    assert code == 0
    rep = json.loads(out)
    assert rep["constants"]["C1"]["value"] == pytest.approx(8.8858, abs=5e-5)
    assert rep["constants"]["C2"]["value"] == pytest.approx(65.297, abs=5e-4)


def test_print_constants_sup_norm(capsys):
    code, out, _ = run_cli(capsys, "print-constants", "--p", "inf")
    assert code == 0
    assert json.loads(out)["constants"]["C1"]["value"] == 1.0


def test_print_constants_inadmissible(capsys):
    code, _, err = run_cli(capsys, "print-constants", "--family", "power", "--alpha", "0.5", "--p", "1")
    assert code == 2 and err


def test_no_subcommand_is_parse_error(capsys):
    assert run_cli(capsys)[0] == 2


def test_version(capsys):
    assert run_cli(capsys, "--version")[0] == 0
