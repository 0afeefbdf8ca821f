import json

import pytest

from toposval.cli import main

FIXA = {
    "dim": 3,
    "contexts": [
        {"id": "V1", "dim": 3, "atoms": [
            [[1, 0, 0], [0, 0, 0], [0, 0, 0]],
            [[0, 0, 0], [0, 1, 0], [0, 0, 0]],
            [[0, 0, 0], [0, 0, 0], [0, 0, 1]],
        ]},
        {"id": "V2", "dim": 3, "atoms": [
            [[1, 0, 0], [0, 0, 0], [0, 0, 0]],
            [[0, 0, 0], [0, 1, 0], [0, 0, 1]],
        ]},
    ],
}

STATE = {"type": "pure", "data": [1, 0, 0]}


@pytest.fixture
def fixa_file(tmp_path):
    p = tmp_path / "fixa.json"
    p.write_text(json.dumps(FIXA))
    return str(p)


@pytest.fixture
def state_file(tmp_path):
    p = tmp_path / "state.json"
    p.write_text(json.dumps(STATE))
    return str(p)


def run(tmp_path, *argv):
    out = tmp_path / "report.json"
    code = main([*argv, "--out", str(out)])
    return code, json.loads(out.read_text())


def test_build_poset(tmp_path, fixa_file):
    code, report = run(tmp_path, "build-poset", "--input", fixa_file, "--add-trivial")
    assert code == 0
    assert report["result"]["contextCount"] == 3
    assert report["result"]["coverCount"] == 2
    assert report["tool"] == "toposval"
    assert fixa_file in report["inputs"]
    assert report["tolerances"]["atom"] == 1e-8


def test_build_poset_empty_with_trivial(tmp_path):
    p = tmp_path / "empty.json"
    p.write_text(json.dumps({"dim": 2, "contexts": []}))
    code, report = run(tmp_path, "build-poset", "--input", str(p), "--add-trivial")
    assert code == 0
    assert report["result"]["contextCount"] == 1


def test_build_poset_mixed_dims_error(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps([
        {"id": "A", "dim": 2, "atoms": [[[1, 0], [0, 1]]]},
        {"id": "B", "dim": 3, "atoms": [[[1, 0, 0], [0, 1, 0], [0, 0, 1]]]},
    ]))
    code, report = run(tmp_path, "build-poset", "--input", str(p))
    assert code == 2
    assert "error" in report["result"]


def test_check_iso(tmp_path, fixa_file):
    code, report = run(tmp_path, "check-iso", "--input", fixa_file, "--add-trivial")
    assert code == 0
    assert report["result"]["passed"]
    assert report["result"]["failures"] == []


def test_valuate_unit_row(tmp_path, fixa_file, state_file):
    code, report = run(tmp_path, "valuate", "--input", fixa_file, "--add-trivial",
                       "--state", state_file)
    assert code == 0
    table = report["result"]["valuation"]
    assert table["V1"]["7"] == ["V1", "V2", "Vtriv"]   # unit proposition
    assert table["V1"]["0"] == []


def test_valuate_with_r(tmp_path, fixa_file, state_file):
    code, report = run(tmp_path, "valuate", "--input", fixa_file, "--add-trivial",
                       "--state", state_file, "--r", "0.5")
    assert code == 0
    assert report["result"]["r"] == 0.5
    assert report["result"]["valuation"]["Vtriv"]["1"] == ["Vtriv"]


def test_missing_input_file(tmp_path):
    code, report = run(tmp_path, "build-poset", "--input", str(tmp_path / "nope.json"))
    assert code == 2
    assert "error" in report["result"]


def test_supports(tmp_path, fixa_file, state_file):
    code, report = run(tmp_path, "supports", "--input", fixa_file, "--add-trivial",
                       "--state", state_file)
    assert code == 0
    assert report["result"]["supports"] == {"V1": "1", "V2": "1", "Vtriv": "1"}
    assert report["result"]["globalElementCondition"]["status"] == "pass"


def test_verify_theorems(tmp_path, fixa_file, state_file):
    code, report = run(tmp_path, "verify-theorems", "--input", fixa_file,
                       "--add-trivial", "--state", state_file)
    assert code == 0
    r = report["result"]
    assert r["definition3"]["passed"]
    assert r["theorem1"]["conditions_hold"] and r["theorem2"]["conditions_hold"]
    assert r["reconstructFromSupports"]["equal"]


def test_verify_theorems_r(tmp_path, fixa_file, state_file):
    code, report = run(tmp_path, "verify-theorems", "--input", fixa_file,
                       "--add-trivial", "--state", state_file, "--r", "0.7")
    assert code == 0   # contracts hold even when the r-family loses condition (ii)


def test_survey_relations(tmp_path, fixa_file, state_file):
    code, report = run(tmp_path, "survey-relations", "--input", fixa_file,
                       "--add-trivial", "--state", state_file,
                       "--relation", "le", "--relation", "random:2", "--seed", "3")
    assert code == 0
    surveys = report["result"]["surveys"]
    assert len(surveys) == 3
    assert surveys[0]["all_hold"]


def test_ks_bundled(tmp_path):
    code, report = run(tmp_path, "ks")
    assert code == 0
    assert report["result"]["exists"] is False
    assert report["result"]["fixture"]["parityObstruction"]


def test_ks_expect_mismatch(tmp_path, fixa_file):
    code, report = run(tmp_path, "ks", "--input", fixa_file, "--add-trivial",
                       "--expect", "none")
    assert code == 1
    assert report["result"]["exists"] is True


def test_ocat(tmp_path, state_file):
    p = tmp_path / "ops.json"
    p.write_text(json.dumps({
        "dim": 3,
        "operators": [
            {"id": "A", "matrix": [[-1, 0, 0], [0, 1, 0], [0, 0, 2]]},
            {"id": "Asq", "matrix": [[1, 0, 0], [0, 1, 0], [0, 0, 4]]},
            {"id": "one", "matrix": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]},
        ],
    }))
    code, report = run(tmp_path, "ocat", "--input", str(p), "--state", state_file)
    assert code == 0
    r = report["result"]
    assert r["compositionClosure"]["passed"]
    assert r["characterizationFailures"] == []
    srcs = {(m["src"], m["dst"]) for m in r["morphisms"]}
    # squaring collapses -1 and 1, so only the forward arrow exists
    assert ("Asq", "A") in srcs and ("A", "Asq") not in srcs


def test_report_bytes_deterministic(tmp_path, fixa_file, state_file):
    out1 = tmp_path / "r1.json"
    out2 = tmp_path / "r2.json"
    argv = ["verify-theorems", "--input", fixa_file, "--add-trivial",
            "--state", state_file, "--seed", "5"]
    main([*argv, "--out", str(out1)])
    main([*argv, "--out", str(out2)])
    assert out1.read_bytes() == out2.read_bytes()


def test_tolerance_override(tmp_path, fixa_file):
    code, report = run(tmp_path, "build-poset", "--input", fixa_file,
                       "--tol", "atom=1e-6")
    assert code == 0
    assert report["tolerances"]["atom"] == 1e-6


def test_table_format(tmp_path, fixa_file, capsys):
    code = main(["build-poset", "--input", fixa_file, "--format", "table"])
    assert code == 0
    out = capsys.readouterr().out
    assert "contextCount" in out
