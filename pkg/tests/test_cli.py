import json
from pathlib import Path

import jsonschema
import pytest

from attractor_lab.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, RunConfig, main, parse_config

SCHEMA = json.loads((Path(__file__).resolve().parents[1] / "docs" / "schema.json").read_text())


def run_json(capsys, *argv):
    assert main(list(argv)) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    jsonschema.validate(doc, SCHEMA)
    return doc


def test_schema_is_valid():
    jsonschema.Draft202012Validator.check_schema(SCHEMA)


def test_expand_golden(capsys):
    doc = run_json(capsys, "expand", "--alpha-surd", "-1,1,5,2", "--depth", "6")
    assert doc["digits"] == ["3,-1"] * 6
    assert (doc["a_minus1"], doc["eps0"]) == (1, -1)


def test_expand_decimal(capsys):
    doc = run_json(capsys, "expand", "--alpha-dec", "0.41421356237309504880168872", "--prec-bits", "90", "--depth", "40")
    assert doc["exhausted"] is True
    assert doc["digits"][0] == "2,1"


def test_brjuno_tables(capsys):
    doc = run_json(capsys, "brjuno", "--alpha-gen", "sqrt2", "--terms", "6")
    assert doc["c_map"][:3] == [-1, 0, 1]
    assert len(doc["modified"]["terms"]) == 6
    assert float(doc["modified"]["value"]) == pytest.approx(float(doc["standard"]["value"]), abs=1e-12)


@pytest.mark.parametrize("gen, klass", [("golden", "Herman"), ("tower-nonbrjuno", "NonBrjuno")])
def test_classify(capsys, gen, klass):
    assert run_json(capsys, "classify", "--alpha-gen", gen)["class"] == klass


def test_render_writes_four_files(tmp_path, capsys):
    stem = tmp_path / "g"
    code = main(["render", "--alpha-gen", "golden", "--depth", "10", "--K", "128", "--M", "512",
                 "--width", "64", "--height", "64", "--out", str(stem)])
    assert code == EXIT_OK
    for ext in ("csv", "ppm", "svg", "json"):
        assert (tmp_path / f"g.{ext}").exists()
    meta = json.loads((tmp_path / "g.json").read_text())
    jsonschema.validate(meta, SCHEMA)
    assert meta["K"] == 128 and meta["class"] == "Herman"
    assert (tmp_path / "g.ppm").read_bytes().startswith(b"P6\n64 64\n255\n")


def test_render_invariant_member(tmp_path):
    stem = tmp_path / "inv"
    code = main(["render", "--alpha-gen", "golden", "--depth", "8", "--K", "64", "--M", "256",
                 "--width", "32", "--height", "32", "--invariant-t", "1", "--out", str(stem)])
    assert code == EXIT_OK
    assert json.loads((tmp_path / "inv.json").read_text())["t"] == 1.0


def test_orbit_csv(capsys):
    assert main(["orbit", "--alpha-gen", "golden", "--steps", "20"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "n,theta,rho"
    assert lines[1].startswith("0,0,1")
    assert lines[-1].startswith("# recurrence_gap,20,")


def test_renorm_verify(capsys):
    doc = run_json(capsys, "renorm-verify", "--alpha-gen", "sqrt2", "--samples", "4", "--depth", "15", "--M", "512")
    assert doc["failures"] == [] and doc["max_dev"] < 1e-9


def test_selftest_subset(capsys):
    assert main(["selftest", "--only", "3"]) == EXIT_OK
    assert "[PASS]  3" in capsys.readouterr().out


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["expand"],
        ["expand", "--alpha-gen", "golden", "--alpha-surd", "1,1,2,1"],
        ["expand", "--alpha-gen", "golden", "--depth", "0"],
        ["expand", "--alpha-surd", "1,2"],
        ["render", "--alpha-gen", "golden", "--invariant-t", "1.5"],
        ["frobnicate"],
    ],
)
def test_usage_errors(argv, capsys):
    assert main(argv) == EXIT_USAGE
    assert "usage error" in capsys.readouterr().err


def test_rational_input_is_a_validation_failure(capsys):
    assert main(["expand", "--alpha-surd", "1,1,4,2"]) == EXIT_FAIL
    assert "RationalDetected" in capsys.readouterr().err


def test_budget_exit_code(capsys):
    from attractor_lab.errors import BudgetExceeded, PrecisionExhausted

    assert BudgetExceeded("x").exit_code == 2 and PrecisionExhausted("x").exit_code == 2


def test_config_defaults():
    cfg = parse_config(["classify", "--alpha-gen", "golden"])
    assert isinstance(cfg, RunConfig)
    assert (cfg.depth, cfg.K, cfg.M) == (25, 4096, 4096)


def test_threads_flag_sets_environment(monkeypatch, capsys):
    monkeypatch.delenv("ATTRACTOR_LAB_THREADS", raising=False)
    import os

    main(["--threads", "2", "classify", "--alpha-gen", "golden"])
    assert os.environ["ATTRACTOR_LAB_THREADS"] == "2"
