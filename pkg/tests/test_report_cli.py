import json
import math

import jsonschema
import numpy as np
import pytest

from semiflow import cli
from semiflow.classifier import full_report
from semiflow.corpus import CORPUS_DOCS, corpus
from semiflow.report import build_report, jsonable, to_json, validate_report

C = corpus()


@pytest.fixture
def spec_file(tmp_path):
    def write(name, doc):
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(doc))
        return p
    return write


def test_jsonable_non_finite_and_numpy():
    assert jsonable([math.inf, -math.inf, math.nan, np.float64(1.5), np.int64(2), np.bool_(True)]) == \
        ["inf", "-inf", "nan", 1.5, 2, True]
    assert jsonable(1 + 2j) == {"re": 1.0, "im": 2.0}


@pytest.mark.parametrize("name", sorted(C))
def test_every_corpus_report_validates(name):
    doc = build_report(C[name], full_report(C[name]), seed=0)
    validate_report(doc)
    assert json.loads(to_json(doc)) == doc


def test_schema_rejects_unknown_fields_and_versions():
    doc = build_report(C["sector"], full_report(C["sector"]), seed=0)
    with pytest.raises(jsonschema.ValidationError):
        validate_report({**doc, "extra": 1})
    with pytest.raises(jsonschema.ValidationError):
        validate_report({**doc, "version": "9.9"})


def test_classify_exit_zero_and_label_from_stem(spec_file, capsys):
    p = spec_file("mine", {k: v for k, v in CORPUS_DOCS["sector"].items() if k != "label"})
    assert cli.main(["classify", str(p)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["label"] == "mine"


def test_input_errors_exit_two(spec_file, tmp_path, capsys):
    assert cli.main(["classify", str(tmp_path / "nope.json")]) == 2
    assert "file not found" in capsys.readouterr().err
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert cli.main(["classify", str(bad)]) == 2
    p = spec_file("weird", {"tails": [{"re": {"bogus": 1}, "im": 0}]})
    assert cli.main(["classify", str(p)]) == 2
    assert cli.main(["classify", "--beta", "0.5", str(p)]) == 2


def test_probe_on_region_exits_three(spec_file):
    p = spec_file("hp", CORPUS_DOCS["halfplane"])
    assert cli.main(["probe", str(p)]) == 3


def test_probe_writes_deterministic_outputs(spec_file, tmp_path):
    p = spec_file("vl", CORPUS_DOCS["vertline"])
    outs = []
    for k in range(2):
        d = tmp_path / f"o{k}"
        assert cli.main(["probe", "--seed", "4", "--out", str(d), str(p)]) == 0
        outs.append({f.name: f.read_bytes() for f in d.iterdir()})
    assert outs[0] == outs[1]
    assert set(outs[0]) == {"vl.report.json", "vl.curves.csv"}
    csv_lines = outs[0]["vl.curves.csv"].decode().splitlines()
    assert csv_lines[0] == "series,t_or_h_or_N,value"
    doc = json.loads(outs[0]["vl.report.json"])
    assert doc["environment"]["seed"] == 4 and doc["probes"]


def test_env_seed(spec_file, tmp_path, monkeypatch):
    p = spec_file("s", CORPUS_DOCS["finite-two"])
    monkeypatch.setenv("SEMIFLOW_SEED", "17")
    assert cli.main(["probe", "--out", str(tmp_path), str(p)]) == 0
    assert json.loads((tmp_path / "s.report.json").read_text())["environment"]["seed"] == 17


def test_text_format(spec_file, capsys):
    p = spec_file("ll", CORPUS_DOCS["logline"])
    assert cli.main(["classify", "--format", "text", str(p)]) == 0
    out = capsys.readouterr().out
    assert "EventuallyDifferentiable" in out and "disagreements=0" in out


def test_report_merges_files(spec_file, tmp_path, capsys):
    d = tmp_path / "r"
    for name in ("sector", "vertline"):
        assert cli.main(["classify", "--out", str(d), str(spec_file(name, CORPUS_DOCS[name]))]) == 0
    assert cli.main(["report", "--format", "text", *map(str, sorted(d.glob("*.json")))]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("label") and len(lines) == 3
    junk = tmp_path / "junk.json"
    junk.write_text("{}")
    assert cli.main(["report", str(junk)]) == 2


def test_multiple_inputs_worst_code_wins(spec_file, tmp_path):
    good = spec_file("g", CORPUS_DOCS["sector"])
    region = spec_file("h", CORPUS_DOCS["halfplane"])
    assert cli.main(["probe", "--jobs", "2", "--out", str(tmp_path / "o"), str(good), str(region),
                     str(tmp_path / "missing.json")]) == 2
    assert cli.main(["probe", "--jobs", "2", "--out", str(tmp_path / "o"), str(good), str(region)]) == 3
