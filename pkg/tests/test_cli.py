from __future__ import annotations

import json
from pathlib import Path

import pytest

from gmeasures import errors
from gmeasures.cli import main
from gmeasures.config import parse_config
from gmeasures.errors import ValidationError
from gmeasures.runner import PRESETS, preset_config, run

GOLDEN = json.loads((Path(__file__).parent / "golden" / "result_schema.json").read_text())
RENEWAL2 = '{"family":"renewal","q":{"kind":"power","alpha":2},"q_inf":0}'
RENEWAL3 = '{"family":"renewal","q":{"kind":"power","alpha":3},"q_inf":0}'


def _run(capsys, argv):
    rc = main(argv)
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_list_experiments(capsys):
    rc, out, _ = _run(capsys, ["list-experiments"])
    assert rc == 0
    names = {e["name"] for e in json.loads(out)}
    assert {"renewal-case3", "appendix-figure2", "trunk-corollary5"} <= names


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_run_and_echo_tag(capsys, name):
    rc, out, err = _run(capsys, ["run", "--preset", name])
    assert rc == 0, err
    doc = json.loads(out)
    assert doc["config"]["tag"] == PRESETS[name]["tag"]
    assert doc["schema"] == GOLDEN["schema"]


def test_golden_schema(tmp_path, capsys):
    rc, out, _ = _run(capsys, ["run", "--preset", "appendix-figure2", "--out", str(tmp_path)])
    assert rc == 0
    doc = json.loads((tmp_path / "result.json").read_text())
    assert sorted(doc) == GOLDEN["top_level_keys"]
    assert sorted(doc["config"]) == GOLDEN["config_keys"]
    assert sorted(doc["config"]["caps"]) == GOLDEN["caps_keys"]
    for f in GOLDEN["files"] + doc["tables"]:
        assert (tmp_path / f).exists()
    assert "d_table.csv" in doc["tables"]


def test_exit_validation(capsys):
    rc, _, err = _run(capsys, ["sample", "--model", '{"family":"nope"}'])
    assert rc == 2
    assert json.loads(err)["error"] == "validation"


def test_exit_validation_bad_param(capsys):
    rc, _, _ = _run(capsys, ["sample", "--model", RENEWAL2, "--param", "T=-1"])
    assert rc == 2


def test_exit_resource_cap(capsys):
    rc, _, err = _run(capsys, ["cesaro", "--model", '{"family":"trunk","eps":0.2}',
                               "--param", "k=50", "--max-exact-states", "4"])
    assert rc == 3
    assert json.loads(err)["error"] == "resource_cap"


def test_exit_ordering(capsys):
    rc, _, err = _run(capsys, ["couple", "--model", RENEWAL2, "--past", "(0)1",
                               "--param", f"lower_model={RENEWAL3}", "--param", "lower_past=(0)1",
                               "--param", "T=100"])
    assert rc == 4
    assert "witness" in json.loads(err)


def test_exit_codes_distinct():
    codes = {c.exit_status for c in (errors.ValidationError, errors.ResourceCapError,
                                     errors.OrderingViolation, errors.ConstructionMismatch)}
    assert codes == {2, 3, 4, 5}


def test_couple_ok(capsys):
    rc, out, _ = _run(capsys, ["couple", "--model", RENEWAL3, "--past", "(0)1",
                               "--param", f"lower_model={RENEWAL2}", "--param", "lower_past=(0)1",
                               "--param", "T=500", "--param", "seeds=2"])
    assert rc == 0
    assert json.loads(out)["result"]["all_dominated"]


def _write(tmp, name, argv, monkeypatch):
    # same relative --out in two directories so the echoed config is identical too
    (tmp / name).mkdir()
    monkeypatch.chdir(tmp / name)
    assert main(argv + ["--out", "o"]) == 0
    return tmp / name / "o"


def test_determinism_byte_identical(tmp_path, capsys, monkeypatch):
    argv = ["sample", "--model", RENEWAL2, "--past", "(0)1", "--param", "T=2000", "--seed", "7"]
    a, b = _write(tmp_path, "a", argv, monkeypatch), _write(tmp_path, "b", argv, monkeypatch)
    for f in ("result.json", "trajectory.csv"):
        assert (a / f).read_bytes() == (b / f).read_bytes()
    c = _write(tmp_path, "c", argv[:-1] + ["8"], monkeypatch)
    assert (a / "trajectory.csv").read_bytes() != (c / "trajectory.csv").read_bytes()


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(preset_config("renewal-case1")))
    rc, out, _ = _run(capsys, ["marginal-series", "--config", str(cfg), "--param", "I=5"])
    assert rc == 0
    assert json.loads(out)["config"]["params"]["I"] == 5
    rc, _, _ = _run(capsys, ["sample", "--config", str(cfg)])
    assert rc == 2


def test_config_rejects_unknown_fields():
    base = preset_config("renewal-case1")
    with pytest.raises(ValidationError):
        parse_config({**base, "sed": 3})
    with pytest.raises(ValidationError):
        parse_config({**base, "params": {"I": 5, "wrod": "1"}})
    with pytest.raises(ValidationError):
        parse_config({**base, "caps": {"max_states": 3}})
    with pytest.raises(ValidationError):
        parse_config({"operation": "sample"})


def test_config_roundtrip():
    cfg = parse_config(preset_config("trunk-corollary5"))
    assert parse_config(json.loads(cfg.to_json())) == cfg


def test_run_result_matches_preset():
    res = run(parse_config(preset_config("appendix-figure2"))).result
    assert res["d"][:8] == [1, 2, 4, 6, 10, 14, 22, 38]
