import json

import numpy as np
import pytest

from brownkit import acceptance, cli, experiment
from brownkit.errors import ConfigError
from brownkit.experiment import ExperimentConfig, emit_law_table, load_config, parse_grid, run_experiment


def small(**over):
    d = json.loads(json.dumps(load_config("quick").to_dict()))
    d["replications"] = 300
    d.update(over)
    return d


def test_shipped_configs_load_and_round_trip():
    for name in ("reflection", "quick"):
        cfg = load_config(name)
        assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
    assert load_config("reflection").replications == 10 ** 5


def test_zero_tests_writes_manifest_only(tmp_path):
    cfg = ExperimentConfig.from_dict(small(tests=[], functionals=[]))
    assert run_experiment(cfg, tmp_path) == []
    m = json.loads((tmp_path / "manifest.json").read_text())
    assert m["master_seed"] == 7 and m["experiment"]["experiment_name"] == "quick"
    assert cli.main(["verify", "--config", str(_dump(tmp_path, cfg)), "--seed", "7",
                     "--out", str(tmp_path / "v")]) == 0


def _dump(tmp_path, cfg):
    f = tmp_path / "cfg.json"
    f.write_text(json.dumps(cfg.to_dict()))
    return f


def test_rerun_is_byte_identical_and_workers_do_not_matter(tmp_path):
    cfg = ExperimentConfig.from_dict(small())
    f = _dump(tmp_path, cfg)
    codes = [cli.main(["simulate", "--config", str(f), "--seed", "11", "--out", str(tmp_path / d),
                       "--workers", w, "--paths", "2"]) for d, w in (("a", "1"), ("b", "1"), ("c", "3"))]
    assert codes == [0, 0, 0]
    for name in ("functionals.csv", "manifest.json", "reports.jsonl", "summary.csv",
                 "paths/path_00001.csv"):
        a = (tmp_path / "a" / name).read_bytes()
        assert a == (tmp_path / "b" / name).read_bytes() == (tmp_path / "c" / name).read_bytes()
        assert b"\r" not in a
    rows = (tmp_path / "a" / "functionals.csv").read_text().splitlines()
    assert rows[0] == "path_index,functional,params,value"
    assert len(rows) == 1 + 300 * 4
    assert any(r.endswith(",CENSORED") for r in rows)
    assert json.loads((tmp_path / "a" / "manifest.json").read_text())["master_seed"] == 11


def test_chunked_ensemble_matches_single_chunk():
    cfg = ExperimentConfig.from_dict(small())
    from brownkit.paths import Ensemble
    refs = [r.functional for r in cfg.functionals]
    one = Ensemble(cfg.generator, 3, 300, chunk=300).evaluate(refs)
    many = Ensemble(cfg.generator, 3, 300, chunk=7).evaluate(refs, workers=4)
    assert np.array_equal(one, many, equal_nan=True)


def test_exit_code_reflects_failures(tmp_path):
    d = small()
    d["tests"] = [{"name": "impossible", "kind": "mean", "of": "qv", "target": 5.0, "tolerance": 0.01}]
    f = tmp_path / "bad.json"
    f.write_text(json.dumps(d))
    assert cli.main(["verify", "--config", str(f), "--seed", "1", "--out", str(tmp_path / "o")]) == 1
    line = (tmp_path / "o" / "reports.jsonl").read_text().splitlines()
    assert len(line) == 1 and json.loads(line[0])["passed"] is False


@pytest.mark.parametrize("edit,key", [
    (lambda d: d["functionals"].append({"id": "x", "name": "nope"}), "functionals[4].name"),
    (lambda d: d["tests"][0].update(law="nope"), "tests[0].law"),
    (lambda d: d["tests"][0].update(of="missing"), "tests[0].of"),
    (lambda d: d.update(replications=0), "replications"),
    (lambda d: d.update(schema="other"), "schema"),
    (lambda d: d["generator"].update(kind="Nope"), "generator"),
])
def test_config_errors_name_the_key(edit, key, tmp_path):
    d = small()
    edit(d)
    with pytest.raises(ConfigError) as exc:
        ExperimentConfig.from_dict(d)
    assert exc.value.key == key
    f = tmp_path / "c.json"
    f.write_text(json.dumps(d))
    assert cli.main(["verify", "--config", str(f), "--seed", "1", "--out", str(tmp_path)]) == 2


def test_unwritable_output_dir(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = ExperimentConfig.from_dict(small())
    with pytest.raises(OSError):
        run_experiment(cfg, blocker / "sub")
    assert cli.main(["verify", "--config", "quick", "--seed", "1", "--out", str(blocker / "sub")]) == 3


def test_law_table_examples(tmp_path):
    out = tmp_path / "a.csv"
    assert cli.main(["laws", "--law", "arcsine_cdf", "--grid", "s=0,0.25,0.5,0.75,1", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "s,value"
    vals = [float(l.split(",")[1]) for l in lines[1:]]
    np.testing.assert_allclose(vals, [0, 1 / 3, 0.5, 2 / 3, 1], atol=1e-12)
    emit_law_table("arcsine_cdf", {"s": []}, tmp_path / "e.csv")
    assert (tmp_path / "e.csv").read_text() == "s,value\n"
    bad = tmp_path / "h.csv"
    assert cli.main(["laws", "--law", "hitting_density", "--grid", "a=1;T=0,1", "--out", str(bad)]) == 2
    assert not bad.exists()
    assert cli.main(["laws", "--law", "nope", "--grid", "s=1", "--out", str(bad)]) == 2


def test_law_table_grid_order(tmp_path):
    emit_law_table("hitting_cdf", parse_grid("a=1,2;T=1:2:3"), tmp_path / "g.csv")
    rows = [l.split(",")[:2] for l in (tmp_path / "g.csv").read_text().splitlines()[1:]]
    assert rows == [["1", "1"], ["1", "1.5"], ["1", "2"], ["2", "1"], ["2", "1.5"], ["2", "2"]]
    with pytest.raises(ConfigError):
        parse_grid("s")


def test_acceptance_subcommand_runs_selected(tmp_path, capsys):
    assert cli.main(["acceptance", "--out", str(tmp_path), "--only", "AC-5,AC-14"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("AC-5 PASS") and out[1].startswith("AC-14 PASS")
    assert len((tmp_path / "acceptance.jsonl").read_text().splitlines()) == 2
    assert cli.main(["acceptance", "--out", str(tmp_path), "--only", "AC-99"]) == 2


def test_seed_flag_is_required():
    with pytest.raises(SystemExit):
        cli.main(["verify", "--config", "quick"])
