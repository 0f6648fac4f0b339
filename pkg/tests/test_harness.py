"""Config parsing, experiment manifests, and the command-line entry point."""

import json
import os

import numpy as np
import pytest

from entrolab import cli, harness
from entrolab.harness import (
    ExperimentConfig,
    ResultManifest,
    experiment_names,
    parse_config,
    parse_config_file,
    run,
    serialize_config,
)

SANOV_INI = """\
[experiment]
name = sanov
seed = 7

[params]
mu1 = 0.5
mu2 = 0.25
mu3 = 0.25
"""


def test_config_round_trip_is_exact():
    cfg = parse_config(SANOV_INI)
    assert cfg.name == "sanov" and cfg.seed == 7
    assert cfg.params["mu2"] == 0.25
    again = parse_config(serialize_config(cfg))
    assert again == cfg
    # awkward floats survive the round trip bit for bit
    cfg2 = parse_config(
        "[experiment]\nname = core-example\n[params]\ndt = 1e-4\nbeta = 0.1\n"
    )
    assert parse_config(serialize_config(cfg2)) == cfg2
    assert cfg2.params["dt"] == 1e-4 and cfg2.params["beta"] == 0.1


def test_defaults_fill_missing_params():
    cfg = parse_config("[experiment]\nname = pde\n")
    assert cfg.seed == 12345
    assert cfg.params["cells"] == 200
    assert cfg.params["T"] == 10.0


def test_parse_rejects_unknown_names():
    with pytest.raises(ValueError, match="unknown experiment"):
        parse_config("[experiment]\nname = warp-drive\n")
    with pytest.raises(ValueError, match="unknown parameter"):
        parse_config("[experiment]\nname = sanov\n[params]\nmu9 = 0.5\n")
    with pytest.raises(ValueError, match="cannot parse"):
        parse_config("[experiment]\nname = pde\n[params]\ncells = many\n")
    with pytest.raises(ValueError, match="missing the experiment name"):
        parse_config("[experiment]\nseed = 3\n")


def test_run_writes_manifest_and_artifacts(tmp_path):
    cfg = parse_config(SANOV_INI).with_overrides(out_dir=str(tmp_path / "out"))
    manifest = run(cfg)
    assert manifest.all_passed
    assert set(manifest.artifacts) == {"stirling.csv", "sanov_tail.csv"}
    on_disk = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert on_disk["experiment"] == "sanov"
    assert on_disk["seed"] == 7
    round_trip = ResultManifest.from_json((tmp_path / "out" / "manifest.json").read_text())
    assert round_trip.checks == manifest.checks
    # the config echo carries everything needed to reproduce the run
    assert round_trip.config["params"] == cfg.params
    assert round_trip.config["seed"] == cfg.seed


def test_rerun_is_bitwise_identical(tmp_path):
    cfg_a = parse_config(SANOV_INI).with_overrides(out_dir=str(tmp_path / "a"))
    cfg_b = parse_config(SANOV_INI).with_overrides(out_dir=str(tmp_path / "b"))
    run(cfg_a)
    run(cfg_b)
    for name in ("stirling.csv", "sanov_tail.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_sanov_rejects_bad_weights(tmp_path):
    bad = parse_config(
        "[experiment]\nname = sanov\n[params]\nmu1 = 0.9\nmu2 = 0.9\nmu3 = 0.9\n"
    ).with_overrides(out_dir=str(tmp_path / "out"))
    with pytest.raises(ValueError, match="sum to 1"):
        run(bad)
    assert not (tmp_path / "out" / "manifest.json").exists()


def test_failed_run_cleans_partial_outputs(tmp_path, monkeypatch):
    def explode(cfg, w, threads):
        w.csv("junk.csv", ["a"], [(1,)])
        raise RuntimeError("mid-run failure")

    monkeypatch.setitem(harness._EXPERIMENTS, "sanov", explode)
    cfg = parse_config(SANOV_INI).with_overrides(out_dir=str(tmp_path / "out"))
    with pytest.raises(RuntimeError):
        run(cfg)
    assert not (tmp_path / "out" / "junk.csv").exists()


def test_writer_confines_artifact_names(tmp_path):
    w = harness._Writer(str(tmp_path))
    with pytest.raises(ValueError):
        w.csv("../escape.csv", ["a"], [(1,)])
    with pytest.raises(ValueError):
        w.json("/etc/owned.json", {})


def test_unknown_experiment_at_run():
    with pytest.raises(ValueError, match="unknown experiment"):
        run(ExperimentConfig(name="nope", seed=1, params={}))


def test_experiment_names_cover_cli_listing(capsys):
    names = experiment_names()
    assert "core-example" in names and "pde" in names
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out
    for name in names:
        assert name in out


def test_cli_run_prints_check_lines(tmp_path, capsys):
    ini = tmp_path / "sanov.ini"
    ini.write_text(SANOV_INI)
    code = cli.main(["run", "--config", str(ini), "--out", str(tmp_path / "out")])
    out = capsys.readouterr().out
    assert code == 0
    assert "[PASS] sanov:stirling_gap" in out
    assert "[FAIL]" not in out


def test_cli_config_errors_exit_2(tmp_path, capsys):
    ini = tmp_path / "bad.ini"
    ini.write_text("[experiment]\nname = nope\n")
    assert cli.main(["run", "--config", str(ini)]) == 2
    assert "unknown experiment" in capsys.readouterr().err
    assert cli.main(["run", "--config", str(tmp_path / "absent.ini")]) == 2


def test_cli_seed_override(tmp_path):
    ini = tmp_path / "sanov.ini"
    ini.write_text(SANOV_INI)
    cli.main(["run", "--config", str(ini), "--out", str(tmp_path / "out"), "--seed", "9"])
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert manifest["seed"] == 9


def test_parse_config_file(tmp_path):
    ini = tmp_path / "cfg.ini"
    ini.write_text(SANOV_INI)
    assert parse_config_file(str(ini)) == parse_config(SANOV_INI)
