import json
import os

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner

from dampkdv.__version__ import __version__
from dampkdv.cli import cli
from dampkdv.core import TRIGGERS
from dampkdv.spectral import make_grid


@pytest.fixture
def blowup_template(tmp_path):
    # explodes at t = 0 without damping, decays in one step with a large one
    grid = make_grid(np.pi, 64)
    data = {
        "grid": {"half_length": np.pi, "n_points": 64},
        "p": 5,
        "initial": {"type": "samples", "values": (5.0 * np.cos(grid.x)).tolist()},
        "damping": None,
        "scheme": "implicit-euler",
        "controller": {"mode": "fixed", "dt": 0.1, "dt_min": 1e-6, "dt_max": 0.1},
        "t_end": 0.5,
    }
    path = os.path.join(tmp_path, "blowup_template.json")
    with open(path, "w") as f:
        json.dump(data, f)
    return path


def _read_json(path):
    with open(path) as f:
        return json.load(f)


def test_help_output():
    runner = CliRunner()
    prog_name = runner.get_default_prog_name(cli)
    result = runner.invoke(cli, ["--help"])

    assert prog_name == "dampkdv"
    assert result.output.startswith("Usage: %(prog_name)s [OPTIONS] COMMAND" % locals())
    assert all(
        v in result.output
        for v in [
            "Options:",
            "--version",
            "--quiet",
            "--jobs",
            "Commands:",
            "simulate",
            "find-constant",
            "find-bands",
        ]
    )


def test_version_output():
    result = CliRunner().invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_cli_simulate(testdir, tmp_path):
    infile = os.path.join(testdir, "zero_p5.json")
    outdir = os.path.join(tmp_path, "run")
    runner = CliRunner()
    result = runner.invoke(cli, ["simulate", "--output", outdir, infile])
    assert result.exit_code == 0
    assert "Completed at t=1" in result.output

    outcome = _read_json(os.path.join(outdir, "outcome.json"))
    snapshots = pd.read_csv(os.path.join(outdir, "snapshots.csv"))
    norms = pd.read_csv(os.path.join(outdir, "norms.csv"))
    manifest = _read_json(os.path.join(outdir, "manifest.json"))
    assert outcome["outcome"] == "completed"
    assert outcome["t_end"] == 1.0
    assert sorted(set(snapshots["t"])) == [0.0, 0.5]
    assert norms["t"].iloc[-1] == 1.0
    assert manifest["subcommand"] == "simulate"
    assert manifest["config"]["p"] == 5
    assert manifest["deterministic"]


def test_cli_simulate_quiet(testdir, tmp_path):
    infile = os.path.join(testdir, "zero_p5.json")
    result = CliRunner().invoke(
        cli, ["-q", "simulate", "-o", os.path.join(tmp_path, "run"), infile]
    )
    assert result.exit_code == 0


def test_cli_simulate_errors(testdir, tmp_path):
    runner = CliRunner()
    for name, message in [
        ("missing.json", "No such file"),
        ("truncated.json", "is not valid JSON"),
        ("bad_grid.json", "missing required key 'initial'"),
        ("zero_p2_template.json", "damping profile is required"),
    ]:
        infile = os.path.join(testdir, name)
        result = runner.invoke(cli, ["simulate", "-o", str(tmp_path), infile])
        assert result.exit_code == 1
        assert "Error:" in result.output
        assert message in result.output


def test_cli_find_constant(blowup_template, tmp_path):
    outdir = os.path.join(tmp_path, "search")
    result = CliRunner().invoke(
        cli,
        [
            "-q",
            "find-constant",
            "--gamma0",
            "1000",
            "--eps",
            "1e5",
            "-o",
            outdir,
            blowup_template,
        ],
    )
    assert result.exit_code == 0
    assert "gamma_e=" in result.output
    assert sorted(os.listdir(outdir)) == ["manifest.json", "profile.csv", "search.json"]

    search = _read_json(os.path.join(outdir, "search.json"))
    assert search["kind"] == "constant"
    gamma_a = search["bracket"]["gamma_a"]
    gamma_e = search["bracket"]["gamma_e"]
    assert 0 < gamma_e < gamma_a
    assert gamma_a - gamma_e <= 1e5
    trials = search["trials"]
    assert trials[0]["gamma"] == 1000
    assert search["n_simulations"] == sum(not trial["cached"] for trial in trials)
    for trial in trials:
        assert trial["gamma_spec"] == {"type": "constant", "gamma": trial["gamma"]}
        if trial["gamma"] >= gamma_a:
            assert trial["outcome"] == "completed"
        if trial["gamma"] <= gamma_e:
            assert trial["outcome"] == "blowup"
            assert trial["trigger"] in TRIGGERS

    profile = pd.read_csv(
        os.path.join(outdir, "profile.csv"), float_precision="round_trip"
    )
    assert profile.columns.tolist() == ["mode", "gamma"]
    assert profile["mode"].tolist() == list(range(-32, 32))
    assert (profile["gamma"] == gamma_a).all()

    manifest = _read_json(os.path.join(outdir, "manifest.json"))
    assert manifest["subcommand"] == "find-constant"
    assert manifest["parameters"] == {"gamma0": 1000.0, "eps": 1e5}
    assert manifest["config"]["damping"] is None
    assert manifest["config"]["scheme"] == "implicit-euler"


def test_cli_find_constant_eps(testdir):
    infile = os.path.join(testdir, "zero_p5.json")
    result = CliRunner().invoke(cli, ["find-constant", "--eps", "0", infile])
    assert result.exit_code == 1
    assert "eps must be positive" in result.output


def test_cli_find_constant_never_explodes(testdir, tmp_path):
    infile = os.path.join(testdir, "zero_p2_template.json")
    result = CliRunner().invoke(
        cli, ["-q", "find-constant", "-o", str(tmp_path), infile]
    )
    assert not os.path.exists(os.path.join(tmp_path, "search.json"))
    assert result.exit_code == 1
    assert "No outcome change" in result.output


def _find_bands(template, outdir, bands):
    return CliRunner().invoke(
        cli,
        [
            "-q",
            "find-bands",
            "--bands",
            bands,
            "--iters",
            "3",
            "--gamma0",
            "1000",
            "--eps",
            "1e5",
            "-o",
            outdir,
            template,
        ],
    )


def test_cli_find_bands(blowup_template, tmp_path):
    outdir = os.path.join(tmp_path, "bands")
    result = _find_bands(blowup_template, outdir, "4,8")
    assert result.exit_code == 0
    assert "gamma_1: <Outcome" in result.output
    assert "gamma_2: <Outcome" in result.output
    assert sorted(os.listdir(outdir)) == [
        "envelopes.csv",
        "manifest.json",
        "profile.csv",
        "search.json",
    ]

    search = _read_json(os.path.join(outdir, "search.json"))
    assert search["kind"] == "staircase"
    assert search["cutoffs"] == [4, 8]
    assert len(search["brackets"]) == 3
    assert search["bracket"] == search["brackets"][0]
    assert search["n_simulations"] == sum(
        not trial["cached"] for trial in search["trials"]
    )
    for name in ("gamma_1", "gamma_2"):
        envelope = search["envelopes"][name]
        assert envelope["profile"]["type"] == "gaussian"
        assert envelope["profile"]["width"] == pytest.approx(8.0)
        assert envelope["outcome"] in ("completed", "blowup")

    profile = pd.read_csv(
        os.path.join(outdir, "profile.csv"), float_precision="round_trip"
    )
    envelopes = pd.read_csv(
        os.path.join(outdir, "envelopes.csv"), float_precision="round_trip"
    )
    assert envelopes.columns.tolist() == [
        "mode",
        "staircase_a",
        "staircase_e",
        "gamma_1",
        "gamma_2",
    ]
    assert envelopes["mode"].tolist() == list(range(-32, 32))
    assert envelopes["staircase_a"].tolist() == profile["gamma"].tolist()
    assert (envelopes["gamma_1"] >= envelopes["staircase_a"]).all()
    assert (envelopes["gamma_2"] <= envelopes["staircase_e"]).all()
    by_size = profile.assign(size=profile["mode"].abs()).sort_values(
        "size", kind="stable"
    )
    assert (np.diff(by_size["gamma"].to_numpy()) <= 0).all()
    assert profile.loc[profile["mode"] == 0, "gamma"].item() == (
        search["bracket"]["gamma_a"]
    )

    manifest = _read_json(os.path.join(outdir, "manifest.json"))
    assert manifest["subcommand"] == "find-bands"
    assert manifest["parameters"]["bands"] == [4, 8]
    assert manifest["parameters"]["iters"] == 3


def test_cli_find_bands_constant_only(blowup_template, tmp_path):
    outdir = os.path.join(tmp_path, "bands")
    result = _find_bands(blowup_template, outdir, "")
    assert result.exit_code == 0

    search = _read_json(os.path.join(outdir, "search.json"))
    assert search["cutoffs"] == []
    assert len(search["brackets"]) == 1
    gamma_a = search["bracket"]["gamma_a"]
    gamma_e = search["bracket"]["gamma_e"]
    assert search["profile"] == {"type": "constant", "gamma": gamma_a}
    assert search["profile_e"] == {"type": "constant", "gamma": gamma_e}

    envelopes = pd.read_csv(
        os.path.join(outdir, "envelopes.csv"), float_precision="round_trip"
    )
    assert (envelopes["staircase_a"] == gamma_a).all()
    assert (envelopes["staircase_e"] == gamma_e).all()
    assert envelopes["gamma_1"].min() >= gamma_a
    assert envelopes["gamma_2"].max() <= gamma_e
    manifest = _read_json(os.path.join(outdir, "manifest.json"))
    assert manifest["parameters"]["bands"] == []


def test_cli_find_bands_errors(testdir):
    infile = os.path.join(testdir, "zero_p5.json")
    runner = CliRunner()

    result = runner.invoke(cli, ["find-bands", "--bands", "128,64", infile])
    assert result.exit_code == 1
    assert "strictly increasing" in result.output

    result = runner.invoke(cli, ["find-bands", "--bands", "4,x", infile])
    assert result.exit_code == 1
    assert "'x' is not an integer" in result.output

    result = runner.invoke(cli, ["find-bands", "--bands", "64", infile])
    assert result.exit_code == 1
    assert "below N/2 = 8" in result.output


def test_cli_jobs_validation(testdir):
    infile = os.path.join(testdir, "zero_p5.json")
    result = CliRunner().invoke(cli, ["--jobs", "0", "simulate", infile])
    assert result.exit_code == 2
