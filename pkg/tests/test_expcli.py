import json
import subprocess
import sys

import numpy as np
import pytest

from augreg.errors import ConfigError, UnknownColumn, UnknownPreset
from augreg.expcli import (PlotSpec, ResultsTable, build_config, emit_csv, emit_plot, parse_text, read_csv,
                           render_svg, run_preset, run_sweep)
from augreg.expcli.cli import main
from augreg.expcli.presets import PRESETS, n_grid, parse_batch_configs, preset_params
from augreg.expcli.table import to_csv_text

SWEEP = """
seed = 3
trials = 2
[data]
n = 16, 32
p = 24
spectrum = isotropic
[augmentation]
family = mask_unbiased
beta = 0.2, 0.5
[output]
metrics = mse, bias, variance
"""


def test_parse_text_grammar():
    flat = parse_text("preset = x  # trailing\n[params]\nbetas = 0.1, 0.2\nflag = true\nname = abc\n")
    assert flat == {"preset": "x", "params.betas": [0.1, 0.2], "params.flag": True, "params.name": "abc"}
    with pytest.raises(ConfigError) as err:
        parse_text("[data]\nwidth = 3\n")
    assert err.value.details["path"] == "data.width"
    with pytest.raises(ConfigError):
        parse_text("[nosuch]\n")
    with pytest.raises(ConfigError):
        parse_text("just words\n")


def test_config_validation_paths():
    with pytest.raises(ConfigError) as err:
        build_config(parse_text("[data]\nn = 10\np = 20\n"))
    assert err.value.details["path"] == "augmentation.family"
    with pytest.raises(ConfigError) as err:
        build_config(parse_text("trials = 0\n[data]\nn=1\np=2\n[augmentation]\nfamily=cutout\n"))
    assert err.value.details["path"] == "trials"
    with pytest.raises(ConfigError) as err:
        build_config(parse_text("[data]\nn = -1\np = 4\n[augmentation]\nfamily = cutout\n"))
    assert err.value.details["path"] == "data.n"


def test_sweep_shapes():
    cfg = build_config(parse_text(SWEEP))
    t = run_sweep(cfg)
    assert t.columns == ["n", "beta", "trial", "mse", "bias", "variance"]
    assert len(t.rows) == 2 * 2 * 2
    one = build_config(parse_text(SWEEP), {"trials": 1, "data.n": 16, "augmentation.beta": 0.3})
    assert len(run_sweep(one).rows) == 1


def test_sweep_fifty_trials():
    cfg = build_config(parse_text(SWEEP), {"trials": 50, "data.n": 16, "augmentation.beta": 0.3,
                                           "output.metrics": "mse"})
    assert len(run_sweep(cfg).rows) == 50


def test_sweep_mask_bias_variance_trend():
    text = SWEEP.replace("n = 16, 32", "n = 32").replace("beta = 0.2, 0.5", "beta = " + ", ".join(
        f"{b:.1f}" for b in np.linspace(0.1, 0.9, 9))).replace("trials = 2", "trials = 20").replace("p = 24", "p = 64")
    t = run_sweep(build_config(parse_text(text), {"data.noise": 0.5}))
    betas = sorted(set(t.column("beta")))
    bias = [np.median(t.where(beta=b).column("bias")) for b in betas]
    var = [np.median(t.where(beta=b).column("variance")) for b in betas]
    assert np.all(np.diff(bias) >= 0) and np.all(np.diff(var) <= 0)


def test_sweep_classification_and_solvers():
    text = SWEEP + "solvers = aerm, lse\n"
    cfg = build_config(parse_text(text.replace("metrics = mse, bias, variance", "metrics = poe, su")),
                       {"task": "classification", "data.signal": "sparse"})
    t = run_sweep(cfg)
    assert "aerm_poe" in t.columns and "lse_su" in t.columns
    assert all(0 <= v <= 1 for v in t.column("aerm_poe"))
    bad = build_config(parse_text(SWEEP), {"task": "classification", "output.metrics": "poe"})
    with pytest.raises(ConfigError):
        run_sweep(bad)
    with pytest.raises(ConfigError):
        run_sweep(build_config(parse_text(SWEEP), {"output.metrics": "poe"}))


def test_csv_roundtrip(tmp_path):
    t = ResultsTable(["a", "b", "c"], metadata={"seed": 1})
    path = tmp_path / "empty.csv"
    emit_csv(t, path)
    assert path.read_text() == "# seed: 1\na,b,c\n"
    vals = [0.1, 1 / 3, np.pi * 1e-300, -2.5e17]
    for i, v in enumerate(vals):
        t.add(a=i, b=v, c="x")
    emit_csv(t, path)
    back = read_csv(path)
    assert back.columns == ["a", "b", "c"]
    assert back.column("b") == vals and back.column("a") == [0, 1, 2, 3]
    assert back.metadata == {"seed": "1"}
    assert path.read_text().endswith("\n")


def test_table_errors():
    t = ResultsTable(["a"])
    with pytest.raises(UnknownColumn):
        t.add(a=1, b=2)
    with pytest.raises(UnknownColumn):
        t.column("z")
    with pytest.raises(UnknownColumn):
        t.where(z=1)


def _table():
    t = ResultsTable(["x", "g", "y", "trial"])
    for g in ("a", "b", "c"):
        for x in (1, 10):
            for tr in range(3):
                t.add(x=x, g=g, y=x * (1 + tr), trial=tr)
    return t


def test_plot_structure(tmp_path):
    t = ResultsTable(["x", "y"])
    t.add(x=1, y=2.0)
    t.add(x=2, y=3.0)
    svg = render_svg(t, PlotSpec("x", ["y"]))
    poly = [line for line in svg.splitlines() if 'class="median"' in line]
    assert len(poly) == 1
    pts = poly[0].split('points="')[1].split('"')[0].split()
    assert len(pts) == 2
    svg = render_svg(_table(), PlotSpec("x", ["y"], group_by="g"))
    assert svg.count('class="legend-entry"') == 3 and svg.count('class="iqr"') == 3
    path = tmp_path / "p.svg"
    emit_plot(_table(), PlotSpec("x", ["y"], group_by="g", logx=True), path)
    assert path.read_text().startswith("<svg")
    with pytest.raises(UnknownColumn):
        render_svg(_table(), PlotSpec("x", ["nope"]))


def test_plot_log_axis_only_x():
    lin = render_svg(_table(), PlotSpec("x", ["y"], group_by="g"))
    logx = render_svg(_table(), PlotSpec("x", ["y"], group_by="g", logx=True))
    ylines = lambda s: [line for line in s.splitlines() if 'class="ytick"' in line]
    xlines = lambda s: [line for line in s.splitlines() if 'class="xtick"' in line]
    assert ylines(lin) == ylines(logx)
    assert xlines(lin) != xlines(logx)


def test_presets_registry_and_params():
    assert len(PRESETS) == 9
    with pytest.raises(UnknownPreset):
        run_preset("nope")
    with pytest.raises(ConfigError) as err:
        preset_params("decomposition", {"bogus": 1})
    assert err.value.details["path"] == "params.bogus"
    for name, (_, defaults, _) in PRESETS.items():
        assert defaults["p"] == 128, name
        assert defaults.get("noise") == 0.5
    assert PRESETS["bias-impact"][1]["nu"] == 0.1 and PRESETS["tuning-gap"][1]["gamma"] == 0.95
    assert parse_batch_configs(["64x1", "1x64"]) == [(64, 1), (1, 64)]


def test_decomposition_schema_and_determinism():
    a = run_preset("decomposition", {"trials": 2, "betas": [0.1, 0.3]}, seed=4)
    b = run_preset("decomposition", {"trials": 2, "betas": [0.1, 0.3]}, seed=4)
    assert a.columns == ["beta", "trial", "bias", "variance", "approx", "mse"]
    assert to_csv_text(a) == to_csv_text(b)
    assert to_csv_text(a) != to_csv_text(run_preset("decomposition", {"trials": 2, "betas": [0.1, 0.3]}, seed=5))


def test_precomputed_grid_spans_p():
    grid = n_grid(PRESETS["precomputed-double-descent"][1])
    assert grid[0] == 8 and grid[-1] == 256 and 128 in grid
    t = run_preset("precomputed-double-descent", {"trials": 1, "n_points": 3, "aug_sizes": [1, 2]})
    assert sorted(set(t.column("aug_size"))) == [1, 2]


@pytest.mark.parametrize("name", sorted(set(PRESETS) - {"asgd-convergence", "precomputed-double-descent"}))
def test_each_preset_runs_small(name):
    t = run_preset(name, {"trials": 1})
    assert t.rows and all(len(r) == len(t.columns) for r in t.rows)
    assert t.metadata["preset"] == name


def test_asgd_preset_small():
    t = run_preset("asgd-convergence", {"steps": 200, "stride": 100, "configs": ["8x8", "1x64"]})
    assert set(t.column("batch")) == {8, 1}
    assert t.where(batch=8, step=0).column("rel_dist") == [1.0]


def test_cli_run_plot_validate(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("AUGREG_OUT", str(tmp_path))
    assert main(["run", "--preset", "mask-limit", "--set", "trials=1", "--seed", "2"]) == 0
    out = tmp_path / "mask-limit.csv"
    first = out.read_text()
    assert "# seed: 2" in first
    assert main(["run", "--preset", "mask-limit", "--set", "trials=1", "--seed", "2"]) == 0
    assert out.read_text() == first
    assert main(["plot", str(out), "--x", "beta", "--y", "dist_to_limit", "--logx", "--logy"]) == 0
    assert (tmp_path / "mask-limit.svg").exists()
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text(SWEEP)
    assert main(["validate", str(cfg)]) == 0
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "s.csv")]) == 0
    assert len(read_csv(tmp_path / "s.csv").rows) == 8
    assert main(["list-presets"]) == 0
    assert "tuning-gap" in capsys.readouterr().out


def test_cli_errors_are_json(tmp_path, capsys):
    assert main(["run", "--preset", "nope"]) != 0
    line = json.loads(capsys.readouterr().err.strip())
    assert line["code"] == "UnknownPreset"
    bad = tmp_path / "bad.cfg"
    bad.write_text("[data]\nwidth = 2\n")
    assert main(["validate", str(bad)]) != 0
    line = json.loads(capsys.readouterr().err.strip())
    assert line["code"] == "ConfigError" and line["path"] == "data.width"
    assert main(["plot", str(tmp_path / "missing.csv"), "--x", "a", "--y", "b"]) != 0
    assert json.loads(capsys.readouterr().err.strip())["code"] == "IoError"


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "augreg", "list-presets"], capture_output=True, text=True)
    assert res.returncode == 0 and "decomposition" in res.stdout
