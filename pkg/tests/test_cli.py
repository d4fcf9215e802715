import csv
import io
import json
import subprocess
import sys

import pytest
import yaml

from groupoid_nonprop import __version__, cli
from groupoid_nonprop.cli import COLUMNS, OUT_ENV, main
from groupoid_nonprop.config import load_config, parse_config
from groupoid_nonprop.errors import ConfigError

SLOW_MODEL = """[model]
name = slow-step
dim = 1
truncation = 8
[interior]
core_radius = 0
[boundary]
points = -inf +inf
fiber_map = sign
[coefficients]
-1 = const 1.0
0 = tanh center=2.0 amplitude=-2.0 scale=16.0
1 = const 1.0
"""


def _config(tmp_path, data_dir, **over):
    raw = {
        "model": str(data_dir / "step_z.model"),
        "kappa": [[3, 0], [4, 1], [5, 0]],
        "quasi_orbit": ["+inf"],
        "eps": [0.2, 0.1],
        "truncation": [150, 300],
        "time": {"start": 0, "stop": 10, "step": 0.5},
        "probes": {"count": 4, "seed": 1},
        "output": str(tmp_path / "out"),
    }
    raw.update(over)
    p = tmp_path / "run.yaml"
    p.write_text(yaml.safe_dump(raw))
    return p


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_run_writes_report(tmp_path, data_dir, capsys):
    cfg = _config(tmp_path, data_dir)
    assert main(["run", str(cfg)]) == 0
    rows = _rows(tmp_path / "out" / "report.csv")
    assert tuple(rows[0]) == COLUMNS
    assert [(r["L"], r["eps_target"]) for r in rows] == [("150", "0.2"), ("150", "0.1"), ("300", "0.2"), ("300", "0.1")]
    for r in rows:
        assert r["status"] == "ok" and r["E"] == "+inf"
        assert float(r["static_norm"]) <= float(r["eps_target"])
        assert float(r["sweep_max"]) <= float(r["static_norm"]) + 1e-10
    series = json.loads((tmp_path / "out" / "series.json").read_text())
    run = series["runs"]["L300-eps0.1"]
    assert len(run["t"]) == 21 and run["seed"] == 1
    assert run["chain"]["static_norm"] <= run["chain"]["psi_norm"] <= 0.1
    assert capsys.readouterr().out.startswith(",".join(COLUMNS))


def test_reruns_are_reproducible(tmp_path, data_dir):
    cfg = _config(tmp_path, data_dir)
    outs = []
    for i, threads in enumerate((1, 1, 3)):
        assert main(["run", str(cfg), "--out", str(tmp_path / f"o{i}"), "--threads", str(threads)]) == 0
        text = (tmp_path / f"o{i}" / "report.csv").read_text()
        rows = list(csv.reader(io.StringIO(text)))
        k = rows[0].index("runtime_s")
        outs.append([r[:k] + r[k + 1:] for r in rows])
        assert (tmp_path / f"o{i}" / "series.json").read_text() == (tmp_path / "o0" / "series.json").read_text()
    assert outs[0] == outs[1] == outs[2]


def test_seed_flag_changes_probes(tmp_path, data_dir):
    cfg = _config(tmp_path, data_dir, truncation=[150], eps=[0.1])
    main(["run", str(cfg), "--out", str(tmp_path / "a")])
    main(["run", str(cfg), "--out", str(tmp_path / "b"), "--seed", "99"])
    a = json.loads((tmp_path / "a" / "series.json").read_text())
    b = json.loads((tmp_path / "b" / "series.json").read_text())
    assert b["seed"] == 99 and a["seed"] == 1
    assert a["runs"]["L150-eps0.1"]["max_over_probes"] != b["runs"]["L150-eps0.1"]["max_over_probes"]


def test_output_env_override(tmp_path, data_dir, monkeypatch):
    cfg = _config(tmp_path, data_dir, truncation=[150], eps=[0.2])
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "env"))
    assert main(["run", str(cfg)]) == 0
    assert (tmp_path / "env" / "report.csv").exists()
    assert not (tmp_path / "out").exists()
    # --out beats the environment
    assert main(["run", str(cfg), "--out", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "flag" / "report.csv").exists()


def test_unknown_field_is_config_error(tmp_path, data_dir, capsys):
    cfg = _config(tmp_path, data_dir, time={"start": 0, "stop": 1, "step": 0.5, "x": 1})
    assert main(["run", str(cfg)]) == 2
    err = capsys.readouterr().err
    assert "E_CONFIG" in err and "time.x" in err
    cfg = _config(tmp_path, data_dir, colour="blue")
    assert main(["run", str(cfg)]) == 2
    assert "colour" in capsys.readouterr().err


@pytest.mark.parametrize(
    "over, field",
    [
        ({"eps": [0.1, -1]}, "eps[1]"),
        ({"truncation": [300, 150]}, "truncation"),
        ({"kappa": [[3, 1], [4, 0]]}, "kappa"),
        ({"kappa": [[3, 0], "x"]}, "kappa[1]"),
        ({"probes": {"count": 2.5}}, "probes.count"),
        ({"allowance": "yes"}, "allowance"),
        ({"quasi_orbit": [1]}, "quasi_orbit"),
    ],
)
def test_config_validation(over, field):
    raw = {"model": "m.model", "kappa": [[3, 0], [4, 1], [5, 0]], "quasi_orbit": ["+inf"], "eps": [0.1]}
    raw.update(over)
    with pytest.raises(ConfigError) as exc:
        parse_config(raw)
    assert exc.value.details["field"] == field


def test_missing_required_field():
    with pytest.raises(ConfigError) as exc:
        parse_config({"model": "m.model", "kappa": [[0, 0], [1, 0]], "eps": [0.1]})
    assert exc.value.details["field"] == "quasi_orbit"


def test_shipped_config_parses(data_dir):
    cfg = load_config(data_dir / "step_z.yaml")
    assert cfg.model == data_dir / "step_z.model"
    assert cfg.eps == (0.2, 0.1, 0.05) and cfg.truncation == (2000,)
    assert len(cfg.t_grid) == 201 and cfg.t_grid[-1] == 100.0
    assert cfg.probe_count == 20 and cfg.seed == 0


def test_unknown_boundary_point(tmp_path, data_dir, capsys):
    cfg = _config(tmp_path, data_dir, quasi_orbit=["north"])
    assert main(["run", str(cfg)]) == 2


def test_hypothesis_failure_exit_code(tmp_path, data_dir, capsys):
    cfg = _config(tmp_path, data_dir, kappa=[[1, 0], [2, 1], [3, 0]])
    assert main(["run", str(cfg)]) == 4
    rows = _rows(tmp_path / "out" / "report.csv")
    assert len(rows) == 4 and all(r["status"] == "E_HYPOTHESIS_FAILS" for r in rows)
    assert "E_HYPOTHESIS_FAILS" in capsys.readouterr().err


def test_separation_failure_exit_code(tmp_path, capsys):
    model = tmp_path / "slow.model"
    model.write_text(SLOW_MODEL)
    cfg = _config(tmp_path, tmp_path, model=str(model), truncation=[8], eps=[0.1])
    assert main(["run", str(cfg)]) == 5
    assert _rows(tmp_path / "out" / "report.csv")[0]["status"] == "E_NO_SEPARATION"
    cfg = _config(tmp_path, tmp_path, model=str(model), truncation=[16], eps=[0.1])
    assert main(["run", str(cfg)]) == 0


def test_tiny_eps_at_small_truncation(tmp_path, data_dir):
    model = tmp_path / "tiny.model"
    model.write_text((data_dir / "step_z.model").read_text().replace("truncation = 2000", "truncation = 4"))
    cfg = _config(tmp_path, tmp_path, model=str(model), truncation=[4], eps=[1e-3, 1e-2])
    assert main(["run", str(cfg)]) == 5
    assert [r["status"] for r in _rows(tmp_path / "out" / "report.csv")] == ["E_NO_SEPARATION", "ok"]


def test_missed_target_exit_code(tmp_path, data_dir, monkeypatch):
    real = cli.run_experiment

    def inflated(*args, **kw):
        rep = real(*args, **kw)
        rep.static_norm = 2 * rep.eps_target
        return rep

    monkeypatch.setattr(cli, "run_experiment", inflated)
    cfg = _config(tmp_path, data_dir, truncation=[150], eps=[0.1])
    assert main(["run", str(cfg)]) == 1
    assert _rows(tmp_path / "out" / "report.csv")[0]["status"] == "eps_missed"


def test_missing_model_file(tmp_path, capsys):
    cfg = _config(tmp_path, tmp_path, model=str(tmp_path / "absent.model"))
    assert main(["run", str(cfg)]) == 3
    assert "E_MODEL" in capsys.readouterr().err


def test_unreadable_config(tmp_path, capsys):
    p = tmp_path / "broken.yaml"
    p.write_text("model: [unclosed\n")
    assert main(["run", str(p)]) == 2
    assert main(["run", str(tmp_path / "nope.yaml")]) == 2


def test_bad_threads(tmp_path, data_dir):
    assert main(["run", str(_config(tmp_path, data_dir)), "--threads", "0"]) == 2


def test_inspect_step_model(data_dir, capsys):
    assert main(["inspect", str(data_dir / "step_z.model")]) == 0
    out = capsys.readouterr().out
    assert "boundary -inf: group Z^1, symbol spectrum [2, 6]" in out
    assert "boundary +inf: group Z^1, symbol spectrum [-2, 2]" in out
    assert "{-inf}, {+inf}" in out


def test_inspect_small_model_checks_orbits(data_dir, capsys):
    assert main(["inspect", str(data_dir / "lattice2d.model")]) == 0
    out = capsys.readouterr().out
    assert "symbol spectrum [-4, 4]" in out and "fiber map: constant" in out


def test_inspect_groupoid(data_dir, capsys):
    assert main(["inspect", str(data_dir / "pair3.groupoid")]) == 0
    out = capsys.readouterr().out
    assert "orbits: 1" in out and "{0, 1, 2}: trivial isotropy" in out and "axioms: ok" in out


def test_inspect_corrupt_file(tmp_path, capsys):
    p = tmp_path / "bad.model"
    p.write_text("[model]\ndim = 1\ntruncation = x\n")
    assert main(["inspect", str(p)]) == 3
    assert f"E_MODEL: {p}:3:" in capsys.readouterr().err
    g = tmp_path / "bad.groupoid"
    g.write_text("groupoid v1\nunits: a\n[arrows]\ne a a e\n")
    assert main(["inspect", str(g)]) == 3
    assert f"{g}:4:" in capsys.readouterr().err
    assert main(["inspect", str(tmp_path / "missing.model")]) == 3


def test_module_entry_point(data_dir):
    out = subprocess.run(
        [sys.executable, "-m", "groupoid_nonprop", "--version"], capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == __version__
    res = subprocess.run(
        [sys.executable, "-m", "groupoid_nonprop", "inspect", str(data_dir / "pair3.groupoid")],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0 and "units: 3" in res.stdout
