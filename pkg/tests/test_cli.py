import json
import subprocess
import sys

import pytest

from lowgrip.cli import build_parser, main, resolve_seed
from lowgrip.io import dataset_from_csv, series_from_csv, FRICTION_COLUMNS, TERRA_COLUMNS

TINY = """# hard-ground only, one repetition
velocities = 1, 2, 3
hard_mu = 0.25, 0.45, 0.9
soils =
sinkages =
repetitions = 1
eval.velocities = 1.5, 2.5
eval.hard_mu = 0.35
eval.soils =
eval.sinkages =
map.v = 1:3:5
map.mu = 0.25, 0.9
"""


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def error_line(err):
    lines = [ln for ln in err.splitlines() if ln.startswith("lowgrip: error:")]
    assert len(lines) == 1
    return lines[0]


@pytest.fixture
def tiny(tmp_path):
    p = tmp_path / "grid.cfg"
    p.write_text(TINY)
    return p


def test_pipeline_tiny(tmp_path, tiny, capsys):
    ds = tmp_path / "ds.csv"
    model = tmp_path / "model.txt"
    assert run(["generate", "--grid-file", str(tiny), "--out", str(ds)], capsys)[0] == 0
    assert len(dataset_from_csv(ds.read_text())) == 45
    assert run(["train", str(ds), "--out", str(model)], capsys)[0] == 0
    text = model.read_text()
    assert "hard.5.residual_rms" in text and "deformable.1.trained = false" in text
    assert run(["map", str(model), "--mode", "hard", "--grid-file", str(tiny), "--out", str(tmp_path / "m")],
               capsys)[0] == 0
    assert len((tmp_path / "m.csv").read_text().splitlines()) == 11
    assert (tmp_path / "m.svg").read_text().startswith("<svg")
    code, _, err = run(["map", str(model), "--mode", "deformable", "--out", str(tmp_path / "d")], capsys)
    assert code == 2 and "untrained" in error_line(err)
    rep = tmp_path / "eval.json"
    assert run(["evaluate", str(model), "--grid-file", str(tiny), "--out", str(rep)], capsys)[0] == 0
    report = json.loads(rep.read_text())
    assert report["summary"]["cells"] == 2 and report["summary"]["held_out_cells"] == 2
    # retraining gives the identical model file
    model2 = tmp_path / "model2.txt"
    run(["train", str(ds), "--out", str(model2)], capsys)
    assert model2.read_bytes() == model.read_bytes()


def test_generate_deterministic(tmp_path, capsys):
    cfg = tmp_path / "g.cfg"
    cfg.write_text("velocities = 2\nhard_mu = 0.45\nsoils =\nsinkages =\nrepetitions = 1\n")
    outs = []
    for k in range(2):
        out = tmp_path / f"d{k}.csv"
        assert run(["generate", "--grid-file", str(cfg), "--seed", "7", "--out", str(out)], capsys)[0] == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert len(outs[0].decode().splitlines()) == 6


def test_simulate_and_estimate(tmp_path, capsys):
    acc = tmp_path / "acc.csv"
    code, out, _ = run(["simulate", "--maneuver", "accel", "--mu", "0.45", "--out", str(acc)], capsys)
    assert code == 0 and "maneuver=accel" in out
    est = tmp_path / "mu.csv"
    assert run(["estimate", str(acc), "--mode", "hard", "--out", str(est)], capsys)[0] == 0
    mu = series_from_csv(est.read_text(), FRICTION_COLUMNS)[-1][1]
    assert 0.40 <= mu <= 0.50

    br = tmp_path / "brake.csv"
    code, out, _ = run(["simulate", "--v0", "3", "--z", "0.03", "--c-kpa", "74", "--phi-deg", "31",
                        "--maneuver", "Brake100", "--out", str(br)], capsys)
    assert code == 0 and "min_distance_m=" in out
    est = tmp_path / "terra.csv"
    assert run(["estimate", str(br), "--mode", "deformable", "--z", "0.03", "--out", str(est)], capsys)[0] == 0
    last = series_from_csv(est.read_text(), TERRA_COLUMNS)[-1]
    assert abs(last[1] - 74) <= 15 and abs(last[2] - 31) <= 5


def test_estimate_stdout(tmp_path, capsys):
    acc = tmp_path / "acc.csv"
    run(["simulate", "--maneuver", "accel", "--out", str(acc)], capsys)
    code, out, _ = run(["estimate", str(acc), "--mode", "hard"], capsys)
    assert code == 0 and out.startswith("t_s,mu_hat\n")


@pytest.mark.parametrize("argv,code,kind", [
    ([], 1, "usage"),
    (["bogus"], 1, "usage"),
    (["estimate", "x.csv"], 1, "usage"),
    (["simulate", "--v0", "abc"], 1, "usage"),
    (["simulate", "--maneuver", "7"], 1, "usage"),
    (["simulate", "--z", "0.03"], 1, "usage"),
    (["simulate", "--mu", "5"], 1, "usage"),
    (["train", "/nonexistent/ds.csv"], 2, "data"),
])
def test_error_exits(argv, code, kind, capsys):
    got, _, err = run(argv, capsys)
    assert got == code
    assert error_line(err).startswith(f"lowgrip: error: {kind}: ")


def test_estimate_errors(tmp_path, capsys):
    acc = tmp_path / "acc.csv"
    run(["simulate", "--maneuver", "accel", "--out", str(acc)], capsys)
    code, _, err = run(["estimate", str(acc), "--mode", "deformable"], capsys)
    assert code == 1 and "requires --z" in error_line(err)
    empty = tmp_path / "empty.csv"
    empty.write_text(acc.read_text().splitlines()[0] + "\n")
    code, _, err = run(["estimate", str(empty), "--mode", "hard"], capsys)
    assert code == 2 and "empty trace" in error_line(err)
    bad = tmp_path / "bad.csv"
    lines = acc.read_text().splitlines()
    bad.write_text("\n".join(lines[:3] + ["0.5,nan?,0,0,1,0,0,0"]) + "\n")
    code, _, err = run(["estimate", str(bad), "--mode", "hard"], capsys)
    assert code == 2 and "line 4" in error_line(err)


def test_train_strict_rank_error(tmp_path, capsys):
    cfg = tmp_path / "g.cfg"
    cfg.write_text("velocities = 1, 1.5, 2, 2.5, 3, 3.5\nhard_mu = 0.45\nsoils =\nsinkages =\nrepetitions = 1\n")
    ds = tmp_path / "ds.csv"
    run(["generate", "--grid-file", str(cfg), "--out", str(ds)], capsys)
    code, _, err = run(["train", str(ds), "--strict", "--out", str(tmp_path / "m.txt")], capsys)
    assert code == 3 and "collinear columns mu" in error_line(err)
    assert run(["train", str(ds), "--out", str(tmp_path / "m.txt")], capsys)[0] == 0


def test_seed_precedence(monkeypatch):
    monkeypatch.delenv("LOWGRIP_SEED", raising=False)
    assert resolve_seed(None, {}) == 0
    monkeypatch.setenv("LOWGRIP_SEED", "11")
    assert resolve_seed(None, {}) == 11
    assert resolve_seed(None, {"seed": "4"}) == 4
    assert resolve_seed(2, {"seed": "4"}) == 2


def test_subcommands_listed():
    text = build_parser().format_help()
    for name in ("generate", "estimate", "train", "map", "evaluate", "simulate"):
        assert name in text


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "lowgrip", "simulate", "--maneuver", "9"],
                       capture_output=True, text=True)
    assert r.returncode == 1
    assert r.stderr.strip().splitlines()[-1].startswith("lowgrip: error: usage:")
