import csv
import io
import json
import math
from pathlib import Path

import pytest

from relaxprc import Impulse, ParseError, SquarePulse, ValidationError, parse_config
from relaxprc.cli import main, run
from relaxprc.config import load_config

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"

MINIMAL = """
[model]
family = fhn
"""


def test_shipped_impulse_config_round_trips():
    cfg = load_config(CONFIGS / "fhn_impulse.cfg")
    assert (cfg.model.a, cfg.model.b, cfg.model.I) == (0.7, 0.8, 1.0)
    assert cfg.input.signal() == Impulse(1.5)
    again = parse_config(cfg.to_text())
    assert again == cfg


def test_shipped_pulse_config():
    cfg = load_config(CONFIGS / "fhn_pulse.cfg")
    sig = cfg.input.signal()
    assert sig == SquarePulse(0.25, period_fraction=0.1)
    assert sig.slow_duration(1.819798197238642) == pytest.approx(0.1819798197238642)
    assert parse_config(cfg.to_text()) == cfg


def test_polynomial_config():
    cfg = load_config(CONFIGS / "cubic_polynomial.cfg")
    sys = cfg.model.system()
    assert sys.f_coeffs[3] == pytest.approx(-1 / 3)
    assert parse_config(cfg.to_text()) == cfg


def test_defaults_filled():
    cfg = parse_config(MINIMAL)
    assert cfg.input is None
    assert cfg.numerics.rtol == 1e-9 and cfg.numerics.band == 0.05
    assert cfg.output.dir == "out"


def test_slow_duration_unit():
    cfg = parse_config(MINIMAL + "[input]\nkind = pulse\nu_bar = 0.25\nduration = 0.3 slow\n")
    assert cfg.input.signal() == SquarePulse(0.25, duration_slow=0.3)


def test_missing_model():
    with pytest.raises(ValidationError) as info:
        parse_config("[input]\nkind = impulse\nalpha = 1\n")
    assert info.value.field == "model"


@pytest.mark.parametrize("text, field", [
    (MINIMAL + "colour = red\n", "model.colour"),
    (MINIMAL + "[plotting]\nx = 1\n", "plotting"),
    (MINIMAL + "a = nan\n", "model.a"),
    (MINIMAL + "a = inf\n", "model.a"),
    (MINIMAL + "a = abc\n", "model.a"),
    (MINIMAL + "epsilon = 0\n", "model.epsilon"),
    (MINIMAL + "[input]\nkind = impulse\nalpha = 1\nu_bar = 2\n", "input"),
    (MINIMAL + "[input]\nkind = pulse\nu_bar = 2\n", "input.duration"),
    (MINIMAL + "[input]\nkind = ramp\n", "input.kind"),
    (MINIMAL + "[input]\nkind = pulse\nu_bar = 1\nduration = 2 weeks\n", "input.duration"),
    (MINIMAL + "[numerics]\nsamples = 1.5\n", "numerics.samples"),
    (MINIMAL + "[numerics]\nrtol = -1\n", "numerics.rtol"),
    ("[model]\nfamily = polynomial\nf = 0, 1\n", "model.g"),
    ("[model]\nfamily = polynomial\nf = 0,1,0,-0.3\ng = 1, 2\n", "model.g"),
    ("[model]\nfamily = spiking\n", "model.family"),
])
def test_validation_errors(text, field):
    with pytest.raises(ValidationError) as info:
        parse_config(text)
    assert info.value.field == field


@pytest.mark.parametrize("text, line", [
    ("a = 1\n[model]\n", 1),
    ("[model]\nfamily = fhn\njust words\n", 3),
    ("[model]\na = 1\na = 2\n", 3),
    ("[model]\n[model]\n", 2),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as info:
        parse_config(text)
    assert info.value.line == line


def test_inline_comments():
    cfg = parse_config("[model]  # system\na = 0.6   # smaller\n")
    assert cfg.model.a == 0.6


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_geometry_csv(tmp_path):
    cfg = load_config(CONFIGS / "fhn_impulse.cfg")
    (path,) = run(cfg, "geometry", tmp_path)
    rows = {r[0]: r[1:] for r in _read(path)}
    assert rows["name"] == ["x", "z", "value"]
    assert float(rows["lower_fold"][0]) == pytest.approx(-1.0, abs=1e-12)
    assert float(rows["upper_fold"][1]) == pytest.approx(5 / 3, abs=1e-12)
    assert float(rows["landing_lower_jump"][0]) == pytest.approx(2.0, abs=1e-12)
    assert float(rows["landing_upper_jump"][0]) == pytest.approx(-2.0, abs=1e-12)
    assert float(rows["period_slow"][2]) == pytest.approx(1.819798197238642, abs=1e-12)
    assert b"\r\n" not in path.read_bytes()


def test_isochrones_csv_vertical(tmp_path):
    cfg = parse_config(MINIMAL + "[numerics]\ngrid = 12\n")
    (path,) = run(cfg, "isochrones", tmp_path)
    rows = _read(path)
    assert rows[0] == ["x", "z", "theta"]
    data = [tuple(map(float, r)) for r in rows[1:]]
    assert len(data) == 144
    by_z = {}
    for x, z, th in data:
        by_z.setdefault(z, []).append((x, th))
    for z, pts in by_z.items():
        finite = [th for _, th in pts if not math.isnan(th)]
        # at most two distinct phases per row: one per basin
        assert len({round(t, 12) for t in finite}) <= 2


def test_prc_csv_and_plot(tmp_path):
    cfg = parse_config(MINIMAL + "epsilon = 0.1\n[input]\nkind = impulse\nalpha = 1.5\n"
                       "[numerics]\nsamples = 4\nsingular_samples = 64\n")
    run(cfg, "prc-singular", tmp_path)
    (num,) = run(cfg, "prc-numeric", tmp_path)
    rows = _read(num)
    assert rows[0] == ["theta", "shift", "method", "epsilon"]
    assert {r[2] for r in rows[1:]} == {"numeric"}
    (svg,) = run(cfg, "plot", tmp_path)
    text = svg.read_text()
    assert text.startswith("<?xml") and 'version="1.1"' in text
    assert "<polyline" in text and "<circle" in text


def test_plot_requires_singular(tmp_path):
    cfg = parse_config(MINIMAL + "[input]\nkind = impulse\nalpha = 1.5\n")
    with pytest.raises(ValidationError):
        run(cfg, "plot", tmp_path)


def test_unknown_command(tmp_path):
    with pytest.raises(ValidationError):
        run(parse_config(MINIMAL), "dance", tmp_path)


def test_main_writes_sidecar(tmp_path, capsys):
    status = main(["--config", str(CONFIGS / "fhn_impulse.cfg"), "--command", "geometry",
                   "--out", str(tmp_path)])
    assert status == 0
    meta = json.loads((tmp_path / "fhn_impulse_run-geometry.json").read_text())
    assert meta["files"] == ["fhn_impulse_geometry.csv"]
    assert "finished_utc" in meta
    assert "finished" not in (tmp_path / "fhn_impulse_geometry.csv").read_text()


def test_main_error_record(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[model]\na = oops\n")
    status = main(["--config", str(bad), "--command", "geometry", "--out", str(tmp_path)])
    assert status != 0
    err = capsys.readouterr().err.strip().splitlines()
    rec = json.loads(err[-1])
    assert rec["error"] == "ValidationError" and rec["field"] == "model.a"


def test_main_missing_file(tmp_path, capsys):
    status = main(["--config", str(tmp_path / "nope.cfg"), "--command", "geometry"])
    assert status != 0
    assert json.loads(capsys.readouterr().err)["error"] == "FileNotFoundError"


def test_main_module_error(tmp_path, capsys):
    cfg = tmp_path / "flat.cfg"
    cfg.write_text("[model]\nfamily = polynomial\nf = 0, 1\ng = 0.7, 1, -0.8\n")
    status = main(["--config", str(cfg), "--command", "geometry", "--out", str(tmp_path)])
    assert status == 1
    assert json.loads(capsys.readouterr().err)["error"] == "ShapeError"


def test_csv_byte_identical(tmp_path):
    cfg = load_config(CONFIGS / "fhn_pulse.cfg")
    cfg.numerics.singular_samples = 32
    a = run(cfg, "prc-singular", tmp_path / "a")[0].read_bytes()
    b = run(cfg, "prc-singular", tmp_path / "b")[0].read_bytes()
    assert a == b
    first = io.StringIO(a.decode()).readline()
    assert first == "theta,shift,method,epsilon\n"
