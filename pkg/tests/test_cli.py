import csv
import datetime as dt
import subprocess
import sys

import numpy as np
import pytest

from conftest import plant_row, write_plant_csv
from maintvar.cli import main
from maintvar.errors import EmptySeries
from maintvar.evaluate import random_stable_spec, simulate_var
from maintvar.plot import emit_plot, render_svg
from maintvar.textfeat import FeatureMatrix, write_matrix_csv


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


@pytest.fixture(scope="module")
def plant_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("plant")
    assert main(["simulate", "--kind", "plant", "--days", "500", "--seed", "5", "-o", str(d)]) == 0
    return d


@pytest.fixture(scope="module")
def matrix_path(plant_dir, tmp_path_factory):
    d = tmp_path_factory.mktemp("feat")
    assert main(["featurize", "-i", str(plant_dir / "plant.csv"), "-o", str(d)]) == 0
    return d / "matrix.csv"


def _corpus_dataset(tmp_path, header):
    lines = [l for l in open("tests/data/golden_corpus.tsv", encoding="utf-8") if not l.startswith("#")]
    start = dt.date(2020, 1, 1)
    rows, expected = [], []
    for i, line in enumerate(lines):
        text, labels = line.rstrip("\n").split("\t")
        rows.append(plant_row((start + dt.timedelta(days=i)).isoformat(), text=text))
        expected.append({l for l in labels.split(";") if l})
    return write_plant_csv(tmp_path / "p.csv", header, rows), expected


def test_featurize_golden(tmp_path, plant_header):
    path, expected = _corpus_dataset(tmp_path, plant_header)
    assert main(["featurize", "-i", str(path), "-o", str(tmp_path / "o")]) == 0
    log = read_csv(tmp_path / "o" / "extraction_log.csv")[1:]
    assert [set(filter(None, r[1].split(";"))) for r in log] == expected
    m = read_csv(tmp_path / "o" / "matrix.csv")
    assert m[0][0] == "date" and m[0][-1] == "Total generation (KWH)"
    assert len(m) == len(expected) + 1


def test_featurize_empty_issues_all_zero(tmp_path, plant_header):
    rows = [plant_row(f"2021-03-{d:02d}") for d in range(1, 11)]
    p = write_plant_csv(tmp_path / "p.csv", plant_header, rows)
    assert main(["featurize", "-i", str(p), "-o", str(tmp_path)]) == 0
    for row in read_csv(tmp_path / "matrix.csv")[1:]:
        assert all(float(v) == 0.0 for v in row[1:-1])


def test_featurize_missing_lexicon(tmp_path, plant_header, capsys):
    p = write_plant_csv(tmp_path / "p.csv", plant_header, [plant_row("2021-01-01")])
    code = main(["featurize", "-i", str(p), "--lexicon", str(tmp_path / "nope.txt"), "-o", str(tmp_path)])
    assert code != 0
    assert "nope.txt" in capsys.readouterr().err


def test_featurize_bad_lexicon(tmp_path, plant_header, capsys):
    p = write_plant_csv(tmp_path / "p.csv", plant_header, [plant_row("2021-01-01")])
    lex = tmp_path / "lex.txt"
    lex.write_text("[A]\nflags = grid\n[A]\nflags = grid\n")
    assert main(["featurize", "-i", str(p), "--lexicon", str(lex), "-o", str(tmp_path)]) == 2


def test_validate_reports(tmp_path, plant_header):
    rows = [plant_row("2021-01-01"), plant_row("2021-01-02", pr=250.0), plant_row("2021-01-04")]
    p = write_plant_csv(tmp_path / "p.csv", plant_header, rows)
    assert main(["validate", "-i", str(p), "-o", str(tmp_path)]) == 0
    v = read_csv(tmp_path / "validation.csv")
    assert v[1][0] == "2021-01-02"
    gaps = read_csv(tmp_path / "gap_report.csv")
    assert any(r[0] == "2021-01-03" for r in gaps[1:])


def test_validate_missing_column(tmp_path, plant_header, capsys):
    p = write_plant_csv(tmp_path / "p.csv", plant_header[:-1], [plant_row("2021-01-01")[:-1]])
    assert main(["validate", "-i", str(p), "-o", str(tmp_path)]) == 2
    assert "MissingColumn" in capsys.readouterr().err


def test_screen_planted(matrix_path, tmp_path):
    assert main(["screen", "-m", str(matrix_path), "--alpha", "0.001", "--max-lag", "2", "-o", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "screening.csv")
    selected = {r[0] for r in rows[1:] if r[-1] in ("1", "True", "true")}
    for lab in ("Grid Failure", "Inverter Failure", "Module Cleaning", "Cloudy"):
        assert lab in selected
    sel = read_csv(tmp_path / "selected_matrix.csv")
    assert sel[0][1] == "Total generation (KWH)"
    assert (tmp_path / "stationarity.csv").is_file()


def test_screen_single_and_constant_column(tmp_path):
    g = np.random.default_rng(0)
    n = 80
    target = 100 + g.standard_normal(n)
    fm = FeatureMatrix(tuple(range(n)), ("Const", "Total generation (KWH)"),
                       np.column_stack([np.zeros(n), target]), target="Total generation (KWH)")
    write_matrix_csv(fm, tmp_path / "m.csv")
    assert main(["screen", "-m", str(tmp_path / "m.csv"), "-o", str(tmp_path / "o")]) == 0
    text = (tmp_path / "o" / "screening.csv").read_text()
    assert "undefined" in text
    sel = read_csv(tmp_path / "o" / "selected_matrix.csv")
    assert sel[0] == ["date", "Total generation (KWH)"]


def test_forecast(matrix_path, tmp_path):
    assert main(["forecast", "-m", str(matrix_path), "-H", "3", "--p-max", "4", "-o", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "forecast.csv")
    assert len(rows) == 4
    assert (tmp_path / "model.txt").is_file()
    assert len(read_csv(tmp_path / "lag_selection.csv")) == 5


def test_forecast_bad_horizon(matrix_path, tmp_path):
    assert main(["forecast", "-m", str(matrix_path), "-H", "0", "-o", str(tmp_path)]) == 1
    assert main(["forecast", "-m", str(matrix_path), "-H", "x", "-o", str(tmp_path)]) == 1


def test_forecast_unstable_warning(tmp_path, capsys):
    n = 120
    t = np.arange(n, dtype=float)
    g = np.random.default_rng(1)
    vals = np.column_stack([1.05 ** t + g.standard_normal(n), 10 + g.standard_normal(n)])
    fm = FeatureMatrix(tuple(range(n)), ("A", "Total generation (KWH)"), vals, target="Total generation (KWH)")
    write_matrix_csv(fm, tmp_path / "m.csv")
    assert main(["forecast", "-m", str(tmp_path / "m.csv"), "--p-max", "2", "-o", str(tmp_path)]) == 0
    assert "not stable" in capsys.readouterr().err
    assert len(read_csv(tmp_path / "forecast.csv")) == 8


def test_backtest_outputs(matrix_path, tmp_path):
    assert main(["backtest", "-m", str(matrix_path), "--p-max", "4", "-o", str(tmp_path)]) == 0
    table = read_csv(tmp_path / "table.csv")
    assert [r[0] for r in table[1:]] == ["3", "5", "7", "10", "12", "30"]
    for h in (3, 5, 7, 10, 12, 30):
        assert len(read_csv(tmp_path / f"series_{h}d.csv")) == h + 1
        assert (tmp_path / f"plot_{h}d.svg").read_text().count("<polyline") == 2


def test_backtest_subset_and_errors(matrix_path, tmp_path):
    assert main(["backtest", "-m", str(matrix_path), "--horizons", "3", "--p-max", "3", "-o", str(tmp_path)]) == 0
    assert len(read_csv(tmp_path / "table.csv")) == 2
    assert main(["backtest", "-m", str(matrix_path), "--horizons", "0,3", "-o", str(tmp_path)]) == 1
    short = tmp_path / "short.csv"
    with open(matrix_path, encoding="utf-8") as fh:
        short.write_text("".join(fh.readlines()[:60]))
    assert main(["backtest", "-m", str(short), "-o", str(tmp_path)]) == 2


def test_importance(matrix_path, tmp_path):
    assert main(["importance", "-m", str(matrix_path), "--n-trees", "30", "--seed", "1", "-o", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "importance.csv")
    vals = [float(r[1]) for r in rows[1:]]
    assert vals == sorted(vals, reverse=True)
    assert sum(vals) == pytest.approx(1.0)


def test_simulate_var(tmp_path):
    assert main(["simulate", "--kind", "var", "--days", "300", "--seed", "2", "-o", str(tmp_path)]) == 0
    assert len(read_csv(tmp_path / "matrix.csv")) == 301


def test_usage_errors(tmp_path, capsys):
    assert main([]) == 1
    assert main(["nonsense"]) == 1
    assert main(["forecast", "-o", str(tmp_path)]) == 1
    assert main(["screen", "-m", str(tmp_path / "missing.csv")]) == 2
    assert "missing.csv" in capsys.readouterr().err


def test_config_file_and_override(matrix_path, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"matrix = {matrix_path}\nhorizon = 5\np_max = 3\n")
    assert main(["forecast", "--config", str(cfg), "-o", str(tmp_path / "a")]) == 0
    assert len(read_csv(tmp_path / "a" / "forecast.csv")) == 6
    assert main(["forecast", "--config", str(cfg), "-H", "2", "-o", str(tmp_path / "b")]) == 0
    assert len(read_csv(tmp_path / "b" / "forecast.csv")) == 3
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert main(["forecast", "--config", str(bad)]) == 1
    assert main(["forecast", "--config", str(tmp_path / "none.cfg")]) == 2


def test_seed_env_fallback(matrix_path, tmp_path, monkeypatch):
    args = ["importance", "-m", str(matrix_path), "--n-trees", "10"]
    monkeypatch.setenv("MAINTVAR_SEED", "7")
    main(args + ["-o", str(tmp_path / "env")])
    monkeypatch.delenv("MAINTVAR_SEED")
    main(args + ["--seed", "7", "-o", str(tmp_path / "flag")])
    main(args + ["--seed", "8", "-o", str(tmp_path / "other")])
    env = (tmp_path / "env" / "importance.csv").read_bytes()
    assert env == (tmp_path / "flag" / "importance.csv").read_bytes()
    assert env != (tmp_path / "other" / "importance.csv").read_bytes()


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "maintvar", "simulate", "--kind", "var", "--days", "100", "-o", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr


def test_emit_plot(tmp_path):
    series = [(f"2022-01-0{i}", 100.0 + i, 101.0 + i) for i in range(1, 8)]
    a = emit_plot(series, tmp_path / "a.svg", "t").read_bytes()
    b = emit_plot(series, tmp_path / "b.svg", "t").read_bytes()
    assert a == b
    svg = a.decode()
    assert svg.count("<polyline") == 2
    assert "Actual" in svg and "Forecast" in svg
    with pytest.raises(EmptySeries):
        render_svg([])
    one = render_svg([("d", 5.0, 5.0)])
    assert "nan" not in one.lower()


def test_end_to_end(plant_dir, tmp_path):
    f, s, b = tmp_path / "f", tmp_path / "s", tmp_path / "b"
    assert main(["featurize", "-i", str(plant_dir / "plant.csv"), "-o", str(f)]) == 0
    assert main(["screen", "-m", str(f / "matrix.csv"), "--alpha", "0.001", "--max-lag", "2", "-o", str(s)]) == 0
    assert main(["backtest", "-m", str(s / "selected_matrix.csv"), "--p-max", "6", "-o", str(b)]) == 0
    assert all(float(r[1]) < 10 for r in read_csv(b / "table.csv")[1:])
