import csv
import io
import json
import math

import pytest

from emraman import __version__
from emraman.cli import run_command


def run(capsys, *argv):
    code = run_command(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_csv(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_csv_header(capsys):
    code, out, _ = run(capsys, "dispersion", "--samples", "3")
    assert code == 0
    first, second = out.splitlines()[:2]
    assert first == f"# emraman {__version__}"
    assert second.startswith("# config: ")
    assert json.loads(second[len("# config: "):])["command"] == "dispersion"


def test_rate_scan_example(capsys):
    code, out, err = run(capsys, "rate-scan", "--k-min", "2", "--k-max", "4", "--samples", "3")
    assert code == 0
    rows = parse_csv(out)
    assert list(rows[0]) == ["k", "gamma_backward", "gamma_forward"]
    assert [float(r["k"]) for r in rows] == [2.0, 3.0, 4.0]
    assert float(rows[1]["gamma_backward"]) == pytest.approx(0.1 * 1.6719653877683904, rel=1e-10)
    assert all(float(r["gamma_backward"]) >= float(r["gamma_forward"]) for r in rows)
    assert "rate-scan" in err


def test_rate_scan_below_threshold_is_regime_error(capsys):
    code, _, err = run(capsys, "rate-scan", "--k-min", "1", "--k-max", "1.5", "--samples", "2")
    assert code == 1
    assert "regime" in err


def test_usage_errors_exit_2(capsys):
    assert run(capsys, "rate-scan", "--pair", "9")[0] == 2
    assert run(capsys, "resonances", "--pair", "4,1")[0] == 2
    assert run(capsys)[0] == 2


def test_resonances_example(capsys):
    code, out, _ = run(capsys, "resonances", "--pair", "1,4", "--k", "3", "--theta-e", "0.01")
    assert code == 0
    xs = sorted(float(r["xi"]) for r in parse_csv(out) if r["kind"] == "root")
    assert xs == pytest.approx([-4.9158, -1.0829], abs=1e-4)
    assert {r["pair"] for r in parse_csv(out)} == {"14"}


def test_spacetime_regime_error(capsys):
    code, _, err = run(capsys, "spacetime", "--pair", "1,4", "--theta-e", "0.5")
    assert code == 1 and "regime" in err


def test_flow_json(capsys):
    code, out, _ = run(capsys, "flow", "--pair", "1,4", "--format", "json", "--epsilon", "1e-4", "--grid-n", "16")
    assert code == 0
    body = json.loads(out)
    assert body["fitted_rate"] == pytest.approx(body["predicted_rate"], rel=0.02)
    assert body["predicted_rate"] == pytest.approx(0.15882755965403816, rel=1e-12)


def test_zakharov_json(capsys):
    code, out, _ = run(capsys, "zakharov", "--t-final", "0.05", "--grid-n", "32", "--format", "json")
    assert code == 0
    body = json.loads(out)
    assert body["mass_drift"] < 1e-12
    assert body["amplitude_max"] == pytest.approx(1.0, rel=1e-3)


def test_figure_variety(capsys):
    code, out, _ = run(capsys, "figure", "--id", "variety", "--theta-e", str(math.sqrt(0.05)), "--samples", "11")
    assert code == 0
    rows = parse_csv(out)
    end = [r for r in rows if float(r["xi"]) == 5.0][0]
    assert float(end["lambda2"]) == pytest.approx(1.5, rel=1e-12)


def test_figure_trace_signs(capsys):
    code, out, _ = run(capsys, "figure", "--id", "trace-vs-k", "--samples", "5")
    assert code == 0
    for r in parse_csv(out):
        assert float(r["tr14_minus"]) > 0 and float(r["tr14_plus"]) > 0
        assert float(r["tr12_plus"]) < 0 and float(r["tr12_minus"]) < 0


def test_figure_png(tmp_path, capsys):
    png = tmp_path / "sub" / "rates.png"
    code, out, _ = run(capsys, "figure", "--id", "rate-vs-k", "--samples", "4", "--png", str(png))
    assert code == 0
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    rows = parse_csv(out)
    assert all(float(r["gamma_backward"]) >= float(r["gamma_forward"]) for r in rows)


def test_report_writes_plots(tmp_path, capsys):
    out = tmp_path / "rep.csv"
    code, _, err = run(capsys, "report", "-o", str(out))
    assert code == 0
    for stem in ("variety", "unstable-resonances", "rate-vs-k"):
        assert (tmp_path / f"rep_{stem}.png").stat().st_size > 0
    rows = parse_csv(out.read_text())
    labels = {(r["pair"], r["classification"]) for r in rows}
    assert ("14", "unstable") in labels and ("12", "stable") in labels
    assert "unstable" in err


def test_report_no_plots(tmp_path, capsys):
    out = tmp_path / "rep.csv"
    assert run(capsys, "report", "--no-plots", "-o", str(out))[0] == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["rep.csv"]


def test_repeat_runs_are_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "trace-scan", "--samples", "4", "-o", str(a))
    run(capsys, "trace-scan", "--samples", "4", "-o", str(b))
    assert a.read_bytes() == b.read_bytes()
