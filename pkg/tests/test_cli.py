import json
import subprocess
import sys

import numpy as np
import pytest

from rfresp.cli import EXIT_CONFIG, EXIT_FORMAT, EXIT_MISSING, EXIT_OK, EXIT_USAGE, cli_main
from rfresp.io import read_rate_series, read_report, write_rate_series, write_trace
from rfresp.synth import SynthScenario, synth_trace
from rfresp.trace import RateSeries


def _scenario(tmp_path, tech="rss", **kw):
    d = {"technology": tech, "duration": 120.0, "rate_schedule": [[0.0, 0.25]], "seed": 1, **kw}
    p = tmp_path / "scenario.json"
    p.write_text(json.dumps(d))
    return p


def test_perfect_estimates_have_zero_error(tmp_path, capsys):
    gt = RateSeries.from_arrays(np.arange(30.0, 100.0, 5.0), np.full(14, 0.25))
    write_rate_series(gt, tmp_path / "gt.csv")
    write_rate_series(gt, tmp_path / "est.csv")
    assert cli_main(["eval", str(tmp_path / "est.csv"), str(tmp_path / "gt.csv"),
                     "--out", str(tmp_path / "r.json")]) == EXIT_OK
    assert read_report(tmp_path / "r.json").median_bpm == 0.0
    assert "median 0.0000" in capsys.readouterr().out


def test_synth_estimate_eval(tmp_path):
    sc = _scenario(tmp_path, motion_bursts=[[60.0, 5.0, 20.0]])
    assert cli_main(["synth", str(sc), "--trace", str(tmp_path / "t.json"), "--gt", str(tmp_path / "gt.csv"),
                     "--intervals", str(tmp_path / "iv.csv")]) == EXIT_OK
    assert (tmp_path / "iv.csv").read_text().splitlines()[1] == "60.0,65.0"
    assert cli_main(["estimate", str(tmp_path / "t.json"), "--motion", "mabd", "--out",
                     str(tmp_path / "est.csv")]) == EXIT_OK
    est = read_rate_series(tmp_path / "est.csv")
    assert est.suppressed.any()
    assert cli_main(["eval", str(tmp_path / "est.csv"), str(tmp_path / "gt.csv"),
                     "--out", str(tmp_path / "r.json")]) == EXIT_OK
    r = read_report(tmp_path / "r.json")
    assert r.median_bpm < 0.12 and r.pct_removed > 0


def test_config_file_and_flag_override(tmp_path):
    out = synth_trace("rss", SynthScenario(duration=60.0, seed=2))
    write_trace(out.trace, tmp_path / "t.json")
    (tmp_path / "c.json").write_text(json.dumps({"tech": "rss", "method": "psd", "output": str(tmp_path / "a.csv")}))
    assert cli_main(["estimate", str(tmp_path / "t.json"), "--config", str(tmp_path / "c.json"),
                     "--method", "ibi", "--stream-select", "off"]) == EXIT_OK
    assert read_rate_series(tmp_path / "a.csv")[0].method == "ibi"


def test_gt_and_compare(tmp_path, capsys):
    poly = synth_trace("poly", SynthScenario(duration=60.0, rate_schedule=((0.0, 0.3),)))
    write_trace(poly.trace, tmp_path / "p.json")
    assert cli_main(["gt", str(tmp_path / "p.json"), "--out", str(tmp_path / "gt.csv")]) == EXIT_OK
    np.testing.assert_allclose(read_rate_series(tmp_path / "gt.csv").rates, 0.3, atol=0.002)

    t = np.arange(30.0, 130.0, 5.0)
    write_rate_series(RateSeries.from_arrays(t, np.full(t.size, 0.3)), tmp_path / "g.csv")
    rng = np.random.default_rng(0)
    for name, spread in (("a", 0.001), ("b", 0.05)):
        write_rate_series(RateSeries.from_arrays(t, 0.3 + spread * rng.normal(size=t.size)), tmp_path / f"{name}.csv")
        cli_main(["eval", str(tmp_path / f"{name}.csv"), str(tmp_path / "g.csv"), "--out", str(tmp_path / f"{name}.json")])
    capsys.readouterr()
    assert cli_main(["compare", str(tmp_path / "a.json"), str(tmp_path / "b.json"), "--alternative", "less"]) == EXIT_OK
    p = float(capsys.readouterr().out.split()[3])
    assert p < 0.01


@pytest.mark.parametrize("argv", [
    [], ["frobnicate"], ["estimate"], ["estimate", "x.json", "--bogus"],
    ["estimate", "x.json", "--stream-select", "maybe"], ["estimate", "x.json", "--motion", "shake"],
])
def test_usage_errors(argv, capsys):
    assert cli_main(argv) == EXIT_USAGE
    assert capsys.readouterr().err.startswith("usage error:")


def test_missing_file(tmp_path, capsys):
    assert cli_main(["estimate", str(tmp_path / "nope.json"), "--out", "x.csv"]) == EXIT_MISSING
    assert capsys.readouterr().err.startswith("missing file:")


def test_config_errors(tmp_path, capsys):
    out = synth_trace("rss", SynthScenario(duration=40.0))
    write_trace(out.trace, tmp_path / "t.json")
    (tmp_path / "c.json").write_text(json.dumps({"tech": "rss", "wobble": 1}))
    assert cli_main(["estimate", str(tmp_path / "t.json"), "--config", str(tmp_path / "c.json"),
                     "--out", str(tmp_path / "e.csv")]) == EXIT_CONFIG
    assert capsys.readouterr().err.startswith("config error:")
    assert cli_main(["estimate", str(tmp_path / "t.json"), "--tech", "csi", "--out", "e.csv"]) == EXIT_CONFIG
    assert cli_main(["estimate", str(tmp_path / "t.json")]) == EXIT_CONFIG
    assert cli_main(["gt", str(tmp_path / "t.json"), "--out", "g.csv"]) == EXIT_CONFIG
    sc = _scenario(tmp_path, rate_schedule=[[0.0, -1.0]])
    assert cli_main(["synth", str(sc), "--trace", str(tmp_path / "s.json"), "--gt", "g.csv"]) == EXIT_CONFIG


def test_format_error(tmp_path, capsys):
    out = synth_trace("sub", SynthScenario(duration=40.0))
    write_trace(out.trace, tmp_path / "t.json")
    with open(tmp_path / "t.csv", "a") as fh:
        fh.write("garbage\n")
    assert cli_main(["estimate", str(tmp_path / "t.json"), "--out", str(tmp_path / "e.csv")]) == EXIT_FORMAT
    err = capsys.readouterr().err
    assert err.startswith("format error:") and "t.csv:" in err


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "rfresp", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "estimate" in r.stdout


@pytest.fixture(scope="module")
def short_traces(tmp_path_factory):
    d = tmp_path_factory.mktemp("traces")
    for tech in ("cir", "csi", "rss", "sub"):
        write_trace(synth_trace(tech, SynthScenario(duration=40.0, seed=6)).trace, d / f"{tech}.json")
    return d


@pytest.mark.parametrize("tech", ["cir", "csi", "rss", "sub"])
@pytest.mark.parametrize("select", ["on", "off"])
@pytest.mark.parametrize("method", ["psd", "ibi"])
def test_every_table_cell_runs(short_traces, tmp_path, tech, select, method):
    argv = ["estimate", str(short_traces / f"{tech}.json"), "--tech", tech, "--method", method,
            "--stream-select", select, "--motion", "none", "--out", str(tmp_path / "e.csv")]
    assert cli_main(argv) == EXIT_OK
    assert len(read_rate_series(tmp_path / "e.csv")) == 2  # ticks at 30 and 35 s


def test_estimate_is_deterministic(short_traces, tmp_path):
    for name in ("a", "b"):
        assert cli_main(["estimate", str(short_traces / "cir.json"), "--motion", "mavbd",
                         "--out", str(tmp_path / f"{name}.csv")]) == EXIT_OK
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
