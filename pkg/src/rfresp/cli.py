"""Command-line entry point: ``python -m rfresp <command> ...``.

Exit codes: 0 success, 2 usage error, 3 missing file, 4 invalid
configuration, 5 malformed input file, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import io
from .estimate import ground_truth_rr, run_pipeline
from .evaluate import evaluate_series, mann_whitney_u
from .motion import METHODS
from .synth import SynthScenario, synth_trace
from .trace import Tech, profile_for

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_MISSING, EXIT_CONFIG, EXIT_FORMAT = 0, 1, 2, 3, 4, 5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise FileNotFoundError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise io.ParseError(path, exc.lineno, f"invalid JSON: {exc.msg}") from None


def cmd_synth(a) -> int:
    d = _load_json(a.scenario)
    if not isinstance(d, dict):
        raise io.ConfigError(f"{a.scenario}: scenario must be a JSON object")
    d = dict(d)
    tech = a.tech or d.pop("technology", None)
    d.pop("technology", None)
    if tech is None:
        raise io.ConfigError("scenario names no technology; pass --tech")
    try:
        out = synth_trace(profile_for(tech.lower()), SynthScenario.from_dict(d))
    except (TypeError, ValueError) as exc:
        raise io.ConfigError(f"{a.scenario}: {exc}") from None
    io.write_trace(out.trace, a.trace)
    io.write_rate_series(out.ground_truth, a.gt)
    if a.intervals:
        with open(a.intervals, "w") as fh:
            fh.write("t_start,t_end\n")
            for s, e in out.motion_intervals:
                fh.write(f"{s!r},{e!r}\n")
    return EXIT_OK


def _run_config(a, trace_tech) -> io.RunConfig:
    d = {}
    if a.config:
        d = io.load_run_config(a.config).to_dict()
    for key, val in (("tech", a.tech), ("method", a.method), ("motion", a.motion)):
        if val is not None:
            d[key] = val
    if a.stream_select is not None:
        d["stream_select"] = a.stream_select
    d.setdefault("tech", trace_tech.value)
    if "motion" in d and d["motion"] == "none":
        for k in ("motion_thresholds", "short_window", "long_window", "ave_window"):
            d.pop(k, None)
    return io.RunConfig.from_dict(d)


def cmd_estimate(a) -> int:
    trace = io.read_trace(a.trace)
    rc = _run_config(a, trace.profile.tech)
    if rc.pipeline.tech is not trace.profile.tech:
        raise io.ConfigError(f"config is for {rc.pipeline.tech.value} but the trace is "
                             f"{trace.profile.tech.value}")
    out = a.out or rc.output
    if out is None:
        raise io.ConfigError("no output path: pass --out or set output in the config")
    io.write_rate_series(run_pipeline(trace, rc.pipeline), out)
    return EXIT_OK


def cmd_gt(a) -> int:
    trace = io.read_trace(a.trace)
    if trace.profile.tech is not Tech.POLY:
        raise io.ConfigError(f"gt needs a poly trace, got {trace.profile.tech.value}")
    io.write_rate_series(ground_truth_rr(trace), a.out)
    return EXIT_OK


def cmd_eval(a) -> int:
    est = io.read_rate_series(a.estimate)
    gt = io.read_rate_series(a.gt)
    intervals = io.read_intervals(a.intervals) if a.intervals else None
    report = evaluate_series(est, gt, intervals)
    if a.out:
        io.write_report(report, a.out)
    print(f"median {report.median_bpm:.4f} bpm  p95 {report.p95_bpm:.4f} bpm  "
          f"removed {100 * report.pct_removed:.1f}%  n {report.n_samples}")
    return EXIT_OK


def cmd_compare(a) -> int:
    ra, rb = io.read_report(a.report_a), io.read_report(a.report_b)
    if not ra.errors or not rb.errors:
        raise io.SchemaError("both reports must carry their error samples")
    res = mann_whitney_u(ra.errors, rb.errors, a.alternative)
    print(f"U {res.u:g}  p {res.p:.6g}  ({res.method}, {res.alternative})")
    return EXIT_OK


def _on_off(s: str) -> bool:
    if s not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on or off")
    return s == "on"


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rfresp", description="Respiratory rate from RF channel traces.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="scenario file -> trace + ground truth")
    s.add_argument("scenario")
    s.add_argument("--tech", choices=[t.value for t in Tech])
    s.add_argument("--trace", required=True, help="output manifest path (*.json)")
    s.add_argument("--gt", required=True, help="output ground-truth rate series")
    s.add_argument("--intervals", help="also write the motion intervals here")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("estimate", help="trace -> rate series")
    s.add_argument("trace")
    s.add_argument("--config", help="RunConfig JSON; flags override it")
    s.add_argument("--tech", choices=[t.value for t in Tech if t is not Tech.POLY])
    s.add_argument("--method", choices=["psd", "ibi"])
    s.add_argument("--stream-select", type=_on_off, metavar="{on,off}")
    s.add_argument("--motion", choices=("none",) + METHODS)
    s.add_argument("--out")
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("gt", help="poly trace -> ground-truth rate series")
    s.add_argument("trace")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gt)

    s = sub.add_parser("eval", help="estimate + ground truth -> report")
    s.add_argument("estimate")
    s.add_argument("gt")
    s.add_argument("--intervals", help="t_start,t_end rows; only ticks inside are scored")
    s.add_argument("--out")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("compare", help="two reports -> Mann-Whitney U test")
    s.add_argument("report_a")
    s.add_argument("report_b")
    s.add_argument("--alternative", choices=["two-sided", "less", "greater"], default="two-sided")
    s.set_defaults(func=cmd_compare)
    return p


def cli_main(argv=None) -> int:
    try:
        a = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return a.func(a)
    except FileNotFoundError as exc:
        print(f"missing file: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except io.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except io.FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main():
    sys.exit(cli_main())
