"""Canonical file formats and run configuration.

A trace is a JSON manifest plus a CSV data file of long records, one row
per (sample, stream):

    timestamp_s,stream_index,value        real or integer traces
    timestamp_s,stream_index,re,im        complex traces

Rows of one sample are contiguous with ``stream_index`` running 0..S-1, and
samples are ordered by time. Floats are written with ``repr`` so every value
survives a round trip exactly and output is byte-reproducible.

Rate series are CSV with a ``# method=... tick=...`` comment line and the
columns ``t_s,f_hat_hz,suppressed``; an absent estimate is an empty field.
Reports, run configurations and synthetic scenarios are JSON.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .estimate import PipelineConfig
from .evaluate import EvalReport
from .motion import MotionConfig, load_motion_defaults
from .trace import RateEstimate, RateSeries, RawTrace, Tech, TechnologyProfile, ValueKind

FORMAT_VERSION = 1


class FormatError(ValueError):
    """Base class for problems reading one of the canonical files."""


class ParseError(FormatError):
    def __init__(self, path, line: int, msg: str):
        self.path, self.line = str(path), line
        super().__init__(f"{path}:{line}: {msg}")


class SchemaError(FormatError):
    pass


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TraceManifest:
    technology: Tech
    fs_nominal: float
    stream_count: int
    value_kind: ValueKind
    start_time: float = 0.0
    stream_labels: Optional[tuple] = None
    data_file: str = ""
    format_version: int = FORMAT_VERSION

    @property
    def profile(self) -> TechnologyProfile:
        return TechnologyProfile(self.technology, self.fs_nominal, self.stream_count, self.value_kind)

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "technology": self.technology.value,
            "fs_nominal": self.fs_nominal,
            "stream_count": self.stream_count,
            "value_kind": self.value_kind.value,
            "start_time": self.start_time,
            "stream_labels": None if self.stream_labels is None else list(self.stream_labels),
            "data_file": self.data_file,
        }

    @classmethod
    def from_dict(cls, d: dict, path="manifest") -> "TraceManifest":
        required = ("format_version", "technology", "fs_nominal", "stream_count", "value_kind", "data_file")
        missing = [k for k in required if k not in d]
        if missing:
            raise SchemaError(f"{path}: manifest lacks {', '.join(missing)}")
        if d["format_version"] != FORMAT_VERSION:
            raise SchemaError(f"{path}: unsupported format_version {d['format_version']!r}")
        try:
            labels = d.get("stream_labels")
            m = cls(Tech(d["technology"]), float(d["fs_nominal"]), int(d["stream_count"]),
                    ValueKind(d["value_kind"]), float(d.get("start_time", 0.0)),
                    None if labels is None else tuple(labels), str(d["data_file"]))
            m.profile  # validates rate and stream count
        except (ValueError, TypeError) as exc:
            raise SchemaError(f"{path}: {exc}") from None
        if m.stream_labels is not None and len(m.stream_labels) != m.stream_count:
            raise SchemaError(f"{path}: {len(m.stream_labels)} labels for {m.stream_count} streams")
        return m


def _data_path(manifest_path) -> str:
    base = os.path.basename(str(manifest_path))
    stem = base[:-5] if base.endswith(".json") else base
    return stem + ".csv"


def _fmt(x) -> str:
    return repr(float(x))


def write_trace(trace: RawTrace, path) -> None:
    """Write ``path`` (JSON manifest) and its CSV data file alongside it."""
    p = trace.profile
    data_name = _data_path(path)
    manifest = TraceManifest(p.tech, p.fs_nominal, p.stream_count, p.value_kind, trace.t0,
                             trace.stream_labels, data_name)
    with open(path, "w", newline="\n") as fh:
        json.dump(manifest.to_dict(), fh, indent=2)
        fh.write("\n")
    data_path = os.path.join(os.path.dirname(str(path)), data_name)
    complex_kind = p.value_kind is ValueKind.COMPLEX
    integer_kind = p.value_kind is ValueKind.INTEGER
    with open(data_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp_s", "stream_index"] + (["re", "im"] if complex_kind else ["value"]))
        for t, row in zip(trace.timestamps, trace.samples):
            ts = _fmt(t)
            for j, v in enumerate(row):
                if complex_kind:
                    w.writerow([ts, j, _fmt(v.real), _fmt(v.imag)])
                elif integer_kind and float(v).is_integer():
                    w.writerow([ts, j, int(v)])
                else:
                    w.writerow([ts, j, _fmt(v)])


def read_manifest(path) -> TraceManifest:
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such trace manifest: {path}")
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(path, exc.lineno, f"invalid JSON: {exc.msg}") from None
    if not isinstance(d, dict):
        raise SchemaError(f"{path}: manifest must be a JSON object")
    return TraceManifest.from_dict(d, path)


def read_trace(path, normalize: bool = True) -> RawTrace:
    """Read a trace written by ``write_trace``.

    With ``normalize`` the samples are snapped to the nominal sampling grid
    (see ``RawTrace.normalized``).
    """
    m = read_manifest(path)
    data_path = os.path.join(os.path.dirname(str(path)), m.data_file)
    if not os.path.exists(data_path):
        raise FileNotFoundError(f"no such trace data file: {data_path}")
    complex_kind = m.value_kind is ValueKind.COMPLEX
    header = ["timestamp_s", "stream_index"] + (["re", "im"] if complex_kind else ["value"])
    S = m.stream_count
    times, rows, cur = [], [], []
    with open(data_path, newline="") as fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first != header:
            raise ParseError(data_path, 1, f"expected header {','.join(header)}")
        for rec in reader:
            line = reader.line_num
            if len(rec) != len(header):
                raise ParseError(data_path, line, f"expected {len(header)} fields, got {len(rec)}")
            try:
                t = float(rec[0])
                j = int(rec[1])
                if complex_kind:
                    v = complex(float(rec[2]), float(rec[3]))
                else:
                    v = float(rec[2])
            except ValueError as exc:
                raise ParseError(data_path, line, str(exc)) from None
            if not np.isfinite(t):
                raise ParseError(data_path, line, "timestamp must be finite")
            if j != len(cur):
                raise ParseError(data_path, line, f"expected stream_index {len(cur)}, got {j}")
            if cur and t != times[-1]:
                raise ParseError(data_path, line, "timestamp changes inside a sample")
            if not cur:
                if times and t < times[-1]:
                    raise ParseError(data_path, line, "records are not sorted by time")
                times.append(t)
            cur.append(v)
            if len(cur) == S:
                rows.append(cur)
                cur = []
        if cur:
            raise ParseError(data_path, reader.line_num, f"last sample has {len(cur)} of {S} streams")
    if times and abs(times[0] - m.start_time) > 1e-9 * max(1.0, abs(m.start_time)):
        raise SchemaError(f"{path}: start_time {m.start_time} but first record at {times[0]}")
    samples = np.array(rows, dtype=complex if complex_kind else float).reshape(len(rows), S)
    try:
        trace = RawTrace(m.profile, np.array(times), samples, m.stream_labels)
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from None
    return trace.normalized() if normalize else trace


def write_rate_series(series: RateSeries, path) -> None:
    method = series[0].method if len(series) else "psd"
    with open(path, "w", newline="") as fh:
        fh.write(f"# method={method} tick={series.tick!r}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t_s", "f_hat_hz", "suppressed"])
        for e in series:
            w.writerow([_fmt(e.t), "" if e.f_hat is None else _fmt(e.f_hat), int(e.suppressed_by_motion)])


def read_rate_series(path) -> RateSeries:
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such rate series: {path}")
    method, tick = "psd", 5.0
    out = []
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    start = 0
    if lines and lines[0].startswith("#"):
        for item in lines[0][1:].split():
            key, _, val = item.partition("=")
            if key == "method":
                method = val
            elif key == "tick":
                try:
                    tick = float(val)
                except ValueError:
                    raise ParseError(path, 1, f"bad tick {val!r}") from None
        start = 1
    if len(lines) <= start or lines[start] != "t_s,f_hat_hz,suppressed":
        raise ParseError(path, start + 1, "expected header t_s,f_hat_hz,suppressed")
    for k, rec in enumerate(csv.reader(lines[start + 1:]), start=start + 2):
        if len(rec) != 3:
            raise ParseError(path, k, f"expected 3 fields, got {len(rec)}")
        try:
            t = float(rec[0])
            f = None if rec[1] == "" else float(rec[1])
        except ValueError as exc:
            raise ParseError(path, k, str(exc)) from None
        if rec[2] not in ("0", "1"):
            raise ParseError(path, k, f"suppressed flag must be 0 or 1, got {rec[2]!r}")
        out.append(RateEstimate(t, f, method, rec[2] == "1"))
    try:
        return RateSeries(tuple(out), tick)
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from None


def read_intervals(path) -> list:
    """``t_start,t_end`` rows (header optional) as a list of pairs."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such interval file: {path}")
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for rec in reader:
            if not rec or rec[0].startswith("#") or rec == ["t_start", "t_end"]:
                continue
            line = reader.line_num
            if len(rec) != 2:
                raise ParseError(path, line, "expected t_start,t_end")
            try:
                s, e = float(rec[0]), float(rec[1])
            except ValueError as exc:
                raise ParseError(path, line, str(exc)) from None
            if e < s:
                raise ParseError(path, line, "interval ends before it starts")
            out.append((s, e))
    return out


def write_report(report: EvalReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")


def read_report(path) -> EvalReport:
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such report: {path}")
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(path, exc.lineno, f"invalid JSON: {exc.msg}") from None
    try:
        return EvalReport.from_dict(d)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: bad report: {exc}") from None


_RUN_KEYS = {"tech", "method", "stream_select", "motion", "motion_thresholds", "short_window",
             "long_window", "ave_window", "window", "tick", "input", "output"}


@dataclass(frozen=True)
class RunConfig:
    """Pipeline settings plus input/output paths, validated on construction."""

    pipeline: PipelineConfig
    input: Optional[str] = None
    output: Optional[str] = None

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        unknown = set(d) - _RUN_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        if "tech" not in d:
            raise ConfigError("config needs a tech")
        try:
            tech = Tech(str(d["tech"]).lower())
            motion = str(d.get("motion", "none")).lower()
            mc = None
            if motion != "none":
                entry = load_motion_defaults().get(tech.value, {})
                th = dict(entry.get("thresholds", {}))
                th.update(d.get("motion_thresholds", {}))
                mc = MotionConfig(motion, th,
                                  float(d.get("short_window", entry.get("short_window", 2.0))),
                                  float(d.get("long_window", entry.get("long_window", 30.0))),
                                  float(d.get("ave_window", entry.get("ave_window", 30.0))))
            ss = d.get("stream_select", True)
            if isinstance(ss, str):
                if ss not in ("on", "off"):
                    raise ValueError("stream_select must be on/off or a boolean")
                ss = ss == "on"
            elif not isinstance(ss, bool):
                raise ValueError("stream_select must be on/off or a boolean")
            pc = PipelineConfig(tech, str(d.get("method", "psd")), ss, motion,
                                float(d.get("window", 30.0)), float(d.get("tick", 5.0)),
                                motion_config=mc)
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from None
        return cls(pc, d.get("input"), d.get("output"))

    def to_dict(self) -> dict:
        p = self.pipeline
        d = {"tech": p.tech.value, "method": p.method, "stream_select": p.stream_select,
             "motion": p.motion, "window": p.window, "tick": p.tick}
        if p.motion_config is not None:
            mc = p.motion_config
            d.update(motion_thresholds=dict(mc.thresholds), short_window=mc.short_window,
                     long_window=mc.long_window, ave_window=mc.ave_window)
        if self.input is not None:
            d["input"] = self.input
        if self.output is not None:
            d["output"] = self.output
        return d


def load_run_config(path) -> RunConfig:
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such config: {path}")
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return RunConfig.from_dict(d)
