"""Command-line entry point: one experiment per subcommand, deterministic output.

Every run resolves to an ExperimentConfig (flags override an optional
key=value config file), dispatches to the owning module, and emits a
stream of records as CSV or JSON lines. Identical config and seed give
byte-identical output; wall-clock goes to stderr only, never into the
output stream. Column schemas are fixed per subcommand and documented
in docs/cli.md.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import shlex
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields as dataclass_fields
from typing import Callable, Iterable, Iterator, Mapping, Optional, Sequence, TextIO

import numpy as np

from . import __version__
from .cfe import ReducedFraction, cfe_digits
from .crosssec import crossing_sequence, kappa_quadrature
from .lattice import SymmetryError, orbit_samples, verify_symmetry
from .stats import (
    dispersion,
    haar_fd_histogram,
    len_stats,
    mass_escape_count,
    orbit_fd_histogram,
)
from .zaremba import enumerate_bounded, height_bound_check


class ConfigError(ValueError):
    """Bad flag, config-file entry, or field combination; exit code 1."""


class SelfTestError(AssertionError):
    """A built-in sanity experiment landed outside its own tolerance; exit code 2."""


# ---------------------------------------------------------------- config

def _cast_int(s: str) -> int:
    return int(s, 10)


def _cast_float(s: str) -> float:
    v = float(s)
    if not math.isfinite(v):
        raise ValueError(f"{s!r} is not finite")
    return v


def _cast_int_list(s: str) -> tuple[int, ...]:
    parts = [p for p in s.split(",") if p.strip()]
    if not parts:
        raise ValueError("empty integer list")
    return tuple(int(p, 10) for p in parts)


def _cast_float_list(s: str) -> tuple[float, ...]:
    parts = [p for p in s.split(",") if p.strip()]
    if not parts:
        raise ValueError("empty number list")
    return tuple(_cast_float(p) for p in parts)


@dataclass(frozen=True)
class _FieldSpec:
    name: str
    cast: Callable[[str], object]
    default: object = None  # None means required
    help: str = ""


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved, validated parameters of one experiment.

    The seed is always present and always echoed into the output, even
    for experiments that draw no randomness.
    """

    subcommand: str
    seed: int = 0
    threads: int = 1
    output: Optional[str] = None
    format: str = "csv"
    p: Optional[int] = None
    q: Optional[tuple[int, ...]] = None
    q_max: Optional[int] = None
    K: Optional[int] = None
    M: Optional[tuple[float, ...]] = None
    t: Optional[float] = None
    t_max: Optional[float] = None
    dt: Optional[float] = None
    delta: Optional[float] = None
    bins: Optional[int] = None
    grid: Optional[int] = None
    n: Optional[int] = None
    sample_size: Optional[int] = None

    def __post_init__(self) -> None:
        if self.subcommand not in _SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, not {self.format!r}")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        checks = (
            ("p", lambda v: v >= 1, "p must be >= 1"),
            ("q", lambda v: all(x >= 2 for x in v), "every q must be >= 2"),
            ("q_max", lambda v: v >= 2, "q-max must be >= 2"),
            ("K", lambda v: v >= 1, "K must be >= 1"),
            ("M", lambda v: all(x >= 1 for x in v), "every M must be >= 1"),
            ("t", lambda v: v >= 0, "t must be >= 0"),
            ("t_max", lambda v: v > 0, "t-max must be positive"),
            ("dt", lambda v: 0 < v <= 0.1, "dt must lie in (0, 0.1]"),
            ("delta", lambda v: v > 0, "delta must be positive"),
            ("bins", lambda v: v >= 2, "bins must be >= 2"),
            ("grid", lambda v: v >= 2, "grid must be >= 2"),
            ("n", lambda v: v >= 1, "n must be >= 1"),
            ("sample_size", lambda v: v >= 1, "sample-size must be >= 1"),
        )
        for name, ok, msg in checks:
            v = getattr(self, name)
            if v is not None and not ok(v):
                raise ConfigError(msg)

    def echo(self) -> dict[str, object]:
        """Config as an ordered mapping, embedded into every output."""
        out: dict[str, object] = {"subcommand": self.subcommand}
        for spec in _SUBCOMMANDS[self.subcommand].fields:
            v = getattr(self, spec.name)
            if v is not None:
                out[spec.name] = v
        out["seed"] = self.seed
        out["threads"] = self.threads
        out["format"] = self.format
        if self.output is not None:
            out["output"] = self.output
        return out


def _default_threads() -> int:
    env = os.environ.get("CFORBIT_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError as e:
            raise ConfigError(f"CFORBIT_THREADS must be an integer: {env!r}") from e
        if n < 1:
            raise ConfigError("CFORBIT_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def read_config_file(path: str) -> dict[str, str]:
    """key=value lines; blank lines and # comments ignored."""
    entries: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {text!r}")
            key, _, value = text.partition("=")
            entries[key.strip().replace("-", "_")] = value.strip()
    return entries


# ---------------------------------------------------------------- records

@dataclass(frozen=True)
class ResultRecord:
    """One output row: metric values in schema order plus the run's config echo."""

    experiment: str
    schema: str
    config: Mapping[str, object]
    metrics: Mapping[str, object]
    histogram: Optional[Mapping[str, object]] = None
    seconds: float = 0.0

    def __post_init__(self) -> None:
        for k, v in self.metrics.items():
            if isinstance(v, float) and not math.isfinite(v):
                raise ValueError(f"metric {k} is not finite")


def _fmt(v: object) -> str:
    """Fixed plain-text form: 12 significant digits for floats."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    if isinstance(v, str):
        return v
    raise TypeError(f"cannot format {type(v).__name__}")


def _json_value(v: object) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, Mapping):
        inner = ",".join(f"{json.dumps(str(k))}:{_json_value(x)}" for k, x in v.items())
        return "{" + inner + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ",".join(_json_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def emit(records: Iterable[ResultRecord], config: ExperimentConfig, stream: TextIO) -> int:
    """Write the record stream; returns the number of rows.

    CSV: comment preamble (version, schema, config), header, one row per
    record, fixed column order. JSON: a meta object line, then one
    object per record. Histogram payloads appear in JSON only.
    """
    sub = _SUBCOMMANDS[config.subcommand]
    echo = config.echo()
    rows = 0
    if config.format == "csv":
        stream.write(f"# cforbit {__version__}\n")
        stream.write(f"# schema {sub.schema}\n")
        cfg_text = " ".join(f"{k}={shlex.quote(_config_value(v))}" for k, v in echo.items())
        stream.write(f"# config {cfg_text}\n")
        stream.write(",".join(sub.columns) + "\n")
        for rec in records:
            stream.write(",".join(_fmt(rec.metrics[c]) for c in sub.columns) + "\n")
            rows += 1
    else:
        meta = {
            "record": "meta",
            "schema": sub.schema,
            "version": __version__,
            "columns": list(sub.columns),
            "config": echo,
        }
        stream.write(_json_value(meta) + "\n")
        for rec in records:
            body: dict[str, object] = {"record": "row"}
            for c in sub.columns:
                body[c] = rec.metrics[c]
            if rec.histogram is not None:
                body["histogram"] = rec.histogram
            stream.write(_json_value(body) + "\n")
            rows += 1
    return rows


def _config_value(v: object) -> str:
    if isinstance(v, tuple):
        return ",".join(_fmt(x) for x in v)
    return _fmt(v)


# ------------------------------------------------------- parse / render

@dataclass(frozen=True)
class ParsedOutput:
    """Typed view of an emitted file; render_output(parse_output(s)) == s."""

    fmt: str
    comments: tuple[str, ...]
    columns: tuple[str, ...]
    rows: tuple[object, ...]  # csv: tuples of cell values; json: row dicts
    meta: Optional[Mapping[str, object]] = None


def _parse_cell(cell: str) -> object:
    if cell == "true":
        return True
    if cell == "false":
        return False
    try:
        return int(cell, 10)
    except ValueError:
        pass
    try:
        f = float(cell)
    except ValueError:
        return cell
    return f if math.isfinite(f) else cell


def parse_output(text: str) -> ParsedOutput:
    lines = text.splitlines()
    if lines and lines[0].startswith("{"):
        objs = [json.loads(line) for line in lines if line]
        if not objs or objs[0].get("record") != "meta":
            raise ValueError("JSON output must start with a meta record")
        meta = objs[0]
        return ParsedOutput(
            "json",
            (),
            tuple(meta.get("columns", ())),
            tuple(objs[1:]),
            meta,
        )
    comments = []
    i = 0
    while i < len(lines) and lines[i].startswith("#"):
        comments.append(lines[i])
        i += 1
    if i >= len(lines):
        raise ValueError("CSV output is missing its header line")
    columns = tuple(lines[i].split(","))
    rows = tuple(
        tuple(_parse_cell(c) for c in line.split(","))
        for line in lines[i + 1 :]
        if line
    )
    return ParsedOutput("csv", tuple(comments), columns, rows)


def render_output(parsed: ParsedOutput) -> str:
    """Re-emit a parsed output through the same formatting path."""
    if parsed.fmt == "json":
        lines = [_json_value(parsed.meta)]
        lines += [_json_value(row) for row in parsed.rows]
        return "\n".join(lines) + "\n"
    lines = list(parsed.comments)
    lines.append(",".join(parsed.columns))
    lines += [",".join(_fmt(c) for c in row) for row in parsed.rows]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- runners

Row = tuple[Mapping[str, object], Optional[Mapping[str, object]]]


def _single_q(cfg: ExperimentConfig) -> int:
    assert cfg.q is not None
    if len(cfg.q) != 1:
        raise ConfigError(f"{cfg.subcommand} takes a single q")
    return cfg.q[0]


def _run_cfe(cfg: ExperimentConfig) -> Iterator[Row]:
    x = ReducedFraction(cfg.p, _single_q(cfg))
    w = cfe_digits(x)
    yield {
        "p": x.p,
        "q": x.q,
        "len": len(w.digits),
        "digits": " ".join(str(d) for d in w.digits),
    }, None


def _run_sweep_len(cfg: ExperimentConfig) -> Iterator[Row]:
    for q in cfg.q or ():
        s = len_stats(q, cfg.bins)
        yield {
            "q": s.q,
            "phi": s.phi,
            "mean_len": float(s.mean_len),
            "var_len": float(s.var_len),
            "mean_ratio": float(s.mean_len) / (2.0 * math.log(s.q)),
            "ks_to_gauss": s.ks_to_gauss,
        }, None


def _run_sweep_digits(cfg: ExperimentConfig) -> Iterator[Row]:
    # digit 0 stands for the overflow bucket (values above the cap)
    for q in cfg.q or ():
        s = len_stats(q, cfg.bins)
        pool = s.digit_hist.total
        for d in sorted(s.digit_hist.counts):
            c = s.digit_hist.counts[d]
            yield {"q": q, "digit": d, "count": c, "frequency": c / pool}, None
        if s.digit_hist.overflow:
            c = s.digit_hist.overflow
            yield {"q": q, "digit": 0, "count": c, "frequency": c / pool}, None


def _run_dispersion(cfg: ExperimentConfig) -> Iterator[Row]:
    for q in cfg.q or ():
        yield {"q": q, "delta": cfg.delta, "dispersion": dispersion(q, cfg.delta)}, None


def _run_orbit(cfg: ExperimentConfig) -> Iterator[Row]:
    x = ReducedFraction(cfg.p, _single_q(cfg))
    for s in orbit_samples(x, cfg.dt, cfg.t_max):
        yield {
            "t": s.t,
            "height": s.height,
            "fd_x": s.fd_point[0],
            "fd_y": s.fd_point[1],
        }, None


def _run_cross_section(cfg: ExperimentConfig) -> Iterator[Row]:
    x = ReducedFraction(cfg.p, _single_q(cfg))
    for k, rec in enumerate(crossing_sequence(x), 1):
        yield {
            "k": k,
            "y": float(rec.point.y),
            "z": float(rec.point.z),
            "eps": rec.point.eps,
            "t": rec.t,
        }, None


def _run_kappa(cfg: ExperimentConfig) -> Iterator[Row]:
    k = kappa_quadrature()
    target = 3.0 / (math.pi * math.pi)
    yield {"kappa": k, "target": target, "abs_err": abs(k - target)}, None


def _run_mass_escape(cfg: ExperimentConfig) -> Iterator[Row]:
    q = _single_q(cfg)
    for M in cfg.M or ():
        r = mass_escape_count(q, M, cfg.t)
        yield {
            "q": r.q,
            "M": r.M,
            "t": r.t,
            "count": r.count,
            "bound": float(r.bound),
            "ratio": r.count / float(r.bound),
            "in_hypothesis": r.in_hypothesis,
            "escalations": r.escalations,
        }, None


def _run_fd_hist(cfg: ExperimentConfig) -> Iterator[Row]:
    q = _single_q(cfg)
    h = orbit_fd_histogram(
        q, dt=cfg.dt, grid=cfg.grid, sample_size=cfg.sample_size, seed=cfg.seed
    )
    cells = int(np.count_nonzero(h.expected > 0))
    obs = h.weights / h.weights.sum()
    payload = {
        "grid": h.grid,
        "observed": obs.ravel(),
        "expected": h.expected.ravel(),
    }
    yield {
        "q": q,
        "dt": cfg.dt,
        "grid": cfg.grid,
        "sample_size": cfg.sample_size,
        "seed": cfg.seed,
        "cells": cells,
        "discrepancy": h.discrepancy(),
    }, payload


def _run_haar_selftest(cfg: ExperimentConfig) -> Iterator[Row]:
    rng = np.random.default_rng(cfg.seed)
    h = haar_fd_histogram(rng, cfg.n, cfg.grid)
    cells = int(np.count_nonzero(h.expected > 0))
    disc = h.discrepancy()
    floor = (cells - 1) / cfg.n
    # five sigmas above the multinomial expectation (K-1)/n
    gate = (cells - 1 + 5.0 * math.sqrt(2.0 * (cells - 1))) / cfg.n
    ok = disc < gate
    obs = h.weights / h.weights.sum()
    payload = {
        "grid": h.grid,
        "observed": obs.ravel(),
        "expected": h.expected.ravel(),
    }
    yield {
        "n": cfg.n,
        "grid": cfg.grid,
        "seed": cfg.seed,
        "cells": cells,
        "discrepancy": disc,
        "noise_floor": floor,
        "ok": ok,
    }, payload
    if not ok:
        raise SelfTestError(
            f"haar self-test discrepancy {disc:.6g} above gate {gate:.6g}"
        )


def _run_zaremba_census(cfg: ExperimentConfig) -> Iterator[Row]:
    assert cfg.q_max is not None and cfg.K is not None
    branches = range(1, cfg.K + 2)
    if cfg.threads > 1 and cfg.K + 1 > 1:
        with ThreadPoolExecutor(max_workers=min(cfg.threads, cfg.K + 1)) as pool:
            parts = list(
                pool.map(lambda a: enumerate_bounded(cfg.q_max, cfg.K, a), branches)
            )
        census = parts[0]
        for part in parts[1:]:
            census = census.merge(part)
    else:
        census = enumerate_bounded(cfg.q_max, cfg.K)
    for q, relaxed, strict in census.rows():
        yield {"q": q, "count_relaxed": relaxed, "count_strict": strict}, None


def _run_zaremba_height(cfg: ExperimentConfig) -> Iterator[Row]:
    for q in cfg.q or ():
        r = height_bound_check(q, cfg.K, cfg.dt)
        yield {
            "q": r.q,
            "K": r.K,
            "checked": r.checked,
            "bound": r.bound,
            "max_height": r.max_height,
            "argmax_t": r.argmax_t,
            "argmax_p": r.argmax_p,
        }, None


def _run_symmetry_check(cfg: ExperimentConfig) -> Iterator[Row]:
    assert cfg.q_max is not None
    pairs = 0
    failures = 0
    for q in range(2, cfg.q_max + 1):
        for p in range(1, q):
            if math.gcd(p, q) != 1:
                continue
            pairs += 1
            try:
                verify_symmetry(p, q)
            except SymmetryError:
                failures += 1
    yield {"q_max": cfg.q_max, "pairs_checked": pairs, "failures": failures}, None
    if failures:
        raise SymmetryError(f"{failures} of {pairs} pairs failed the exact symmetry check")


# ------------------------------------------------------------- registry

@dataclass(frozen=True)
class _SubSpec:
    name: str
    help: str
    fields: tuple[_FieldSpec, ...]
    columns: tuple[str, ...]
    runner: Callable[[ExperimentConfig], Iterator[Row]]

    @property
    def schema(self) -> str:
        return f"cforbit.{self.name}.v1"


def _f(name: str, cast: Callable[[str], object], default: object = None, help: str = "") -> _FieldSpec:
    return _FieldSpec(name, cast, default, help)


_SUBCOMMANDS: dict[str, _SubSpec] = {
    s.name: s
    for s in (
        _SubSpec(
            "cfe",
            "digit word of one reduced fraction",
            (_f("p", _cast_int, help="numerator"), _f("q", _cast_int_list, help="denominator")),
            ("p", "q", "len", "digits"),
            _run_cfe,
        ),
        _SubSpec(
            "sweep-len",
            "exact length statistics of the full coprime sweep",
            (
                _f("q", _cast_int_list, help="denominator(s), comma separated"),
                _f("bins", _cast_int, 256, "digit-measure bins"),
            ),
            ("q", "phi", "mean_len", "var_len", "mean_ratio", "ks_to_gauss"),
            _run_sweep_len,
        ),
        _SubSpec(
            "sweep-digits",
            "digit census of the full coprime sweep (digit 0 = overflow)",
            (
                _f("q", _cast_int_list, help="denominator(s), comma separated"),
                _f("bins", _cast_int, 256, "digit-measure bins"),
            ),
            ("q", "digit", "count", "frequency"),
            _run_sweep_digits,
        ),
        _SubSpec(
            "dispersion",
            "fraction of residues with len ratio off the limit by more than delta",
            (
                _f("q", _cast_int_list, help="denominator(s), comma separated"),
                _f("delta", _cast_float, 0.05, "deviation threshold"),
            ),
            ("q", "delta", "dispersion"),
            _run_dispersion,
        ),
        _SubSpec(
            "orbit",
            "height and fundamental-domain track of one orbit",
            (
                _f("p", _cast_int, help="numerator"),
                _f("q", _cast_int_list, help="denominator"),
                _f("dt", _cast_float, 0.05, "time step"),
                _f("t_max", _cast_float, 0.0, "grid end (0 = full life span)"),
            ),
            ("t", "height", "fd_x", "fd_y"),
            _run_orbit,
        ),
        _SubSpec(
            "cross-section",
            "exact section crossings of one orbit",
            (_f("p", _cast_int, help="numerator"), _f("q", _cast_int_list, help="denominator")),
            ("k", "y", "z", "eps", "t"),
            _run_cross_section,
        ),
        _SubSpec(
            "kappa",
            "normalizing constant by quadrature",
            (),
            ("kappa", "target", "abs_err"),
            _run_kappa,
        ),
        _SubSpec(
            "mass-escape",
            "exact high-excursion counts against the totient bound",
            (
                _f("q", _cast_int_list, help="denominator"),
                _f("M", _cast_float_list, help="height threshold(s), comma separated"),
                _f("t", _cast_float, help="flow time"),
            ),
            ("q", "M", "t", "count", "bound", "ratio", "in_hypothesis", "escalations"),
            _run_mass_escape,
        ),
        _SubSpec(
            "fd-hist",
            "fundamental-domain histogram of orbit time against Haar cell masses",
            (
                _f("q", _cast_int_list, help="denominator"),
                _f("dt", _cast_float, 0.05, "time step"),
                _f("grid", _cast_int, 24, "cells per axis"),
                _f("sample_size", _cast_int, 600, "residues sampled"),
            ),
            ("q", "dt", "grid", "sample_size", "seed", "cells", "discrepancy"),
            _run_fd_hist,
        ),
        _SubSpec(
            "haar-selftest",
            "Monte-Carlo Haar sampler against the analytic cell masses",
            (
                _f("n", _cast_int, 100000, "sample count"),
                _f("grid", _cast_int, 24, "cells per axis"),
            ),
            ("n", "grid", "seed", "cells", "discrepancy", "noise_floor", "ok"),
            _run_haar_selftest,
        ),
        _SubSpec(
            "zaremba-census",
            "bounded-digit census rows (q, count_relaxed, count_strict)",
            (
                _f("q_max", _cast_int, help="largest denominator"),
                _f("K", _cast_int, help="digit bound"),
            ),
            ("q", "count_relaxed", "count_strict"),
            _run_zaremba_census,
        ),
        _SubSpec(
            "zaremba-height",
            "orbit-height bound check over the bounded-digit members of q",
            (
                _f("q", _cast_int_list, help="denominator(s), comma separated"),
                _f("K", _cast_int, help="digit bound"),
                _f("dt", _cast_float, 0.05, "time step"),
            ),
            ("q", "K", "checked", "bound", "max_height", "argmax_t", "argmax_p"),
            _run_zaremba_height,
        ),
        _SubSpec(
            "symmetry-check",
            "exact duality-symmetry identity over all reduced fractions up to q-max",
            (_f("q_max", _cast_int, help="largest denominator"),),
            ("q_max", "pairs_checked", "failures"),
            _run_symmetry_check,
        ),
    )
}

_COMMON_FIELDS = ("seed", "threads", "output", "format", "config")


def run(config: ExperimentConfig) -> Iterator[ResultRecord]:
    """Dispatch to the owning module; yields one ResultRecord per output row."""
    sub = _SUBCOMMANDS[config.subcommand]
    echo = config.echo()
    start = time.perf_counter()
    for metrics, histogram in sub.runner(config):
        missing = [c for c in sub.columns if c not in metrics]
        if missing:
            raise RuntimeError(f"runner dropped columns {missing}")
        yield ResultRecord(
            experiment=config.subcommand,
            schema=sub.schema,
            config=echo,
            metrics=metrics,
            histogram=histogram,
            seconds=time.perf_counter() - start,
        )


# ----------------------------------------------------------------- main

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cforbit",
        description="continued-fraction orbit laboratory",
    )
    parser.add_argument("--version", action="version", version=f"cforbit {__version__}")
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    for sub in _SUBCOMMANDS.values():
        sp = subparsers.add_parser(sub.name, help=sub.help)
        for spec in sub.fields:
            flag = "--" + spec.name.replace("_", "-")
            sp.add_argument(
                flag,
                dest=spec.name,
                type=spec.cast,
                default=argparse.SUPPRESS,
                help=spec.help or spec.name,
                required=False,
            )
        sp.add_argument("--config", default=argparse.SUPPRESS, help="key=value file; flags override it")
        sp.add_argument("--seed", type=_cast_int, default=argparse.SUPPRESS, help="RNG seed (default 0)")
        sp.add_argument(
            "--threads",
            type=_cast_int,
            default=argparse.SUPPRESS,
            help="worker threads (default: CFORBIT_THREADS or available parallelism)",
        )
        sp.add_argument("--output", default=argparse.SUPPRESS, help="output path (default stdout)")
        sp.add_argument(
            "--format",
            choices=("csv", "json"),
            default=argparse.SUPPRESS,
            help="output format (default csv)",
        )
    return parser


def build_config(argv: Optional[Sequence[str]] = None) -> ExperimentConfig:
    """Parse flags, fold in the optional config file, validate everything."""
    args = _build_parser().parse_args(argv)
    provided = vars(args)
    sub = _SUBCOMMANDS[provided.pop("subcommand")]

    file_values: dict[str, object] = {}
    if "config" in provided:
        raw = read_config_file(provided.pop("config"))
        known = {spec.name: spec for spec in sub.fields}
        for key, value in raw.items():
            if key in known:
                try:
                    file_values[key] = known[key].cast(value)
                except ValueError as e:
                    raise ConfigError(f"config key {key}: {e}") from e
            elif key == "seed":
                file_values["seed"] = _cast_int(value)
            elif key == "threads":
                file_values["threads"] = _cast_int(value)
            elif key == "output":
                file_values["output"] = value
            elif key == "format":
                file_values["format"] = value
            else:
                raise ConfigError(f"config key {key!r} is not a {sub.name} parameter")

    merged: dict[str, object] = {}
    for spec in sub.fields:
        if spec.name in provided:
            merged[spec.name] = provided[spec.name]
        elif spec.name in file_values:
            merged[spec.name] = file_values[spec.name]
        elif spec.default is not None:
            merged[spec.name] = spec.default
        else:
            raise ConfigError(f"{sub.name} requires --{spec.name.replace('_', '-')}")
    for key in ("seed", "threads", "output", "format"):
        if key in provided:
            merged[key] = provided[key]
        elif key in file_values:
            merged[key] = file_values[key]
    merged.setdefault("seed", 0)
    merged.setdefault("threads", _default_threads())
    merged.setdefault("format", "csv")
    if merged.get("t_max") == 0.0:
        merged["t_max"] = None

    allowed = {f.name for f in dataclass_fields(ExperimentConfig)}
    unknown = set(merged) - allowed
    if unknown:
        raise ConfigError(f"unsupported parameters: {sorted(unknown)}")
    try:
        return ExperimentConfig(subcommand=sub.name, **merged)
    except TypeError as e:
        raise ConfigError(str(e)) from e


def _error_line(kind: str, message: str) -> None:
    print(_json_value({"error": kind, "message": message}), file=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        config = build_config(argv)
    except SystemExit as e:
        code = e.code if isinstance(e.code, int) else 1
        if code == 0:
            return 0
        _error_line("config", "invalid command line")
        return 1
    except (ConfigError, ValueError, OSError) as e:
        _error_line("config", str(e))
        return 1

    start = time.perf_counter()
    try:
        records = run(config)
        if config.output is None or config.output == "-":
            rows = emit(records, config, sys.stdout)
        else:
            try:
                fh = open(config.output, "w", encoding="utf-8", newline="")
            except OSError as e:
                _error_line("io", f"{config.output}: {e}")
                return 3
            with fh:
                rows = emit(records, config, fh)
    except (AssertionError, SymmetryError, RuntimeError) as e:
        _error_line("invariant", str(e))
        return 2
    except ValueError as e:
        _error_line("config", str(e))
        return 1
    except OSError as e:
        _error_line("io", str(e))
        return 3
    elapsed = time.perf_counter() - start
    print(
        f"{config.subcommand}: {rows} rows, seed {config.seed}, {elapsed:.3f}s",
        file=sys.stderr,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
