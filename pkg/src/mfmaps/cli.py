"""Command line entry point ``mfmaps``.

Exit status: 0 when every check passes, 1 when any check fails, 2 on a
configuration or I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from . import __version__
from .errors import ConfigError, MfmapsError
from .holder import CornerGrid, SampledFunction, holder_norm, holder_seminorm, sup_norm
from .io import load
from .mapping import SampledMap, SampledSection
from .suites import (DEFAULT_TOLERANCES, INJECTIONS, Context, catalog, run_suite,
                     suite_names)

CONFIG_KEYS = {"suite", "seed", "manifolds", "grid", "scenarios", "tolerances", "inject",
               "out", "format"}


def parse_tolerances(text, source="MFMAPS_TOL"):
    """``key=value`` pairs separated by commas or whitespace."""
    out = {}
    for item in text.replace(",", " ").split():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"{source}: expected key=value, got {item!r}")
        if key not in DEFAULT_TOLERANCES:
            raise ConfigError(f"{source}: unknown tolerance {key!r}")
        try:
            out[key] = float(value)
        except ValueError:
            raise ConfigError(f"{source}: {key} must be a number, got {value!r}") from None
    return out


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    unknown = sorted(set(data) - CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"{path}: unknown field(s) {', '.join(unknown)}")
    return data


def _field(data, key, kind, label):
    value = data[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ConfigError(f"field {key!r}: expected {label}")
    return value


def build_context(data, seed=None):
    ctx = Context()
    if "seed" in data:
        ctx.seed = _field(data, "seed", int, "an integer")
    if seed is not None:
        ctx.seed = seed
    if ctx.seed < 0:
        raise ConfigError("field 'seed': must be non-negative")
    if "manifolds" in data:
        ids = _field(data, "manifolds", list, "a list of manifold ids")
        from .manifolds import get_manifold
        try:
            for m in ids:
                get_manifold(m)
        except (MfmapsError, AttributeError) as exc:
            raise ConfigError(f"field 'manifolds': {exc}") from None
        ctx.manifolds = tuple(ids)
    if "grid" in data:
        g = _field(data, "grid", dict, "an object with lo, hi and shape")
        try:
            ctx.grid = CornerGrid.from_dict(g)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"field 'grid': {exc}") from None
    if "scenarios" in data:
        n = _field(data, "scenarios", int, "a positive integer")
        if n < 1:
            raise ConfigError("field 'scenarios': must be positive")
        ctx.scenarios = n
    if "tolerances" in data:
        tol = _field(data, "tolerances", dict, "an object of tolerance overrides")
        for k, v in tol.items():
            if k not in DEFAULT_TOLERANCES:
                raise ConfigError(f"field 'tolerances': unknown key {k!r}")
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ConfigError(f"field 'tolerances.{k}': expected a number")
            ctx.tol[k] = float(v)
    env = os.environ.get("MFMAPS_TOL")
    if env:
        ctx.tol.update(parse_tolerances(env))
    if "inject" in data:
        inject = _field(data, "inject", list, "a list of fault names")
        bad = [x for x in inject if x not in INJECTIONS]
        if bad:
            raise ConfigError(f"field 'inject': unknown fault(s) {bad}")
        ctx.inject = tuple(inject)
    return ctx


def render(reports, fmt):
    if fmt == "json":
        return json.dumps([r.to_dict() for r in reports], indent=1, ensure_ascii=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["check", "scenario", "value", "bound", "tol", "pass"])
    for r in reports:
        d = r.to_dict()
        value = d["order"] if d["kind"] == "order" else d["value"]
        w.writerow([d["check"], d["scenario"], repr(value), repr(d["target"]), repr(d["tol"]),
                    str(d["pass"]).lower()])
    return buf.getvalue()


def cmd_run(args):
    data = load_config(args.config) if args.config else {}
    suite = args.suite or data.get("suite")
    if suite is None:
        raise ConfigError("no suite given (use --suite or the config field 'suite')")
    if suite not in suite_names():
        raise ConfigError(f"field 'suite': unknown suite {suite!r}")
    fmt = args.format or data.get("format", "json")
    if fmt not in ("json", "csv"):
        raise ConfigError(f"field 'format': expected json or csv, got {fmt!r}")
    out = args.out or data.get("out")
    ctx = build_context(data, args.seed)
    reports = run_suite(suite, ctx)
    text = render(reports, fmt)
    if out:
        try:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise ConfigError(f"cannot write {out}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)
    failed = [r for r in reports if not r.passed]
    for r in failed:
        print(f"FAIL {r.check} [{r.scenario}] {r.error or r.value}", file=sys.stderr)
    print(f"{len(reports) - len(failed)}/{len(reports)} checks passed", file=sys.stderr)
    return 1 if failed else 0


def cmd_list(args):
    if args.catalog:
        try:
            with open(args.catalog, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read catalog {args.catalog}: {exc.strerror}") from None
        try:
            entries = json.loads(text) if text.strip() else []
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.catalog}: line {exc.lineno}: {exc.msg}") from None
        if not isinstance(entries, list):
            raise ConfigError(f"{args.catalog}: expected a JSON list of suites")
    else:
        entries = catalog()
    for e in entries:
        anchors = "; ".join(e.get("anchors", []))
        print(f"{e['name']:<10} {e.get('scenarios', 0):>6}  {anchors}")
    print(f"{len(entries)} suites")
    return 0


def cmd_norm(args):
    try:
        obj = load(args.input)
    except OSError as exc:
        raise ConfigError(f"cannot read {args.input}: {exc.strerror}") from None
    if isinstance(obj, SampledSection):
        obj = SampledFunction(obj.base.grid, obj.vectors)
    elif isinstance(obj, SampledMap):
        obj = SampledFunction(obj.grid, obj.points)
    result = {"lambda": args.lam, "sup": sup_norm(obj), "seminorm": holder_seminorm(obj, args.lam),
              "norm": holder_norm(obj, args.lam)}
    print(json.dumps(result))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="mfmaps", description="Manifolds of mappings: verification runner.")
    p.add_argument("--version", action="version", version=f"mfmaps {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a verification suite")
    r.add_argument("--suite", choices=suite_names())
    r.add_argument("--config", help="JSON scenario config")
    r.add_argument("--out", help="report path (default: stdout)")
    r.add_argument("--seed", type=int)
    r.add_argument("--format", choices=("json", "csv"))
    r.set_defaults(func=cmd_run)

    ls = sub.add_parser("list", help="list suites and what they certify")
    ls.add_argument("--catalog", help="JSON catalog file instead of the built-in one")
    ls.set_defaults(func=cmd_list)

    n = sub.add_parser("norm", help="Hölder norm of a sampled function file")
    n.add_argument("--input", required=True)
    n.add_argument("--lambda", dest="lam", type=float, required=True)
    n.set_defaults(func=cmd_norm)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except MfmapsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
