"""Command-line interface: ``opmon <subcommand> [options]``.

Exit codes: 0 pass/success, 1 fail verdict, 2 runtime error, 64 usage error.
Options may also come from a JSON ``--config`` file whose keys are the long
option names (``"fn"``, ``"n"``, ``"trials"`` ...); flags given on the command
line win.  All randomness derives from ``--seed`` (default ``$OPMON_SEED``,
else 0) through named sub-seeds.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import os
import sys
import zlib
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import CATALOG, from_spec
from .criteria import check_convex, check_monotone, pair_certificate
from .errors import OpmonError
from .hermitian import Interval
from .inversion import (
    SampleSet,
    bump,
    density_scan,
    fit_measure,
    parse_node_spec,
    smooth_indicator,
    stieltjes_functional,
)
from .representations import (
    PickRepresentation,
    RepresentingMeasure,
    eval_pick,
    to_pick,
    upper_half_plane_grid,
)
from .transforms import apply_named, derivative_at_one, t_transform

EXIT_OK, EXIT_FAIL, EXIT_ERROR, EXIT_USAGE = 0, 1, 2, 64
SEED_ENV = "OPMON_SEED"

DEFAULTS = {
    "interval": None,
    "n": 2,
    "trials": 500,
    "tol": 1e-9,
    "budget": 100,
    "concave": False,
    "kind": "half-line",
    "nodes": "log:200:1e-4:1e4",
    "samples": "log:100:0.05:20",
    "samples_file": None,
    "threshold": 1e-3,
    "ridge": 0.0,
    "t": "log:50:1e-2:1e2",
    "op": None,
    "epsilon": 1e-3,
    "scan": "log:200:1e-3:1e3",
    "bump": None,
    "indicator": None,
    "measure": None,
    "pick_json": None,
    "f1": None,
    "fp1": None,
    "grid_size": 200,
    "format": "json",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def derive_seed(seed: int, name: str) -> int:
    """Named sub-seed: independent streams for independent uses of one ``--seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(zlib.crc32(name.encode()),))
    return int(ss.generate_state(1)[0])


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _load_json_arg(text: str):
    text = text.strip()
    if text.startswith(("{", "[", '"')):
        return json.loads(text)
    return json.loads(Path(text).read_text())


# -- argument parsing -----------------------------------------------------------


def _common(p: argparse.ArgumentParser, fn=True):
    if fn:
        p.add_argument("--fn", help="catalog function name (see `opmon catalog`)")
        p.add_argument("--param", action="append", default=[], metavar="K=V", help="catalog parameter (JSON value)")
        p.add_argument("--fn-json", help="function spec as JSON text or a path to a JSON file")
        p.add_argument("--interval", help='interval such as "0,inf" or "(0,1)"')
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--seed", type=int, help=f"master seed (default ${SEED_ENV} or 0)")
    p.add_argument("--out", help="write the result here instead of stdout")
    p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field (for byte comparison)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="opmon", description="Operator monotone and convex function toolkit.")
    parser.add_argument("--version", action="version", version=f"opmon {__version__}")
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser)

    p = sub.add_parser("check", help="randomised Loewner-matrix test of operator monotonicity")
    _common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("convex-check", help="randomised Kraus-matrix test of operator convexity")
    _common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--concave", action="store_true", default=None, help="test concavity instead")

    p = sub.add_parser("counterexample", help="search for x <= y with f(x) <= f(y) violated")
    _common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--budget", type=int)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("fit", help="fit a representing measure by non-negative least squares")
    _common(p)
    p.add_argument("--kind", choices=("half-line", "unit-interval"))
    p.add_argument("--nodes", help="node grid, e.g. log:200:1e-4:1e4")
    p.add_argument("--samples", help="sample points, e.g. log:100:0.05:20")
    p.add_argument("--samples-file", help="CSV (t,f[,w]) or JSON samples instead of --fn")
    p.add_argument("--threshold", type=float)
    p.add_argument("--ridge", type=float)

    p = sub.add_parser("eval", help="tabulate f as CSV")
    _common(p)
    p.add_argument("--t", help="evaluation points, e.g. log:50:1e-2:1e2 or 0.5,1,2")

    p = sub.add_parser("pick", help="Pick representation and upper half-plane positivity scan")
    _common(p)
    p.add_argument("--measure", help="half-line measure of Tf (JSON); otherwise fitted from --fn")
    p.add_argument("--f1", type=float)
    p.add_argument("--fp1", type=float)
    p.add_argument("--nodes")
    p.add_argument("--samples")
    p.add_argument("--ridge", type=float)
    p.add_argument("--grid-size", type=int)
    p.add_argument("--format", choices=("json", "csv"))

    p = sub.add_parser("invert", help="Stieltjes inversion: density scan and test-function functionals")
    _common(p)
    p.add_argument("--pick-json", help="Pick representation (JSON) instead of --fn")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--scan", help="lambda grid for the density scan")
    p.add_argument("--bump", action="append", metavar="C:HW", help="bump test function (repeatable)")
    p.add_argument("--indicator", action="append", metavar="A:B:W", help="smoothed indicator (repeatable)")
    p.add_argument("--format", choices=("json", "csv"))

    p = sub.add_parser("transform", help="apply sharp/star/T/lambda/mobius transforms and tabulate")
    _common(p)
    p.add_argument("--op", action="append", help="transform, applied in the given order (repeatable)")
    p.add_argument("--t")

    p = sub.add_parser("catalog", help="list the built-in functions")
    _common(p, fn=False)
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, the config file and flags (flags win)."""
    cfg = {}
    if args.config:
        cfg = json.loads(Path(args.config).read_text())
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        if cfg.get("subcommand", args.subcommand) != args.subcommand:
            raise UsageError(f"config is for {cfg['subcommand']!r}, not {args.subcommand!r}")
    conf = dict(DEFAULTS)
    conf.update({k: v for k, v in cfg.items() if k != "subcommand"})
    flags = {k: v for k, v in vars(args).items() if v is not None and k not in ("config", "param", "no_timestamp")}
    conf.update(flags)
    conf["no_timestamp"] = bool(args.no_timestamp or cfg.get("no_timestamp", False))
    if conf.get("seed") is None:
        env = os.environ.get(SEED_ENV)
        try:
            conf["seed"] = int(env) if env else 0
        except ValueError:
            raise UsageError(f"${SEED_ENV} must be an integer, got {env!r}") from None
    params = dict(cfg.get("params", {}))
    for item in getattr(args, "param", []) or []:
        if "=" not in item:
            raise UsageError(f"--param expects K=V, got {item!r}")
        k, v = item.split("=", 1)
        params[k] = _parse_value(v)
    conf["params"] = params
    _validate(conf)
    return conf


def _validate(conf: dict):
    for key in ("n", "trials", "budget", "grid_size"):
        v = conf.get(key)
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise UsageError(f"{key} must be a positive integer, got {v!r}")
    for key in ("tol", "epsilon"):
        v = conf.get(key)
        if not isinstance(v, (int, float)) or not v > 0:
            raise UsageError(f"{key} must be positive, got {v!r}")
    for key in ("threshold", "ridge"):
        v = conf.get(key)
        if not isinstance(v, (int, float)) or v < 0:
            raise UsageError(f"{key} must be non-negative, got {v!r}")
    if conf["kind"] not in ("half-line", "unit-interval"):
        raise UsageError(f"unknown kind {conf['kind']!r}")
    for key in ("nodes", "samples", "t", "scan"):
        try:
            grid = parse_node_spec(str(conf[key]))
        except (ValueError, IndexError):
            raise UsageError(f"malformed grid spec for {key}: {conf[key]!r}") from None
        if grid.size == 0:
            raise UsageError(f"empty grid for {key}")


def _function(conf: dict):
    if conf.get("fn_json"):
        spec = _load_json_arg(conf["fn_json"])
    elif conf.get("fn") is not None:
        spec = conf["fn"]
        if isinstance(spec, str):
            spec = {"fn": spec, **conf["params"]} if conf["params"] else spec
    else:
        raise UsageError("no function given (use --fn or --fn-json)")
    return from_spec(spec)


def _interval(conf: dict):
    iv = conf.get("interval")
    if iv is None:
        return None
    return Interval.parse(iv) if isinstance(iv, str) else Interval.from_json(iv)


# -- output -------------------------------------------------------------------


def _envelope(conf: dict, body: dict) -> dict:
    out = {"tool": "opmon", "version": __version__, "subcommand": conf["subcommand"], "seed": conf["seed"]}
    out.update(body)
    if not conf["no_timestamp"]:
        out["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return out


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) for x in r])
    return buf.getvalue()


def _emit(conf: dict, text: str, stdout):
    if conf.get("out"):
        Path(conf["out"]).write_text(text)
    else:
        stdout.write(text)


# -- subcommands --------------------------------------------------------------


def _cmd_check(conf, stdout):
    f = _function(conf)
    cert = check_monotone(
        f, _interval(conf), conf["n"], conf["trials"], derive_seed(conf["seed"], "check.grids"), conf["tol"]
    )
    _emit(conf, _json_text(_envelope(conf, {"certificate": cert.to_json()})), stdout)
    return EXIT_OK if cert.passed else EXIT_FAIL


def _cmd_convex(conf, stdout):
    f = _function(conf)
    cert = check_convex(
        f,
        _interval(conf),
        conf["n"],
        conf["trials"],
        derive_seed(conf["seed"], "convex.grids"),
        concave_flag=bool(conf["concave"]),
        tol=conf["tol"],
    )
    _emit(conf, _json_text(_envelope(conf, {"certificate": cert.to_json()})), stdout)
    return EXIT_OK if cert.passed else EXIT_FAIL


def _cmd_counterexample(conf, stdout):
    f = _function(conf)
    cert = pair_certificate(
        f, _interval(conf), conf["n"], conf["budget"], derive_seed(conf["seed"], "counterexample.pairs"), conf["tol"]
    )
    _emit(conf, _json_text(_envelope(conf, {"certificate": cert.to_json()})), stdout)
    return EXIT_OK if cert.passed else EXIT_FAIL


def _samples(conf) -> tuple[SampleSet, str]:
    if conf.get("samples_file"):
        path = Path(conf["samples_file"])
        text = path.read_text()
        s = SampleSet.from_json(text) if path.suffix == ".json" else SampleSet.from_csv(text)
        return s, str(path.name)
    f = _function(conf)
    return SampleSet.from_function(f, parse_node_spec(conf["samples"])), f.name


def _cmd_fit(conf, stdout):
    samples, source = _samples(conf)
    fit = fit_measure(samples, parse_node_spec(conf["nodes"]), conf["kind"], conf["threshold"], conf["ridge"])
    body = {"source": source, "samples": len(samples), "ridge": conf["ridge"]}
    body.update(fit.to_json())
    _emit(conf, _json_text(_envelope(conf, body)), stdout)
    return EXIT_OK


def _cmd_eval(conf, stdout):
    f = _function(conf)
    t = parse_node_spec(conf["t"])
    _emit(conf, _csv_text(["t", "f"], zip(t, np.asarray(f(t), dtype=float))), stdout)
    return EXIT_OK


def _pick_rep(conf) -> tuple[PickRepresentation, dict]:
    if conf.get("pick_json"):
        return PickRepresentation.from_json(_load_json_arg(conf["pick_json"])), {}
    if conf.get("measure"):
        obj = _load_json_arg(conf["measure"])
        mu = RepresentingMeasure.from_json(obj.get("measure", obj))
        if conf.get("f1") is None or conf.get("fp1") is None:
            raise UsageError("--measure needs --f1 and --fp1")
        return to_pick(conf["f1"], conf["fp1"], mu), {}
    f = _function(conf)
    f1 = float(f(1.0)) if conf.get("f1") is None else conf["f1"]
    fp1 = derivative_at_one(f) if conf.get("fp1") is None else conf["fp1"]
    tf = t_transform(f)
    fit = fit_measure(
        SampleSet.from_function(tf, parse_node_spec(conf["samples"])),
        parse_node_spec(conf["nodes"]),
        "half-line",
        conf["threshold"],
        conf["ridge"],
    )
    mass = fit.measure.total_mass()
    # Tf(1) = 1 exactly, so the fitted mass differs from 1 only by fit error
    rep = to_pick(f1, fp1, fit.measure.scaled(1.0 / mass))
    return rep, {"fit_mass": mass, "fit_residual": fit.max_rel_residual, "fit_warning": fit.warning}


def _cmd_pick(conf, stdout):
    rep, extra = _pick_rep(conf)
    z = upper_half_plane_grid(conf["grid_size"])
    w = np.asarray(eval_pick(rep, z))
    min_im = float(np.min(w.imag))
    ok = min_im >= -1e-12
    if conf["format"] == "csv":
        text = _csv_text(["re_z", "im_z", "re_f", "im_f"], zip(z.real, z.imag, w.real, w.imag))
    else:
        body = {"pick": rep.to_json(), "scan_points": int(z.size), "min_imag": min_im, "positive": ok}
        body.update(extra)
        text = _json_text(_envelope(conf, body))
    _emit(conf, text, stdout)
    return EXIT_OK if ok else EXIT_FAIL


def _split_floats(text, k, what):
    parts = str(text).split(":")
    if len(parts) != k:
        raise UsageError(f"{what} expects {k} colon-separated numbers, got {text!r}")
    try:
        return [float(x) for x in parts]
    except ValueError:
        raise UsageError(f"{what}: not a number in {text!r}") from None


def _cmd_invert(conf, stdout):
    target = PickRepresentation.from_json(_load_json_arg(conf["pick_json"])) if conf.get("pick_json") else _function(conf)
    eps = conf["epsilon"]
    lam = parse_node_spec(conf["scan"])
    dens = density_scan(target, lam, eps)
    tests = [bump(*_split_floats(b, 2, "--bump")) for b in conf.get("bump") or []]
    tests += [smooth_indicator(*_split_floats(s, 3, "--indicator")) for s in conf.get("indicator") or []]
    values = [{"g": g.name, "support": list(g.support), "value": stieltjes_functional(target, g, eps)} for g in tests]
    if conf["format"] == "csv":
        text = _csv_text(["lambda", "density"], zip(lam, dens))
    else:
        body = {
            "epsilon": eps,
            "functionals": values,
            "scan": {"lambda": lam.tolist(), "density": np.asarray(dens, dtype=float).tolist()},
        }
        text = _json_text(_envelope(conf, body))
    _emit(conf, text, stdout)
    return EXIT_OK


def _cmd_transform(conf, stdout):
    f = _function(conf)
    ops = conf.get("op") or []
    if not ops:
        raise UsageError("transform needs at least one --op")
    for op in ops:
        f = apply_named(op, f)
    t = parse_node_spec(conf["t"])
    _emit(conf, _csv_text(["t", "value"], zip(t, np.asarray(f(t), dtype=float))), stdout)
    return EXIT_OK


def _cmd_catalog(conf, stdout):
    width = max(map(len, CATALOG))
    _emit(conf, "".join(f"{k.ljust(width)}  {v}\n" for k, v in CATALOG.items()), stdout)
    return EXIT_OK


COMMANDS = {
    "check": _cmd_check,
    "convex-check": _cmd_convex,
    "counterexample": _cmd_counterexample,
    "fit": _cmd_fit,
    "eval": _cmd_eval,
    "pick": _cmd_pick,
    "invert": _cmd_invert,
    "transform": _cmd_transform,
    "catalog": _cmd_catalog,
}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.subcommand:
            parser.print_help(stderr)
            return EXIT_USAGE
        conf = resolve(args)
        conf["subcommand"] = args.subcommand
        return COMMANDS[args.subcommand](conf, stdout)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except (OpmonError, ValueError, ArithmeticError, OSError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_ERROR


def main(argv=None):
    sys.exit(run(argv))
