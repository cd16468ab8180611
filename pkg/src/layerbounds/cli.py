"""Command-line entry point.

    layerbounds sdpi --set dims=[10,20,2] --set regularization='{"type": "noise", "eps": 1}'
    layerbounds bound --evaluator gibbs --set params='{"alpha": 1, "gamma": 0.5, "n": 100, "eta_product": 0.25}'
    layerbounds casestudy table1 --seed 42 --format json
    layerbounds casestudy genbound --seed 7 --set n=20
    layerbounds sweep add-layer --set regularization='{"type": "dropout", "delta": 0.5}'
    layerbounds sweep split-layer --config sweep.json --out split.csv

Exit codes: 0 on success, 2 for configuration errors, 3 for runtime errors.
Failures print one JSON object on a single line to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError
from .experiments import ExperimentConfig, emit, run

EXIT_CONFIG = 2
EXIT_RUNTIME = 3

SUBCOMMAND_KIND = {
    ("sdpi",): "sdpi_table",
    ("bound",): "bound",
    ("casestudy", "table1"): "table1",
    ("casestudy", "genbound"): "bound_profile",
    ("sweep", "add-layer"): "add_layer_sweep",
    ("sweep", "split-layer"): "split_layer_sweep",
}


class _CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _CliError(message)


def _fail(kind, message, code, field=None):
    payload = {"error": kind, "message": message}
    if field is not None:
        payload["field"] = field
    sys.stderr.write(json.dumps(payload) + "\n")
    return code


def _common(p):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int, help="unsigned 64-bit seed")
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.add_argument("--format", choices=("csv", "json"), help="output format")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config field; VALUE is parsed as JSON when possible")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="layerbounds", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("sdpi", help="per-site contraction coefficients")
    _common(p)
    p = sub.add_parser("bound", help="evaluate one closed-form bound")
    p.add_argument("--evaluator", help="contraction, gibbs, gibbs_worst_case, discrete_latent, "
                                       "miub, finite_param or kl_vs_wasserstein")
    _common(p)
    p = sub.add_parser("casestudy", help="Gaussian-mixture case study")
    cs = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("table1", "genbound"):
        _common(cs.add_parser(name))
    p = sub.add_parser("sweep", help="depth/width sweeps over finite parameter spaces")
    sw = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("add-layer", "split-layer"):
        _common(sw.add_parser(name))
    return parser


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def load_config(args) -> ExperimentConfig:
    key = (args.command,) + ((args.action,) if getattr(args, "action", None) else ())
    kind = SUBCOMMAND_KIND[key]
    data = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError("config", f"cannot read {args.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc.msg} at line {exc.lineno}") from None
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be an object")
        if data.get("kind", kind) != kind:
            raise ConfigError("kind", f"config says {data['kind']!r} but the subcommand runs {kind!r}")
    data["kind"] = kind
    for item in args.set:
        if "=" not in item:
            raise ConfigError("set", f"expected KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        data[k.strip()] = _parse_value(v)
    if args.seed is not None:
        data["seed"] = args.seed
    if args.format is not None:
        data["format"] = args.format
    if getattr(args, "evaluator", None) is not None:
        data["evaluator"] = args.evaluator
    try:
        return ExperimentConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError("config", str(exc)) from None


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = load_config(args)
        report = run(cfg)
    except _CliError as exc:
        return _fail("usage", str(exc), EXIT_CONFIG)
    except ConfigError as exc:
        return _fail("config", str(exc), EXIT_CONFIG, exc.field)
    except Exception as exc:  # noqa: BLE001 - every failure maps to an exit code
        return _fail("runtime", f"{type(exc).__name__}: {exc}", EXIT_RUNTIME)
    try:
        emit(report, cfg.format, args.out)
    except OSError as exc:
        return _fail("io", f"{exc.strerror or exc}: {args.out}", EXIT_RUNTIME)
    return 0


if __name__ == "__main__":
    sys.exit(main())
