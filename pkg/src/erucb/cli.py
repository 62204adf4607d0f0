"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 environment/protocol failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from typing import Sequence

from .errors import ArmError, ParameterError
from .experiment import (
    STRATEGIES,
    GROUND_TRUTH,
    ExperimentConfig,
    RegretRow,
    SweepSpec,
    emit_results,
    format_table1,
    render,
    run_regret_study,
    run_replicated,
    run_sweep,
    stride_rows,
    table1,
)

log = logging.getLogger("erucb")

EXIT_CONFIG = 2
EXIT_ENV = 3

# flag name -> (config field, type)
_FLAGS = {
    "--env": ("env", str),
    "--external-cmd": ("external_cmd", str),
    "--arms": ("arms", int),
    "--strategy": ("strategy", str),
    "--theta": ("theta", float),
    "--gamma": ("gamma", float),
    "--beta": ("beta", float),
    "--alpha": ("alpha", float),
    "--epsilon": ("epsilon", float),
    "--tau": ("tau", float),
    "--budget": ("budget", int),
    "--replications": ("replications", int),
    "--seed": ("seed", int),
    "--rho": ("rho", float),
    "--timeout": ("timeout", float),
    "--out": ("out", str),
    "--format": ("format", str),
    "--stride": ("stride", int),
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file of ExperimentConfig keys; flags override it")
    for flag, (dest, typ) in _FLAGS.items():
        kwargs: dict = {"dest": dest, "type": typ, "default": None}
        if dest == "format":
            kwargs["choices"] = ("csv", "structured")
        elif dest == "strategy":
            kwargs["choices"] = STRATEGIES + (GROUND_TRUTH,)
        p.add_argument(flag, **kwargs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="erucb", description="Extreme-region UCB bandit experiments")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="single or replicated experiment")
    _add_common(p)

    p = sub.add_parser("sweep", help="exploitation rates across one ER-UCB hyper-parameter")
    _add_common(p)
    p.add_argument("--param", choices=("theta", "gamma", "beta"), required=True)
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--samples", type=int, default=100)

    p = sub.add_parser("regret", help="cumulative extreme-event counts against the ground truth")
    _add_common(p)

    p = sub.add_parser("table1", help="compare all strategies on the synthetic problem")
    _add_common(p)
    return parser


def load_config(args: argparse.Namespace, **defaults) -> ExperimentConfig:
    """Merge dataclass defaults, command defaults, the config file, then flags."""
    values = dict(defaults)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ParameterError(f"cannot read config {args.config!r}: {exc}") from exc
        if not isinstance(data, dict):
            raise ParameterError("config file must hold a flat JSON object")
        values.update(data)
    for dest, _ in _FLAGS.values():
        v = getattr(args, dest)
        if v is not None:
            values[dest] = v
    try:
        config = ExperimentConfig.from_dict(values)
    except TypeError as exc:
        raise ParameterError(str(exc)) from exc
    return config


def _write(text: str, config: ExperimentConfig, result=None, row_type=None) -> None:
    if config.out:
        emit_results(result, config.out, config.format, row_type)
        log.info("wrote %s", config.out)
    else:
        sys.stdout.write(text)


def _cmd_run(args) -> None:
    config = load_config(args)
    config.validate()
    agg = run_replicated(config)
    _write(render(agg, config.format), config, agg)


def _cmd_sweep(args) -> None:
    config = load_config(args, replications=3)
    spec = SweepSpec.default(args.param, args.samples)
    if args.lo is not None or args.hi is not None:
        spec = dataclasses.replace(
            spec,
            lo=spec.lo if args.lo is None else args.lo,
            hi=spec.hi if args.hi is None else args.hi,
        )
    # flags given explicitly win over the sweep's fixed defaults
    explicit = {k for k in spec.fixed if getattr(args, k) is not None}
    spec = dataclasses.replace(spec, fixed={k: v for k, v in spec.fixed.items() if k not in explicit})
    config.validate()
    rows = run_sweep(spec, config)
    _write(render(rows, config.format), config, rows)


def _cmd_regret(args) -> None:
    config = load_config(args)
    rows = stride_rows(run_regret_study(config), config.stride)
    _write(render(rows, config.format, RegretRow), config, rows, RegretRow)


def _cmd_table1(args) -> None:
    config = load_config(args)
    config.validate()
    rows = table1(config)
    print(format_table1(rows))
    if config.out:
        emit_results(rows, config.out, config.format)


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "regret": _cmd_regret, "table1": _cmd_table1}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        COMMANDS[args.command](args)
    except ParameterError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except ArmError as exc:
        log.error("environment failure: %s", exc)
        return EXIT_ENV
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
