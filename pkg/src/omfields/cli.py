"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 numerical failure
(non-convergence, blow-up, phase singularity).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional

from omfields import __version__, config
from omfields.analysis import Axis, SweepResult, fwm_null, probe_null, run_sweep
from omfields.errors import NumericalError, ValidationError
from omfields.response import resonant_fields

log = logging.getLogger("omfields")

PRESETS = {
    "spectrum": ("delta", ("t_pu_sq", "t_fl_sq", "theta")),
    "sidebands": ("omega_q", ("t_u_sq", "t_l_sq")),
    "delay": ("delta", ("t_pu_sq", "theta", "tau_g")),
}
COMMANDS = ("spectrum", "sidebands", "delay", "fwm-null", "probe-null", "oracle", "sweep")


class AllPointsFailed(NumericalError):
    def __init__(self, text: str, tags: list[str]):
        super().__init__("every grid point failed: " + ", ".join(tags))
        self.text = text


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file (bundled names are found too)")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration key; repeatable")
    common.add_argument("--out", help="write the result here (plus <out>.manifest.json)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    common.add_argument("--long-run", action="store_true",
                        help="oracle: keep the experimental gamma_m instead of desk scaling")

    parser = _Parser(prog="omfields", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--replay", metavar="MANIFEST",
                        help="re-run a manifest and compare the output digest")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    helps = {
        "spectrum": "|t_pu|^2, |t_fl|^2 and theta versus delta",
        "sidebands": "|t_u|^2, |t_l|^2 versus omega_q or G",
        "delay": "group delay versus delta, eta, phi or G",
        "fwm-null": "pump amplitude and phase that cancel the FWM-frequency output",
        "probe-null": "pump amplitude and phase that cancel the probe-frequency output",
        "oracle": "time-domain cross-check of the frequency-domain coefficients",
        "sweep": "generic grid over any axes and observables",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def _default_axis(cfg: config.RunConfig, name: str) -> Axis:
    p = cfg.params
    return Axis.linear(name, p.omega_m - 20 * p.gamma_m, p.omega_m + 20 * p.gamma_m, 2001)


def _preset_sweep(cfg: config.RunConfig, command: str, threads: int) -> SweepResult:
    axis, observables = PRESETS[command]
    axes = cfg.axes or (_default_axis(cfg, axis),)
    return run_sweep(cfg.sweep(axes, observables), workers=threads)


def _null_table(cfg: config.RunConfig, command: str) -> SweepResult:
    p, d, G = cfg.params, cfg.drive, cfg.G
    if command == "fwm-null":
        eta, phi = fwm_null(p, G, d.Delta, d.delta)
        f = resonant_fields(p, G, d.Delta, d.delta, eta, phi)
        cols = ("eta", "phi", "t_fl_sq", "t_f_sq")
        row = (eta, phi, abs(f.t_fl) ** 2, abs(f.t_f) ** 2)
    else:
        eta, phi = probe_null(p, G, d.Delta, d.delta)
        f = resonant_fields(p, G, d.Delta, d.delta, eta, phi)
        bright = resonant_fields(p, G, d.Delta, d.delta, eta, phi - math.pi)
        cols = ("eta", "phi", "t_pu_sq", "t_p_sq", "t_pu_sq_constructive")
        row = (eta, phi, abs(f.t_pu) ** 2, abs(f.t_p) ** 2, abs(bright.t_pu) ** 2)
    return SweepResult(cols, [row])


def _oracle_table(cfg: config.RunConfig, long_run: bool) -> SweepResult:
    from omfields.oracle import cross_check

    p = cfg.params if long_run else replace(cfg.params, gamma_m=1e-3 * cfg.params.omega_m)
    d = cfg.drive
    omega_q = d.omega_q
    if omega_q == d.delta:
        omega_q = 0.99 * d.delta
        log.info("oracle: omega_q moved to 0.99 delta so probe and pump tones separate")
    check = cross_check(
        p, abs(cfg.G), d.Delta, d.delta, omega_q,
        ratio=cfg.get("oracle_ratio", 1e-3),
        steps_per_period=cfg.get("oracle_steps_per_period", 128),
        scheme=cfg.get("oracle_scheme", "rk4"),
    )
    cols = ("tone", "frequency", "oracle_re", "oracle_im", "solver_re", "solver_im",
            "rel_dev", "residual_power")
    rows = [(c.name, c.frequency, c.oracle.real, c.oracle.imag, c.solver.real, c.solver.imag,
             c.rel_dev, check.residual_power) for c in check.tones]
    return SweepResult(cols, rows)


def execute(command: str, cfg: config.RunConfig, fmt: str, threads: int = 1,
            long_run: bool = False) -> str:
    """Run one subcommand and return the rendered output."""
    if command in PRESETS:
        table = _preset_sweep(cfg, command, threads)
    elif command == "sweep":
        if not cfg.axes:
            raise ValidationError("sweep needs 'axes' in the configuration")
        if not cfg.observables:
            raise ValidationError("sweep needs 'observables' in the configuration")
        table = run_sweep(cfg.sweep(), workers=threads)
    elif command in ("fwm-null", "probe-null"):
        table = _null_table(cfg, command)
    elif command == "oracle":
        table = _oracle_table(cfg, long_run)
    else:
        raise ValidationError(f"unknown command {command!r}")
    if "error" in table.columns:
        tags = {row[-1] for row in table.rows}
        if tags and "" not in tags:
            # nothing evaluated; report as a numerical failure after writing the table
            raise AllPointsFailed(table.to_csv() if fmt == "csv" else table.to_json(), sorted(tags))
    return table.to_csv() if fmt == "csv" else table.to_json()


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def manifest(command: str, cfg: config.RunConfig, fmt: str, long_run: bool, output: str) -> dict:
    entries = {k: cfg.entries[k] for k in sorted(cfg.entries)}
    canonical = json.dumps(entries, sort_keys=True)
    return {
        "tool": "omfields",
        "version": __version__,
        "subcommand": command,
        "format": fmt,
        "long_run": long_run,
        "config": entries,
        "config_digest": _digest(canonical),
        "output_digest": _digest(output),
    }


def _emit(text: str, out: Optional[str], meta: dict):
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).write_text(text, encoding="utf-8")
    Path(out + ".manifest.json").write_text(json.dumps(meta, indent=1) + "\n", encoding="utf-8")


def _replay(path: str, out: Optional[str], threads: int) -> int:
    meta = json.loads(Path(path).read_text(encoding="utf-8"))
    cfg = config.build(config.entries_from_mapping(meta["config"], path))
    text = execute(meta["subcommand"], cfg, meta["format"], threads, meta.get("long_run", False))
    if out is not None:
        _emit(text, out, manifest(meta["subcommand"], cfg, meta["format"], meta.get("long_run", False), text))
    digest = _digest(text)
    if digest != meta["output_digest"]:
        print(f"replay mismatch: {digest} != {meta['output_digest']}", file=sys.stderr)
        return 1
    print(f"replay ok {digest}")
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = _parser().parse_args(argv)
    try:
        if args.replay:
            return _replay(args.replay, getattr(args, "out", None), getattr(args, "threads", 1))
        if args.command is None:
            _parser().print_usage(sys.stderr)
            return 1
        cfg = config.load(args.config, args.set)
        try:
            text = execute(args.command, cfg, args.format, args.threads, args.long_run)
        except AllPointsFailed as failed:
            _emit(failed.text, args.out, manifest(args.command, cfg, args.format, args.long_run, failed.text))
            raise
        _emit(text, args.out, manifest(args.command, cfg, args.format, args.long_run, text))
        return 0
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
