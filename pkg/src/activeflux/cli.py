"""``afl`` command line tool.

Subcommands::

    afl run          one advection experiment
    afl spectra      eigenvalue sweeps (dissipation / dispersion curves)
    afl convergence  grid refinement study
    afl verify       full verification battery

Exit codes: 0 success, 1 configuration error, 2 solver blow-up,
3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
import warnings
from dataclasses import fields
from pathlib import Path
from typing import Sequence

import numpy as np

from activeflux import experiments, plotting, spectral, verification
from activeflux.families import family_text, parse_family
from activeflux.scheme import SolverBlowUp

EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP, EXIT_VERIFY = 0, 1, 2, 3
DEFAULT_SPECTRA_FAMILIES = ("superduper", "method3:R=2", "method3:R=3", "method3:R=4")
DEFAULT_SPECTRA_NU = (0.1, 0.3, 0.5, 0.7, 0.9)


class ConfigError(ValueError):
    def __init__(self, key: str, message: str) -> None:
        self.key = key
        super().__init__(f"{key}: {message}")


def output_root() -> Path:
    return Path(os.environ.get("AFL_OUTPUT_DIR", "afl-output"))


def read_config_file(path: Path | str) -> dict[str, str]:
    """Flat ``key = value`` pairs; ``#`` starts a comment; keys may use ``-`` or ``_``."""
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError("config", f"line {lineno} is not key=value: {raw!r}")
        values[key.strip().replace("-", "_").lower()] = value.strip()
    return values


_BOOL = {"1": True, "true": True, "yes": True, "on": True, "0": False, "false": False, "no": False, "off": False}


def _convert(key: str, raw, kind):
    if raw is None or isinstance(raw, kind) and not isinstance(raw, str):
        return raw
    text = str(raw).strip()
    try:
        if kind is bool:
            return _BOOL[text.lower()]
        if kind is int:
            value = float(text)
            if not value.is_integer():
                raise ValueError
            return int(value)
        if kind is float:
            value = float(text)
            if not math.isfinite(value):
                raise ValueError
            return value
        if kind is Path:
            return Path(text)
    except (KeyError, ValueError):
        raise ConfigError(key, f"invalid value {text!r}") from None
    return text


_KINDS = {"nu": float, "a": float, "x_min": float, "x_max": float, "n_cells": int,
          "t_final": float, "family": str, "ic": str, "outputs": Path, "emit_svg": bool}


def build_config(file_values: dict[str, str], flag_values: dict[str, object]) -> experiments.ExperimentConfig:
    """Merge defaults, file values and flags (later wins) and validate every field."""
    known = {f.name for f in fields(experiments.ExperimentConfig)}
    merged: dict[str, object] = {}
    for key, value in file_values.items():
        if key not in known:
            raise ConfigError(key, "unknown configuration key")
        merged[key] = value
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    if "nu" not in merged:
        raise ConfigError("nu", "missing required setting (use --nu or a config file)")
    converted = {k: _convert(k, v, _KINDS[k]) for k, v in merged.items()}
    config = experiments.ExperimentConfig(**converted)
    validate_config(config)
    return config


def validate_config(config: experiments.ExperimentConfig) -> None:
    if not 0 < config.nu <= 1:
        raise ConfigError("nu", f"must lie in (0, 1], got {config.nu}")
    if not config.a > 0:
        raise ConfigError("a", "advection speed must be positive")
    if not config.x_max > config.x_min:
        raise ConfigError("x_max", "must exceed x_min")
    if config.n_cells < 2:
        raise ConfigError("n_cells", "need at least 2 cells")
    if config.t_final < 0:
        raise ConfigError("t_final", "must be nonnegative")
    try:
        parse_family(config.family)
    except ValueError as exc:
        raise ConfigError("family", str(exc)) from None
    try:
        ic = experiments.parse_ic(config.ic)
    except ValueError as exc:
        raise ConfigError("ic", str(exc)) from None
    if isinstance(ic, experiments.SineWave) and 2 * ic.mode > config.n_cells:
        raise ConfigError("ic", f"sine mode {ic.mode} not resolvable on {config.n_cells} cells")


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9.]+", "_", text).strip("_")


def _float_list(key: str, text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(key, f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise ConfigError(key, "empty list")
    return values


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="key=value configuration file")
    p.add_argument("--family", help="family text form, e.g. method3:R=4")
    p.add_argument("--nu", help="Courant number in (0, 1]")
    p.add_argument("--a", help="advection speed (> 0)")
    p.add_argument("--x-min", dest="x_min")
    p.add_argument("--x-max", dest="x_max")
    p.add_argument("--n-cells", "--cells", dest="n_cells")
    p.add_argument("--t-final", "--tfinal", dest="t_final")
    p.add_argument("--ic", help="sine:m=10, square, shapes")
    p.add_argument("--outputs", "--output", dest="outputs", help="output directory")
    p.add_argument("--emit-svg", "--svg", dest="emit_svg", action="store_const", const=True)


def cmd_run(args: argparse.Namespace) -> int:
    file_values = read_config_file(args.config) if args.config else {}
    flags = {k: getattr(args, k) for k in _KINDS}
    config = build_config(file_values, flags)
    if config.outputs is None:
        config.outputs = output_root()
    try:
        result = experiments.run_experiment(config)
    except SolverBlowUp as exc:
        print(f"error: solver blew up at step {exc.step_index}", file=sys.stderr)
        return EXIT_BLOWUP
    summary = result.summary()
    retention = "" if result.retention is None else f" retention={result.retention:.6g}"
    print(f"{summary['family']}: nu={config.nu:g} steps={result.n_steps} T={result.t_real:.17g} "
          f"L2(avg)={result.norms.avg_l2:.6e}{retention}")
    for path in result.files:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_spectra(args: argparse.Namespace) -> int:
    families = args.family or list(DEFAULT_SPECTRA_FAMILIES)
    specs = []
    for text in families:
        try:
            specs.append(parse_family(text))
        except ValueError as exc:
            raise ConfigError("family", str(exc)) from None
    nus = _float_list("nu", args.nu) if args.nu else list(DEFAULT_SPECTRA_NU)
    for nu in nus:
        if not 0 < nu <= 1:
            raise ConfigError("nu", f"must lie in (0, 1], got {nu}")
    samples = _convert("theta_samples", args.theta_samples, int)
    if samples < 1:
        raise ConfigError("theta_samples", "need at least one sample")
    outdir = Path(args.outputs) if args.outputs else output_root()
    outdir.mkdir(parents=True, exist_ok=True)

    thetas = spectral.default_thetas(samples)
    sweeps: dict[tuple[int, int], dict] = {}
    for i, spec in enumerate(specs):
        for j, nu in enumerate(nus):
            sweep = spectral.spectral_sweep(spec, nu, thetas)
            sweeps[i, j] = sweep
            path = outdir / f"spectra_{_slug(family_text(spec))}_nu{nu:g}.csv"
            spectral.write_sweep_csv(path, [sweep])
            print(f"wrote {path}")
    if args.emit_svg:
        dissipation, dispersion = [], []
        for j, nu in enumerate(nus):
            d_series, w_series = [], []
            for i, spec in enumerate(specs):
                label = family_text(spec)
                sw = sweeps[i, j]
                d_series.append((f"{label} principal", sw["theta"], sw["e1_principal"]))
                d_series.append((f"{label} spurious", sw["theta"], sw["e1_spurious"]))
                w_series.append((label, sw["theta"], sw["e2_principal"]))
            dissipation.append((f"nu = {nu:g}", d_series))
            dispersion.append((f"nu = {nu:g}", w_series))
        plotting.write_panels(outdir / "dissipation.svg", dissipation, "theta", "relative amplitude")
        plotting.write_panels(outdir / "dispersion.svg", dispersion, "theta", "relative wave speed")
        print(f"wrote {outdir / 'dissipation.svg'} and {outdir / 'dispersion.svg'}")
    return EXIT_OK


EOC_BAND = (2.8, 3.2)


def convergence_verdict(rows: Sequence[experiments.ConvergenceRow], smooth: bool) -> tuple[str, bool]:
    """One-line verdict on the finest-pair L2 EOC of the averages against third order."""
    if all(r.errors.avg_linf <= 1e-11 and r.errors.pt_linf <= 1e-11 for r in rows):
        return "EXACT: errors at machine precision on every grid", True
    eoc = rows[-1].headline_eoc if len(rows) > 1 else None
    if eoc is None:
        return "UNVALIDATED: need at least two grids for an EOC", True
    if not smooth:
        return f"UNVALIDATED: EOC={eoc:.4f} on non-smooth data", True
    lo, hi = EOC_BAND
    if lo <= eoc <= hi:
        return f"PASS: EOC={eoc:.4f} within [{lo}, {hi}] (expected order 3)", True
    return f"FAIL: EOC={eoc:.4f} outside [{lo}, {hi}] (expected order 3)", False


def cmd_convergence(args: argparse.Namespace) -> int:
    try:
        spec = parse_family(args.family)
    except ValueError as exc:
        raise ConfigError("family", str(exc)) from None
    if args.nu is None:
        raise ConfigError("nu", "missing required setting")
    nu = _convert("nu", args.nu, float)
    if not 0 < nu <= 1:
        raise ConfigError("nu", f"must lie in (0, 1], got {nu}")
    cells = [int(c) for c in _float_list("cells", args.cells)]
    try:
        ic = experiments.parse_ic(args.ic)
    except ValueError as exc:
        raise ConfigError("ic", str(exc)) from None
    a = _convert("a", args.a, float)
    t_final = _convert("t_final", args.t_final, float)
    outdir = Path(args.outputs) if args.outputs else output_root()
    outdir.mkdir(parents=True, exist_ok=True)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", experiments.NonSmoothDataWarning)
        try:
            rows = experiments.convergence_study(
                ic, spec, nu, a, t_final, cells,
                _convert("x_min", args.x_min, float), _convert("x_max", args.x_max, float),
            )
        except SolverBlowUp as exc:
            print(f"error: solver blew up at step {exc.step_index}", file=sys.stderr)
            return EXIT_BLOWUP
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    path = outdir / "convergence.csv"
    experiments.write_convergence_csv(path, rows)
    verdict, ok = convergence_verdict(rows, ic.smooth)
    print(f"wrote {path}")
    print(verdict)
    return EXIT_OK if ok else EXIT_VERIFY


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return _jsonable(value.item())
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def cmd_verify(args: argparse.Namespace) -> int:
    outdir = Path(args.outputs) if args.outputs else output_root()
    outdir.mkdir(parents=True, exist_ok=True)
    results = verification.run_all()
    report = {"passed": all(r.passed for r in results), "checks": [r.to_dict() for r in results]}
    path = outdir / "verify.json"
    path.write_text(json.dumps(_jsonable(report), indent=2) + "\n")
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}")
    print(f"wrote {path}")
    return EXIT_OK if report["passed"] else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="afl", description="Parameterized Active Flux advection toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one advection experiment")
    _add_experiment_flags(run)
    run.set_defaults(handler=cmd_run)

    spectra = sub.add_parser("spectra", help="dissipation/dispersion sweeps")
    spectra.add_argument("--family", action="append", help="family text form (repeatable)")
    spectra.add_argument("--nu", help="comma-separated Courant numbers")
    spectra.add_argument("--theta-samples", default="1024")
    spectra.add_argument("--outputs", "--output", dest="outputs")
    spectra.add_argument("--emit-svg", "--svg", dest="emit_svg", action="store_true")
    spectra.set_defaults(handler=cmd_spectra)

    conv = sub.add_parser("convergence", help="grid refinement study")
    conv.add_argument("--family", default="traditional")
    conv.add_argument("--nu")
    conv.add_argument("--cells", default="50,100,200,400")
    conv.add_argument("--ic", default="sine:m=1")
    conv.add_argument("--a", default="1")
    conv.add_argument("--t-final", "--tfinal", dest="t_final", default="2")
    conv.add_argument("--x-min", dest="x_min", default="-5")
    conv.add_argument("--x-max", dest="x_max", default="5")
    conv.add_argument("--outputs", "--output", dest="outputs")
    conv.set_defaults(handler=cmd_convergence)

    verify = sub.add_parser("verify", help="run the verification battery")
    verify.add_argument("--outputs", "--output", dest="outputs")
    verify.set_defaults(handler=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse usage errors are configuration errors
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
