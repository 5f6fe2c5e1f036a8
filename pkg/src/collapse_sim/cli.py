"""Command line entry point: ``collapse-sim run <experiment>`` and ``collapse-sim verify``."""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from pathlib import Path

from .errors import CollapseSimError, ParameterError, UnsupportedRegimeError
from .scenarios import (Artifact, ConfigError, UnknownExperimentError, load_config,
                        resolve_scenario, run_scenario)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_UNKNOWN_EXPERIMENT = 3
EXIT_INVALID_CONFIG = 4
EXIT_UNSUPPORTED_REGIME = 5
EXIT_VERIFY_FAILED = 6

DEFAULT_OUT = "collapse_sim_out"

# acceptance thresholds applied to the oracle suite report
ABS_TOL_COEFF = 1e-8
REL_TOL_WRONSKIAN = 1e-10
REL_TOL_QUADRATURE = 1e-3
TOL_CONVOLUTION = 1e-8
ORDER_RANGE = (1.8, 2.2)


def _out_dir(arg: str | None) -> Path:
    return Path(arg or os.environ.get("COLLAPSE_SIM_OUT") or DEFAULT_OUT)


def write_atomic(path: Path, data: bytes) -> None:
    """Write via a temp file in the same directory, then rename over ``path``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(out: Path, artifact: Artifact) -> None:
    path = out / artifact.filename
    write_atomic(path, artifact.content)
    digest = hashlib.sha256(artifact.content).hexdigest()
    print(f"{path} rows={artifact.rows} sha256={digest}")


def _parse_overrides(items) -> dict:
    overrides = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--param expects KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value.strip()
    return overrides


def _cmd_run(args) -> int:
    user = None
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        user = load_config(text)
    scenario = resolve_scenario(args.experiment, user, _parse_overrides(args.param))
    if args.parallel < 1:
        raise ConfigError("--parallel must be >= 1")
    artifacts = run_scenario(scenario, workers=args.parallel)
    out = _out_dir(args.out)
    for artifact in artifacts:
        _emit(out, artifact)
    return EXIT_OK


def verify_checks(report: dict) -> dict:
    """Compare an oracle suite report against the acceptance limits."""
    checks = {
        "coefficients": max(report["coefficients"].values()) <= ABS_TOL_COEFF,
        "bath_coefficients": max(report["bath_coefficients"].values()) <= ABS_TOL_COEFF,
        "wronskian": report["wronskian_max_rel_error"] <= REL_TOL_WRONSKIAN,
        "brownian_sum_vs_quadrature":
            report["brownian_sum_vs_quadrature"]["rel_error"] <= REL_TOL_QUADRATURE,
        "convolution": report["convolution_linf"] <= TOL_CONVOLUTION,
    }
    asym = report["asymptote_vs_quadrature"]
    if "rel_error" in asym:
        checks["asymptote_vs_quadrature"] = asym["rel_error"] <= REL_TOL_QUADRATURE
    lo, hi = ORDER_RANGE
    for case, levels in report["schrodinger_residual"].items():
        checks[f"residual_order[{case}]"] = all(
            lo <= r["order_estimate"] <= hi for r in levels)
    return checks


def _cmd_verify(args) -> int:
    from .verify import run_oracle_suite

    report = run_oracle_suite()
    checks = verify_checks(report)
    report = {"checks": checks, "passed": all(checks.values()), "report": report}
    data = (json.dumps(report, indent=2, sort_keys=True) + "\n").encode("ascii")
    _emit(_out_dir(args.out), Artifact("verify_report.json", data, 1))
    return EXIT_OK if report["passed"] else EXIT_VERIFY_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="collapse-sim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a named experiment and write its artifacts")
    run.add_argument("experiment", help="fig1, fig2a, fig2b, fig3, widths, bath-convergence, bell")
    run.add_argument("--config", help="TOML file with [defaults] and [scenario.<name>] tables")
    run.add_argument("--out", help="output directory (default: $COLLAPSE_SIM_OUT or ./collapse_sim_out)")
    run.add_argument("--param", action="append", metavar="K=V",
                     help="override a scenario key, e.g. --param eta=0 (repeatable)")
    run.add_argument("--parallel", type=int, default=1, metavar="N",
                     help="threads for grid evaluation")
    run.set_defaults(func=_cmd_run)

    ver = sub.add_parser("verify", help="run the oracle suite and write verify_report.json")
    ver.add_argument("--out", help="output directory")
    ver.set_defaults(func=_cmd_verify)
    return parser


def _fail(code: int, kind: str, message: str) -> int:
    print(json.dumps({"error": kind, "message": message, "exit_code": code}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UnknownExperimentError as exc:
        return _fail(EXIT_UNKNOWN_EXPERIMENT, "unknown_experiment",
                     f"unknown experiment {exc.args[0]!r}")
    except UnsupportedRegimeError as exc:
        return _fail(EXIT_UNSUPPORTED_REGIME, "unsupported_regime", str(exc))
    except (ConfigError, ParameterError) as exc:
        return _fail(EXIT_INVALID_CONFIG, "invalid_config", str(exc))
    except (CollapseSimError, OSError) as exc:
        return _fail(EXIT_FAILURE, type(exc).__name__, str(exc))


if __name__ == "__main__":
    sys.exit(main())
